"""Profile classification of solution traces and the multi-bump machinery.

Everything works with ``w(r) = r^{(n-2)/2} u(r)``, equivalently
``W(t) = w(e^{-t})``. The verdict follows the liminf/limsup table:

    removable  liminf 0    limsup 0
    (CGS)      liminf > 0  limsup < ∞
    (MB)       liminf 0    0 < limsup < ∞
    (ND)       liminf ∞    limsup ∞
"""

from __future__ import annotations

import csv
import enum
import io
import math
import warnings
from dataclasses import dataclass, field

import numpy as np

from .dynamics import homoclinic_derivative, homoclinic_profile, bubble_profile
from .errors import DomainError, RadiusUnderflow, RegimeError, TooFewSamples
from .params import ProblemParams, mb_recurrence_constant, nd_profile, regime_of

__all__ = [
    "TraceSource",
    "WTrace",
    "CriticalRadii",
    "MBFit",
    "ProfileTag",
    "ProfileClass",
    "ClassifyTolerances",
    "BubbleSum",
    "w_trace",
    "trace_from_ru",
    "read_trace_csv",
    "write_trace_csv",
    "convexity_threshold",
    "critical_radii",
    "classify",
    "mb_generate",
    "mb_fit",
    "bubble_sum",
    "two_bubble_window",
]


class TraceSource(enum.Enum):
    FROM_TRAJECTORY = "FromTrajectory"
    FROM_CLOSED_FORM = "FromClosedForm"
    EXTERNAL = "External"


@dataclass(frozen=True, eq=False)
class WTrace:
    """Samples ``(r, w)`` ordered with ``r`` strictly decreasing toward 0."""

    params: ProblemParams
    r: np.ndarray
    w: np.ndarray
    source: TraceSource = TraceSource.EXTERNAL

    def __post_init__(self):
        r = np.asarray(self.r, dtype=float)
        w = np.asarray(self.w, dtype=float)
        if r.shape != w.shape or r.ndim != 1:
            raise DomainError(("r, w", "equal-length 1-d arrays"))
        if np.any(r <= 0) or np.any(np.diff(r) >= 0):
            raise DomainError(("r", "positive and strictly decreasing"))
        if np.any(w < 0) or not np.all(np.isfinite(w)):
            raise DomainError(("w", "finite and >= 0"))
        object.__setattr__(self, "r", r)
        object.__setattr__(self, "w", w)

    @property
    def t(self) -> np.ndarray:
        return -np.log(self.r)


def w_trace(params: ProblemParams, source, r_grid) -> WTrace:
    """Sample ``w(r) = v(-ln r)`` of a trajectory, profile or bubble sum on ``r_grid``."""
    r = np.sort(np.asarray(r_grid, dtype=float))[::-1]
    v, _ = source.ef_state(-np.log(r))
    from .dynamics import Trajectory

    kind = TraceSource.FROM_TRAJECTORY if isinstance(source, Trajectory) else TraceSource.FROM_CLOSED_FORM
    return WTrace(params, r, np.asarray(v, dtype=float), kind)


def trace_from_ru(params: ProblemParams, r, u) -> WTrace:
    r = np.asarray(r, dtype=float)
    u = np.asarray(u, dtype=float)
    return WTrace(params, r, r ** params.table.half * u, TraceSource.EXTERNAL)


def read_trace_csv(params: ProblemParams, path_or_text) -> WTrace:
    """Read a two-column ``r,u`` CSV (header required, ``r`` strictly decreasing)."""
    if isinstance(path_or_text, str) and "\n" in path_or_text:
        handle = io.StringIO(path_or_text)
        rows = list(csv.reader(handle))
    else:
        with open(path_or_text, newline="") as handle:
            rows = list(csv.reader(handle))
    if not rows or [c.strip() for c in rows[0]] != ["r", "u"]:
        raise DomainError(("header", "first line must be exactly 'r,u'"))
    data = [row for row in rows[1:] if row]
    if any(len(row) != 2 for row in data):
        raise DomainError(("rows", "exactly two columns"))
    arr = np.array(data, dtype=float).reshape(-1, 2)
    return trace_from_ru(params, arr[:, 0], arr[:, 1])


def write_trace_csv(path, header, columns):
    """Write columns with a mandatory header row, LF endings, 17 significant digits."""
    with open(path, "w", newline="") as handle:
        handle.write(",".join(header) + "\n")
        for row in zip(*columns):
            handle.write(",".join(format(float(x), ".17g") for x in row) + "\n")


def convexity_threshold(params: ProblemParams, harnack: float = 1.0) -> float:
    """Level ``ε0`` below which critical points of ``w`` are strict minima.

    ``harnack`` is the Harnack constant ``C1``; it equals 1 for radial data.
    """
    tab = params.table
    r = tab.two_star_s
    return ((params.n - 2.0) ** 2 / (8.0 * harnack ** (r - 1.0))) ** (1.0 / (r - 2.0))


@dataclass(frozen=True)
class CriticalRadii:
    maxima: list
    minima: list
    w_at_max: list
    w_at_min: list
    minima_below_eps0: list


def _refine(t3, w3):
    """Vertex of the parabola through three points (in ``t``); falls back to the middle sample."""
    (t0, t1, t2), (w0, w1, w2) = t3, w3
    d0, d2 = t1 - t0, t2 - t1
    denom = d0 * d2 * (d0 + d2)
    a = ((w2 - w1) * d0 - (w1 - w0) * d2) / denom
    b = ((w2 - w1) * d0 * d0 + (w1 - w0) * d2 * d2) / denom
    if a == 0 or not math.isfinite(a):
        return t1, w1
    x = -b / (2 * a)  # offset from t1
    if not -d0 <= x <= d2:
        return t1, w1
    return t1 + x, w1 + b * x + a * x * x


def critical_radii(trace: WTrace, eps0: float) -> CriticalRadii:
    """Local maxima ``r_k`` and minima ``τ_k`` of ``w`` along the trace.

    Extrema come from sign changes of the discrete derivative, refined by a
    local quadratic in ``t = -ln r``. Consecutive extrema of the same kind
    (possible on noisy external data) are merged keeping the more extreme
    one, so maxima and minima strictly interleave.
    """
    if len(trace.r) < 3:
        raise TooFewSamples("need at least 3 samples to locate critical points")
    t, w = trace.t, trace.w
    dw = np.diff(w)
    sign = np.sign(dw)
    idx = np.nonzero(sign)[0]
    extrema = []  # (kind, t, w); kind +1 max, -1 min
    for i, j in zip(idx[:-1], idx[1:]):
        if sign[i] != sign[j]:
            k = j  # sample index where the slope flips
            kind = 1 if sign[i] > 0 else -1
            tk, wk = _refine(t[k - 1:k + 2], w[k - 1:k + 2])
            if extrema and extrema[-1][0] == kind:
                prev = extrema[-1]
                if (kind > 0 and wk > prev[2]) or (kind < 0 and wk < prev[2]):
                    extrema[-1] = (kind, tk, wk)
                continue
            extrema.append((kind, tk, wk))
    maxima = [(math.exp(-tk), wk) for kind, tk, wk in extrema if kind > 0]
    minima = [(math.exp(-tk), wk) for kind, tk, wk in extrema if kind < 0]
    return CriticalRadii(
        maxima=[m[0] for m in maxima],
        minima=[m[0] for m in minima],
        w_at_max=[m[1] for m in maxima],
        w_at_min=[m[1] for m in minima],
        minima_below_eps0=[m[1] <= eps0 for m in minima],
    )


class ProfileTag(enum.Enum):
    REMOVABLE = "Removable"
    CGS = "CGS"
    MB = "MB"
    ND = "ND"
    UNDETERMINED = "Undetermined"


@dataclass(frozen=True)
class ProfileClass:
    tag: ProfileTag
    liminf_est: float
    limsup_est: float
    nd_limit_est: float | None = None
    windows: int = 0
    radii: CriticalRadii | None = None
    note: str = ""


@dataclass(frozen=True)
class ClassifyTolerances:
    r_tail: float = 1e-6
    windows: int = 5  # completed oscillation windows used for liminf/limsup
    stability: float = 0.10  # allowed relative spread between windows
    zero_frac: float = 1e-2  # w below zero_frac * ε0 counts as 0
    nd_rel_tol: float = 1e-6
    nd_trigger: float = 10.0  # multiples of v_bar that switch on the (ND) test
    nd_tail_samples: int = 5


def classify(params: ProblemParams, trace: WTrace, tolerances: ClassifyTolerances | None = None) -> ProfileClass:
    """Verdict Removable / CGS / MB / ND / Undetermined for a ``w`` trace."""
    tol = tolerances or ClassifyTolerances()
    if len(trace.r) < 3:
        raise TooFewSamples("need at least 3 samples")
    if trace.r[-1] > tol.r_tail:
        raise TooFewSamples(f"trace stops at r={trace.r[-1]:.3g}, needs r <= {tol.r_tail:.3g}")
    tab = params.table
    eps0 = convexity_threshold(params)
    zero = tol.zero_frac * eps0
    w = trace.w

    # (ND) first: oscillation analysis means nothing on a diverging trace.
    if w[-1] > tol.nd_trigger * tab.v_bar:
        reg = regime_of(params)
        if not reg.nd_admissible or params.mu == 0:
            return ProfileClass(ProfileTag.UNDETERMINED, math.inf, math.inf,
                                note="w diverges outside the (ND) band")
        nd = nd_profile(params)
        k = min(tol.nd_tail_samples, len(w))
        rt, wt = trace.r[-k:], w[-k:]
        est = wt * rt ** (nd.p_nd - tab.half)
        spread = np.max(np.abs(est / nd.coeff - 1.0))
        limit = float(est[-1])
        if spread <= tol.nd_rel_tol:
            return ProfileClass(ProfileTag.ND, math.inf, math.inf, nd_limit_est=limit)
        return ProfileClass(ProfileTag.UNDETERMINED, math.inf, math.inf, nd_limit_est=limit,
                            note="w diverges but r^p_nd u does not match the (ND) limit")

    radii = critical_radii(trace, eps0)
    # Windows between consecutive minima, deepest last.
    n_windows = 0
    maxima_in = []
    mins = radii.minima
    for lo_r, hi_r in zip(mins[1:], mins[:-1]):
        inside = [wm for rm, wm in zip(radii.maxima, radii.w_at_max) if lo_r < rm < hi_r]
        if inside:
            n_windows += 1
            maxima_in.append(max(inside))
    if n_windows >= tol.windows:
        tops = np.asarray(maxima_in[-tol.windows:])
        bottoms = np.asarray(radii.w_at_min[-(tol.windows + 1):])
        limsup = float(np.mean(tops))
        if (tops.max() - tops.min()) > tol.stability * limsup:
            return ProfileClass(ProfileTag.UNDETERMINED, float(bottoms.min()), limsup,
                                windows=n_windows, radii=radii, note="window maxima unstable")
        if limsup <= zero:
            return ProfileClass(ProfileTag.REMOVABLE, 0.0, 0.0, windows=n_windows, radii=radii)
        low = float(bottoms[-1])
        if low <= zero and np.all(np.diff(bottoms) <= 0):
            return ProfileClass(ProfileTag.MB, low, limsup, windows=n_windows, radii=radii)
        liminf = float(np.mean(bottoms))
        if liminf > zero and (bottoms.max() - bottoms.min()) <= tol.stability * liminf:
            return ProfileClass(ProfileTag.CGS, liminf, limsup, windows=n_windows, radii=radii)
        return ProfileClass(ProfileTag.UNDETERMINED, float(bottoms.min()), limsup,
                            windows=n_windows, radii=radii, note="window minima neither stable nor vanishing")

    # Too few oscillations: only a monotone decay to zero is conclusive.
    k = min(tol.windows, len(w) - 1)
    tail = w[-(k + 1):]
    bumps = sum(1 for wm in radii.w_at_max if wm > zero)
    if w[-1] <= zero and np.all(np.diff(tail) <= 0) and bumps <= 1:
        return ProfileClass(ProfileTag.REMOVABLE, float(w[-1]), float(w[-1]), windows=n_windows, radii=radii)
    return ProfileClass(ProfileTag.UNDETERMINED, float(w.min()), float(w.max()),
                        windows=n_windows, radii=radii, note="fewer oscillation windows than required")


# --- multi-bump construction ---------------------------------------------------------


def mb_generate(params: ProblemParams, r0: float, count: int) -> list:
    """Radii ``r_{k+1} = K r_k^{1/(q-(2*-2))}`` starting from ``r0``.

    The list is truncated, with a :class:`RadiusUnderflow` warning, once a
    radius would drop below ``1e-300``.
    """
    if not 0.0 < r0 < 1.0:
        raise DomainError(("r0", "0 < r0 < 1"))
    if count < 2:
        raise DomainError(("count", "count >= 2"))
    K, beta = mb_recurrence_constant(params)
    radii = [float(r0)]
    log_k = math.log(K)
    while len(radii) < count:
        log_next = log_k + beta * math.log(radii[-1])
        if log_next < math.log(1e-300):
            warnings.warn(f"radius sequence truncated at {len(radii)} terms", RadiusUnderflow, stacklevel=2)
            break
        radii.append(math.exp(log_next))
    return radii


@dataclass(frozen=True)
class MBFit:
    beta_hat: float
    K_hat: float
    beta_expected: float
    K_expected: float
    tau_check: list = field(default_factory=list)

    @property
    def beta_deviation(self) -> float:
        return self.beta_hat - self.beta_expected

    @property
    def K_deviation(self) -> float:
        return self.K_hat - self.K_expected


def mb_fit(params: ProblemParams, radii, minima=None) -> MBFit:
    """Least-squares fit of ``ln r_{k+1} = β ln r_k + ln K``.

    ``minima`` (interleaved ``τ_{k+1}`` between ``r_{k+1}`` and ``r_k``)
    yields ``tau_check = τ_{k+1} / sqrt(r_k r_{k+1})``.
    """
    radii = np.asarray(radii, dtype=float)
    if radii.size < 3:
        raise TooFewSamples("need at least 3 radii to fit the recurrence")
    if np.any(radii <= 0) or np.any(np.diff(radii) >= 0):
        raise DomainError(("radii", "positive and strictly decreasing"))
    x = np.log(radii[:-1])
    y = np.log(radii[1:])
    A = np.column_stack([x, np.ones_like(x)])
    (beta_hat, log_k), *_ = np.linalg.lstsq(A, y, rcond=None)
    K_exp, beta_exp = mb_recurrence_constant(params)
    taus = []
    if minima is not None:
        minima = np.asarray(minima, dtype=float)
        for r_hi, r_lo in zip(radii[:-1], radii[1:]):
            inside = minima[(minima > r_lo) & (minima < r_hi)]
            if inside.size:
                taus.append(float(math.exp(math.log(inside[0]) - 0.5 * (math.log(r_hi) + math.log(r_lo)))))
    return MBFit(float(beta_hat), float(math.exp(log_k)), beta_exp, K_exp, taus)


def bubble_sum(params: ProblemParams, radii, r) -> float:
    """``Σ_k U_{r_k}(r)``, stopping once a term is below ``1e-16`` of the running sum.

    Terms are visited from the bubble nearest ``r`` outward in scale, so the
    truncation only drops contributions that are negligible.
    """
    radii = np.asarray(radii, dtype=float)
    r = float(r)
    if r <= 0:
        raise DomainError(("r", "r > 0"))
    order = np.argsort(np.abs(np.log(radii) - math.log(r)))
    total = 0.0
    for i in order:
        term = float(bubble_profile(params, radii[i], r))
        if total > 0 and term < 1e-16 * total:
            break
        total += term
    return total


def two_bubble_window(params: ProblemParams, radii, r) -> float:
    """``U_{r_{k+1}}(r) + U_{r_k}(r)`` for the pair with ``r_{k+1} <= r < r_k``."""
    radii = np.asarray(radii, dtype=float)
    if radii.size < 2:
        raise TooFewSamples("need two radii")
    k = int(np.searchsorted(-radii, -r, side="right")) - 1
    k = min(max(k, 0), radii.size - 2)
    return float(bubble_profile(params, radii[k], r) + bubble_profile(params, radii[k + 1], r))


@dataclass(frozen=True)
class BubbleSum:
    """Superposition of bubbles as a trace source, evaluated in EF variables.

    ``w(r) = Σ_k v_0(t + ln r_k)`` never forms ``u`` itself, so arbitrarily
    deep radii do not overflow.
    """

    params: ProblemParams
    radii: tuple

    def __post_init__(self):
        object.__setattr__(self, "radii", tuple(float(x) for x in self.radii))

    def ef_state(self, t):
        t = np.asarray(t, dtype=float)
        v = np.zeros_like(t)
        dv = np.zeros_like(t)
        for rk in self.radii:
            tt = t + math.log(rk)
            v = v + homoclinic_profile(self.params, tt)
            dv = dv + homoclinic_derivative(self.params, tt)
        if v.ndim == 0:
            return float(v), float(dv)
        return v, dv

    def radial(self, r):
        r = np.asarray(r, dtype=float)
        v, dv = self.ef_state(-np.log(r))
        a = self.params.table.half
        return v * r ** (-a), -(dv + a * v) * r ** (-a - 1.0)
