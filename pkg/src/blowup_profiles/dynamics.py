"""Emden-Fowler dynamics of radial solutions.

With ``t = -ln r`` and ``v(t) = r^{(n-2)/2} u(r)`` the radial equation becomes

    v'' = ((n-2)^2/4) v - v^{2*(s)-1} + μ e^{-γ t} v^q,     γ = (n-2)(2*-1-q)/2,

which is autonomous when ``μ = 0`` or ``q = 2*-1``. For ``μ = 0`` the level
``K = -(v')^2/2 + (n-2)^2 v^2/8 - v^{2*(s)}/2*(s)`` is conserved; for
``q = 2*-1`` the energy ``E = (v')^2/2 - F(v)`` is.
"""

from __future__ import annotations

import enum
import math
import warnings
from dataclasses import dataclass, field
from functools import lru_cache
from typing import NamedTuple

import numpy as np
from scipy.integrate import solve_ivp

from .errors import DomainError, NumericalError, OutOfSpan, RegimeError
from .numerics import Bracket, QuadSpec, expand_bracket, find_root, integrate_adaptive
from .params import (
    ProblemParams,
    RegimeTag,
    _g_zeros,
    crit_F,
    crit_dF,
    crit_g,
    mu_zero,
    nd_profile,
    regime_of,
)

__all__ = [
    "PhaseState",
    "HaltReason",
    "Trajectory",
    "ProfileKind",
    "ClosedFormProfile",
    "OrbitTag",
    "OrbitClass",
    "CritEquilibria",
    "ef_transform",
    "ef_untransform",
    "vector_field",
    "integrate",
    "hamiltonian",
    "crit_energy",
    "bubble_profile",
    "bubble_derivative",
    "homoclinic_profile",
    "homoclinic_derivative",
    "turning_points",
    "period",
    "periodic_profile",
    "crit_potential",
    "crit_equilibria",
    "crit_classify_orbit",
]


class PhaseState(NamedTuple):
    t: float
    v: float
    dv: float


def ef_transform(params: ProblemParams, r, u, du) -> PhaseState:
    """Radial data ``(r, u, u')`` to Emden-Fowler data ``(t, v, v')``."""
    r = np.asarray(r, dtype=float)
    if np.any(r <= 0):
        raise DomainError(("r", "r > 0"))
    a = params.table.half
    ra = r ** a
    v = ra * u
    dv = -a * v - ra * r * du
    return PhaseState(_scalar(-np.log(r)), _scalar(v), _scalar(dv))


def ef_untransform(params: ProblemParams, state) -> tuple:
    """Inverse of :func:`ef_transform`: returns ``(r, u, u')``."""
    t, v, dv = (np.asarray(x, dtype=float) for x in state)
    a = params.table.half
    r = np.exp(-t)
    u = v * np.exp(a * t)
    du = -(dv + a * v) * np.exp((a + 1.0) * t)
    return _scalar(r), _scalar(u), _scalar(du)


def _scalar(x):
    x = np.asarray(x)
    return float(x) if x.ndim == 0 else x


def _spow(v, e):
    # Odd extension so trial stages just past v = 0 stay finite.
    return np.sign(v) * np.abs(v) ** e


def vector_field(params: ProblemParams, state) -> tuple:
    """``(v', v'')`` at ``state = (t, v, v')``."""
    t, v, dv = state
    tab = params.table
    ddv = tab.half ** 2 * v - _spow(v, tab.two_star_s - 1.0)
    if params.mu != 0.0:
        ddv = ddv + params.mu * np.exp(-tab.gamma * np.asarray(t)) * _spow(v, params.q)
    return dv, _scalar(ddv)


def hamiltonian(params: ProblemParams, state) -> float:
    """Level ``K`` of the unperturbed equation; exact invariant only when ``μ = 0``."""
    _, v, dv = (np.asarray(x, dtype=float) for x in state)
    tab = params.table
    r = tab.two_star_s
    return _scalar(-0.5 * dv ** 2 + 0.5 * tab.half ** 2 * v ** 2 - np.abs(v) ** r / r)


def _require_crit(params):
    if regime_of(params).tag is not RegimeTag.CRITICAL_SOBOLEV:
        raise RegimeError(f"q={params.q} is not the critical Sobolev exponent 2*-1")


def crit_energy(params: ProblemParams, state) -> float:
    """``E = (v')^2/2 - F(v)``, conserved when ``q = 2*-1``."""
    _require_crit(params)
    _, v, dv = (np.asarray(x, dtype=float) for x in state)
    return _scalar(0.5 * dv ** 2 - crit_F(params, v))


def _ef_level(params, t, v, dv):
    """Pohozaev density per unit sphere area, ``P_r/ω`` at ``t = -ln r``."""
    tab = params.table
    out = -0.5 * dv ** 2 + 0.5 * tab.half ** 2 * v ** 2 - np.abs(v) ** tab.two_star_s / tab.two_star_s
    if params.mu != 0.0:
        q = params.q
        out = out + params.mu * np.exp(-tab.gamma * t) * np.abs(v) ** (q + 1.0) / (q + 1.0)
    return out


class HaltReason(enum.Enum):
    SPAN_COMPLETE = "SpanComplete"
    POSITIVITY_LOST = "PositivityLost"
    OVERFLOW = "Overflow"


@dataclass(frozen=True, eq=False)
class Trajectory:
    """Integrated Emden-Fowler orbit with a dense interpolant over its span.

    ``drift`` is the largest deviation along the samples of
    ``P_r/ω + γμ/(q+1) ∫ e^{-γτ} v^{q+1} dτ``, which is exactly conserved
    by the flow; it reduces to the level ``K`` for ``μ = 0`` and to ``-E``
    for ``q = 2*-1``.
    """

    params: ProblemParams
    t: np.ndarray
    v: np.ndarray
    dv: np.ndarray
    halt_reason: HaltReason
    drift: float
    tol: float
    _dense: object = field(repr=False)

    @property
    def samples(self) -> list:
        return [PhaseState(*x) for x in zip(self.t.tolist(), self.v.tolist(), self.dv.tolist())]

    @property
    def t_span(self) -> tuple:
        return float(self.t[0]), float(self.t[-1])

    @property
    def final(self) -> PhaseState:
        return PhaseState(float(self.t[-1]), float(self.v[-1]), float(self.dv[-1]))

    def ef_state(self, t):
        """Interpolated ``(v, v')`` at time(s) ``t`` inside the span."""
        t = np.asarray(t, dtype=float)
        lo, hi = self.t_span
        slack = 1e-12 * max(1.0, abs(lo), abs(hi))
        if np.any(t < lo - slack) or np.any(t > hi + slack):
            raise OutOfSpan(f"t outside trajectory span [{lo}, {hi}]")
        y = self._dense(np.clip(t, lo, hi))
        return _scalar(y[0]), _scalar(y[1])

    def state_at(self, t) -> PhaseState:
        v, dv = self.ef_state(t)
        return PhaseState(t, v, dv)

    def radial(self, r):
        """Reconstructed ``(u, u')`` at radius(es) ``r``."""
        r = np.asarray(r, dtype=float)
        t = -np.log(r)
        v, dv = self.ef_state(t)
        _, u, du = ef_untransform(self.params, (t, v, dv))
        return u, du


def integrate(
    params: ProblemParams,
    state0,
    t_end: float,
    tol: float = 1e-12,
    *,
    atol: float | None = None,
    stride: float | None = None,
    v_ceiling: float = 1e8,
    stop_at_zero: bool = True,
) -> Trajectory:
    """Integrate the Emden-Fowler system forward from ``state0`` to ``t_end``.

    Explicit embedded Runge-Kutta pair of order 8(5,3) with step rejection;
    ``tol`` is the relative local-error target (``atol`` defaults to
    ``tol * 1e-4``). Integration halts early, without raising, when ``v``
    crosses zero or exceeds ``v_ceiling``; the crossing time is located by
    root finding on the dense output. Samples are the accepted steps, or a
    uniform grid when ``stride`` is given.

    ``stop_at_zero=False`` continues through ``v = 0`` with the odd
    extension of the nonlinearities; the invariant stays exact, which is
    useful for drift checks along orbits that leave the saddle at 0.
    """
    t0, v0, dv0 = (float(x) for x in state0)
    if not t_end > t0:
        raise DomainError(("t_end", "t_end > t0"))
    if not v0 > 0:
        raise DomainError(("v", "v > 0 at the initial state"))
    if tol <= 0:
        raise DomainError(("tol", "tol > 0"))
    tab = params.table
    a2 = tab.half ** 2
    r1 = tab.two_star_s - 1.0
    mu, q, gamma = params.mu, params.q, tab.gamma
    augmented = mu != 0.0 and gamma != 0.0

    if mu == 0.0:
        def rhs(t, y):
            v = y[0]
            return [y[1], a2 * v - _spow(v, r1)]
    elif augmented:
        def rhs(t, y):
            v = y[0]
            e = math.exp(-gamma * t)
            return [y[1], a2 * v - _spow(v, r1) + mu * e * _spow(v, q), e * abs(v) ** (q + 1.0)]
    else:
        def rhs(t, y):
            v = y[0]
            return [y[1], a2 * v - _spow(v, r1) + mu * _spow(v, q)]

    def hit_zero(t, y):
        return y[0]

    hit_zero.terminal = True
    hit_zero.direction = -1

    def hit_ceiling(t, y):
        return y[0] - v_ceiling

    hit_ceiling.terminal = True
    hit_ceiling.direction = 1

    y0 = [v0, dv0] + ([0.0] if augmented else [])
    rtol = max(tol, 100 * np.finfo(float).eps + 1e-18)
    atol = tol * 1e-4 if atol is None else atol
    t_eval = None
    if stride is not None:
        if stride <= 0:
            raise DomainError(("stride", "stride > 0"))
        t_eval = np.arange(t0, t_end, stride)
        if t_eval[-1] < t_end:
            t_eval = np.append(t_eval, t_end)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", UserWarning)  # rtol floor notice
        sol = solve_ivp(
            rhs, (t0, t_end), y0, method="DOP853", rtol=rtol, atol=atol,
            events=(hit_zero, hit_ceiling) if stop_at_zero else (hit_ceiling,),
            dense_output=True, t_eval=t_eval,
        )
    if sol.status == -1:
        raise NumericalError(f"integration failed: {sol.message}")

    halt = HaltReason.SPAN_COMPLETE
    ts, ys = sol.t, sol.y
    if sol.status == 1:
        if stop_at_zero and len(sol.t_events[0]):
            halt = HaltReason.POSITIVITY_LOST
            te, ye = sol.t_events[0][0], sol.y_events[0][0]
        else:
            halt = HaltReason.OVERFLOW
            te, ye = sol.t_events[-1][0], sol.y_events[-1][0]
        keep = ts < te
        ts = np.append(ts[keep], te)
        ys = np.concatenate([ys[:, keep], np.asarray(ye).reshape(-1, 1)], axis=1)
        if halt is HaltReason.POSITIVITY_LOST:
            ys[0, -1] = 0.0

    level = _ef_level(params, ts, ys[0], ys[1])
    if augmented:
        level = level + gamma * mu / (q + 1.0) * ys[2]
    drift = float(np.max(np.abs(level - level[0])))
    arrays = []
    for arr in (ts, ys[0], ys[1]):
        arr = np.array(arr, dtype=float)
        arr.flags.writeable = False
        arrays.append(arr)
    return Trajectory(params, *arrays, halt_reason=halt, drift=drift, tol=tol, _dense=sol.sol)


# --- closed forms ---------------------------------------------------------------


def bubble_profile(params: ProblemParams, lam, r):
    """``U_λ(r) = c_{n,s} (λ^{1-s/2} / (λ^{2-s} + r^{2-s}))^{(n-2)/(2-s)}``."""
    s, n = params.s, params.n
    lam = np.asarray(lam, dtype=float)
    r = np.asarray(r, dtype=float)
    e = (n - 2.0) / (2.0 - s)
    return _scalar(params.table.c_ns * (lam ** (1.0 - 0.5 * s) / (lam ** (2.0 - s) + r ** (2.0 - s))) ** e)


def bubble_derivative(params: ProblemParams, lam, r):
    """``dU_λ/dr``."""
    s, n = params.s, params.n
    lam = np.asarray(lam, dtype=float)
    r = np.asarray(r, dtype=float)
    e = (n - 2.0) / (2.0 - s)
    base = lam ** (2.0 - s) + r ** (2.0 - s)
    return _scalar(
        -params.table.c_ns * (n - 2.0) * lam ** (0.5 * (n - 2.0)) * r ** (1.0 - s) * base ** (-e - 1.0)
    )


def homoclinic_profile(params: ProblemParams, t):
    """Zero-level orbit ``v_0``: even, maximal at ``t = 0``, decaying like ``e^{-(n-2)|t|/2}``."""
    s, n = params.s, params.n
    t = np.abs(np.asarray(t, dtype=float))
    b = 0.5 * (2.0 - s)
    # Written in decaying exponentials only, so large |t| cannot overflow.
    return _scalar(
        params.table.c_ns * np.exp(-params.table.half * t)
        * (1.0 + np.exp(-2.0 * b * t)) ** (-(n - 2.0) / (2.0 - s))
    )


def homoclinic_derivative(params: ProblemParams, t):
    t = np.asarray(t, dtype=float)
    b = 0.5 * (2.0 - params.s)
    return _scalar(-params.table.half * np.tanh(b * t) * homoclinic_profile(params, t))


def _limit(params):
    return params if params.mu == 0.0 else params.with_mu(0.0)


def _h0(params, v):
    tab = params.table
    r = tab.two_star_s
    return 0.5 * tab.half ** 2 * v * v - v ** r / r


def _h0_step(params, base, d):
    """``H0(base + d) - H0(base)`` without cancellation for small ``d``."""
    tab = params.table
    r = tab.two_star_s
    return 0.5 * tab.half ** 2 * d * (2.0 * base + d) - base ** r * np.expm1(r * np.log1p(d / base)) / r


def _check_level(params, K):
    K_ns = params.table.K_ns
    if not 0.0 < K < K_ns:
        raise RegimeError(f"level K={K} outside (0, K_ns={K_ns})")


def turning_points(params: ProblemParams, K: float) -> tuple:
    """``(v_min, v_max)`` of the periodic orbit at level ``K``."""
    _check_level(params, K)
    tab = params.table
    r = tab.two_star_s
    v_bar = tab.v_bar
    v_zero = (0.5 * r * tab.half ** 2) ** (1.0 / (r - 2.0))
    f = lambda v: _h0(params, v) - K  # noqa: E731
    tol = 1e-300  # relative accuracy from brent's 4 eps |x| term
    v_min = find_root(f, Bracket.of(f, 0.0, v_bar), tol=tol)
    v_max = find_root(f, Bracket.of(f, v_bar, v_zero), tol=tol)
    return v_min, v_max


def period(params: ProblemParams, K: float, rel_tol: float = 1e-12) -> float:
    """Period of the orbit at level ``K``, ``2 ∫ dv / sqrt(2 (H0(v) - K))`` between the turning points."""
    v_min, v_max = turning_points(params, K)
    # With x = v_min + u^2 (resp. v_max - u^2) the endpoint singularities
    # disappear; the offset u^2 goes to the gap function unrounded, so the
    # integrand stays smooth down to u = 0.
    width = math.sqrt(0.5 * (v_max - v_min))

    def piece(base, sign):
        def integrand(u):
            u = np.asarray(u, dtype=float)
            gap = _h0_step(params, base, sign * u * u)
            return 2.0 * u / np.sqrt(2.0 * np.maximum(gap, 1e-300))

        spec = QuadSpec(0.0, width, abs_tol=1e-300, rel_tol=rel_tol, vectorized=True)
        return integrate_adaptive(integrand, spec)

    return 2.0 * (piece(v_min, 1.0) + piece(v_max, -1.0))


@lru_cache(maxsize=64)
def _vk_orbit(params: ProblemParams, K: float, tol: float):
    limit = _limit(params)
    v_min, _ = turning_points(limit, K)
    T = period(limit, K)
    traj = integrate(limit, (0.0, v_min, 0.0), T * (1.0 + 1e-9), tol=tol, atol=tol * 1e-3)
    return T, traj


def _vk_state(params, K, t, tol=1e-13):
    T, traj = _vk_orbit(_limit(params), float(K), tol)
    tt = np.mod(np.asarray(t, dtype=float), T)
    return traj.ef_state(tt)


def periodic_profile(params: ProblemParams, K: float, t):
    """``v_K(t)``: the periodic orbit at level ``K`` with its minimum at ``t = 0``."""
    _check_level(params, K)
    return _vk_state(params, K, t)[0]


# --- profile objects ---------------------------------------------------------------


class ProfileKind(enum.Enum):
    BUBBLE = "Bubble"
    HOMOCLINIC = "Homoclinic"
    LIMIT_CONSTANT = "LimitConstant"
    PERIODIC_VK = "PeriodicVK"
    ND_POWER = "NDPower"
    CRIT_CONSTANT = "CritConstant"


@dataclass(frozen=True)
class ClosedFormProfile:
    """An explicit solution, evaluable in either variable space.

    The first four kinds solve the unperturbed (``μ = 0``) limit equation;
    ``NDPower`` and ``CritConstant`` involve ``μ``.
    """

    params: ProblemParams
    kind: ProfileKind
    lam: float = 1.0
    K: float | None = None
    phase: float = 0.0

    def __post_init__(self):
        kind = self.kind
        if kind is ProfileKind.BUBBLE and not self.lam > 0:
            raise DomainError(("lambda", "lambda > 0"))
        if kind is ProfileKind.PERIODIC_VK:
            if self.K is None:
                raise DomainError(("K", "required for PeriodicVK"))
            _check_level(self.params, self.K)
        if kind is ProfileKind.ND_POWER:
            nd_profile(self.params)
        if kind is ProfileKind.CRIT_CONSTANT:
            _require_crit(self.params)
            mu0 = mu_zero(self.params)
            if abs(self.params.mu - mu0) > 1e-12 * mu0:
                raise RegimeError(f"CritConstant needs mu = mu0 = {mu0}")

    @classmethod
    def bubble(cls, params, lam=1.0):
        return cls(params, ProfileKind.BUBBLE, lam=lam)

    @classmethod
    def homoclinic(cls, params, phase=0.0):
        return cls(params, ProfileKind.HOMOCLINIC, phase=phase)

    @classmethod
    def limit_constant(cls, params):
        return cls(params, ProfileKind.LIMIT_CONSTANT)

    @classmethod
    def periodic(cls, params, K, phase=0.0):
        return cls(params, ProfileKind.PERIODIC_VK, K=K, phase=phase)

    @classmethod
    def nd_power(cls, params):
        return cls(params, ProfileKind.ND_POWER)

    @classmethod
    def crit_constant(cls, params):
        return cls(params, ProfileKind.CRIT_CONSTANT)

    @property
    def solves_limit_equation(self) -> bool:
        return self.kind in (
            ProfileKind.BUBBLE, ProfileKind.HOMOCLINIC,
            ProfileKind.LIMIT_CONSTANT, ProfileKind.PERIODIC_VK,
        )

    @property
    def equation_params(self) -> ProblemParams:
        """Parameters of the equation this profile actually solves."""
        return _limit(self.params) if self.solves_limit_equation else self.params

    def ef_state(self, t):
        t = np.asarray(t, dtype=float)
        p = self.params
        kind = self.kind
        if kind is ProfileKind.BUBBLE or kind is ProfileKind.HOMOCLINIC:
            shift = math.log(self.lam) if kind is ProfileKind.BUBBLE else -self.phase
            tt = t + shift
            return homoclinic_profile(p, tt), homoclinic_derivative(p, tt)
        if kind is ProfileKind.PERIODIC_VK:
            return _vk_state(p, self.K, t - self.phase)
        if kind is ProfileKind.LIMIT_CONSTANT:
            return _scalar(np.full_like(t, p.table.v_bar)), _scalar(np.zeros_like(t))
        if kind is ProfileKind.CRIT_CONSTANT:
            c = ((2.0 - p.s) / (2.0 * p.mu)) ** ((p.n - 2.0) / (2.0 * p.s))
            return _scalar(np.full_like(t, c)), _scalar(np.zeros_like(t))
        nd = nd_profile(p)
        rate = nd.p_nd - p.table.half
        v = nd.coeff * np.exp(rate * t)
        return _scalar(v), _scalar(rate * v)

    def radial(self, r):
        r = np.asarray(r, dtype=float)
        if self.kind is ProfileKind.BUBBLE:
            return bubble_profile(self.params, self.lam, r), bubble_derivative(self.params, self.lam, r)
        t = -np.log(r)
        v, dv = self.ef_state(t)
        _, u, du = ef_untransform(self.params, (t, v, dv))
        return u, du


# --- critical case q = 2*-1 ------------------------------------------------------------


def crit_potential(params: ProblemParams, v) -> tuple:
    """``(F(v), F'(v), g(v))`` with ``g = F'/v`` and ``g(0) = (n-2)^2/4``."""
    _require_crit(params)
    v = np.asarray(v, dtype=float)
    if np.any(v < 0):
        raise DomainError(("v", "v >= 0"))
    return _scalar(crit_F(params, v)), _scalar(crit_dF(params, v)), _scalar(crit_g(params, v))


class CritEquilibria(NamedTuple):
    v_minus: float
    v_plus: float
    degenerate: bool


def crit_equilibria(params: ProblemParams) -> CritEquilibria:
    """The two positive zeros ``v_- < v_+`` of ``g`` (a double zero at ``μ = μ0``)."""
    _require_crit(params)
    if not params.mu > 0:
        raise RegimeError("critical equilibria need mu > 0")
    return CritEquilibria(*_g_zeros(params))


class OrbitTag(enum.Enum):
    CONSTANT = "Constant"
    PERIODIC = "Periodic"
    HOMOCLINIC_TO_SADDLE = "HomoclinicToSaddle"
    TOUCHES_ZERO = "TouchesZero"
    UNBOUNDED = "Unbounded"


@dataclass(frozen=True)
class OrbitClass:
    tag: OrbitTag
    energy: float
    band: tuple  # (E_center, E_separatrix)


def crit_classify_orbit(params: ProblemParams, state0, tol: float = 1e-9) -> OrbitClass:
    """Phase-plane verdict for the orbit through ``state0`` when ``q = 2*-1``.

    The potential ``-F`` has a well at ``v_-`` and local maxima at ``0``
    (level 0) and at the saddle ``v_+`` (level ``E_sep = -F(v_+)``). Orbits
    below both barriers are periodic; an orbit at level ``E_sep < 0`` inside
    the well is homoclinic to ``v_+``; orbits that clear the zero barrier
    reach ``v = 0``; the remaining ones pass the saddle and grow without bound.
    """
    _require_crit(params)
    mu0 = mu_zero(params)
    if not 0.0 < params.mu < mu0:
        raise RegimeError(f"orbit classification needs 0 < mu < mu0 = {mu0}")
    _, v, dv = (float(x) for x in state0)
    if not v > 0:
        raise DomainError(("v", "v > 0"))
    v_minus, v_plus, _ = _g_zeros(params)
    E = float(crit_energy(params, state0))
    E_center = -float(crit_F(params, v_minus))
    E_sep = -float(crit_F(params, v_plus))
    band = (E_center, E_sep)
    scale = max(1.0, abs(E_center), abs(E_sep))
    tol_e = tol * scale

    for eq in (v_minus, v_plus):
        if abs(v - eq) <= tol * max(1.0, eq) and abs(dv) <= tol:
            return OrbitClass(OrbitTag.CONSTANT, E, band)

    if E_sep < 0 and abs(E - E_sep) <= tol_e:
        # Inside the well, or outside it but heading back toward the saddle.
        if v < v_plus or dv < 0:
            return OrbitClass(OrbitTag.HOMOCLINIC_TO_SADDLE, E, band)
        return OrbitClass(OrbitTag.UNBOUNDED, E, band)
    if v > v_plus:
        return OrbitClass(OrbitTag.UNBOUNDED, E, band)
    if E < min(0.0, E_sep):
        return OrbitClass(OrbitTag.PERIODIC, E, band)
    if E >= 0.0:
        return OrbitClass(OrbitTag.TOUCHES_ZERO, E, band)
    return OrbitClass(OrbitTag.UNBOUNDED, E, band)
