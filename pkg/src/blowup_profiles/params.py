"""Problem parameters and every closed-form exponent, constant and threshold.

The equation is ``-Δu = |x|^{-s} u^{2*(s)-1} - μ u^q`` on the punctured unit
ball of R^n, with ``2*(s) = 2(n-s)/(n-2)`` and ``2* = 2*(0)``.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, replace
from fractions import Fraction
from functools import cached_property

import numpy as np

from .errors import DomainError, RegimeError, RootNotBracketed, NoSignChange
from .numerics import Bracket, QuadSpec, expand_bracket, find_root, integrate_adaptive

__all__ = [
    "ProblemParams",
    "ExponentTable",
    "Regime",
    "RegimeTag",
    "CriticalThresholds",
    "MuOne",
    "RecurrenceConstant",
    "NDProfile",
    "validate_params",
    "exponent_table",
    "regime_of",
    "mu_zero",
    "mu_one",
    "critical_thresholds",
    "mb_recurrence_constant",
    "nd_profile",
    "nd_exponent",
    "sphere_area",
    "crit_F",
    "crit_dF",
    "crit_g",
]


@dataclass(frozen=True)
class ProblemParams:
    """The quadruple ``(n, s, q, mu)``; construction fails on any violated bound."""

    n: int
    s: float
    q: float
    mu: float = 0.0

    def __post_init__(self):
        bad = []
        n = self.n
        if isinstance(n, float) and n.is_integer():
            n = int(n)
            object.__setattr__(self, "n", n)
        if not isinstance(n, (int, np.integer)) or isinstance(n, bool):
            bad.append(("n", "integer"))
        elif n < 3:
            bad.append(("n", "n >= 3"))
        for name in ("s", "q", "mu"):
            val = getattr(self, name)
            if not isinstance(val, (int, float, np.floating, np.integer)) or not math.isfinite(val):
                bad.append((name, "finite real"))
        if not bad or all(field == "n" for field, _ in bad):
            if not 0.0 < self.s:
                bad.append(("s", "s > 0"))
            if not self.s < 2.0:
                bad.append(("s", "s < 2"))
            if not self.q > 1.0:
                bad.append(("q", "q > 1"))
            if not self.mu >= 0.0:
                bad.append(("mu", "mu >= 0"))
        if bad:
            raise DomainError(bad)
        object.__setattr__(self, "n", int(self.n))
        object.__setattr__(self, "s", float(self.s))
        object.__setattr__(self, "q", float(self.q))
        object.__setattr__(self, "mu", float(self.mu))

    def with_mu(self, mu: float) -> "ProblemParams":
        return replace(self, mu=mu)

    def with_q(self, q: float) -> "ProblemParams":
        return replace(self, q=q)

    @cached_property
    def table(self) -> "ExponentTable":
        return exponent_table(self)


def validate_params(n, s, q, mu) -> ProblemParams:
    return ProblemParams(n, s, q, mu)


def sphere_area(n: int) -> float:
    """``|S^{n-1}| = 2 π^{n/2} / Γ(n/2)``."""
    return 2.0 * math.pi ** (n / 2) / math.gamma(n / 2)


@dataclass(frozen=True)
class ExponentTable:
    two_star_s: float
    two_star: float
    p: float
    c_ns: float
    K_ns: float
    gamma: float
    omega: float
    # Derived conveniences, not independent data.
    half: float  # (n-2)/2
    v_bar: float  # constant orbit of the unperturbed Emden-Fowler equation


def _cut_points(params):
    """Exact rational cut points ``2*(s)-1``, ``2*-2``, ``2*-1`` for the given floats."""
    n = Fraction(params.n)
    s = Fraction(params.s)
    hs = (n + 2 - 2 * s) / (n - 2)
    sob2 = Fraction(4) / (n - 2)
    sob1 = (n + 2) / (n - 2)
    return hs, sob2, sob1


def exponent_table(params: ProblemParams) -> ExponentTable:
    n, s, q = params.n, params.s, params.q
    two_star_s = 2.0 * (n - s) / (n - 2)
    two_star = 2.0 * n / (n - 2)
    half = 0.5 * (n - 2)
    hs, _, sob1 = _cut_points(params)
    qf = Fraction(q)
    if qf <= hs:
        p = half
    elif qf < sob1:
        p = s / (q - (two_star_s - 1.0))
    else:
        p = 2.0 / (q - 1.0)
    c_ns = ((n - s) * (n - 2.0)) ** ((n - 2.0) / (2.0 * (2.0 - s)))
    a2 = half * half
    K_ns = (two_star_s - 2.0) / (2.0 * two_star_s) * a2 ** (two_star_s / (two_star_s - 2.0))
    gamma = half * (two_star - 1.0 - q)
    if qf == sob1:
        gamma = 0.0
    return ExponentTable(
        two_star_s=two_star_s,
        two_star=two_star,
        p=p,
        c_ns=c_ns,
        K_ns=K_ns,
        gamma=gamma,
        omega=sphere_area(n),
        half=half,
        v_bar=a2 ** (1.0 / (two_star_s - 2.0)),
    )


class RegimeTag(enum.Enum):
    SUBCRITICAL_Q_LE_HS = "Subcritical_q_le_HS"
    INTERMEDIATE = "Intermediate_HS_lt_q_lt_Sob"
    CRITICAL_SOBOLEV = "CriticalSobolev"
    SUPERCRITICAL = "Supercritical"


@dataclass(frozen=True)
class Regime:
    tag: RegimeTag
    mb_admissible: bool
    nd_admissible: bool


def regime_of(params: ProblemParams) -> Regime:
    hs, sob2, sob1 = _cut_points(params)
    q = Fraction(params.q)
    if q <= hs:
        tag = RegimeTag.SUBCRITICAL_Q_LE_HS
    elif q < sob1:
        tag = RegimeTag.INTERMEDIATE
    elif q == sob1:
        tag = RegimeTag.CRITICAL_SOBOLEV
    else:
        tag = RegimeTag.SUPERCRITICAL
    return Regime(tag, mb_admissible=sob2 < q < sob1, nd_admissible=hs < q < sob1)


def mu_zero(params: ProblemParams) -> float:
    """Critical perturbation size above which no singular profile survives when ``q = 2*-1``."""
    n, s = params.n, params.s
    return (
        (2.0 - s)
        * s ** (s / (2.0 - s))
        / (2.0 ** (2.0 * (1.0 - s) / (2.0 - s)) * (n - 2.0) ** (2.0 * s / (2.0 - s)))
    )


# Critical-case potential F(v) = (n-2)^2 v^2/8 + μ v^{2*}/2* - v^{2*(s)}/2*(s);
# it depends only on (n, s, mu), not on the stored q.

def crit_F(params, v, mu=None):
    t = params.table
    mu = params.mu if mu is None else mu
    v = np.asarray(v, dtype=float)
    r, p = t.two_star_s, t.two_star
    return 0.5 * t.half ** 2 * v ** 2 + mu * v ** p / p - v ** r / r


def crit_dF(params, v, mu=None):
    t = params.table
    mu = params.mu if mu is None else mu
    v = np.asarray(v, dtype=float)
    return t.half ** 2 * v + mu * v ** (t.two_star - 1.0) - v ** (t.two_star_s - 1.0)


def crit_g(params, v, mu=None):
    """``F'(v)/v``, extended by ``(n-2)^2/4`` at ``v = 0``."""
    t = params.table
    mu = params.mu if mu is None else mu
    v = np.asarray(v, dtype=float)
    return t.half ** 2 + mu * v ** (t.two_star - 2.0) - v ** (t.two_star_s - 2.0)


def _g_argmin(params, mu):
    """Unique critical point of ``g`` (it decreases before, increases after)."""
    t = params.table
    r, p = t.two_star_s, t.two_star
    return ((r - 2.0) / (mu * (p - 2.0))) ** (1.0 / (p - r))


@dataclass(frozen=True)
class MuOne:
    printed: float
    operational: float
    v_saddle: float  # saddle equilibrium at the operational threshold
    consistent: bool

    def __iter__(self):
        # Unpacks as (printed, operational).
        return iter((self.printed, self.operational))


def mu_one(params: ProblemParams, rel_tol: float = 1e-6) -> MuOne:
    """Threshold at which the saddle's separatrix level crosses zero.

    ``printed`` evaluates the quoted closed-form expression; the
    ``operational`` value solves ``F(v) = F'(v) = 0`` for ``(v, μ)``. The two
    are compared and ``consistent`` records whether they agree to ``rel_tol``.
    """
    n, s = params.n, params.s
    printed = (
        (2.0 - s) * n / (2.0 * (n - s))
        * (2.0 * s * (n - s) / (n - 2.0)) ** (s * (n - 2.0) / (2.0 - s))
    )
    t = params.table
    a2 = t.half ** 2
    r, p = t.two_star_s, t.two_star

    # F'(v) = 0 gives μ(v) = (v^{r-2} - a²)/v^{p-2}; substitute into F(v)/v².
    def level(v):
        x = v ** (r - 2.0)
        return 0.5 * a2 + (x - a2) / p - x / r

    lo = t.v_bar
    try:
        bracket = expand_bracket(level, lo, 2.0 * lo)
    except NoSignChange as exc:
        raise RootNotBracketed(f"operational mu_1 not bracketed: {exc}") from exc
    v_plus = find_root(level, bracket, tol=1e-15 * max(1.0, lo))
    operational = (v_plus ** (r - 2.0) - a2) / v_plus ** (p - 2.0)
    consistent = abs(printed - operational) <= rel_tol * abs(operational)
    return MuOne(printed, operational, v_plus, consistent)


@dataclass(frozen=True)
class CriticalThresholds:
    mu0: float
    mu1_printed: float
    mu1_operational: float
    mu1_consistent: bool
    v_minus: float | None
    v_plus: float | None
    v_bar_limit: float
    u_const_coeff: float
    degenerate: bool = False


def critical_thresholds(params: ProblemParams) -> CriticalThresholds:
    """All critical-case (``q = 2*-1``) thresholds, evaluated at ``params.mu``.

    ``v_minus``/``v_plus`` are the zeros of ``g``; they are ``None`` when
    ``mu`` is zero or above ``mu0``. At ``mu == mu0`` the double zero is
    returned twice with ``degenerate`` set.
    """
    mu0 = mu_zero(params)
    m1 = mu_one(params)
    s, n = params.s, params.n
    coeff = ((2.0 - s) / (2.0 * mu0)) ** ((n - 2.0) / (2.0 * s))
    v_minus = v_plus = None
    degenerate = False
    if params.mu > 0:
        try:
            v_minus, v_plus, degenerate = _g_zeros(params)
        except RegimeError:
            pass
    return CriticalThresholds(
        mu0=mu0,
        mu1_printed=m1.printed,
        mu1_operational=m1.operational,
        mu1_consistent=m1.consistent,
        v_minus=v_minus,
        v_plus=v_plus,
        v_bar_limit=params.table.v_bar,
        u_const_coeff=coeff,
        degenerate=degenerate,
    )


def _g_zeros(params, degenerate_tol=1e-12):
    mu = params.mu
    if mu <= 0:
        raise RegimeError("g has a single zero only for mu > 0")
    vstar = _g_argmin(params, mu)
    gmin = float(crit_g(params, vstar))
    scale = params.table.half ** 2
    if abs(gmin) <= degenerate_tol * scale:
        return vstar, vstar, True
    if gmin > 0:
        raise RegimeError(f"mu={mu} exceeds mu0={mu_zero(params)}: g has no zero")
    g = lambda v: float(crit_g(params, v))  # noqa: E731
    tol = 1e-300  # brent's relative term (4 eps |x|) governs
    v_minus = find_root(g, Bracket.of(g, 0.0, vstar), tol=tol)
    v_plus = find_root(g, expand_bracket(g, vstar, 2.0 * vstar), tol=tol)
    return v_minus, v_plus, False


@dataclass(frozen=True)
class RecurrenceConstant:
    K: float
    beta: float
    K_explicit: float
    radial_integral: float  # ∫_0^∞ r^{n-1} (1 + r^{2-s})^{-(q+1)(n-2)/(2-s)} dr
    bubble_norm: float  # ∫_{R^n} U_1^{q+1} dx

    def __iter__(self):
        return iter((self.K, self.beta))


def _require_mb(params):
    if not regime_of(params).mb_admissible:
        raise RegimeError(
            f"q={params.q} outside the multi-bump band (2*-2, 2*-1) = "
            f"({params.table.two_star - 2.0}, {params.table.two_star - 1.0})"
        )


def mb_recurrence_constant(params: ProblemParams, rel_tol: float = 1e-13) -> RecurrenceConstant:
    """Constant ``K`` and exponent ``beta`` of ``r_{k+1} ≈ K r_k^beta``.

    Computed twice: once from ``∫ U_1^{q+1}`` using the bubble itself, once
    from the explicit radial integrand; the two routes share only the
    quadrature kernel.
    """
    _require_mb(params)
    t = params.table
    n, s, q, mu = params.n, params.s, params.q, params.mu
    beta = 1.0 / (q - (t.two_star - 2.0))
    expo = 2.0 / ((n - 2.0) * (q - (t.two_star - 2.0)))
    pref = (t.two_star - 1.0 - q) * mu / ((q + 1.0) * (n - 2.0))
    spec = QuadSpec(0.0, math.inf, abs_tol=1e-300, rel_tol=rel_tol, vectorized=True)

    decay = (q + 1.0) * (n - 2.0) / (2.0 - s)
    radial = integrate_adaptive(
        lambda r: r ** (n - 1) * (1.0 + r ** (2.0 - s)) ** (-decay), spec
    )
    K_thm = (pref * t.c_ns ** (q - 1.0) / t.omega * t.omega * radial) ** expo

    # Route through the bubble profile; imported lazily to keep params a leaf module.
    from .dynamics import bubble_profile

    bubble_radial = integrate_adaptive(
        lambda r: r ** (n - 1) * bubble_profile(params, 1.0, r) ** (q + 1.0), spec
    )
    norm = t.omega * bubble_radial
    K = (pref / (t.c_ns ** 2 * t.omega) * norm) ** expo
    return RecurrenceConstant(K=K, beta=beta, K_explicit=K_thm, radial_integral=radial,
                              bubble_norm=norm)


def nd_exponent(params: ProblemParams) -> float:
    """``s/(q - (2*(s)-1))`` with no regime check (defined for ``q > 2*(s)-1``)."""
    return params.s / (params.q - (params.table.two_star_s - 1.0))


@dataclass(frozen=True)
class NDProfile:
    p_nd: float
    coeff: float

    def __iter__(self):
        return iter((self.p_nd, self.coeff))

    def __call__(self, r):
        return self.coeff * np.asarray(r, dtype=float) ** (-self.p_nd)


def nd_profile(params: ProblemParams) -> NDProfile:
    """Power profile ``coeff * r^{-p_nd}`` on which the two nonlinear terms cancel."""
    if not regime_of(params).nd_admissible:
        raise RegimeError(f"q={params.q} outside the (ND) band (2*(s)-1, 2*-1)")
    if params.mu == 0:
        raise DomainError(("mu", "mu > 0 for an (ND) profile"))
    gap = params.q - (params.table.two_star_s - 1.0)
    return NDProfile(p_nd=params.s / gap, coeff=params.mu ** (-1.0 / gap))
