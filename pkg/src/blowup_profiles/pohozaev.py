"""Pohozaev-type invariants of radial solutions.

For radial ``u`` the surface integral over ``∂B_r`` collapses to ``ω_{n-1}``
times a pointwise expression, so no angular quadrature is ever done. In
Emden-Fowler variables

    P_r = ω [ -(v')^2/2 + (n-2)^2 v^2/8 - v^{2*(s)}/2*(s) + μ e^{-γt} v^{q+1}/(q+1) ],

and between two radii it changes by the bulk term
``(n-2)(2*-1-q) μ / (2(q+1)) ∫ u^{q+1} dx`` over the annulus.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np

from .dynamics import ClosedFormProfile, ProfileKind, Trajectory, ef_untransform, _ef_level
from .errors import DomainError, NonConvergentWarning, NotConverged
from .numerics import QuadSpec, integrate_adaptive
from .params import ProblemParams, regime_of, RegimeTag

__all__ = [
    "NonlinearityValue",
    "PohozaevReport",
    "AsymptoticPohozaev",
    "nonlinearity",
    "pohozaev_at",
    "pohozaev_radial_form",
    "identity_residual",
    "asymptotic_pohozaev",
]

_FLOOR = 1e-300


@dataclass(frozen=True)
class NonlinearityValue:
    f: float
    F_big: float


def nonlinearity(params: ProblemParams, r, t_val) -> NonlinearityValue:
    """``f_{μ,q}(r, t)`` and its primitive ``F_{μ,q}(r, t)`` in ``t``."""
    r = np.asarray(r, dtype=float)
    t_val = np.asarray(t_val, dtype=float)
    if np.any(r <= 0):
        raise DomainError(("r", "r > 0"))
    if np.any(t_val < 0):
        raise DomainError(("t", "t >= 0"))
    tab = params.table
    rs, q, mu = tab.two_star_s, params.q, params.mu
    f = t_val ** (rs - 1.0) / r ** params.s - mu * t_val ** q
    F = t_val ** rs / (rs * r ** params.s) - mu * t_val ** (q + 1.0) / (q + 1.0)
    return NonlinearityValue(_sc(f), _sc(F))


def _sc(x):
    x = np.asarray(x)
    return float(x) if x.ndim == 0 else x


def _source_params(params, source):
    if isinstance(source, ClosedFormProfile):
        if source.kind is ProfileKind.ND_POWER:
            warnings.warn(
                "Pohozaev integral of an (ND) power profile has no finite limit",
                NonConvergentWarning, stacklevel=3,
            )
        if source.solves_limit_equation:
            return source.equation_params
    return params


def pohozaev_at(params: ProblemParams, source, r, form: str = "ef"):
    """``P_r^{(q)}`` of a trajectory or closed-form profile at radius ``r``.

    ``form="ef"`` evaluates the Emden-Fowler expression; ``form="radial"``
    the original-variable expression
    ``ω r^{n-1} [ -r (u')^2/2 - (n-2)/2 u u' - r F_{μ,q}(r, u) ]``.
    Profiles of the unperturbed equation are evaluated with ``μ = 0``.
    """
    r = np.asarray(r, dtype=float)
    if np.any(r <= 0):
        raise DomainError(("r", "r > 0"))
    eq = _source_params(params, source)
    t = -np.log(r)
    v, dv = source.ef_state(t)
    if form == "ef":
        return _sc(eq.table.omega * _ef_level(eq, t, np.asarray(v), np.asarray(dv)))
    if form == "radial":
        return pohozaev_radial_form(eq, (t, v, dv))
    raise ValueError(f"unknown form {form!r}")


def pohozaev_radial_form(params: ProblemParams, state):
    """Original-variable expression for ``P_r`` at the EF state ``(t, v, v')``."""
    r, u, du = ef_untransform(params, state)
    r, u, du = (np.asarray(x, dtype=float) for x in (r, u, du))
    n = params.n
    F = nonlinearity(params, r, u).F_big
    val = r ** (n - 1) * (-0.5 * r * du ** 2 - params.table.half * u * du - r * F)
    return _sc(params.table.omega * val)


@dataclass(frozen=True)
class PohozaevReport:
    r1: float
    r2: float
    P_r1: float
    P_r2: float
    bulk: float
    residual: float
    relative_residual: float
    bulk_error: float
    asymptotic: float | None = None


def identity_residual(
    params: ProblemParams, trajectory: Trajectory, r1: float, r2: float, rel_tol: float = 1e-11
) -> PohozaevReport:
    """Check ``P_{r2} - P_{r1} = bulk`` on the annulus ``r1 < |x| < r2``.

    The bulk integral is computed by quadrature of ``ρ^{n-1} u^{q+1}`` with
    ``u`` reconstructed from the trajectory's dense output.
    """
    if not 0 < r1 < r2:
        raise DomainError(("r1, r2", "0 < r1 < r2"))
    P1 = float(pohozaev_at(params, trajectory, r1))
    P2 = float(pohozaev_at(params, trajectory, r2))
    tab = params.table
    n, q, mu = params.n, params.q, params.mu
    coeff = (n - 2.0) / (2.0 * (q + 1.0)) * (tab.two_star - 1.0 - q) * mu * tab.omega
    if regime_of(params).tag is RegimeTag.CRITICAL_SOBOLEV:
        coeff = 0.0
    if coeff == 0.0:
        bulk, err = 0.0, 0.0
    else:
        def integrand(rho):
            u, _ = trajectory.radial(rho)
            return rho ** (n - 1) * np.abs(u) ** (q + 1.0)

        res = integrate_adaptive(
            integrand, QuadSpec(r1, r2, abs_tol=1e-300, rel_tol=rel_tol, vectorized=True),
            full_output=True,
        )
        bulk, err = coeff * res.value, abs(coeff) * res.error
    residual = P2 - P1 - bulk
    scale = max(abs(P1), abs(P2), abs(bulk), _FLOOR * tab.omega)
    return PohozaevReport(r1, r2, P1, P2, bulk, residual, abs(residual) / scale, err)


@dataclass(frozen=True)
class AsymptoticPohozaev:
    value: float
    levels: int
    radii: np.ndarray
    values: np.ndarray
    estimates: np.ndarray
    rate: float  # observed decay exponent of successive differences, nan if undefined
    expected_rate: float  # (n-2)(2*-1-q)/2


def asymptotic_pohozaev(
    params: ProblemParams,
    source,
    r0: float = 0.5,
    tol: float = 1e-9,
    max_levels: int = 400,
    r_min: float | None = None,
) -> AsymptoticPohozaev:
    """Estimate ``lim_{r→0} P_r`` from the ladder ``r_j = r0 2^{-j}``.

    Successive values are Richardson-extrapolated assuming a correction
    ``C r^γ`` with ``γ = (n-2)(2*-1-q)/2``; the estimate is accepted once
    three consecutive extrapolants agree to ``tol`` (absolute, in units of
    ``ω max(1, K_ns)``). The ladder is clipped to a trajectory's span;
    ladders that run past the span or
    ``r_min`` without agreeing raise :class:`NotConverged`.
    """
    eq = _source_params(params, source)
    if regime_of(eq).tag is RegimeTag.SUPERCRITICAL:
        raise DomainError(("q", "q <= 2*-1"))
    tab = eq.table
    gamma = tab.gamma if eq.mu != 0 else 0.0
    scale = tab.omega * max(1.0, tab.K_ns)
    if hasattr(source, "t_span"):
        lo, hi = source.t_span
        r0 = min(r0, math.exp(-lo))
        if r_min is None:
            r_min = math.exp(-hi)
    elif r_min is None:
        r_min = 1e-300
    factor = 2.0 ** (-gamma)
    radii, values, estimates = [], [], []
    for j in range(max_levels):
        r = r0 * 2.0 ** (-j)
        if r < r_min:
            break
        radii.append(r)
        values.append(float(pohozaev_at(eq, source, r)))
        if j == 0:
            continue
        if gamma > 0:
            estimates.append((values[-1] - factor * values[-2]) / (1.0 - factor))
        else:
            estimates.append(values[-1])
        if len(estimates) >= 3:
            last = estimates[-3:]
            if max(last) - min(last) <= tol * scale:
                return _asym_result(eq, radii, values, estimates)
    raise NotConverged(
        f"asymptotic Pohozaev not settled after {len(radii)} radii "
        f"(last estimates {estimates[-3:]})",
        values=values[-5:],
    )


def _asym_result(params, radii, values, estimates):
    tab = params.table
    diffs = np.abs(np.diff(values))
    rate = float("nan")
    good = diffs > 0
    if good.sum() >= 2:
        lr = np.log(np.asarray(radii[1:])[good])
        ld = np.log(diffs[good])
        rate = float(np.polyfit(lr, ld, 1)[0])
    expected = tab.half * (tab.two_star - 1.0 - params.q) if params.mu != 0 else 0.0
    return AsymptoticPohozaev(
        value=float(np.mean(estimates[-3:])),
        levels=len(radii),
        radii=np.asarray(radii),
        values=np.asarray(values),
        estimates=np.asarray(estimates),
        rate=rate,
        expected_rate=expected,
    )
