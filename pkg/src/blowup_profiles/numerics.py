"""Scalar numerical kernels: bracketed root finding and adaptive quadrature.

Quadrature handles two kinds of endpoint trouble by substitution before the
adaptive Gauss-Kronrod pass ever sees the integrand:

* inverse square-root singularities, ``f(x) ~ C/sqrt(x - a)`` near ``a`` (or
  near ``b``), removed with ``x = a + u**2`` (resp. ``x = b - u**2``);
* an infinite upper limit, split at ``max(a, 1)`` with the tail mapped by
  ``x -> 1/x``.
"""

from __future__ import annotations

import heapq
import math
from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy import optimize

from .errors import MaxIterations, NoSignChange, ToleranceNotMet, DomainError

__all__ = [
    "Bracket",
    "QuadSpec",
    "QuadResult",
    "find_root",
    "bisect_root",
    "expand_bracket",
    "integrate_adaptive",
    "gauss_kronrod_panel",
]

_EPS = np.finfo(float).eps


@dataclass(frozen=True)
class Bracket:
    """An interval ``[lo, hi]`` over which ``f`` changes sign."""

    lo: float
    hi: float
    f_lo: float
    f_hi: float

    @classmethod
    def of(cls, f: Callable[[float], float], lo: float, hi: float) -> "Bracket":
        lo, hi = float(min(lo, hi)), float(max(lo, hi))
        f_lo, f_hi = float(f(lo)), float(f(hi))
        if not (math.isfinite(f_lo) and math.isfinite(f_hi)):
            raise NoSignChange(f"non-finite value at bracket end: f({lo})={f_lo}, f({hi})={f_hi}")
        if f_lo * f_hi > 0.0:
            raise NoSignChange(
                f"no sign change on [{lo}, {hi}]: f(lo)={f_lo}, f(hi)={f_hi}", lo=lo, hi=hi
            )
        return cls(lo, hi, f_lo, f_hi)


def find_root(f, bracket: Bracket, tol: float = 1e-14, maxiter: int = 200) -> float:
    """Root of ``f`` inside ``bracket`` to absolute width ``tol``.

    Brent's method (inverse quadratic interpolation guarded by bisection), so
    convergence is guaranteed once the bracket is valid.
    """
    if tol <= 0:
        raise DomainError(("tol", "> 0"))
    if bracket.f_lo == 0.0:
        return bracket.lo
    if bracket.f_hi == 0.0:
        return bracket.hi
    root, info = optimize.brentq(
        f, bracket.lo, bracket.hi, xtol=tol, rtol=4 * _EPS, maxiter=maxiter,
        full_output=True, disp=False,
    )
    if not info.converged:
        raise MaxIterations(f"brent did not converge in {maxiter} iterations ({info.flag})")
    return float(root)


def bisect_root(f, bracket: Bracket, tol: float = 1e-14, maxiter: int = 400) -> float:
    """Plain bisection; slow but impossible to fool."""
    lo, hi, f_lo = bracket.lo, bracket.hi, bracket.f_lo
    for _ in range(maxiter):
        mid = 0.5 * (lo + hi)
        if hi - lo <= tol or mid in (lo, hi):
            return mid
        f_mid = f(mid)
        if f_mid == 0.0:
            return mid
        if (f_mid > 0) == (f_lo > 0):
            lo, f_lo = mid, f_mid
        else:
            hi = mid
    raise MaxIterations(f"bisection did not reach width {tol} in {maxiter} steps")


def expand_bracket(f, lo: float, hi: float, factor: float = 2.0, limit: float = 1e300) -> Bracket:
    """Grow ``hi`` geometrically until ``f`` changes sign on ``[lo, hi]``."""
    f_lo = f(lo)
    while hi < limit:
        if f_lo * f(hi) <= 0.0:
            return Bracket.of(f, lo, hi)
        hi *= factor
    raise NoSignChange(f"no sign change found on [{lo}, {limit}]")


# Gauss-Kronrod 7/15 nodes on [-1, 1] (non-negative half, descending).
_XGK = np.array([
    0.991455371120812639206854697526329,
    0.949107912342758524526189684047851,
    0.864864423359769072789712788640926,
    0.741531185599394439863864773280788,
    0.586087235467691130294144845693013,
    0.405845151377397166906606412076961,
    0.207784955007898467600689403773245,
    0.000000000000000000000000000000000,
])
_WGK = np.array([
    0.022935322010529224963732008058970,
    0.063092092629978553290700663189204,
    0.104790010322250183839876322541518,
    0.140653259715525918745189590510238,
    0.169004726639267902826583426598550,
    0.190350578064785409913256402421014,
    0.204432940075298892414161999234649,
    0.209482141084727828012999174891714,
])
# Gauss 7-point weights at _XGK[1], _XGK[3], _XGK[5], _XGK[7].
_WG = np.array([
    0.129484966168869693270611432679082,
    0.279705391489276667901467771423780,
    0.381830050505118944950369775488975,
    0.417959183673469387755102040816327,
])
_NODES = np.concatenate([-_XGK[:-1], _XGK[::-1]])
_WK = np.concatenate([_WGK[:-1], _WGK[::-1]])
_WG_FULL = np.zeros(15)
_WG_FULL[[1, 3, 5]] = _WG[:3]
_WG_FULL[[13, 11, 9]] = _WG[:3]
_WG_FULL[7] = _WG[3]


def gauss_kronrod_panel(f, a: float, b: float, vectorized: bool = False):
    """15-point Kronrod estimate on ``[a, b]`` and its distance to the embedded 7-point Gauss rule."""
    half = 0.5 * (b - a)
    x = 0.5 * (a + b) + half * _NODES
    if vectorized:
        y = np.asarray(f(x), dtype=float)
    else:
        y = np.array([f(xi) for xi in x], dtype=float)
    k = half * np.dot(_WK, y)
    g = half * np.dot(_WG_FULL, y)
    return k, abs(k - g)


@dataclass(frozen=True)
class QuadSpec:
    """Integration interval and accuracy request.

    ``b`` may be ``math.inf``. ``singular_a``/``singular_b`` declare an
    inverse square-root singularity at that (finite) end.
    """

    a: float
    b: float
    singular_a: bool = False
    singular_b: bool = False
    abs_tol: float = 1e-12
    rel_tol: float = 1e-10
    vectorized: bool = False
    max_panels: int = 4000

    def __post_init__(self):
        bad = []
        if not self.a < self.b:
            bad.append(("a", "< b"))
        if not math.isfinite(self.a):
            bad.append(("a", "finite"))
        if self.singular_b and not math.isfinite(self.b):
            bad.append(("singular_b", "finite b"))
        if self.abs_tol <= 0:
            bad.append(("abs_tol", "> 0"))
        if self.rel_tol <= 0:
            bad.append(("rel_tol", "> 0"))
        if bad:
            raise DomainError(bad)


@dataclass(frozen=True)
class QuadResult:
    value: float
    error: float
    panels: int


def _adaptive(f, a, b, abs_tol, rel_tol, vectorized, max_panels):
    k, e = gauss_kronrod_panel(f, a, b, vectorized)
    heap = [(-e, a, b, k)]
    total, err = k, e
    panels = 1
    while err > max(abs_tol, rel_tol * abs(total)):
        if panels >= max_panels:
            raise ToleranceNotMet(
                f"quadrature on [{a}, {b}] stalled at error {err:.3e}", estimate=total, error=err
            )
        neg_e, lo, hi, k_old = heapq.heappop(heap)
        mid = 0.5 * (lo + hi)
        if not lo < mid < hi:
            # Panel at float resolution; cannot refine further.
            raise ToleranceNotMet(
                f"quadrature panel collapsed near {lo}", estimate=total, error=err
            )
        k1, e1 = gauss_kronrod_panel(f, lo, mid, vectorized)
        k2, e2 = gauss_kronrod_panel(f, mid, hi, vectorized)
        heapq.heappush(heap, (-e1, lo, mid, k1))
        heapq.heappush(heap, (-e2, mid, hi, k2))
        panels += 1
        # Recompute sums from scratch to avoid cancellation drift.
        total = math.fsum(item[3] for item in heap)
        err = math.fsum(-item[0] for item in heap)
    return QuadResult(total, err, panels)


def integrate_adaptive(f, spec: QuadSpec, full_output: bool = False):
    """Integrate ``f`` over ``spec`` to ``max(abs_tol, rel_tol*|I|)``.

    Returns the value, or a :class:`QuadResult` when ``full_output`` is set.
    Raises :class:`ToleranceNotMet` (carrying the achieved estimate) if the
    panel budget runs out.
    """
    pieces = []  # (integrand, lo, hi) on finite smooth intervals
    a, b = float(spec.a), float(spec.b)
    vec = spec.vectorized

    if math.isinf(b):
        split = max(a, 1.0)
        if split > a:
            pieces.extend(_finite_pieces(f, a, split, spec.singular_a, False))

        def tail(y, _f=f):
            return _f(1.0 / y) / (y * y)

        pieces.append((tail, 0.0, 1.0 / split))
    else:
        pieces.extend(_finite_pieces(f, a, b, spec.singular_a, spec.singular_b))

    results = []
    n = len(pieces)
    for g, lo, hi in pieces:
        # Each piece gets an equal share of the absolute budget.
        results.append(
            _adaptive(g, lo, hi, spec.abs_tol / n, spec.rel_tol, vec, spec.max_panels)
        )
    value = math.fsum(r.value for r in results)
    error = math.fsum(r.error for r in results)
    if error > max(spec.abs_tol, spec.rel_tol * abs(value)) * (1 + 1e-12):
        raise ToleranceNotMet(
            f"combined quadrature error {error:.3e} above request", estimate=value, error=error
        )
    out = QuadResult(value, error, sum(r.panels for r in results))
    return out if full_output else out.value


def _finite_pieces(f, a, b, sing_a, sing_b):
    if sing_a and sing_b:
        mid = 0.5 * (a + b)
        return _finite_pieces(f, a, mid, True, False) + _finite_pieces(f, mid, b, False, True)
    if sing_a:
        def left(u, _f=f, _a=a):
            return 2.0 * u * _f(_a + u * u)
        return [(left, 0.0, math.sqrt(b - a))]
    if sing_b:
        def right(u, _f=f, _b=b):
            return 2.0 * u * _f(_b - u * u)
        return [(right, 0.0, math.sqrt(b - a))]
    return [(f, a, b)]
