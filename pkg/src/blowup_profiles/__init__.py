"""Numerical toolkit for isolated singularities of radial solutions of

    -Δu = |x|^{-s} u^{2*(s)-1} - μ u^q   in a punctured ball of R^n.

The modules build on each other: ``params`` (exponents, thresholds,
recurrence constant), ``numerics`` (roots and quadrature), ``dynamics``
(Emden-Fowler ODE and closed-form profiles), ``pohozaev`` (Pohozaev-type
integral), ``classifier`` (profile verdicts and multi-bump radii) and
``cli``.
"""

from .errors import (
    BlowupError,
    DomainError,
    NonConvergentWarning,
    NotConverged,
    NumericalError,
    OutOfSpan,
    RadiusUnderflow,
    RegimeError,
    ToleranceNotMet,
    TooFewSamples,
)
from .params import (
    ProblemParams,
    RegimeTag,
    critical_thresholds,
    mb_recurrence_constant,
    mu_one,
    mu_zero,
    nd_exponent,
    nd_profile,
    regime_of,
    sphere_area,
)
from .dynamics import (
    ClosedFormProfile,
    OrbitTag,
    PhaseState,
    Trajectory,
    crit_classify_orbit,
    crit_equilibria,
    ef_transform,
    ef_untransform,
    hamiltonian,
    homoclinic_profile,
    integrate,
    period,
    periodic_profile,
    turning_points,
)
from .pohozaev import asymptotic_pohozaev, identity_residual, pohozaev_at
from .classifier import (
    BubbleSum,
    ProfileTag,
    classify,
    convexity_threshold,
    critical_radii,
    mb_fit,
    mb_generate,
    w_trace,
)

__version__ = "0.1.0"
