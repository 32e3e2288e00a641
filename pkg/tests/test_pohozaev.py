import math
import warnings

import numpy as np
import pytest
from hypothesis import given, strategies as st

from blowup_profiles import dynamics as dy
from blowup_profiles.classifier import BubbleSum, mb_generate
from blowup_profiles.dynamics import ClosedFormProfile, PhaseState
from blowup_profiles.errors import DomainError, NonConvergentWarning, NotConverged, RadiusUnderflow
from blowup_profiles.params import ProblemParams
from blowup_profiles.pohozaev import (
    asymptotic_pohozaev, identity_residual, nonlinearity, pohozaev_at, pohozaev_radial_form,
)

OMEGA3 = 2 * math.pi ** 2


def test_nonlinearity_examples(p41):
    assert nonlinearity(p41, 0.3, 0.3 ** -2).f == pytest.approx(0.0, abs=1e-10)
    assert nonlinearity(p41, 1.0, 0.0).f == 0.0 and nonlinearity(p41, 1.0, 0.0).F_big == 0.0
    assert nonlinearity(p41, 1.0, 2.0).f == pytest.approx(4 - 2 ** 2.5, abs=1e-14)
    with pytest.raises(DomainError):
        nonlinearity(p41, 1.0, -1.0)
    with pytest.raises(DomainError):
        nonlinearity(p41, 0.0, 1.0)


@given(r=st.floats(0.01, 10), t=st.floats(0.01, 10))
def test_primitive_derivative(r, t):
    p = ProblemParams(4, 1.0, 2.5, 1.3)
    h = 1e-5 * t
    dF = (nonlinearity(p, r, t + h).F_big - nonlinearity(p, r, t - h).F_big) / (2 * h)
    assert dF == pytest.approx(nonlinearity(p, r, t).f, rel=1e-7, abs=1e-7)


@pytest.mark.parametrize("lam", [0.5, 1.0, 2.0])
def test_bubble_has_zero_pohozaev(p41, lam):
    b = ClosedFormProfile.bubble(p41, lam)
    for r in (0.1, 1.0, 10.0):
        assert abs(pohozaev_at(p41, b, r)) < 1e-8 * OMEGA3
        assert abs(pohozaev_at(p41, b, r, form="radial")) < 1e-8 * OMEGA3


def test_periodic_profile_pohozaev_is_omega_K(p41):
    vk = ClosedFormProfile.periodic(p41, 1 / 12)
    vals = pohozaev_at(p41, vk, np.array([0.03, 0.4, 7.0]))
    assert vals == pytest.approx(OMEGA3 / 12, rel=1e-9)


@given(r=st.floats(1e-3, 1e3), lam=st.floats(0.1, 10))
def test_forms_agree_on_bubbles(r, lam):
    p = ProblemParams(5, 0.5, 2.2, 0.0)
    b = ClosedFormProfile.bubble(p, lam)
    ef, rad = pohozaev_at(p, b, r), pohozaev_at(p, b, r, form="radial")
    scale = p.table.omega * max(1.0, b.ef_state(-math.log(r))[0] ** p.table.two_star_s)
    assert abs(ef - rad) <= 1e-10 * scale


def test_forms_agree_on_trajectory(p41):
    tr = dy.integrate(p41, PhaseState(math.log(2), 1.0, 0.0), math.log(20))
    for r in (0.06, 0.2, 0.45):
        ef = pohozaev_at(p41, tr, r)
        rad = pohozaev_radial_form(p41, tr.state_at(-math.log(r)))
        assert ef == pytest.approx(rad, rel=1e-11, abs=1e-11)


def test_unknown_form(p41):
    with pytest.raises(ValueError):
        pohozaev_at(p41, ClosedFormProfile.bubble(p41), 1.0, form="polar")


def test_nd_profile_flagged(p41):
    with pytest.warns(NonConvergentWarning):
        pohozaev_at(p41, ClosedFormProfile.nd_power(p41), 0.5)


def test_identity_on_perturbed_trajectory(p41):
    tr = dy.integrate(p41, PhaseState(math.log(2), 1.0, 0.0), math.log(20))
    rep = identity_residual(p41, tr, 0.05, 0.5)
    assert rep.relative_residual < 1e-5
    assert rep.bulk > 0


def test_identity_second_grid_point(p5):
    tr = dy.integrate(p5, PhaseState(math.log(2), 1.0, 0.0), math.log(20))
    assert identity_residual(p5, tr, 0.05, 0.5).relative_residual < 1e-5


def test_unperturbed_trajectory_has_constant_pohozaev(p41_limit):
    tr = dy.integrate(p41_limit, PhaseState(0.0, 0.7, 0.1), 6.0)
    rep = identity_residual(p41_limit, tr, math.exp(-6.0), 1.0)
    assert rep.bulk == 0.0 and abs(rep.residual) < 1e-8


def test_critical_case_bulk_vanishes():
    p = ProblemParams(4, 1.0, 3.0, 0.2)
    tr = dy.integrate(p, PhaseState(0.0, 1.3820, 0.3), 8.0)
    rep = identity_residual(p, tr, math.exp(-8.0), 1.0)
    assert rep.bulk == 0.0
    vals = [pohozaev_at(p, tr, r) for r in np.geomspace(1.0, math.exp(-8.0), 7)]
    assert max(vals) - min(vals) < 1e-8


def test_identity_requires_ordered_radii(p41):
    tr = dy.integrate(p41, PhaseState(math.log(2), 1.0, 0.0), math.log(20))
    with pytest.raises(DomainError):
        identity_residual(p41, tr, 0.5, 0.05)


def test_asymptotic_bubble_and_periodic(p41):
    a = asymptotic_pohozaev(p41, ClosedFormProfile.bubble(p41))
    assert abs(a.value) < 1e-6
    a = asymptotic_pohozaev(p41, ClosedFormProfile.periodic(p41, 1 / 12))
    assert a.value == pytest.approx(OMEGA3 / 12, rel=1e-6)


@pytest.mark.parametrize("fixture", ["p41", "p5"])
def test_asymptotic_multibump_vanishes(fixture, request):
    p = request.getfixturevalue(fixture)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", RadiusUnderflow)
        radii = mb_generate(p, 0.9, 12)
    a = asymptotic_pohozaev(p, BubbleSum(p, radii))
    assert abs(a.value) < 1e-4 * p.table.omega * p.table.K_ns


def test_asymptotic_on_unperturbed_trajectory(p41_limit):
    st0 = PhaseState(0.0, 0.7, 0.1)
    tr = dy.integrate(p41_limit, st0, 40.0)
    a = asymptotic_pohozaev(p41_limit, tr, r0=0.5)
    assert a.value == pytest.approx(OMEGA3 * dy.hamiltonian(p41_limit, st0), rel=1e-9)
    assert a.expected_rate == 0.0


def test_asymptotic_not_converged_on_short_trajectory(p41):
    tr = dy.integrate(p41, PhaseState(math.log(2), 1.0, 0.0), math.log(20))
    with pytest.raises(NotConverged):
        asymptotic_pohozaev(p41, tr, r0=0.5, tol=1e-14)


def test_asymptotic_rejects_supercritical():
    p = ProblemParams(4, 1.0, 5.0, 1.0)
    with pytest.raises(DomainError):
        asymptotic_pohozaev(p, dy.integrate(p, PhaseState(0.0, 0.5, 0.0), 1.0))
