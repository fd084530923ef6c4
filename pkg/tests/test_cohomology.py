import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import nonlinear_map
from livsic.cohomology import (
    Cocycle,
    NotInSameElement,
    PolicyDeadEnd,
    backward_orbit,
    chi_derivative_series,
    chi_difference,
    chi_higher_derivative,
    default_truncation,
    make_coboundary,
    solve_spectral,
    verify_cocycle,
)
from livsic.counterexample import counterexample_map
from livsic.functions import Polynomial, TrigPolynomial, random_trig
from livsic.interval_maps import eval_map, make_beta_map
from livsic.reachability import q_partition

CHI0 = TrigPolynomial([0, 0.5, 0.0, 0.1], [0, 0.2, 0.3])


def test_verify_cocycle_exact_for_coboundary():
    t = make_beta_map(3.0)
    phi = make_coboundary(t, CHI0)
    assert verify_cocycle(t, phi, CHI0).sup <= 1e-14


def test_verify_cocycle_detects_wrong_chi():
    t = make_beta_map(2.0)
    phi = make_coboundary(t, CHI0)
    wrong = TrigPolynomial([0, 0.5], [0, 0.2])
    assert verify_cocycle(t, phi, wrong).sup > 1e-2


@pytest.mark.parametrize("tmap", [make_beta_map(2.0), make_beta_map(3.0), make_beta_map(2.5, 0.3),
                                  nonlinear_map()], ids=lambda t: t.label)
def test_spectral_round_trip(tmap):
    phi = make_coboundary(tmap, CHI0)
    sol = solve_spectral(tmap, phi, n_grid=1 << 13)
    diff = sol.chi.values - CHI0(sol.chi.nodes)
    assert np.ptp(diff) / 2 <= 1e-4
    assert abs(sol.a - 1.0) <= 1e-6
    assert sol.is_coboundary
    # mean normalisation: int chi dmu = 0
    assert sol.chi.integral(sol.spectral.h) == pytest.approx(0.0, abs=1e-12)


def test_point_normalization():
    t = make_beta_map(2.0)
    sol = solve_spectral(t, make_coboundary(t, CHI0), n_grid=4096, normalization="point",
                         x_ref=0.3, value=1.5)
    assert sol.chi(0.3) == pytest.approx(1.5, abs=1e-12)
    assert sol.chi(0.7) - sol.chi(0.3) == pytest.approx(CHI0(0.7) - CHI0(0.3), abs=1e-5)


def test_non_coboundary_has_a_away_from_one():
    t = make_beta_map(2.0)
    sol = solve_spectral(t, Cocycle(Polynomial([0.0, 1.0])), n_grid=4096)
    assert abs(sol.a - 1.0) > 1e-3
    assert not sol.is_coboundary


def test_a_is_invariant_under_adding_a_coboundary():
    # Cohomologous cocycles share the same leading eigenvalue.
    t = make_beta_map(3.0)
    base = Polynomial([0.1, -0.4, 0.3])
    cob = make_coboundary(t, CHI0)

    def both(x):
        return base(x) + cob(x)

    a1 = solve_spectral(t, base, n_grid=1 << 13).a
    a2 = solve_spectral(t, both, n_grid=1 << 13).a
    assert a1 == pytest.approx(a2, rel=1e-6)


def test_chi_difference_matches_chi0():
    t = make_beta_map(3.0)
    phi = make_coboundary(t, CHI0)
    rng = np.random.default_rng(3)
    for x1, x2 in rng.uniform(0, 1, (20, 2)):
        s = chi_difference(t, phi, x1, x2, 50)
        assert s.value == pytest.approx(CHI0(x1) - CHI0(x2), abs=1e-10)
        assert s.tail_bound < 1e-10


def test_chi_difference_respects_q_partition():
    t = counterexample_map()
    q = q_partition(t, m=4, n_max=20)
    phi = make_coboundary(t, CHI0)
    with pytest.raises(NotInSameElement):
        chi_difference(t, phi, 0.3, 0.7, 10, q=q)
    s = chi_difference(t, phi, 0.2, 0.3, 40, q=q)
    assert abs(s.value - (CHI0(0.2) - CHI0(0.3))) <= s.tail_bound
    s = chi_difference(t, phi, 0.2, 0.3, 80, q=q)
    assert s.value == pytest.approx(CHI0(0.2) - CHI0(0.3), abs=1e-12)


@pytest.mark.parametrize("tmap", [make_beta_map(2.0), make_beta_map(3.0), nonlinear_map()],
                         ids=lambda t: t.label)
def test_derivative_series(tmap):
    phi = make_coboundary(tmap, CHI0)
    for x in np.linspace(0.03, 0.97, 15):
        s = chi_derivative_series(tmap, phi, x, n_trunc=60)
        assert s.value == pytest.approx(CHI0.derivative(x, 1), abs=1e-9)


def test_derivative_series_policies_agree():
    t = make_beta_map(3.0)
    phi = make_coboundary(t, CHI0)
    a = chi_derivative_series(t, phi, 0.4, 60, policy="leftmost").value
    b = chi_derivative_series(t, phi, 0.4, 60, policy="max-weight").value
    c = chi_derivative_series(t, phi, 0.4, 60, policy="fixed-itinerary", itinerary=[2] * 60).value
    assert a == pytest.approx(b, abs=1e-12) and a == pytest.approx(c, abs=1e-12)


def test_fixed_itinerary_dead_end():
    t = make_beta_map((1 + 5**0.5) / 2)
    with pytest.raises(PolicyDeadEnd):
        backward_orbit(t, 0.9, "fixed-itinerary", 1, itinerary=[1])


def test_backward_orbit_is_an_inverse_orbit():
    t = nonlinear_map()
    ys = backward_orbit(t, 0.37, "leftmost", 8)
    prev = 0.37
    for y in ys:
        assert float(eval_map(t, y)) == pytest.approx(prev, abs=1e-13)
        prev = y


@pytest.mark.parametrize("order", [1, 2, 3])
@pytest.mark.parametrize("tmap", [make_beta_map(2.0), make_beta_map(3.0), nonlinear_map()],
                         ids=lambda t: t.label)
def test_higher_derivatives(tmap, order):
    phi = make_coboundary(tmap, CHI0)
    scale = max(1.0, (2 * math.pi * 3) ** order)
    for x in np.linspace(0.05, 0.95, 7):
        s = chi_higher_derivative(tmap, phi, x, order, n_trunc=60)
        assert s.value == pytest.approx(CHI0.derivative(x, order), abs=1e-9 * scale)


def test_higher_derivative_order_limited_by_smoothness():
    t = make_beta_map(2.0)
    phi = make_coboundary(t, CHI0, smoothness_k=2)
    with pytest.raises(ValueError):
        chi_higher_derivative(t, phi, 0.3, 3)


def test_default_truncation():
    assert default_truncation(2.0, 1e-12) == math.ceil(math.log(1e-12) / math.log(0.5)) + 5


@settings(max_examples=15, deadline=None)
@given(seed=st.integers(0, 10**6), beta=st.sampled_from([2.0, 3.0]))
def test_random_round_trip_a_equals_one(seed, beta):
    t = make_beta_map(beta)
    chi0 = random_trig(np.random.default_rng(seed))
    sol = solve_spectral(t, make_coboundary(t, chi0), n_grid=1 << 12)
    assert abs(sol.a - 1.0) <= 1e-5
    assert np.ptp(sol.chi.values - chi0(sol.chi.nodes)) / 2 <= 1e-3
