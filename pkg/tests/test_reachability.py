from fractions import Fraction

import numpy as np
import pytest

from conftest import GOLDEN, all_maps
from livsic.cohomology import make_coboundary, solve_spectral
from livsic.counterexample import build_counterexample, counterexample_map
from livsic.functions import TrigPolynomial
from livsic.interval_maps import Branch, MapDescription, make_beta_map
from livsic.reachability import (
    CoverError,
    QPartition,
    check_diameter_bound,
    interval_reachable,
    lebesgue_number,
    q_partition,
    sliding_window_lebesgue,
)


def gapped_map():
    # Images (0, 1/2), (0, 1/2), (1/2, 1): the point 1/2 lies in no open image.
    third = Fraction(1, 3)
    return MapDescription((
        Branch((Fraction(0), third), (Fraction(0), Fraction(3, 2))),
        Branch((third, 2 * third), (Fraction(-1, 2), Fraction(3, 2))),
        Branch((2 * third, Fraction(1)), (Fraction(-1, 2), Fraction(3, 2))),
    ))


def test_lebesgue_trivial_maps():
    assert lebesgue_number(make_beta_map(2.0)) == 1
    assert lebesgue_number(make_beta_map(GOLDEN)) == 1
    assert lebesgue_number(make_beta_map(1.9, 0.3)) == 1


def test_lebesgue_counterexample_exact():
    # Images (1/2, 1), (1/8, 7/8), (0, 1/2): windows just left of 1/8 must fit in (0, 1/2).
    assert lebesgue_number(counterexample_map(Fraction(1, 8))) == Fraction(3, 8)


@pytest.mark.parametrize("c", [Fraction(1, 8), Fraction(1, 16), Fraction(1, 5), Fraction(3, 13)])
def test_lebesgue_matches_sliding_window(c):
    t = counterexample_map(c)
    assert abs(float(lebesgue_number(t)) - sliding_window_lebesgue(t, 1e-4)) <= 2e-4


@pytest.mark.parametrize("tmap", all_maps(), ids=lambda t: t.label)
def test_lebesgue_matches_sliding_window_all_maps(tmap):
    assert abs(float(lebesgue_number(tmap)) - sliding_window_lebesgue(tmap, 1e-4)) <= 2e-4


def test_cover_failure():
    t = gapped_map()
    with pytest.raises(CoverError):
        lebesgue_number(t)
    q = q_partition(t, m=3, n_max=10)
    assert q.delta is None
    with pytest.raises(CoverError):
        check_diameter_bound(q)


@pytest.mark.parametrize("tmap", [make_beta_map(GOLDEN), make_beta_map(1.9, 0.3),
                                  make_beta_map(2.0), make_beta_map(2.5, 0.3)],
                         ids=lambda t: t.label)
def test_single_element(tmap):
    q = q_partition(tmap, m=6, n_max=40)
    assert q.to_dict()["elements"] == [[0.0, 1.0]]
    assert q.depth_certified == 6
    assert check_diameter_bound(q)


def test_counterexample_boundary_at_half():
    q = q_partition(counterexample_map(), m=6, n_max=40)
    assert q.elements == [(0.0, 0.5), (0.5, 1.0)]
    assert q.boundaries[0]["certified"]
    assert check_diameter_bound(q)
    assert q.same_element(0.1, 0.4) and not q.same_element(0.4, 0.6)


@pytest.mark.parametrize("tmap", all_maps(), ids=lambda t: t.label)
def test_refinement_monotone_in_m(tmap):
    prev = None
    for m in range(1, 7):
        q = q_partition(tmap, m=m, n_max=40)
        if prev is not None:
            for a, b in q.elements:
                assert any(pa - 1e-12 <= a and b <= pb + 1e-12 for pa, pb in prev.elements)
        prev = q


@pytest.mark.parametrize("tmap", all_maps(), ids=lambda t: t.label)
def test_diameter_bound(tmap):
    assert check_diameter_bound(q_partition(tmap, m=6, n_max=40))


def test_interval_oracle_agrees_with_partition():
    t = counterexample_map()
    q = q_partition(t, m=4, n_max=30)
    rng = np.random.default_rng(0)
    eps = 1e-4
    for z in rng.uniform(0.01, 0.99, 12):
        if abs(z - 0.5) < 2 * eps:
            continue
        assert interval_reachable(t, (z - eps, z + eps), 4, 30) == (q.element_of(z) is not None)
    assert not interval_reachable(t, (0.5 - eps, 0.5 + eps), 4, 30)


def test_interval_oracle_golden():
    t = make_beta_map(GOLDEN)
    for z in (0.1, 0.5, 0.618, 0.9):
        assert interval_reachable(t, (z - 1e-4, z + 1e-4), 5, 30)


def test_qpartition_json_shape():
    d = q_partition(make_beta_map(GOLDEN), m=3, n_max=10).to_dict()
    assert set(d) == {"delta", "depth_certified", "elements"}
    assert QPartition([(0.0, 1.0)], 3, 1.0, 3).same_element(0.2, 0.9)


def test_spectral_solution_regular_inside_elements():
    # The counterexample transfer function jumps at 1/2 only: the Q boundary.
    # Collocation smears the jump over a few cells, so a small window around it is excluded.
    ce = build_counterexample()
    q = q_partition(ce.tmap, m=6, n_max=40)
    n = 1 << 13
    sol = solve_spectral(ce.tmap, ce.phi, n_grid=n)
    assert sol.is_coboundary
    x, v = sol.chi.nodes, sol.chi.values
    steps = np.abs(np.diff(v))
    mids = 0.5 * (x[1:] + x[:-1])
    far = np.array([min(abs(m - b) for e in q.elements for b in e if 0 < b < 1) > 0.01
                    for m in mids])
    slope = np.max(np.abs(ce.chi.derivative(x, 1)))
    assert np.max(steps[far]) <= 5 * slope / n
    lo, hi = 0.5 - 0.01, 0.5 + 0.01
    assert sol.chi(hi) - sol.chi(lo) == pytest.approx(ce.chi(hi) - ce.chi(lo), abs=0.02)


def test_smooth_coboundary_has_no_internal_jumps():
    t = counterexample_map()
    chi0 = TrigPolynomial([0, 0.4], [0, 0.0, 0.3])
    q = q_partition(t, m=6, n_max=40)
    n = 1 << 12
    sol = solve_spectral(t, make_coboundary(t, chi0), n_grid=n)
    slope = np.max(np.abs(chi0.derivative(sol.chi.nodes, 1)))
    for a, b in q.elements:
        sel = (sol.chi.nodes > a) & (sol.chi.nodes < b)
        assert np.max(np.abs(np.diff(sol.chi.values[sel]))) <= 5 * slope / n
