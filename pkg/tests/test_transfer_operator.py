import math

import numpy as np
import pytest

from conftest import GOLDEN, nonlinear_map
from livsic.counterexample import CounterexampleSpec, counterexample_map, markov_points
from livsic.functions import TrigPolynomial
from livsic.interval_maps import inverse_images, make_beta_map
from livsic.oracles import markov_density, orbit_histogram, parry_density, ulam_density
from livsic.transfer_operator import (
    MAX_GRID,
    GridFunction,
    apply_transfer_pointwise,
    apply_transfer_power,
    discretize,
    grid_nodes,
    invariant_density,
    leading_eigendata,
    spectral_data,
    variation_estimate,
)


def test_doubling_density_is_one():
    sd = spectral_data(make_beta_map(2.0), None, 4096)
    assert np.max(np.abs(sd.h.values - 1.0)) <= 1e-8
    assert abs(sd.h_eigenvalue - 1.0) <= 1e-10


def test_parry_oracle_values():
    vals = parry_density(GOLDEN, [0.3, 0.9])
    assert vals[0] == pytest.approx(GOLDEN / (2 - 1 / GOLDEN), rel=1e-12)
    assert vals == pytest.approx([1.1708203932499369, 0.7236067977499790], rel=1e-12)


def test_golden_density_plateaus():
    h = invariant_density(make_beta_map(GOLDEN), 4096)
    x = h.nodes
    left = h.values[x < 1 / GOLDEN - 1e-3].mean()
    right = h.values[x > 1 / GOLDEN + 1e-3].mean()
    assert left == pytest.approx(1.17082, abs=1e-2)
    assert right == pytest.approx(0.72361, abs=1e-2)
    assert h.integral() == pytest.approx(1.0, abs=1e-12)


def test_golden_density_matches_ulam_and_histogram():
    t = make_beta_map(GOLDEN)
    h = invariant_density(t, 1024)
    u = ulam_density(t, 1024)
    assert np.mean(np.abs(h.values - u)) <= 0.02
    hist = orbit_histogram(t, n_points=10**6, bins=32, seed=1)
    coarse = h.values.reshape(32, -1).mean(axis=1)
    assert np.mean(np.abs(hist - coarse)) <= 0.03


def test_counterexample_density_matches_markov_chain():
    spec = CounterexampleSpec()
    t = counterexample_map(spec.c)
    pts, vals = markov_density(t, markov_points(spec))
    h = invariant_density(t, 4096)
    idx = np.searchsorted([float(p) for p in pts], h.nodes, side="right") - 1
    exact = np.array([float(vals[i]) for i in idx])
    assert np.mean(np.abs(h.values - exact)) <= 2e-3
    # away from the jumps the agreement is much tighter
    far = np.min(np.abs(h.nodes[:, None] - np.array([float(p) for p in pts])[None, :]), axis=1) > 0.01
    assert np.max(np.abs(h.values[far] - exact[far])) <= 1e-3


def test_nonlinear_density_is_fixed_by_exact_operator():
    t = nonlinear_map()
    h = invariant_density(t, 8192)
    xs = np.linspace(0.05, 0.95, 9)
    lh = [apply_transfer_pointwise(t, None, h, x) for x in xs]
    assert np.max(np.abs(np.array(lh) - h(xs))) <= 1e-4


def test_discretized_operator_preserves_constants_for_doubling():
    op = discretize(make_beta_map(2.0), None, 256)
    assert np.allclose(op @ np.ones(256), 1.0, atol=1e-14)


def test_leading_eigendata_left_and_right():
    t = make_beta_map(3.0)
    psi = TrigPolynomial([0, 0.3], [0, 0.2])
    op = discretize(t, psi, 1024)
    lam, right, left = leading_eigendata(op)
    assert np.max(np.abs(op @ right - lam * right)) <= 1e-9
    assert np.max(np.abs(op.T @ left - lam * left)) <= 1e-9
    assert right.min() > 0 and left.min() > 0


def test_transfer_power_matches_recursive_sum():
    t = make_beta_map(2.5, 0.3)
    psi = TrigPolynomial([0, 0.5], [0, 0.1, 0.3])

    def rec(x, n):
        if n == 0:
            return math.cos(3 * x)
        return sum(
            math.exp(psi(y)) / abs(float(t.branches[k].derivative(y))) * rec(y, n - 1)
            for y, k in inverse_images(t, x)
        )

    xs = np.array([0.0, 0.13, 0.5, 0.77, 1.0])
    got = apply_transfer_power(t, psi, lambda y: np.cos(3 * y), xs, 3)
    assert np.max(np.abs(got - [rec(x, 3) for x in xs])) <= 1e-13


def test_transfer_of_density_integrates_to_one():
    t = nonlinear_map()
    h = invariant_density(t, 2048)
    x = grid_nodes(2048)
    lh = apply_transfer_power(t, None, h, x, 2)
    assert np.mean(lh) == pytest.approx(1.0, abs=1e-4)


def test_grid_function_csv_roundtrip(tmp_path):
    g = GridFunction(np.sin(np.arange(17.0)))
    path = tmp_path / "g.csv"
    g.to_csv(path)
    back = GridFunction.from_csv(path)
    assert np.array_equal(back.values, g.values)
    assert path.read_text().splitlines()[0] == "x,value"


def test_grid_function_interpolation_and_variation():
    g = GridFunction(grid_nodes(64) * 2.0)
    assert g(0.3) == pytest.approx(0.6, abs=1e-14)
    # linear extrapolation in the boundary half-cells
    assert g(0.0) == pytest.approx(0.0, abs=1e-14)
    assert variation_estimate(g) == pytest.approx(2.0 * (1 - 1 / 64))


def test_grid_budget():
    with pytest.raises(ValueError):
        discretize(make_beta_map(2.0), None, MAX_GRID + 1)
