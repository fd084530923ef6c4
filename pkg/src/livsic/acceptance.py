"""Acceptance criteria as plain functions returning :class:`CriterionResult`.

Each check records the measured quantities next to its threshold and its wall
time against the budget; ``passed`` requires both.
"""

from __future__ import annotations

import math
import os
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .cohomology import (
    Cocycle,
    chi_derivative_series,
    chi_difference,
    chi_higher_derivative,
    make_coboundary,
    solve_spectral,
    verify_cocycle,
)
from .counterexample import (
    CounterexampleSpec,
    build_counterexample,
    certify_smoothness,
    is_markov,
    markov_points,
)
from .functions import Polynomial, random_trig
from .interval_maps import make_beta_map
from .oracles import orbit_histogram, parry_density
from .reachability import (
    check_diameter_bound,
    lebesgue_number,
    q_partition,
    sliding_window_lebesgue,
)
from .transfer_operator import apply_transfer_power, spectral_data

GOLDEN = (1 + math.sqrt(5)) / 2


def worker_count() -> int:
    """Worker cap from ``LIVSIC_THREADS`` (default: CPU count)."""
    env = os.environ.get("LIVSIC_THREADS")
    if env:
        try:
            return max(1, int(env))
        except ValueError:
            pass
    return os.cpu_count() or 1


@dataclass
class Check:
    name: str
    value: float
    threshold: float
    passed: bool

    def to_dict(self) -> dict:
        return {"name": self.name, "value": self.value, "threshold": self.threshold, "pass": self.passed}


@dataclass
class CriterionResult:
    number: int
    title: str
    checks: list = field(default_factory=list)
    seconds: float = 0.0
    budget: float = math.inf

    @property
    def within_budget(self) -> bool:
        return self.seconds < self.budget

    @property
    def passed(self) -> bool:
        return self.within_budget and all(c.passed for c in self.checks)

    def add(self, name: str, value: float, threshold: float, ok: bool) -> None:
        self.checks.append(Check(name, float(value), float(threshold), bool(ok)))

    def line(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        detail = ", ".join(
            f"{c.name}={c.value:.3g} (thr {c.threshold:.3g}{'' if c.passed else ', FAIL'})"
            for c in self.checks
        )
        return f"[{status}] {self.number}. {self.title}: {detail}; {self.seconds:.1f}s/{self.budget:g}s"

    def to_dict(self) -> dict:
        return {
            "criterion": self.number,
            "title": self.title,
            "pass": self.passed,
            "seconds": self.seconds,
            "budget": self.budget,
            "checks": [c.to_dict() for c in self.checks],
        }


def _timed(number, title, budget):
    def wrap(fn):
        def run(*args, **kwargs):
            res = CriterionResult(number, title, budget=budget)
            t0 = time.perf_counter()
            fn(res, *args, **kwargs)
            res.seconds = time.perf_counter() - t0
            return res

        run.__name__ = fn.__name__
        run.__doc__ = fn.__doc__
        return run

    return wrap


def round_trip_cases(seed: int = 0, n: int = 20) -> list:
    """``n`` random trigonometric ``chi0`` (degree <= 5), each paired with beta = 2 and 3."""
    rng = np.random.default_rng(seed)
    chis = [random_trig(rng, 5) for _ in range(n)]
    return [(beta, chi) for chi in chis for beta in (2, 3)]


def _round_trip(case, n_grid):
    beta, chi0 = case
    tmap = make_beta_map(float(beta))
    phi = make_coboundary(tmap, chi0)
    sol = solve_spectral(tmap, phi, n_grid=n_grid)
    diff = sol.chi.values - chi0(sol.chi.nodes)
    return {
        "a_err": abs(sol.a - 1.0),
        "chi_err": 0.5 * float(np.max(diff) - np.min(diff)),
        "residual": sol.residual_sup,
        "var_err": abs(sol.variation - chi0.variation()),
    }


def _round_trips(seed: int, n_grid: int) -> list:
    cases = round_trip_cases(seed)
    with ThreadPoolExecutor(max_workers=worker_count()) as pool:
        return list(pool.map(lambda c: _round_trip(c, n_grid), cases))


@_timed(1, "doubling-map density", 5.0)
def criterion_1(res: CriterionResult, seed: int = 0) -> None:
    sd = spectral_data(make_beta_map(2.0), None, 1 << 12)
    res.add("sup|h-1|", np.max(np.abs(sd.h.values - 1.0)), 1e-8, np.max(np.abs(sd.h.values - 1.0)) <= 1e-8)
    res.add("|lambda0-1|", abs(sd.h_eigenvalue - 1.0), 1e-10, abs(sd.h_eigenvalue - 1.0) <= 1e-10)


@_timed(2, "golden-beta Parry density", 30.0)
def criterion_2(res: CriterionResult, seed: int = 0) -> None:
    tmap = make_beta_map(GOLDEN)
    h = spectral_data(tmap, None, 4096).h
    x = h.nodes
    left = x < 1 / GOLDEN - 1.0 / 4096
    right = x > 1 / GOLDEN + 1.0 / 4096
    ref = parry_density(GOLDEN, np.array([0.25, 0.75]))
    res.add("left plateau err", abs(h.values[left].mean() - ref[0]), 1e-2,
            abs(h.values[left].mean() - ref[0]) <= 1e-2)
    res.add("right plateau err", abs(h.values[right].mean() - ref[1]), 1e-2,
            abs(h.values[right].mean() - ref[1]) <= 1e-2)
    bins = 64
    hist = orbit_histogram(tmap, n_points=10**7, bins=bins, seed=seed)
    centers = (np.arange(bins) + 0.5) / bins
    l1 = float(np.mean(np.abs(hist - parry_density(GOLDEN, centers))))
    res.add("orbit histogram L1", l1, 0.02, l1 <= 0.02)
    l1h = float(np.mean(np.abs(hist - np.array([h.values[(x >= i / bins) & (x < (i + 1) / bins)].mean()
                                                for i in range(bins)]))))
    res.add("histogram vs h L1", l1h, 0.02, l1h <= 0.02)


@_timed(3, "coboundary eigenvalue a = 1", 60.0)
def criterion_3(res: CriterionResult, seed: int = 0) -> None:
    out = _round_trips(seed, 1 << 14)
    worst = max(r["a_err"] for r in out)
    res.add("max |a-1| (round trips)", worst, 1e-6, worst <= 1e-6)
    tmap = make_beta_map(2.0)
    sol = solve_spectral(tmap, Cocycle(Polynomial([0.0, 1.0])), n_grid=1 << 14)
    res.add("|a-1| for phi=x (must exceed)", abs(sol.a - 1.0), 1e-3, abs(sol.a - 1.0) > 1e-3)


@_timed(4, "spectral reconstruction of chi0", 120.0)
def criterion_4(res: CriterionResult, seed: int = 0) -> None:
    out = _round_trips(seed, 1 << 14)
    for key, name, thr in (("chi_err", "max |chi-chi0-c|", 1e-3),
                           ("residual", "max residual", 1e-6),
                           ("var_err", "max |Var chi - Var chi0|", 0.05)):
        worst = max(r[key] for r in out)
        res.add(name, worst, thr, worst <= thr)


@_timed(5, "derivative series", 30.0)
def criterion_5(res: CriterionResult, seed: int = 0) -> None:
    rng = np.random.default_rng(seed + 5)
    d1, dfd, d2 = 0.0, 0.0, 0.0
    for beta in (2.0, 3.0):
        tmap = make_beta_map(beta)
        chi0 = random_trig(rng, 5)
        phi = make_coboundary(tmap, chi0)
        xs = rng.uniform(0.01, 0.99, 50)
        for x in xs:
            s = chi_derivative_series(tmap, phi, x, n_trunc=60)
            d1 = max(d1, abs(s.value - chi0.derivative(x, 1)))
            h = 1e-5
            fd = chi_difference(tmap, phi, x + h, x - h, 60).value / (2 * h)
            dfd = max(dfd, abs(fd - s.value))
            s2 = chi_higher_derivative(tmap, phi, x, 2, n_trunc=60)
            d2 = max(d2, abs(s2.value - chi0.derivative(x, 2)))
    res.add("max |series - chi0'|", d1, 1e-6, d1 <= 1e-6)
    res.add("max |series - FD(chi_difference)|", dfd, 1e-4, dfd <= 1e-4)
    res.add("max |order2 - chi0''|", d2, 1e-5, d2 <= 1e-5)


@_timed(6, "counterexample certification", 10.0)
def criterion_6(res: CriterionResult, seed: int = 0) -> None:
    ce = build_counterexample(CounterexampleSpec(Fraction(1, 8), 3))
    r = verify_cocycle(ce.tmap, ce.phi, ce.chi).sup
    res.add("residual", r, 1e-12, r <= 1e-12)
    pts = [float(p) for p in ce.partition]
    phi_rep = certify_smoothness(ce.phi, pts, 3)
    res.add("phi jet mismatch orders 0..3", phi_rep.max_mismatch, 1e-6, phi_rep.passed)
    fails = certify_smoothness(ce.chi, pts, 3).failures()
    single = len(fails) == 1 and fails[0]["x"] == 0.5 and fails[0]["order"] == 0
    jump = fails[0]["mismatch"] if single else math.nan
    res.add("chi failures (only 1/2, order 0)", len(fails), 1, single)
    res.add("|jump - 1|", abs(jump - 1.0), 1e-12, single and abs(jump - 1.0) <= 1e-12)
    res.add("Markov (exact)", float(is_markov(ce.tmap, markov_points(ce.spec))), 1,
            is_markov(ce.tmap, markov_points(ce.spec)))


@_timed(7, "partition Q and Lebesgue number", 120.0)
def criterion_7(res: CriterionResult, seed: int = 0) -> None:
    maps = {
        "golden": make_beta_map(GOLDEN),
        "beta1.9+0.3": make_beta_map(1.9, 0.3),
        "counterexample": build_counterexample().tmap,
    }
    qs = {k: q_partition(t, m=6, n_max=40) for k, t in maps.items()}
    for k in ("golden", "beta1.9+0.3"):
        single = [tuple(e) for e in qs[k].elements] == [(0.0, 1.0)]
        res.add(f"{k}: elements", len(qs[k].elements), 1, single)
    ends = {v for e in qs["counterexample"].elements for v in e}
    res.add("counterexample boundary at 1/2", float(0.5 in ends), 1, 0.5 in ends)
    for k, q in qs.items():
        res.add(f"{k}: diameter >= delta/2", float(check_diameter_bound(q)), 1, check_diameter_bound(q))
    delta = float(lebesgue_number(maps["counterexample"]))
    oracle = sliding_window_lebesgue(maps["counterexample"], 1e-4)
    res.add("|delta - oracle|", abs(delta - oracle), 2e-4, abs(delta - oracle) <= 2e-4)
    res.add("|delta - 0.125|", abs(delta - 0.125), 2e-4, abs(delta - 0.125) <= 2e-4)


@_timed(8, "conjugation identity", 5.0)
def criterion_8(res: CriterionResult, seed: int = 0) -> None:
    rng = np.random.default_rng(seed + 8)
    worst = 0.0
    for beta in (2.0, 3.0):
        tmap = make_beta_map(beta)
        chi0 = random_trig(rng, 5)
        phi = make_coboundary(tmap, chi0)
        xs = rng.uniform(0, 1, 10)
        for n in range(1, 6):
            for x in xs:
                lhs = apply_transfer_power(tmap, phi, lambda y: 1.0, x, n)
                rhs = math.exp(chi0(x)) * apply_transfer_power(
                    tmap, None, lambda y: math.exp(-chi0(y)), x, n)
                worst = max(worst, abs(lhs - rhs))
    res.add("max |L_phi^n 1 - e^chi0 L_0^n e^-chi0|", worst, 1e-10, worst <= 1e-10)


CRITERIA = (criterion_1, criterion_2, criterion_3, criterion_4,
            criterion_5, criterion_6, criterion_7, criterion_8)


def run_all(seed: int = 0, only=None) -> list:
    out = []
    for k, fn in enumerate(CRITERIA, start=1):
        if only and k not in only:
            continue
        out.append(fn(seed=seed))
    return out
