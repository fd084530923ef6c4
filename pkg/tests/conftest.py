import math

from livsic.counterexample import counterexample_map
from livsic.interval_maps import Branch, MapDescription, make_beta_map

GOLDEN = (1 + math.sqrt(5)) / 2

_ACCEPTANCE_LINES = []


def nonlinear_map():
    """1.5x + x^2 on [0, 1/2] (slope 1.5..2.5) and the doubling branch on [1/2, 1]."""
    return MapDescription(
        (Branch((0.0, 0.5), (0.0, 1.5, 1.0)), Branch((0.5, 1.0), (-1.0, 2.0))),
        label="nonlinear",
    )


def all_maps():
    return [
        make_beta_map(2.0),
        make_beta_map(3.0),
        make_beta_map(GOLDEN),
        make_beta_map(2.5, 0.3),
        make_beta_map(1.9, 0.3),
        counterexample_map(),
        nonlinear_map(),
    ]


def record_acceptance(line: str) -> None:
    _ACCEPTANCE_LINES.append(line)


def pytest_terminal_summary(terminalreporter):
    if _ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in _ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
