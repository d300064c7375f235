"""Shared fixtures: the 8-vertex micro example and acceptance reporting."""

from __future__ import annotations

import numpy as np
import pytest

from nearchain import graph as graphmod

# The 8-vertex / 13-edge worked micro example used across the suite.
# Known facts: degree(1) = 5, degree(5) = 2, support(1,2) = 3,
# support(2,7) = 1, {0,1,3,4} is a maximal 4-clique, and density
# clustering at k = 3 yields one cluster covering the whole graph.
FIG_N = 8
FIG_EDGES = [
    (0, 1), (0, 3), (0, 4),
    (1, 2), (1, 3), (1, 4), (1, 7),
    (2, 3), (2, 4), (2, 7),
    (3, 4),
    (4, 5),
    (5, 6),
]


@pytest.fixture
def fig_graph() -> graphmod.EventGraph:
    return graphmod.build_graph(FIG_N, FIG_EDGES)


def random_graph(rng: np.random.Generator, n: int, p: float):
    """Random simple graph as (n, edge list)."""
    edges = [
        (u, v)
        for u in range(n)
        for v in range(u + 1, n)
        if rng.random() < p
    ]
    return n, edges


# ------------------------------------------------- acceptance reporting

_acceptance_lines: list[tuple[int, bool, str]] = []


@pytest.fixture
def acceptance():
    """Record one ACCEPTANCE line; printed in the terminal summary."""

    def _record(number: int, passed: bool, label: str) -> None:
        _acceptance_lines.append((number, passed, label))

    return _record


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if not _acceptance_lines:
        return
    terminalreporter.section("acceptance criteria")
    for number, passed, label in sorted(_acceptance_lines):
        verdict = "PASS" if passed else "FAIL"
        terminalreporter.write_line(f"ACCEPTANCE {number} {verdict} {label}")
