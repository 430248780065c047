"""Shared problems and solved states (solved once per session)."""

from __future__ import annotations

import pytest

from diracnodes import ProblemSpec, hellmann, laser_dressed_coulomb, solve_state


def hellmann_problem(tau: int, d: int = 5, j: float = 1.5) -> ProblemSpec:
    return ProblemSpec(d, 1.0, hellmann(0.7, 0.5, 0.25), j=j, tau=tau)


def laser_problem(parity: str) -> ProblemSpec:
    return ProblemSpec(1, 1.0, laser_dressed_coulomb(0.9, 0.5), parity=parity)


@pytest.fixture(scope="session")
def states():
    """Lazily solved reference states keyed by a short name."""
    cache = {}
    recipes = {
        "line_even_4": (lambda: laser_problem("u1_even"), 4),
        "line_odd_3": (lambda: laser_problem("u1_odd"), 3),
        "plus_0": (lambda: hellmann_problem(1), 0),
        "plus_5": (lambda: hellmann_problem(1), 5),
        "minus_0": (lambda: hellmann_problem(-1), 0),
        "minus_5": (lambda: hellmann_problem(-1), 5),
    }

    def get(name):
        if name not in cache:
            make, n1 = recipes[name]
            cache[name] = solve_state(make(), n1)
        return cache[name]

    return get
