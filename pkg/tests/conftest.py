from functools import lru_cache

import pytest

from attackaware.arena import build_arena
from attackaware.bundled import bundled_spec
from attackaware.solve import solve_pipeline
from attackaware.strategy import extract


@lru_cache(maxsize=None)
def case_spec(name, include_no_attack=True):
    return bundled_spec(name, include_no_attack)


@lru_cache(maxsize=None)
def solved(name, initial="s6", include_no_attack=True):
    """(spec, arena, solution, table) for a bundled case rooted at P1(initial, {initial})."""
    spec = case_spec(name, include_no_attack)
    spec = spec.with_initial(spec.state_index(initial))
    arena = build_arena(spec)
    solution = solve_pipeline(arena)
    return spec, arena, solution, extract(arena, solution.belief)


def S(spec, *names):
    """State mask from names."""
    mask = 0
    for n in names:
        mask |= 1 << spec.state_index(n)
    return mask


def act(spec, a, sigma):
    return spec.action_names.index(a), spec.query_names.index(sigma)


@pytest.fixture
def case1():
    return case_spec("case1")


@pytest.fixture
def case2():
    return case_spec("case2")


@pytest.fixture
def case3():
    return case_spec("case3")


ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
