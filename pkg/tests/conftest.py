import functools

import pytest

from posmod.analysis import enumerate_models
from posmod.corpus import corpus_cycles, group_theory


@functools.lru_cache(maxsize=None)
def cycle_theory(variant, n=None, cap=None):
    return corpus_cycles(variant, n, cap)[0]


@functools.lru_cache(maxsize=None)
def cycle_universe(variant, bound, n=None, cap=None):
    return enumerate_models(cycle_theory(variant, n, cap), bound)


@functools.lru_cache(maxsize=None)
def group_universe(bound):
    return enumerate_models(group_theory()[0], bound)


@pytest.fixture(scope="session")
def t4_6():
    return cycle_universe("Tn", 6, 4, 6)


@pytest.fixture(scope="session")
def t4_5():
    return cycle_universe("Tn", 5, 4, 5)


@pytest.fixture(scope="session")
def t6_8():
    return cycle_universe("Tn", 8, 6, 8)


@pytest.fixture(scope="session")
def tprime_4():
    return cycle_universe("Tprime", 4)


@pytest.fixture(scope="session")
def t_5():
    return cycle_universe("T", 5)


def pytest_terminal_summary(terminalreporter):
    try:
        from test_acceptance import RESULTS
    except ImportError:
        return
    if RESULTS:
        terminalreporter.section("acceptance criteria")
        for line in RESULTS:
            terminalreporter.write_line(line)
