import random
from pathlib import Path

import pytest

from stableqa.engine import ground, parse_program, render, solve

DATA = Path(__file__).parent.parent / "data" / "fixtures"


def pytest_addoption(parser):
    parser.addoption("--runslow", action="store_true", default=False, help="run slow acceptance tests")


def pytest_configure(config):
    config.addinivalue_line("markers", "slow: long acceptance runs, enabled with --runslow")


def pytest_collection_modifyitems(config, items):
    if config.getoption("--runslow"):
        return
    skip_slow = pytest.mark.skip(reason="needs --runslow")
    for item in items:
        if "slow" in item.keywords:
            item.add_marker(skip_slow)


def answer_sets(text, max_models=0, **kwargs):
    """All answer sets of ``text`` as a set of frozensets of rendered atoms."""
    result = solve(ground(parse_program(text)), max_models=max_models, **kwargs)
    return {frozenset(render(a) for a in s.atoms) for s in result.answer_sets}


@pytest.fixture
def models():
    return answer_sets


@pytest.fixture
def rng():
    return random.Random(1234)


@pytest.fixture(scope="session")
def fixtures_dir():
    return DATA
