import sys

import numpy as np
import pytest

from compstat.poset import build_poset


@pytest.fixture
def rng():
    return np.random.default_rng(20261016)


@pytest.fixture
def diamond_poset():
    return build_poset(["bot", "x", "y", "top"], [("bot", "x"), ("bot", "y"), ("x", "top"), ("y", "top")])


def random_simplex(rng, n, floor=0.05):
    p = rng.random(n) + floor
    return p / p.sum()


def pytest_terminal_summary(terminalreporter):
    mod = sys.modules.get("test_acceptance")
    if mod is None or not mod.LINES:
        return
    terminalreporter.section("acceptance criteria")
    for line in sorted(mod.LINES, key=lambda s: int(s.split()[1].rstrip(":"))):
        terminalreporter.write_line(line)
