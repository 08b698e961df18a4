from __future__ import annotations

import random

import pytest
from hypothesis import strategies as st

from altfolner.perm import Permutation, alternating_group


def perms(d: int):
    return st.permutations(list(range(1, d + 1))).map(Permutation)


def evens(d: int):
    return st.sampled_from(alternating_group(d))


@pytest.fixture
def rng():
    return random.Random(20240601)


ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
