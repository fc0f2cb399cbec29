from __future__ import annotations

from importlib.resources import files
from math import comb

import pytest

from catalytic.model import build_step_table, load_system


def fixture_text(name: str) -> str:
    return files("catalytic.fixtures").joinpath(name).read_text()


def catalan(m: int) -> int:
    return comb(2 * m, m) // (m + 1)


@pytest.fixture(scope="session")
def dyck():
    return load_system(fixture_text("dyck.json"))[0]


@pytest.fixture(scope="session")
def long_jump():
    return load_system(fixture_text("long_jump.json"))[0]


@pytest.fixture(scope="session")
def dyck_table(dyck):
    return build_step_table(dyck)


@pytest.fixture(scope="session")
def long_jump_table(long_jump):
    return build_step_table(long_jump)
