from __future__ import annotations

import pytest

from ckstab.serialize import load_model
from ckstab.cli import resolve_model_path

FIXTURE_NAMES = [
    "p1_halves", "p1_skew", "p1_thirds",
    "p2_halves", "p2_steps",
    "p1xp1_symmetric",
    "bl1p2_halves", "bl1p2_hsplit",
]

CANONICAL = ["p1_halves", "p2_halves", "p1xp1_symmetric", "bl1p2_halves"]


def _load(name):
    return load_model(resolve_model_path(name + ".json"))


@pytest.fixture(scope="session")
def models():
    return {name: _load(name) for name in FIXTURE_NAMES}


@pytest.fixture(scope="session")
def p1(models):
    return models["p1_halves"]


@pytest.fixture(scope="session")
def p1_skew(models):
    return models["p1_skew"]


@pytest.fixture(scope="session")
def p2(models):
    return models["p2_halves"]


@pytest.fixture(scope="session")
def p2_steps(models):
    return models["p2_steps"]


@pytest.fixture(scope="session")
def p1xp1(models):
    return models["p1xp1_symmetric"]


@pytest.fixture(scope="session")
def bl1p2(models):
    return models["bl1p2_halves"]


@pytest.fixture(scope="session")
def bl1p2_hsplit(models):
    return models["bl1p2_hsplit"]
