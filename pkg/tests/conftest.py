import numpy as np
import pytest

from cornergeo.corner import CornerFields
from cornergeo.family import preset_structure
from cornergeo.fields import ChartDomain

PRESET_NAMES = ("A", "B", "C", "D")


@pytest.fixture(scope="session")
def structures():
    """The four bundled chart presets, built once."""
    return {name: preset_structure(name) for name in PRESET_NAMES}


@pytest.fixture(scope="session")
def corner_fields(structures):
    """Frame-field caches shared across tests (memoized per point)."""
    return {name: CornerFields(s) for name, s in structures.items()}


@pytest.fixture(scope="session")
def points():
    """A fixed batch of 20 interior sample points."""
    return ChartDomain().sample(20, 2025)


@pytest.fixture
def rng():
    return np.random.default_rng(1234)
