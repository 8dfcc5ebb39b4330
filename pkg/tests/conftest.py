import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

from fixtures import (campus_scene, ground_plane_scene, build_library)  # noqa: E402


@pytest.fixture(scope="session")
def library():
    return build_library()


@pytest.fixture(scope="session")
def ground_scene():
    return ground_plane_scene()


@pytest.fixture(scope="session")
def campus():
    return campus_scene(n_buildings=10, seed=7)


@pytest.fixture()
def rng():
    return np.random.default_rng(1234)
