import math
from pathlib import Path

import pytest

from models.atoms import PairingConfig
from pipeline.families import laurent_pair, projection_pair
from settings import Settings


@pytest.fixture
def settings() -> Settings:
    """Default settings, isolated from any .env in the working directory."""
    return Settings(_env_file=None)


@pytest.fixture
def tmp_settings(tmp_path: Path) -> Settings:
    """Settings whose data directory is a fresh temp dir (for registry tests that write files)."""
    (tmp_path / "data").mkdir()
    return Settings(_env_file=None, data_dir=tmp_path / "data")


@pytest.fixture
def pairing_config() -> PairingConfig:
    return PairingConfig()


@pytest.fixture
def projection_ops():
    """The biorthogonal pair on [0, 1]: A² = A and B = -A."""
    return projection_pair()


@pytest.fixture
def laurent_ops():
    """Laurent pair with γ_A3 = -2·ln2·γ_A2, so that AB = A² = 0 while BA ≠ 0."""
    ln2 = math.log(2.0)
    return laurent_pair((0.0, 0.0, 1.5, -2.0 * ln2 * 1.5), (0.0, 0.0, -0.7, 0.0))
