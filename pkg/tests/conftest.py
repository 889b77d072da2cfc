import os
import random
import sys
from pathlib import Path

import pytest

sys.path.insert(0, os.path.dirname(os.path.dirname(os.path.abspath(__file__))))

from utils.config import reset_settings
from utils.exact_core import IntMatrix, determinant

DATA_DIR = Path(__file__).resolve().parent.parent / "data"

COPRIME_ENV = (
    "COPRIME_LOG_LEVEL",
    "COPRIME_SEED",
    "COPRIME_FORMAT",
    "COPRIME_ORACLE",
    "COPRIME_THRESHOLD",
    "COPRIME_SVG_SCALE",
)


def pytest_configure(config):
    config.addinivalue_line("markers", "slow: heavier exhaustive sweeps (D = 5, 6)")


@pytest.fixture(autouse=True)
def clean_settings(monkeypatch, tmp_path):
    """Every test starts from default settings and an empty working directory."""
    for name in COPRIME_ENV:
        monkeypatch.delenv(name, raising=False)
    monkeypatch.chdir(tmp_path)
    reset_settings()
    yield
    reset_settings()


@pytest.fixture
def data_dir() -> Path:
    return DATA_DIR


@pytest.fixture
def rng() -> random.Random:
    return random.Random(20240613)


@pytest.fixture
def fig1_matrix() -> IntMatrix:
    return IntMatrix.from_rows([[2, 3], [1, 4]])


def random_matrix(rng: random.Random, dim: int, bound: int) -> IntMatrix:
    return IntMatrix(dim, dim, tuple(rng.randint(-bound, bound) for _ in range(dim * dim)))


def random_nonsingular(rng: random.Random, dim: int, bound: int, max_det=None) -> IntMatrix:
    while True:
        matrix = random_matrix(rng, dim, bound)
        det = determinant(matrix)
        if det != 0 and (max_det is None or abs(det) <= max_det):
            return matrix
