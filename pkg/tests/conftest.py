# tests/conftest.py
import os

# keep test runs off the log directory; must precede any src import
os.environ.setdefault("HOTSPOTS_LOG_TO_FILE", "false")
os.environ.setdefault("HOTSPOTS_LOG_LEVEL", "WARNING")
os.environ.setdefault("HOTSPOTS_THREADS", "1")

import numpy as np
import pytest

from src.geometry.builtins import builtin_domain
from src.mesh.generators import generate_mesh


@pytest.fixture
def unit_square():
    return builtin_domain("rectangle", {})


@pytest.fixture
def centered_square():
    return builtin_domain("rectangle", {"a": 2.0, "b": 2.0, "centered": True})


@pytest.fixture
def square_mesh(unit_square):
    return generate_mesh(unit_square, 0.25)


@pytest.fixture
def fine_square_mesh(unit_square):
    return generate_mesh(unit_square, 0.1)


@pytest.fixture
def rng():
    return np.random.default_rng(0)


@pytest.fixture
def out_dir(tmp_path, monkeypatch):
    monkeypatch.chdir(tmp_path)
    return tmp_path
