from pathlib import Path

import numpy as np
import pytest
from hypothesis import strategies as st

from vfnif.data.synthetic import synthetic_backbone
from vfnif.model.config import ModelConfig

FIXTURES = Path(__file__).parent / "fixtures"


@pytest.fixture
def fixtures_dir() -> Path:
    return FIXTURES


@pytest.fixture
def tiny_cfg() -> ModelConfig:
    return ModelConfig(n_layers=2, d_q=6, d_v=16, d_e=8, knn_k=4, n_rbf=4, heads=4)


@pytest.fixture
def structure():
    return synthetic_backbone(8, seed=3)


@st.composite
def seeds(draw) -> int:
    return draw(st.integers(min_value=0, max_value=2**31 - 1))


@st.composite
def unit_vectors(draw) -> np.ndarray:
    rng = np.random.default_rng(draw(seeds()))
    v = rng.normal(size=3)
    return v / np.linalg.norm(v)
