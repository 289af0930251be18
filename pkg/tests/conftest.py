"""Shared test fixtures. Randomized tests seed from PERIWAVE_SEED (default 12345)."""

import os

import numpy as np
import pytest


def base_seed():
    return int(os.environ.get("PERIWAVE_SEED", "12345"))


@pytest.fixture
def rng():
    return np.random.default_rng(base_seed())
