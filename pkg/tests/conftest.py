"""Shared fixtures and hypothesis profiles."""

import logging
import os

import numpy as np
import pytest
from hypothesis import settings

from wml.common.tensor_utils import LIMITS
from wml.engine.config import LOWER, RAISE, SIGMA_X, SIGMA_Z

settings.register_profile("fast", max_examples=15, deadline=None)
settings.register_profile("ci", max_examples=100, deadline=None)
settings.load_profile(os.environ.get("HYPOTHESIS_PROFILE", "fast"))


@pytest.fixture
def rng() -> np.random.Generator:
    return np.random.default_rng(20261019)


@pytest.fixture(autouse=True)
def _restore_limits():
    saved = (LIMITS.max_entries, LIMITS.default_tol, LIMITS.invariant_tol)
    yield
    LIMITS.max_entries, LIMITS.default_tol, LIMITS.invariant_tol = saved


@pytest.fixture
def qubit_ops() -> dict[str, np.ndarray]:
    return {"lower": LOWER, "raise": RAISE, "x": SIGMA_X, "z": SIGMA_Z}


@pytest.fixture(autouse=True)
def _reset_cli_logging():
    yield
    logger = logging.getLogger("wml")
    logger.handlers.clear()
    logger.setLevel(logging.NOTSET)
