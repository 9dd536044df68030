#!/usr/bin/env python3
"""
Shared test helpers and fixtures.

Test classes are ``unittest.TestCase`` subclasses, so the plain helper
functions below are imported directly; the fixtures serve function-style
tests.
"""
from typing import Tuple

import numpy as np
import pytest

from mgig_lab.config import reset_runtime_config, update_runtime_config
from mgig_lab.core.random_core import RngStream
from mgig_lab.utils.type_definitions import MgigParams


def random_spd(gen: np.random.Generator, p: int, jitter: float = 0.5) -> np.ndarray:
    """A well-conditioned random SPD matrix."""
    x = gen.standard_normal((p, p + 2))
    m = x @ x.T / (p + 2) + jitter * np.eye(p)
    return 0.5 * (m + m.T)


def random_params(
    gen: np.random.Generator, p: int, lambda_range: Tuple[float, float] = (-3.0, 4.0)
) -> MgigParams:
    return MgigParams(
        float(gen.uniform(*lambda_range)), random_spd(gen, p), random_spd(gen, p)
    )


def standard_error(draws: np.ndarray) -> np.ndarray:
    """Naive i.i.d. standard error of the mean along axis 0."""
    return draws.std(axis=0, ddof=1) / np.sqrt(draws.shape[0])


@pytest.fixture
def rng() -> RngStream:
    return RngStream(20260101, 7)


@pytest.fixture(autouse=True)
def quiet_progress():
    """Progress bars off for every test; runtime config restored afterwards."""
    update_runtime_config("progress", False)
    yield
    reset_runtime_config()
