"""Shared fixtures. Heavy synthetic datasets are session-scoped."""

from __future__ import annotations

import numpy as np
import pytest

from planegaze.synthetic import default_scene, generate_scene


def random_unit_vectors(rng: np.random.Generator, n: int) -> np.ndarray:
    v = rng.normal(size=(n, 3))
    return v / np.linalg.norm(v, axis=1, keepdims=True)


def random_rotation(rng: np.random.Generator) -> np.ndarray:
    from planegaze.geometry import rotation_from_axis_angle

    axis = rng.normal(size=3)
    axis /= np.linalg.norm(axis)
    return rotation_from_axis_angle(axis * rng.uniform(0, np.pi * 0.95))


@pytest.fixture(scope="session")
def small_scene():
    return default_scene(frames=60, seed=1234, calib_views=8)


@pytest.fixture(scope="session")
def small_dataset(small_scene):
    return generate_scene(small_scene)
