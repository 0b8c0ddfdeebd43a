import math

import numpy as np
import pytest

from blindsr.scene import ArrayGeometry, Scene, SceneConfig, UserChannel, synthesize


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


def make_data(t, rng):
    s = 1.0 - rng.random(t)
    return (s / np.linalg.norm(s)).astype(complex)


def make_scene(geometry, user_angles, rng, t=4):
    """Scene with one active user per angle list, CN(0,1) gains, positive data."""
    users = []
    data = {}
    for k, angles in enumerate(user_angles):
        angles = np.atleast_1d(np.asarray(angles, dtype=float))
        gains = (rng.standard_normal(angles.size) + 1j * rng.standard_normal(angles.size)) / math.sqrt(2)
        users.append(UserChannel(angles=angles, gains=gains))
        data[k] = make_data(t, rng)
    return Scene(
        geometry=geometry,
        users=tuple(users),
        active_set=tuple(range(len(users))),
        data=data,
    )


def observe(scene, rng, m=None, snr_db=float("inf")):
    """Synthesize an observation for a hand-built scene."""
    n = scene.geometry.n_antennas
    cfg = SceneConfig(
        n_antennas=n,
        n_observed=m if m is not None else n,
        n_users=scene.n_users,
        n_active=scene.n_active,
        snapshots=scene.snapshots,
        l_max=max(u.n_paths for u in scene.users),
        snr_db=snr_db,
        delta_r=scene.geometry.delta_r,
    )
    return synthesize(scene, cfg, rng)


@pytest.fixture
def geom32():
    return ArrayGeometry(32)


@pytest.fixture
def geom16():
    return ArrayGeometry(16)
