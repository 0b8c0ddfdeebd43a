import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from blindsr.cluster import build_user_estimates, kmeans_angles
from blindsr.errors import ClusteringDegeneracyError, UnderDetectionError
from blindsr.scene import ArrayGeometry, steering_vector


def test_two_obvious_groups(rng):
    angles = [0.50, 0.52, 1.50, 1.55]
    result = kmeans_angles(angles, 2, rng=rng)
    assert set(result.labels.tolist()) == {0, 1}
    assert result.labels[0] == result.labels[1]
    assert result.labels[2] == result.labels[3]
    assert result.labels[0] != result.labels[2]


def test_single_cluster_center_is_mean(rng):
    angles = [0.2, 0.9, 1.4, 2.8]
    result = kmeans_angles(angles, 1, rng=rng)
    assert result.centers[0] == pytest.approx(np.mean(angles))
    assert np.all(result.labels == 0)


def test_recovers_generating_partition(rng):
    """60 angles from 3 separated clusters label exactly by origin."""
    centers = [0.5, 1.5, 2.5]
    truth = []
    angles = []
    for j, c in enumerate(centers):
        pts = c + rng.uniform(-0.05, 0.05, size=20)
        angles.extend(pts.tolist())
        truth.extend([j] * 20)
    result = kmeans_angles(angles, 3, rng=rng)
    # label values are arbitrary; the partition must match
    mapping = {}
    for lab, tru in zip(result.labels, truth):
        mapping.setdefault(tru, lab)
        assert mapping[tru] == lab
    assert len(set(mapping.values())) == 3


def test_underdetection_error(rng):
    with pytest.raises(UnderDetectionError):
        kmeans_angles([1.0, 2.0], 3, rng=rng)


def test_deterministic_under_seed():
    angles = np.random.default_rng(8).uniform(0.1, 3.0, size=30)
    r1 = kmeans_angles(angles, 4, rng=np.random.default_rng(11))
    r2 = kmeans_angles(angles, 4, rng=np.random.default_rng(11))
    assert np.array_equal(r1.labels, r2.labels)
    assert np.allclose(r1.centers, r2.centers)


def test_centers_sorted_canonically(rng):
    angles = rng.uniform(0.1, 3.0, size=25)
    result = kmeans_angles(angles, 5, rng=rng)
    assert np.all(np.diff(result.centers) > 0)


@given(seed=st.integers(0, 2**16), k=st.integers(1, 4))
@settings(max_examples=30, deadline=None)
def test_partition_covers_all_angles(seed, k):
    rng = np.random.default_rng(seed)
    angles = rng.uniform(0.1, 3.0, size=12)
    result = kmeans_angles(angles, k, restarts=10, rng=rng)
    assert result.labels.size == 12
    counts = np.bincount(result.labels, minlength=k)
    assert counts.sum() == 12
    assert np.all(counts > 0)


def test_separation_ten_times_spread_always_recovers():
    """Well-separated generating partitions come back exactly, 50 seeds."""
    spread = 0.03
    centers = np.array([0.5, 1.4, 2.3])  # separation 0.9 = 30x spread
    for seed in range(50):
        rng = np.random.default_rng(seed)
        angles = []
        truth = []
        for j, c in enumerate(centers):
            pts = c + rng.uniform(-spread, spread, size=4)
            angles.extend(pts.tolist())
            truth.extend([j] * 4)
        result = kmeans_angles(angles, 3, rng=rng)
        mapping = {}
        ok = True
        for lab, tru in zip(result.labels, truth):
            mapping.setdefault(tru, lab)
            ok = ok and (mapping[tru] == lab)
        assert ok and len(set(mapping.values())) == 3


def test_build_user_estimates_single_angle(rng):
    geom = ArrayGeometry(12)
    omega = np.array([0, 3, 5, 9])
    result = kmeans_angles([1.2], 1, rng=rng)
    full = build_user_estimates(result, [1.2], omega, geom)
    assert len(full.steering) == 1
    expected = steering_vector(1.2, geom)[omega]
    assert np.allclose(full.steering[0][:, 0], expected)


def test_build_user_estimates_full_omega_unit_columns(rng):
    geom = ArrayGeometry(16)
    angles = [0.7, 0.75, 2.1]
    result = kmeans_angles(angles, 2, rng=rng)
    full = build_user_estimates(result, angles, np.arange(16), geom)
    for mat in full.steering:
        assert np.allclose(np.linalg.norm(mat, axis=0), 1.0, atol=1e-12)


def test_build_user_estimates_columns_sorted_and_recomputable(rng):
    geom = ArrayGeometry(10)
    omega = np.array([1, 2, 4, 7, 8])
    angles = rng.uniform(0.3, 2.8, size=7)
    result = kmeans_angles(angles, 3, rng=rng)
    full = build_user_estimates(result, angles, omega, geom)
    for members, mat in zip(full.members, full.steering):
        assert np.all(np.diff(members) >= 0)
        for j, theta in enumerate(members):
            assert np.allclose(mat[:, j], steering_vector(theta, geom)[omega])


def test_build_user_estimates_label_mismatch(rng):
    result = kmeans_angles([0.5, 1.5], 2, rng=rng)
    with pytest.raises(ValueError):
        build_user_estimates(result, [0.5, 1.5, 2.5], np.arange(4), ArrayGeometry(4))


def test_partial_omega_column_norm_statistics(rng):
    """E ||column||^2 = M/N over random row subsets, within 2%."""
    geom = ArrayGeometry(16)
    m = 8
    theta = 1.1
    norms2 = []
    for _ in range(1000):
        omega = np.sort(rng.choice(16, m, replace=False))
        norms2.append(np.linalg.norm(steering_vector(theta, geom)[omega]) ** 2)
    assert abs(np.mean(norms2) - m / 16) < 0.02 * (m / 16)
