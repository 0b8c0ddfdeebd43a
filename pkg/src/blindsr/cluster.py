"""One-dimensional k-means over located angles, one cluster per active user.

Angles are clustered directly in radians ((0, pi) has no wraparound), with
k-means++ seeding, Lloyd iterations and multiple restarts scored by
within-cluster sum of squares.  Clusters are relabeled by ascending center
so results are canonical under a fixed seed.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ClusteringDegeneracyError, UnderDetectionError
from .scene import ArrayGeometry, steering_matrix


@dataclass(frozen=True)
class ClusterResult:
    """Angle partition plus per-cluster steering matrices on the observed rows.

    ``members[k]`` holds cluster k's angles sorted ascending and
    ``steering[k]`` the matching columns of P_Omega(A); the estimated path
    count of user k is simply ``len(members[k])``.
    """

    labels: np.ndarray
    centers: np.ndarray
    members: tuple[np.ndarray, ...] = ()
    steering: tuple[np.ndarray, ...] = ()
    geometry: ArrayGeometry | None = None
    omega: np.ndarray | None = None

    @property
    def n_clusters(self) -> int:
        return self.centers.size


def _kmeans_pp_init(values: np.ndarray, k: int, rng: np.random.Generator) -> np.ndarray:
    centers = np.empty(k)
    centers[0] = values[rng.integers(values.size)]
    d2 = (values - centers[0]) ** 2
    for j in range(1, k):
        total = d2.sum()
        if total > 0:
            probs = d2 / total
            centers[j] = values[rng.choice(values.size, p=probs)]
        else:
            centers[j] = values[rng.integers(values.size)]
        d2 = np.minimum(d2, (values - centers[j]) ** 2)
    return centers


def _lloyd(values: np.ndarray, centers: np.ndarray, max_iter: int = 100):
    labels = np.zeros(values.size, dtype=int)
    for _ in range(max_iter):
        # Ties go to the lower-indexed center (argmin picks the first).
        dist = np.abs(values[:, None] - centers[None, :])
        new_labels = np.argmin(dist, axis=1)
        for j in range(centers.size):
            sel = new_labels == j
            if np.any(sel):
                centers[j] = values[sel].mean()
        if np.array_equal(new_labels, labels):
            break
        labels = new_labels
    wcss = float(np.sum((values - centers[labels]) ** 2))
    return labels, centers, wcss


def kmeans_angles(
    angles,
    k: int,
    restarts: int = 50,
    rng: np.random.Generator | None = None,
) -> ClusterResult:
    """Best-of-restarts 1-D k-means; deterministic under a fixed generator.

    Raises UnderDetectionError when fewer angles than clusters were located
    (the caller treats that as a failed detection, not a crash) and
    ClusteringDegeneracyError when the best run leaves an empty cluster.
    """
    values = np.atleast_1d(np.asarray(angles, dtype=float))
    if k < 1:
        raise ValueError("k must be >= 1")
    if values.size < k:
        raise UnderDetectionError(
            f"located {values.size} angles but need at least {k} for {k} users"
        )
    if rng is None:
        rng = np.random.default_rng()

    best = None
    for _ in range(max(1, restarts)):
        centers = _kmeans_pp_init(values, k, rng)
        labels, centers, wcss = _lloyd(values, centers.copy())
        if best is None or wcss < best[2]:
            best = (labels, centers, wcss)

    labels, centers, _ = best
    counts = np.bincount(labels, minlength=k)
    if np.any(counts == 0):
        raise ClusteringDegeneracyError(
            "k-means left an empty cluster; angle set cannot support k clusters"
        )
    # Canonical order: relabel clusters by ascending center.
    order = np.argsort(centers)
    remap = np.empty(k, dtype=int)
    remap[order] = np.arange(k)
    return ClusterResult(labels=remap[labels], centers=centers[order])


def build_user_estimates(
    result: ClusterResult,
    angles,
    omega,
    geometry: ArrayGeometry,
) -> ClusterResult:
    """Attach per-cluster sorted angles and row-sampled steering matrices.

    Column j of cluster k's matrix is the steering vector of its j-th
    smallest angle restricted to the observed rows.
    """
    values = np.atleast_1d(np.asarray(angles, dtype=float))
    labels = np.asarray(result.labels, dtype=int)
    if labels.size != values.size:
        raise ValueError("labels must cover all angles")
    omega = np.asarray(omega, dtype=int)

    members = []
    steering = []
    for j in range(result.n_clusters):
        cluster_angles = np.sort(values[labels == j])
        if cluster_angles.size == 0:
            raise ClusteringDegeneracyError(f"cluster {j} is empty")
        members.append(cluster_angles)
        steering.append(steering_matrix(cluster_angles, geometry)[omega, :])

    return ClusterResult(
        labels=labels,
        centers=result.centers,
        members=tuple(members),
        steering=tuple(steering),
        geometry=geometry,
        omega=omega,
    )
