"""Ground-truth alignment and figures of merit.

A blind receiver recovers users only up to permutation, so estimated
clusters are first assigned to true active users by minimum total Chamfer
distance between angle sets; pairs whose cost exceeds L_k * tolerance count
as missed detections.  NMSEs are then per-trial values

    sqrt( sum_k ||x_k - xhat_k||^2 / sum_k ||x_k||^2 )

over the matched users, for x in {phi, alpha, theta, h}; the Monte-Carlo
harness averages these across trials.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.optimize import linear_sum_assignment

from .scene import Scene, steering_matrix

DEFAULT_ANGLE_TOLERANCE = 0.035  # radians, about two degrees

UNDEFINED = float("inf")  # sentinel for metrics with no matched users


@dataclass(frozen=True)
class Alignment:
    """Injective map from estimated-cluster index to true active-user index."""

    assignment: dict[int, int]
    matched: tuple[bool, ...]  # per true active user, in active_set order
    angle_tolerance: float


@dataclass(frozen=True)
class TrialMetrics:
    nmse_phi: float
    nmse_alpha: float
    nmse_theta: float
    nmse_h: float
    detection_rate: float

    def misses(self, k_active: int) -> int:
        """The difference-set count K_a * (1 - DR), reported alongside DR."""
        return round(k_active * (1.0 - self.detection_rate))

    def as_dict(self) -> dict:
        return {
            "nmse_phi": self.nmse_phi,
            "nmse_alpha": self.nmse_alpha,
            "nmse_theta": self.nmse_theta,
            "nmse_h": self.nmse_h,
            "dr": self.detection_rate,
        }


def chamfer_distance(a, b) -> float:
    """Symmetric sum of nearest-neighbor distances between two angle sets."""
    a = np.atleast_1d(np.asarray(a, dtype=float))
    b = np.atleast_1d(np.asarray(b, dtype=float))
    if a.size == 0 or b.size == 0:
        return float("inf")
    d = np.abs(a[:, None] - b[None, :])
    return float(d.min(axis=1).sum() + d.min(axis=0).sum())


def align(scene: Scene, estimates, tolerance: float = DEFAULT_ANGLE_TOLERANCE) -> Alignment:
    """Optimal injective cluster-to-user assignment by total Chamfer cost.

    A pair is kept only when its cost stays below L_k * tolerance, L_k being
    the true path count, so wildly wrong clusters do not count as detections.
    """
    active = list(scene.active_set)
    true_sets = [np.sort(scene.users[k].angles) for k in active]
    est_sets = [np.sort(np.asarray(e.angles, dtype=float)) for e in estimates]

    if not est_sets:
        return Alignment(assignment={}, matched=tuple(False for _ in active), angle_tolerance=tolerance)

    cost = np.empty((len(est_sets), len(active)))
    for j, est in enumerate(est_sets):
        for i, tru in enumerate(true_sets):
            cost[j, i] = chamfer_distance(est, tru)

    rows, cols = linear_sum_assignment(cost)
    assignment = {}
    matched = [False] * len(active)
    for j, i in zip(rows, cols):
        if cost[j, i] <= true_sets[i].size * tolerance:
            assignment[int(j)] = active[i]
            matched[i] = True
    return Alignment(assignment=assignment, matched=tuple(matched), angle_tolerance=tolerance)


def _pair_paths(true_angles: np.ndarray, est_angles: np.ndarray):
    """Path correspondence: sorted order when counts agree, else injective
    nearest-angle matching; the leftover paths are reported unmatched."""
    lt, le = true_angles.size, est_angles.size
    if lt == le:
        idx = np.arange(lt)
        return list(zip(idx, idx)), [], []
    d = np.abs(true_angles[:, None] - est_angles[None, :])
    rows, cols = linear_sum_assignment(d)
    pairs = list(zip(rows.tolist(), cols.tolist()))
    un_true = [i for i in range(lt) if i not in set(rows.tolist())]
    un_est = [j for j in range(le) if j not in set(cols.tolist())]
    return pairs, un_true, un_est


def nmse_all(scene: Scene, estimates, alignment: Alignment) -> TrialMetrics:
    """Per-trial NMSEs over matched users plus the detection rate.

    Angles and gains are compared path-by-path (sorted order, nearest-angle
    pairing on length mismatch, full energy for unmatched paths); data
    vectors are compared after the global phase fix; channels are compared
    on the full antenna set.  With no matched users every NMSE is the
    ``inf`` sentinel while the detection rate is still reported.
    """
    dr = detection_rate(scene, alignment)
    if not alignment.assignment:
        return TrialMetrics(UNDEFINED, UNDEFINED, UNDEFINED, UNDEFINED, dr)

    num = {"phi": 0.0, "alpha": 0.0, "theta": 0.0, "h": 0.0}
    den = {"phi": 0.0, "alpha": 0.0, "theta": 0.0, "h": 0.0}

    for j, k in alignment.assignment.items():
        est = estimates[j]
        user = scene.users[k]
        order = np.argsort(user.angles)
        t_angles = user.angles[order]
        t_gains = user.gains[order]
        e_angles = np.asarray(est.angles, dtype=float)
        e_gains = np.asarray(est.c, dtype=complex)

        pairs, un_true, un_est = _pair_paths(t_angles, e_angles)
        for i, jj in pairs:
            num["theta"] += (t_angles[i] - e_angles[jj]) ** 2
            num["alpha"] += abs(t_gains[i] - e_gains[jj]) ** 2
        for i in un_true:
            num["theta"] += t_angles[i] ** 2
            num["alpha"] += abs(t_gains[i]) ** 2
        for jj in un_est:
            num["theta"] += e_angles[jj] ** 2
            num["alpha"] += abs(e_gains[jj]) ** 2
        den["theta"] += float(np.sum(t_angles**2))
        den["alpha"] += float(np.sum(np.abs(t_gains) ** 2))

        s_true = scene.data[k]
        num["phi"] += float(np.linalg.norm(s_true - est.phi) ** 2)
        den["phi"] += float(np.linalg.norm(s_true) ** 2)

        h_true = steering_matrix(user.angles, scene.geometry) @ user.gains
        num["h"] += float(np.linalg.norm(h_true - est.h) ** 2)
        den["h"] += float(np.linalg.norm(h_true) ** 2)

    def ratio(key):
        return float(np.sqrt(num[key] / den[key])) if den[key] > 0 else UNDEFINED

    return TrialMetrics(
        nmse_phi=ratio("phi"),
        nmse_alpha=ratio("alpha"),
        nmse_theta=ratio("theta"),
        nmse_h=ratio("h"),
        detection_rate=dr,
    )


def detection_rate(scene: Scene, alignment: Alignment) -> float:
    """Fraction of true active users with a matched cluster (1.0 = all found)."""
    k_a = len(alignment.matched)
    if k_a == 0:
        return 0.0
    return sum(alignment.matched) / k_a
