"""Alternating least squares for blind gain / data recovery.

Given per-user steering matrices on the observed rows, the bilinear model

    Y_Omega = sum_k A_k c_k phi_k^H

is fit by alternating two linear solves: all gain vectors c_k jointly from a
stacked least-squares, then all data vectors from one pseudoinverse solve
with B = [A_1 c_1, ..., A_K c_K].  Data vectors are renormalized each outer
iteration, and the leftover global phase per user is fixed at the end by
rotating (c_k, phi_k) so the entry sum of phi_k is real positive.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .cluster import ClusterResult
from .errors import DegenerateInputError
from .scene import steering_matrix


@dataclass
class UserEstimate:
    """Recovered quantities for one detected user.

    ``alpha`` equals ``c`` (path gains absorb the unit data norm) and ``h``
    is the channel rebuilt on the full antenna set from the estimated
    angles.  ``flagged`` marks a user whose estimates collapsed to zero
    during the alternation; its entries are kept as zeros.
    """

    angles: np.ndarray
    c: np.ndarray
    phi: np.ndarray
    alpha: np.ndarray
    h: np.ndarray
    flagged: bool = False


@dataclass
class AlsReport:
    residual_trace: list = field(default_factory=list)
    iterations_run: int = 0


def init_phi(t: int, k_active: int, rng: np.random.Generator) -> list[np.ndarray]:
    """Positive random starting data vectors, entries uniform on (0, 5].

    They are deliberately left unnormalized: the first gain solve consumes
    them as-is, and the per-iteration normalization only starts after the
    first data solve.
    """
    if t < 1:
        raise ValueError("t must be >= 1")
    return [(5.0 * (1.0 - rng.random(t))).astype(complex) for _ in range(k_active)]


def c_step(y_omega: np.ndarray, steering, phis) -> list[np.ndarray]:
    """Jointly solve for all gain vectors given the current data vectors.

    Vectorizing Y in column-major order turns the sum of bilinear terms into
    one stacked system with blocks kron(conj(phi_k), A_k); the minimum-norm
    least-squares solution handles rank deficiency deterministically.
    """
    y = np.asarray(y_omega, dtype=complex)
    blocks = [np.kron(np.conj(phi)[:, None], a) for a, phi in zip(steering, phis)]
    design = np.hstack(blocks)
    if not np.any(design):
        raise DegenerateInputError("all steering/phi blocks are zero")
    rhs = y.flatten(order="F")
    sol, *_ = np.linalg.lstsq(design, rhs, rcond=None)
    out = []
    pos = 0
    for a in steering:
        width = a.shape[1]
        out.append(sol[pos : pos + width])
        pos += width
    return out


def phi_step(y_omega: np.ndarray, steering, cs) -> list[np.ndarray]:
    """Closed-form data solve Phi = pinv(B) Y with B = [A_1 c_1, ..., A_K c_K].

    Row k of the solve is phi_k^H, so the returned vectors are its
    conjugates; that keeps both half-steps minimizing the same residual.
    Users whose gain vector is zero produce a zero column in B: they are
    dropped from the solve, returned as zero vectors, and the rest are
    solved on the reduced system.
    """
    y = np.asarray(y_omega, dtype=complex)
    cols = [a @ c for a, c in zip(steering, cs)]
    norms = [float(np.linalg.norm(col)) for col in cols]
    active = [i for i, nrm in enumerate(norms) if nrm > 0]
    out = [np.zeros(y.shape[1], dtype=complex) for _ in cols]
    if not active:
        return out
    b = np.stack([cols[i] for i in active], axis=1)
    rows, *_ = np.linalg.lstsq(b, y, rcond=None)
    for row_idx, i in enumerate(active):
        out[i] = rows[row_idx, :].conj()
    return out


def fix_global_phase(c: np.ndarray, phi: np.ndarray):
    """Rotate (c, phi) by the unit scalar making sum(phi) real positive.

    The rank-1 contribution A c phi^H is invariant because both factors
    rotate by the same unit number.
    """
    total = np.sum(phi)
    if total == 0:
        return c, phi
    u = np.conj(total) / abs(total)
    return u * c, u * phi


def _residual(y, steering, cs, phis) -> float:
    fit = np.zeros_like(y)
    for a, c, phi in zip(steering, cs, phis):
        fit += np.outer(a @ c, np.conj(phi))
    return float(np.linalg.norm(y - fit))


def run_als(
    y_omega: np.ndarray,
    clusters: ClusterResult,
    maxiter: int = 5,
    rng: np.random.Generator | None = None,
) -> tuple[list[UserEstimate], AlsReport]:
    """Alternate gain and data solves ``maxiter`` times, then fix phases.

    The residual recorded after each full alternation (before the data
    renormalization) is non-increasing.  Flagged users survive in the output
    with zero estimates rather than raising.
    """
    if maxiter < 1:
        raise ValueError("maxiter must be >= 1")
    if clusters.geometry is None or not clusters.steering:
        raise ValueError("clusters must carry steering matrices; run build_user_estimates")
    if rng is None:
        rng = np.random.default_rng()

    y = np.asarray(y_omega, dtype=complex)
    steering = list(clusters.steering)
    t = y.shape[1]
    phis = init_phi(t, len(steering), rng)
    cs = [np.zeros(a.shape[1], dtype=complex) for a in steering]

    report = AlsReport()
    for _ in range(maxiter):
        # zeroed users are excluded from the solves and kept at zero
        live = [i for i, phi in enumerate(phis) if np.linalg.norm(phi) > 0]
        if live:
            live_cs = c_step(y, [steering[i] for i in live], [phis[i] for i in live])
            for i, c in zip(live, live_cs):
                cs[i] = c
            phis = phi_step(y, steering, cs)
        else:
            cs = [np.zeros(a.shape[1], dtype=complex) for a in steering]
            phis = [np.zeros(t, dtype=complex) for _ in steering]
        report.residual_trace.append(_residual(y, steering, cs, phis))
        report.iterations_run += 1
        for i, phi in enumerate(phis):
            nrm = np.linalg.norm(phi)
            if nrm > 0:
                phis[i] = phi / nrm
                cs[i] = cs[i] * nrm  # keep the product c phi^H unchanged

    estimates = []
    for i, (a, c, phi) in enumerate(zip(steering, cs, phis)):
        flagged = bool(np.linalg.norm(phi) == 0 or np.linalg.norm(c) == 0)
        if flagged:
            c = np.zeros_like(c)
            phi = np.zeros_like(phi)
        else:
            c, phi = fix_global_phase(c, phi)
        angles = clusters.members[i]
        h = steering_matrix(angles, clusters.geometry) @ c
        estimates.append(
            UserEstimate(angles=angles, c=c, phi=phi, alpha=c, h=h, flagged=flagged)
        )
    return estimates, report
