"""Independent brute-force references used by tests and cross-checks.

``grid_primal`` solves the on-grid group-sparse surrogate of the atomic-norm
problem,

    min sum_g ||C_g||_2   s.t.  ||Y_Omega - sum_g a_Omega(theta_g) C_g^H||_F <= eta,

with a primal-dual proximal splitting whose two proximal maps are a row-wise
group shrinkage and a Frobenius-ball projection.  Its objective upper-bounds
the continuous atomic norm and tightens as the grid refines, which gives the
weak-duality sandwich used to audit the SDP solver.  Oracles trade speed for
independence: nothing here shares solver machinery with the main path.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .scene import ArrayGeometry, steering_matrix
from .spectrum import frequency_grid


@dataclass
class GridPrimalSolution:
    """Group-sparse on-grid fit: angles, per-angle T-vectors, objective."""

    grid: np.ndarray
    coefficients: np.ndarray  # (G, T); row g is C_g
    objective: float
    residual: float
    gap: float
    iterations: int
    converged: bool


def _row_shrink(x: np.ndarray, t: float) -> np.ndarray:
    norms = np.linalg.norm(x, axis=1, keepdims=True)
    with np.errstate(invalid="ignore", divide="ignore"):
        scale = np.where(norms > t, 1.0 - t / norms, 0.0)
    return x * scale


def _ball_project(r: np.ndarray, center: np.ndarray, radius: float) -> np.ndarray:
    diff = r - center
    nrm = float(np.linalg.norm(diff))
    if nrm <= radius or nrm == 0.0:
        return r
    return center + diff * (radius / nrm)


def grid_primal(
    y_omega: np.ndarray,
    omega,
    geometry: ArrayGeometry,
    eta: float,
    grid_size: int,
    max_iters: int = 60_000,
    tol: float = 1e-6,
) -> GridPrimalSolution:
    """Solve the on-grid surrogate; flagged (not raised) on slow convergence.

    Convergence is declared from the scaled primal-dual gap: any dual iterate
    rescaled into the grid dual-norm ball gives a certified lower bound, and
    the primal objective of the iterate gives the upper bound.
    """
    n = geometry.n_antennas
    if grid_size < 8 * n:
        raise ValueError(f"grid_size must be >= 8N = {8 * n}, got {grid_size}")
    y = np.asarray(y_omega, dtype=complex)
    omega = np.asarray(omega, dtype=int)
    thetas, _, _, _ = frequency_grid(geometry, grid_size)
    a = steering_matrix(thetas, geometry)[omega, :]  # (M, G)
    g_pts, t = thetas.size, y.shape[1]

    op_norm = float(np.linalg.svd(a, compute_uv=False)[0])
    tau = sigma = 0.99 / op_norm

    x = np.zeros((g_pts, t), dtype=complex)  # rows are C_g^H
    p = np.zeros_like(y)
    x_bar = x

    objective = 0.0
    residual = float(np.linalg.norm(y))
    gap = float("inf")
    converged = False
    it = 0
    for it in range(1, max_iters + 1):
        w = p + sigma * (a @ x_bar)
        p = w - sigma * _ball_project(w / sigma, y, eta)
        x_new = _row_shrink(x - tau * (a.conj().T @ p), tau)
        x_bar = 2.0 * x_new - x
        x = x_new

        if it % 50 == 0 or it == max_iters:
            objective = float(np.linalg.norm(x, axis=1).sum())
            residual = float(np.linalg.norm(y - a @ x))
            # Feasible dual point: scale into the grid dual-norm ball.
            corr = a.conj().T @ p
            dual_scale = max(1.0, float(np.linalg.norm(corr, axis=1).max()))
            p_feas = p / dual_scale
            dual_obj = float(
                -np.real(np.vdot(y, p_feas)) - eta * np.linalg.norm(p_feas)
            )
            gap = objective - dual_obj
            feas_slack = max(0.0, residual - eta)
            scale = max(1.0, objective)
            if gap <= tol * scale and feas_slack <= tol * scale:
                converged = True
                break

    return GridPrimalSolution(
        grid=thetas,
        coefficients=x.conj(),
        objective=objective,
        residual=residual,
        gap=gap,
        iterations=it,
        converged=converged,
    )


def exhaustive_single_atom_fit(
    y: np.ndarray,
    geometry: ArrayGeometry,
    grid_size: int,
):
    """Best rank-1 single-atom fit over the grid by direct enumeration.

    For each grid angle the optimal coefficient/data pair comes from the
    correlation row a(theta)^H Y, so the winner maximizes its norm.  Returns
    (theta, c, phi) with c >= 0 and phi unit norm (zero for zero input).
    """
    n = geometry.n_antennas
    if grid_size < 8 * n:
        raise ValueError(f"grid_size must be >= 8N = {8 * n}, got {grid_size}")
    y = np.asarray(y, dtype=complex)
    thetas, _, _, _ = frequency_grid(geometry, grid_size)
    a = steering_matrix(thetas, geometry)  # (N, G)
    corr = a.conj().T @ y  # (G, T)
    norms = np.linalg.norm(corr, axis=1)
    g_best = int(np.argmax(norms))
    c = float(norms[g_best])
    if c == 0.0:
        phi = np.zeros(y.shape[1], dtype=complex)
    else:
        phi = corr[g_best, :].conj() / c
    return float(thetas[g_best]), c, phi
