"""First-order solver for the dual atomic-norm problem.

The dual of the multi-snapshot atomic-norm denoiser is

    maximize   Re<V_Omega, Y_Omega> - eta ||V_Omega||_F
    subject to sup_theta ||V^H a(theta)||_2 <= 1,
               rows of V outside Omega equal zero,

and the sup-norm constraint has the exact semidefinite encoding

    [[Q, V], [V^H, I_T]] >= 0,   T*(Q) = T*(I_N),

where T* sums the diagonals of an N x N Hermitian matrix: the diagonal-sum
condition makes a(theta)^H Q a(theta) identically one for the unit-norm
steering atoms, so Q >= V V^H caps the vector dual polynomial at one.

The problem is solved by ADMM on the lifted block S = [[Q, V], [V^H, I_T]]:
the (V, Q) update splits into a diagonal-sum projection for Q and a
Frobenius-norm shrinkage for V, the S update is a PSD eigenvalue projection,
and scaled multipliers close the loop.  A final blend toward the identity
(which preserves the diagonal-sum normalization) returns a certificate pair
whose lifted block is positive semidefinite to machine precision, so
downstream feasibility checks hold by construction.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import SolverError
from .scene import ArrayGeometry, steering_matrix

TRACE_EVERY = 25


@dataclass
class SolverOptions:
    """ADMM knobs sized for desk problems (N up to ~128)."""

    rho: float = 1.0
    max_iters: int = 5000
    tol_abs: float = 1e-6
    tol_rel: float = 1e-5
    grid_check_size: int = 0  # 0 -> 16 N at solve time

    def __post_init__(self):
        if self.rho <= 0 or self.tol_abs <= 0 or self.tol_rel <= 0:
            raise ValueError("rho and tolerances must be positive")
        if self.max_iters < 1:
            raise ValueError("max_iters must be >= 1")


@dataclass
class DualProblem:
    y_omega: np.ndarray
    omega: np.ndarray
    eta: float
    n_antennas: int
    options: SolverOptions = field(default_factory=SolverOptions)

    def __post_init__(self):
        self.y_omega = np.asarray(self.y_omega, dtype=complex)
        self.omega = np.asarray(self.omega, dtype=int)
        if self.y_omega.ndim != 2:
            raise ValueError("y_omega must be a matrix")
        if self.omega.size != self.y_omega.shape[0]:
            raise ValueError("omega must index the rows of y_omega")
        if self.omega.size and (self.omega.min() < 0 or self.omega.max() >= self.n_antennas):
            raise ValueError("omega indices out of range")
        if self.eta < 0:
            raise ValueError("eta must be nonnegative")


@dataclass
class DualDiagnostics:
    iterations: int
    primal_residual: float
    dual_residual: float
    converged: bool
    residual_trace: list = field(default_factory=list)  # (iter, primal, dual)

    def to_dict(self) -> dict:
        return {
            "iterations": self.iterations,
            "primal_residual": self.primal_residual,
            "dual_residual": self.dual_residual,
            "converged": self.converged,
            "residual_trace": [list(row) for row in self.residual_trace],
        }


@dataclass
class DualSolution:
    """Dual matrix V, certificate Q and solver bookkeeping.

    Rows of ``v`` outside Omega are identically zero.  ``q_cert`` is the
    Hermitian block certifying the dual-norm constraint; the lifted block
    [[q_cert, v], [v^H, I]] is positive semidefinite up to eigensolver
    precision thanks to the final feasibility blend.
    """

    v: np.ndarray
    q_cert: np.ndarray
    objective: float
    diagnostics: DualDiagnostics


def toeplitz_adjoint(z: np.ndarray) -> np.ndarray:
    """Diagonal sums of a square matrix, entry k in [-(N-1), N-1] at k + N - 1.

    (T*(Z))_k = sum_i Z[i, i-k], the adjoint of the Toeplitz embedding.
    """
    z = np.asarray(z)
    if z.ndim != 2 or z.shape[0] != z.shape[1]:
        raise ValueError(f"toeplitz_adjoint needs a square matrix, got {z.shape}")
    n = z.shape[0]
    # Z[i, i-k] lives on numpy diagonal offset -k.
    return np.array([z.diagonal(-k).sum() for k in range(-(n - 1), n)])


def psd_project(h: np.ndarray) -> np.ndarray:
    """Frobenius-nearest PSD matrix: symmetrize, clip negative eigenvalues."""
    h = np.asarray(h, dtype=complex)
    if h.ndim != 2 or h.shape[0] != h.shape[1]:
        raise ValueError(f"psd_project needs a square matrix, got {h.shape}")
    sym = 0.5 * (h + h.conj().T)
    try:
        w, u = np.linalg.eigh(sym)
    except np.linalg.LinAlgError as exc:
        raise SolverError(
            "eigendecomposition failed during PSD projection",
            {"shape": h.shape, "norm": float(np.linalg.norm(h))},
        ) from exc
    w = np.maximum(w, 0.0)
    out = (u * w) @ u.conj().T
    return 0.5 * (out + out.conj().T)


def _diag_projection_tables(n: int):
    """Index map i-j -> flat diagonal slot, plus per-diagonal lengths."""
    idx = np.subtract.outer(np.arange(n), np.arange(n)) + (n - 1)
    lens = np.concatenate([np.arange(1, n + 1), np.arange(n - 1, 0, -1)]).astype(float)
    return idx, lens


def _project_certificate(q: np.ndarray, target: np.ndarray, idx, lens) -> np.ndarray:
    """Project onto Hermitian matrices with prescribed diagonal sums."""
    qh = 0.5 * (q + q.conj().T)
    flat = qh.ravel()
    slot = idx.ravel()
    sums = np.bincount(slot, weights=flat.real, minlength=lens.size) + 1j * np.bincount(
        slot, weights=flat.imag, minlength=lens.size
    )
    shift = (sums - target) / lens
    return qh - shift[idx]


def solve_dual(problem: DualProblem) -> DualSolution:
    """Run ADMM on the lifted dual SDP; never raises on slow convergence.

    Returns the best feasible pair found; ``diagnostics.converged`` is False
    when the residual targets were not met within ``max_iters`` and callers
    are expected to check it.
    """
    opts = problem.options
    y = problem.y_omega
    omega = problem.omega
    n = problem.n_antennas
    t = y.shape[1]
    eta = problem.eta
    rho = opts.rho
    dim = n + t

    idx, lens = _diag_projection_tables(n)
    target = np.zeros(2 * n - 1, dtype=complex)
    target[n - 1] = n  # T*(Q) = T*(I_N)

    v = np.zeros((n, t), dtype=complex)
    q = np.eye(n, dtype=complex)
    g = np.zeros((dim, dim), dtype=complex)
    g[n:, n:] = np.eye(t)
    g[:n, :n] = q
    z = g.copy()
    u = np.zeros_like(g)

    shrink_level = eta / (2.0 * rho)
    trace: list[tuple[int, float, float]] = []
    r_norm = s_norm = float("inf")
    converged = False
    it = 0

    for it in range(1, opts.max_iters + 1):
        h = z + u
        q = _project_certificate(h[:n, :n], target, idx, lens)
        g_v = 0.5 * (h[:n, n:] + h[n:, :n].conj().T)
        b = g_v[omega, :] + y / (2.0 * rho)
        nb = float(np.linalg.norm(b))
        scale = max(0.0, 1.0 - shrink_level / nb) if nb > 0 else 0.0
        v = np.zeros((n, t), dtype=complex)
        v[omega, :] = scale * b

        g[:n, :n] = q
        g[:n, n:] = v
        g[n:, :n] = v.conj().T

        z_new = psd_project(g - u)
        u += z_new - g

        r_norm = float(np.linalg.norm(z_new - g))
        s_norm = rho * float(np.linalg.norm(z_new - z))
        z = z_new

        if it % TRACE_EVERY == 0 or it == 1:
            trace.append((it, r_norm, s_norm))

        eps_pri = opts.tol_abs * dim + opts.tol_rel * max(
            float(np.linalg.norm(g)), float(np.linalg.norm(z))
        )
        eps_dual = opts.tol_abs * dim + opts.tol_rel * rho * float(np.linalg.norm(u))
        if r_norm <= eps_pri and s_norm <= eps_dual:
            converged = True
            break

    if not trace or trace[-1][0] != it:
        trace.append((it, r_norm, s_norm))

    # Feasibility blend: (1-b) G + b I is PSD for b = delta / (1 + delta)
    # where -delta is the most negative eigenvalue, and the blend preserves
    # the diagonal-sum normalization of Q.
    g[:n, :n] = q
    g[:n, n:] = v
    g[n:, :n] = v.conj().T
    lam_min = float(np.linalg.eigvalsh(0.5 * (g + g.conj().T))[0])
    delta = max(0.0, -lam_min)
    if delta > 0:
        beta = delta / (1.0 + delta)
        q = (1.0 - beta) * q + beta * np.eye(n)
        v = (1.0 - beta) * v

    v_omega = v[omega, :]
    objective = float(
        np.real(np.vdot(y, v_omega)) - eta * np.linalg.norm(v_omega)
    )

    diagnostics = DualDiagnostics(
        iterations=it,
        primal_residual=r_norm,
        dual_residual=s_norm,
        converged=converged,
        residual_trace=trace,
    )
    return DualSolution(v=v, q_cert=q, objective=objective, diagnostics=diagnostics)


def dual_norm_on_grid(v: np.ndarray, grid_size: int, geometry: ArrayGeometry) -> float:
    """max over a uniform theta grid of ||v^H a(theta)||_2, a feasibility oracle."""
    n = geometry.n_antennas
    if grid_size < 4 * n:
        raise ValueError(f"grid_size must be >= 4N = {4 * n}, got {grid_size}")
    thetas = np.linspace(0.0, np.pi, grid_size + 2)[1:-1]
    a = steering_matrix(thetas, geometry)  # (N, G)
    corr = v.conj().T @ a  # (T, G)
    return float(np.linalg.norm(corr, axis=0).max())
