"""Dual polynomial evaluation and angle localization.

The vector dual polynomial q(theta) = V^H a(theta) has columns that are
trigonometric polynomials in the spatial frequency f = delta_r cos(theta),
so ||q|| is evaluated on a uniform f grid with one zero-padded FFT and then
mapped back to angles.  Angles of arrival are the locations where ||q||
reaches one; each grid peak is refined by golden-section search on the
continuous ||q(theta)||.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .scene import ArrayGeometry, steering_matrix, steering_vector

GOLDEN = (math.sqrt(5.0) - 1.0) / 2.0


def default_grid_size(geometry: ArrayGeometry) -> int:
    """Fine enough that one cluster spans many cells: max(8192, 32 N)."""
    return max(8192, 32 * geometry.n_antennas)


def frequency_grid(geometry: ArrayGeometry, grid_size: int):
    """Uniform spatial-frequency grid mapped to angles.

    Returns (thetas, fs) sorted so thetas is strictly increasing; the f
    values are DFT nodes f = -1/2 + g/G restricted to |f| < delta_r, which is
    what makes FFT evaluation of the dual polynomial exact on this grid.
    Spacing above half a wavelength aliases; only the unambiguous band is
    returned in that case.
    """
    dr = geometry.delta_r
    frac = min(1.0, 2.0 * dr)
    g_dft = int(math.ceil((grid_size + 2) / frac))
    g = np.arange(g_dft)
    fs = -0.5 + g / g_dft
    keep = np.abs(fs) < dr
    fs = fs[keep]
    thetas = np.arccos(np.clip(fs / dr, -1.0, 1.0))
    order = np.argsort(thetas)
    return thetas[order], fs[order], g_dft, np.nonzero(keep)[0][order]


@dataclass(frozen=True)
class DualSpectrum:
    """||q(theta)|| sampled on a fine angle grid, plus what is needed to refine."""

    grid: np.ndarray
    values: np.ndarray
    geometry: ArrayGeometry
    v: np.ndarray

    def norm_at(self, theta: float) -> float:
        """Continuous ||V^H a(theta)||, used by off-grid refinement."""
        return float(np.linalg.norm(self.v.conj().T @ steering_vector(theta, self.geometry)))


@dataclass(frozen=True)
class PeakSet:
    """Refined peak angles (sorted ascending) and their ||q|| heights."""

    angles: np.ndarray
    heights: np.ndarray

    def __len__(self) -> int:
        return self.angles.size


def evaluate_spectrum(v: np.ndarray, geometry: ArrayGeometry, grid_size: int) -> DualSpectrum:
    """Sample ||V^H a(theta)|| on the uniform-frequency grid via zero-padded FFT."""
    n = geometry.n_antennas
    if grid_size < 8 * n:
        raise ValueError(f"grid_size must be >= 8N = {8 * n}, got {grid_size}")
    v = np.asarray(v, dtype=complex)
    thetas, _, g_dft, dft_rows = frequency_grid(geometry, grid_size)
    # q_t(f) = (1/sqrt N) sum_n conj(V[n,t]) e^{-j2pi f n}; on f = -1/2 + g/G
    # the factor e^{j pi n} folds into the summand and the rest is a DFT.
    signs = (-1.0) ** np.arange(n)
    w = v.conj() * signs[:, None]
    q_all = np.fft.fft(w, n=g_dft, axis=0) / math.sqrt(n)  # (G, T)
    values = np.linalg.norm(q_all[dft_rows, :], axis=1)
    return DualSpectrum(grid=thetas, values=values, geometry=geometry, v=v)


def _golden_max(fun, lo: float, hi: float, tol: float = 1e-12, max_iter: int = 80):
    """Golden-section maximization on [lo, hi]; returns the best point seen."""
    a, b = lo, hi
    x1 = b - GOLDEN * (b - a)
    x2 = a + GOLDEN * (b - a)
    f1, f2 = fun(x1), fun(x2)
    best_x, best_f = (x1, f1) if f1 >= f2 else (x2, f2)
    for _ in range(max_iter):
        if b - a < tol:
            break
        if f1 < f2:
            a, x1, f1 = x1, x2, f2
            x2 = a + GOLDEN * (b - a)
            f2 = fun(x2)
            cand_x, cand_f = x2, f2
        else:
            b, x2, f2 = x2, x1, f1
            x1 = b - GOLDEN * (b - a)
            f1 = fun(x1)
            cand_x, cand_f = x1, f1
        if cand_f > best_f:
            best_x, best_f = cand_x, cand_f
    return best_x, best_f


def locate_peaks(spectrum: DualSpectrum, epsilon: float = 0.05) -> PeakSet:
    """Strict grid local maxima with height >= 1 - epsilon, golden-section refined.

    The count of returned angles estimates the total number of multipath
    components.  An empty PeakSet is a valid outcome (detection failure is
    data, not an exception); near-boundary peaks are kept.
    """
    if not 0.0 < epsilon < 1.0:
        raise ValueError(f"epsilon must lie in (0, 1), got {epsilon}")
    grid = spectrum.grid
    vals = spectrum.values
    m = vals.size
    if m == 0:
        return PeakSet(angles=np.empty(0), heights=np.empty(0))

    left = np.empty(m, dtype=bool)
    right = np.empty(m, dtype=bool)
    left[0] = True
    left[1:] = vals[1:] > vals[:-1]
    right[-1] = True
    right[:-1] = vals[:-1] > vals[1:]
    candidates = np.nonzero(left & right & (vals >= 1.0 - epsilon))[0]

    angles = []
    heights = []
    eps_theta = 1e-9
    for i in candidates:
        lo = grid[i - 1] if i > 0 else max(eps_theta, grid[0] - (grid[1] - grid[0]))
        hi = grid[i + 1] if i < m - 1 else min(math.pi - eps_theta, grid[-1] + (grid[-1] - grid[-2]))
        lo = max(lo, eps_theta)
        hi = min(hi, math.pi - eps_theta)
        theta, height = _golden_max(spectrum.norm_at, lo, hi)
        # Refinement must never lose to the grid point it bracketed.
        if vals[i] > height:
            theta, height = grid[i], vals[i]
        angles.append(theta)
        heights.append(height)

    order = np.argsort(angles)
    return PeakSet(
        angles=np.asarray(angles)[order],
        heights=np.asarray(heights)[order],
    )


def prune_peaks(
    angles,
    y_omega: np.ndarray,
    omega,
    geometry: ArrayGeometry,
    max_paths: int,
    eta: float,
    gamma: float = 1.05,
) -> np.ndarray:
    """Keep the smallest peak subset that still explains the data to noise level.

    Under heavy shrinkage the dual polynomial also touches one at angles that
    carry no energy (verified against an interior-point reference), so raw
    unit-height peaks overcount the multipath components.  Backward
    elimination fixes that: refit all peak coefficients by least squares,
    drop the weakest peak while the fit residual stays within gamma * eta
    (plus a relative floor for the noiseless case), and never keep more than
    ``max_paths`` peaks, the known bound on the number of paths.
    """
    kept = sorted(float(a) for a in np.atleast_1d(np.asarray(angles, dtype=float)))
    if not kept:
        return np.empty(0)
    y = np.asarray(y_omega, dtype=complex)
    omega = np.asarray(omega, dtype=int)
    budget = max(gamma * eta, 1e-8 * float(np.linalg.norm(y)))
    cap = max(1, min(int(max_paths), omega.size))

    def refit(angs):
        a = steering_matrix(angs, geometry)[omega, :]
        coef, *_ = np.linalg.lstsq(a, y, rcond=None)
        resid = float(np.linalg.norm(y - a @ coef))
        return np.linalg.norm(coef, axis=1), resid

    energy, _ = refit(kept)
    while len(kept) > cap:
        del kept[int(np.argmin(energy))]
        energy, _ = refit(kept)
    while len(kept) > 1:
        trial = list(kept)
        del trial[int(np.argmin(energy))]
        trial_energy, trial_resid = refit(trial)
        if trial_resid > budget:
            break
        kept, energy = trial, trial_energy
    return np.asarray(kept)
