"""Physical model and synthetic scene generation for multi-user uplink snapshots.

The base station carries an N-element uniform linear array with spacing
``delta_r`` wavelengths.  User k reaches it through L_k paths; path l has
angle of arrival theta_l in (0, pi) and complex gain alpha_l, so the
narrowband channel is

    h_k = sum_l alpha_l * a(theta_l),
    a(theta)_n = exp(-j 2 pi delta_r n cos(theta)) / sqrt(N).

Active users transmit a unit-norm data vector s_k over T snapshots and the
array output X = sum_k h_k s_k^H is observed on a random row subset Omega,
plus i.i.d. complex Gaussian noise:  Y_Omega = P_Omega(X) + W.

Everything here is pure given an explicit seeded generator, so scenes and
observations are safe to generate concurrently across Monte-Carlo trials.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import InfeasibleConfigError

# Retry budget for rejection-sampled cluster centers.
MAX_CENTER_DRAWS = 10_000


@dataclass(frozen=True)
class ArrayGeometry:
    """Uniform linear array: element count and spacing in wavelengths."""

    n_antennas: int
    delta_r: float = 0.5

    def __post_init__(self):
        if self.n_antennas < 2:
            raise ValueError(f"n_antennas must be >= 2, got {self.n_antennas}")
        if not self.delta_r > 0:
            raise ValueError(f"delta_r must be positive, got {self.delta_r}")


@dataclass(frozen=True)
class UserChannel:
    """Per-user multipath description: matching lists of angles and gains."""

    angles: np.ndarray
    gains: np.ndarray

    def __post_init__(self):
        angles = np.atleast_1d(np.asarray(self.angles, dtype=float))
        gains = np.atleast_1d(np.asarray(self.gains, dtype=complex))
        if angles.shape != gains.shape or angles.ndim != 1 or angles.size < 1:
            raise ValueError("angles and gains must be equal-length 1-D arrays")
        if np.any(angles <= 0.0) or np.any(angles >= math.pi):
            raise ValueError("path angles must lie strictly inside (0, pi)")
        object.__setattr__(self, "angles", angles)
        object.__setattr__(self, "gains", gains)

    @property
    def n_paths(self) -> int:
        return self.angles.size

    def channel_vector(self, geometry: ArrayGeometry) -> np.ndarray:
        """h = A(angles) @ gains on the full antenna index set."""
        return steering_matrix(self.angles, geometry) @ self.gains


@dataclass(frozen=True)
class Scene:
    """Ground-truth world: geometry, all user channels, activity and data.

    ``data`` maps active user index -> unit-norm complex vector of length T
    with entries of positive real part (the positivity convention that fixes
    the global phase of blind recovery).  Inactive users carry no data and
    contribute nothing to the received signal.
    """

    geometry: ArrayGeometry
    users: tuple[UserChannel, ...]
    active_set: tuple[int, ...]
    data: dict[int, np.ndarray]

    def __post_init__(self):
        users = tuple(self.users)
        active = tuple(sorted(self.active_set))
        object.__setattr__(self, "users", users)
        object.__setattr__(self, "active_set", active)
        k = len(users)
        if len(set(active)) != len(active) or len(active) > k:
            raise ValueError("active_set must be distinct user indices")
        if any(i < 0 or i >= k for i in active):
            raise ValueError("active_set indices out of range")
        if set(self.data) != set(active):
            raise ValueError("data must be keyed exactly by the active user indices")
        for i in active:
            s = np.asarray(self.data[i], dtype=complex)
            if abs(np.linalg.norm(s) - 1.0) > 1e-8:
                raise ValueError(f"data vector of user {i} is not unit norm")
            self.data[i] = s

    @property
    def n_users(self) -> int:
        return len(self.users)

    @property
    def n_active(self) -> int:
        return len(self.active_set)

    @property
    def snapshots(self) -> int:
        return next(iter(self.data.values())).size

    def noiseless_field(self) -> np.ndarray:
        """X = sum over active users of h_k s_k^H, shape (N, T)."""
        n = self.geometry.n_antennas
        x = np.zeros((n, self.snapshots), dtype=complex)
        for k in self.active_set:
            h = self.users[k].channel_vector(self.geometry)
            x += np.outer(h, self.data[k].conj())
        return x


@dataclass(frozen=True)
class Observation:
    """Measured rows Y_Omega = P_Omega(X) + W plus noise bookkeeping.

    Row i of ``y_omega`` is antenna ``omega[i]``; ``omega`` is sorted
    ascending.  ``eta`` is the noise-ball radius handed to the solver
    (Frobenius norm of the realized noise).  ``noise`` is retained so tests
    can audit the signal-to-noise accounting.
    """

    y_omega: np.ndarray
    omega: np.ndarray
    sigma: float
    eta: float
    noise: np.ndarray

    def __post_init__(self):
        y = np.asarray(self.y_omega, dtype=complex)
        om = np.asarray(self.omega, dtype=int)
        w = np.asarray(self.noise, dtype=complex)
        if y.ndim != 2 or w.shape != y.shape:
            raise ValueError("y_omega and noise must be matching 2-D arrays")
        if om.ndim != 1 or om.size != y.shape[0]:
            raise ValueError("omega must list one antenna per observed row")
        if np.any(np.diff(om) <= 0):
            raise ValueError("omega must be sorted strictly ascending")
        if self.eta < 0:
            raise ValueError("eta must be nonnegative")
        object.__setattr__(self, "y_omega", y)
        object.__setattr__(self, "omega", om)
        object.__setattr__(self, "noise", w)

    @property
    def n_observed(self) -> int:
        return self.omega.size

    @property
    def snapshots(self) -> int:
        return self.y_omega.shape[1]


@dataclass(frozen=True)
class SceneConfig:
    """Simulation knobs for random scene + observation synthesis.

    ``min_center_separation`` defaults to 4/(N*delta_r) radians, the standard
    super-resolution separation mapped at broadside, so noiseless recovery is
    well-posed.  ``snr_db = inf`` means noiseless (sigma = 0).
    """

    n_antennas: int
    n_observed: int
    n_users: int
    n_active: int
    snapshots: int
    l_max: int
    angular_spread: float = 0.05
    min_center_separation: float | None = None
    snr_db: float = 10.0
    rng_seed: int = 0
    delta_r: float = 0.5

    def __post_init__(self):
        if self.n_active < 1 or self.n_active > self.n_users:
            raise ValueError("need 1 <= n_active <= n_users")
        if self.n_observed < 1 or self.n_observed > self.n_antennas:
            raise ValueError("need 1 <= n_observed <= n_antennas")
        if self.l_max < 1:
            raise ValueError("l_max must be >= 1")
        if self.snapshots < 1:
            raise ValueError("snapshots must be >= 1")
        if self.angular_spread < 0:
            raise ValueError("angular_spread must be nonnegative")
        sep = self.center_separation
        if not sep > 2.0 * self.angular_spread:
            raise ValueError(
                f"min_center_separation {sep:.4g} must exceed twice the "
                f"angular spread {self.angular_spread:.4g}"
            )

    @property
    def geometry(self) -> ArrayGeometry:
        return ArrayGeometry(self.n_antennas, self.delta_r)

    @property
    def center_separation(self) -> float:
        if self.min_center_separation is not None:
            return self.min_center_separation
        return 4.0 / (self.n_antennas * self.delta_r)


def steering_vector(theta: float, geometry: ArrayGeometry) -> np.ndarray:
    """Unit-norm array response a(theta), entry n = exp(-j2pi dr n cos t)/sqrt(N).

    Raises ValueError when theta is outside the open interval (0, pi).
    """
    if not 0.0 < theta < math.pi:
        raise ValueError(f"theta must lie in (0, pi), got {theta}")
    n = geometry.n_antennas
    idx = np.arange(n)
    phase = -2.0j * math.pi * geometry.delta_r * math.cos(theta) * idx
    return np.exp(phase) / math.sqrt(n)


def steering_matrix(angles, geometry: ArrayGeometry) -> np.ndarray:
    """Column-stacked steering vectors, shape (N, len(angles))."""
    angles = np.atleast_1d(np.asarray(angles, dtype=float))
    if angles.size and (np.any(angles <= 0.0) or np.any(angles >= math.pi)):
        raise ValueError("angles must lie strictly inside (0, pi)")
    n = geometry.n_antennas
    idx = np.arange(n)[:, None]
    phase = -2.0j * math.pi * geometry.delta_r * idx * np.cos(angles)[None, :]
    return np.exp(phase) / math.sqrt(n)


def draw_cluster_centers(
    k: int,
    low: float,
    high: float,
    min_separation: float,
    rng: np.random.Generator,
    max_draws: int = MAX_CENTER_DRAWS,
) -> np.ndarray:
    """Rejection-sample k centers in (low, high), pairwise >= min_separation apart.

    Every candidate draw counts against ``max_draws``; exceeding the budget
    raises InfeasibleConfigError.
    """
    if not high > low:
        raise InfeasibleConfigError(f"empty center interval ({low}, {high})")
    centers: list[float] = []
    draws = 0
    while len(centers) < k:
        if draws >= max_draws:
            raise InfeasibleConfigError(
                f"could not place {k} centers with separation {min_separation:.4g} "
                f"in ({low:.4g}, {high:.4g}) within {max_draws} draws"
            )
        cand = rng.uniform(low, high)
        draws += 1
        if all(abs(cand - c) >= min_separation for c in centers):
            centers.append(cand)
    return np.asarray(centers)


def generate_scene(config: SceneConfig, rng: np.random.Generator) -> Scene:
    """Draw a random clustered scene under the one-ring model.

    Active users are chosen uniformly without replacement.  Each active user
    gets a cluster center (rejection-sampled so active centers keep the
    configured separation); L_k is uniform on {1..l_max}; path angles are
    center + uniform(-spread, spread); gains are CN(0, 1); data entries are
    positive uniform, normalized to unit l2 norm.  Inactive users receive
    channels the same way but without the separation constraint, since they
    contribute nothing to the observation.
    """
    k_total, k_active = config.n_users, config.n_active
    spread = config.angular_spread
    low, high = spread, math.pi - spread
    if not high > low:
        raise InfeasibleConfigError("angular_spread leaves no room for centers")

    active = np.sort(rng.choice(k_total, size=k_active, replace=False))
    active_centers = draw_cluster_centers(
        k_active, low, high, config.center_separation, rng
    )
    centers = np.empty(k_total)
    centers[active] = active_centers
    inactive = [i for i in range(k_total) if i not in set(active.tolist())]
    for i in inactive:
        centers[i] = rng.uniform(low, high)

    users = []
    for i in range(k_total):
        n_paths = int(rng.integers(1, config.l_max + 1))
        offsets = rng.uniform(-spread, spread, size=n_paths) if spread > 0 else np.zeros(n_paths)
        angles = centers[i] + offsets
        gains = (rng.standard_normal(n_paths) + 1j * rng.standard_normal(n_paths)) / math.sqrt(2)
        users.append(UserChannel(angles=angles, gains=gains))

    data = {}
    for i in active.tolist():
        s = 1.0 - rng.random(config.snapshots)  # entries in (0, 1]
        s = s / np.linalg.norm(s)
        data[i] = s.astype(complex)

    return Scene(
        geometry=config.geometry,
        users=tuple(users),
        active_set=tuple(int(i) for i in active),
        data=data,
    )


def synthesize(scene: Scene, config: SceneConfig, rng: np.random.Generator) -> Observation:
    """Sample Omega, scale noise to the requested SNR and form Y_Omega.

    SNR is defined on the observed rows:
        SNR = 10 log10( ||P_Omega(X)||_F^2 / (M T sigma^2) ),
    noise entries are CN(0, sigma^2) and eta = ||W||_F.  ``snr_db = inf``
    gives the noiseless observation with eta = 0.
    """
    x = scene.noiseless_field()
    m, t = config.n_observed, scene.snapshots
    omega = np.sort(rng.choice(scene.geometry.n_antennas, size=m, replace=False))
    p_omega = x[omega, :]

    if math.isinf(config.snr_db):
        noise = np.zeros_like(p_omega)
        sigma = 0.0
    else:
        signal_power = float(np.linalg.norm(p_omega) ** 2)
        sigma = math.sqrt(signal_power / (m * t * 10.0 ** (config.snr_db / 10.0)))
        noise = (sigma / math.sqrt(2)) * (
            rng.standard_normal((m, t)) + 1j * rng.standard_normal((m, t))
        )
    eta = float(np.linalg.norm(noise))
    return Observation(
        y_omega=p_omega + noise,
        omega=omega,
        sigma=sigma,
        eta=eta,
        noise=noise,
    )


# ---------------------------------------------------------------------------
# JSON serialization (complex numbers as [re, im] pairs)
# ---------------------------------------------------------------------------

def _complex_to_pairs(arr: np.ndarray):
    stacked = np.stack([np.real(arr), np.imag(arr)], axis=-1)
    return stacked.tolist()


def _pairs_to_complex(obj) -> np.ndarray:
    arr = np.asarray(obj, dtype=float)
    return arr[..., 0] + 1j * arr[..., 1]


def scene_to_dict(scene: Scene) -> dict:
    return {
        "geometry": {
            "n_antennas": scene.geometry.n_antennas,
            "delta_r": scene.geometry.delta_r,
        },
        "users": [
            {"angles": u.angles.tolist(), "gains": _complex_to_pairs(u.gains)}
            for u in scene.users
        ],
        "active_set": list(scene.active_set),
        "data": [_complex_to_pairs(scene.data[k]) for k in scene.active_set],
    }


def scene_from_dict(doc: dict) -> Scene:
    geometry = ArrayGeometry(
        n_antennas=int(doc["geometry"]["n_antennas"]),
        delta_r=float(doc["geometry"]["delta_r"]),
    )
    users = tuple(
        UserChannel(
            angles=np.asarray(u["angles"], dtype=float),
            gains=_pairs_to_complex(u["gains"]),
        )
        for u in doc["users"]
    )
    active = tuple(int(i) for i in doc["active_set"])
    data = {k: _pairs_to_complex(vec) for k, vec in zip(sorted(active), doc["data"])}
    return Scene(geometry=geometry, users=users, active_set=active, data=data)


def observation_to_dict(obs: Observation) -> dict:
    return {
        "y_omega": _complex_to_pairs(obs.y_omega),
        "omega": obs.omega.tolist(),
        "sigma": obs.sigma,
        "eta": obs.eta,
        "noise": _complex_to_pairs(obs.noise),
    }


def observation_from_dict(doc: dict) -> Observation:
    return Observation(
        y_omega=_pairs_to_complex(doc["y_omega"]),
        omega=np.asarray(doc["omega"], dtype=int),
        sigma=float(doc["sigma"]),
        eta=float(doc["eta"]),
        noise=_pairs_to_complex(doc["noise"]),
    )


def save_json(doc: dict, path: str | Path) -> None:
    Path(path).write_text(json.dumps(doc, indent=2, sort_keys=True))


def load_json(path: str | Path) -> dict:
    return json.loads(Path(path).read_text())
