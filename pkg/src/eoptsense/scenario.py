"""Synthetic cognitive-radio network: transmitter grid, sensors, gains, measurements.

Candidate transmitters sit at the cell centers of a ``side_count x side_count``
grid over a square area. The channel gain between a sensor and a grid point is
the inverse squared distance, clamped at ``d_floor = 1e-3 * area_extent``.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from .errors import InvalidArgumentError

D_FLOOR_FRACTION = 1e-3


def _frozen(a, dtype=float):
    a = np.array(a, dtype=dtype)
    a.setflags(write=False)
    return a


@dataclass(frozen=True)
class GridSpec:
    side_count: int
    area_extent: float = 10.0

    def __post_init__(self):
        if int(self.side_count) < 1:
            raise InvalidArgumentError("side_count must be >= 1")
        if not self.area_extent > 0:
            raise InvalidArgumentError("area_extent must be positive")

    @property
    def n_points(self) -> int:
        return self.side_count**2

    @property
    def d_floor(self) -> float:
        return D_FLOOR_FRACTION * self.area_extent

    def points(self) -> np.ndarray:
        """Cell-center coordinates, row-major, shape (N, 2)."""
        step = self.area_extent / self.side_count
        c = (np.arange(self.side_count) + 0.5) * step
        xx, yy = np.meshgrid(c, c, indexing="xy")
        return np.column_stack([xx.ravel(), yy.ravel()])


def gain_between(p, q, d_floor=D_FLOOR_FRACTION * 10.0) -> float:
    d = float(np.hypot(p[0] - q[0], p[1] - q[1]))
    return 1.0 / max(d, d_floor) ** 2


def gain_matrix(sensors, points, d_floor) -> np.ndarray:
    sensors = np.asarray(sensors, dtype=float)
    points = np.asarray(points, dtype=float)
    diff = sensors[:, None, :] - points[None, :, :]
    d = np.hypot(diff[..., 0], diff[..., 1])
    return 1.0 / np.maximum(d, d_floor) ** 2


@dataclass(frozen=True)
class Scenario:
    grid: GridSpec
    sensor_positions: np.ndarray
    gain: np.ndarray
    true_power: np.ndarray
    sparsity: int
    noise_std: float
    seed: int
    snr_db: float = field(default=float("nan"))

    @property
    def M(self) -> int:
        return self.gain.shape[0]

    @property
    def N(self) -> int:
        return self.gain.shape[1]

    @property
    def support(self) -> tuple[int, ...]:
        return tuple(int(i) for i in np.flatnonzero(self.true_power))

    def to_dict(self) -> dict:
        return {
            "grid": {"side_count": self.grid.side_count, "area_extent": self.grid.area_extent},
            "sensor_positions": self.sensor_positions.tolist(),
            "gain": self.gain.tolist(),
            "true_power": self.true_power.tolist(),
            "sparsity": self.sparsity,
            "noise_std": self.noise_std,
            "seed": self.seed,
            "snr_db": self.snr_db,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict())

    @classmethod
    def from_dict(cls, d: dict) -> "Scenario":
        return cls(
            grid=GridSpec(int(d["grid"]["side_count"]), float(d["grid"]["area_extent"])),
            sensor_positions=_frozen(d["sensor_positions"]),
            gain=_frozen(d["gain"]),
            true_power=_frozen(d["true_power"]),
            sparsity=int(d["sparsity"]),
            noise_std=float(d["noise_std"]),
            seed=int(d["seed"]),
            snr_db=float(d.get("snr_db", float("nan"))),
        )

    @classmethod
    def from_json(cls, s: str) -> "Scenario":
        return cls.from_dict(json.loads(s))

    def with_power(self, x) -> "Scenario":
        """Same geometry and noise level, different ground truth."""
        x = _frozen(x)
        return Scenario(self.grid, self.sensor_positions, self.gain, x,
                        int(np.count_nonzero(x)), self.noise_std, self.seed, self.snr_db)


def noise_std_for_snr(gain, x, snr_db) -> float:
    signal = np.asarray(gain) @ np.asarray(x)
    p = float(np.mean(signal**2))
    if p == 0.0:
        return 0.0
    return float(np.sqrt(p / 10.0 ** (snr_db / 10.0)))


def build_scenario(grid: GridSpec, sensor_count: int, sparsity: int, snr_db: float,
                   seed: int) -> Scenario:
    if sensor_count < 1:
        raise InvalidArgumentError("sensor_count must be >= 1")
    if not 0 <= sparsity <= grid.n_points:
        raise InvalidArgumentError(f"sparsity must lie in [0, {grid.n_points}]")
    rng = np.random.default_rng(seed)
    sensors = rng.uniform(0.0, grid.area_extent, size=(sensor_count, 2))
    active = np.sort(rng.choice(grid.n_points, size=sparsity, replace=False))
    x = np.zeros(grid.n_points)
    x[active] = 1.0
    A = gain_matrix(sensors, grid.points(), grid.d_floor)
    return Scenario(
        grid=grid,
        sensor_positions=_frozen(sensors),
        gain=_frozen(A),
        true_power=_frozen(x),
        sparsity=int(sparsity),
        noise_std=noise_std_for_snr(A, x, snr_db),
        seed=int(seed),
        snr_db=float(snr_db),
    )


@dataclass(frozen=True)
class MeasurementSet:
    values: np.ndarray
    per_sensor_noise: np.ndarray


def measure(gain, x, noise_std, rng) -> MeasurementSet:
    gain = np.asarray(gain)
    nu = rng.normal(0.0, noise_std, size=gain.shape[0]) if noise_std > 0 else np.zeros(gain.shape[0])
    return MeasurementSet(values=_frozen(gain @ np.asarray(x) + nu), per_sensor_noise=_frozen(nu))


def sample_measurements(sc: Scenario, seed: int) -> MeasurementSet:
    return measure(sc.gain, sc.true_power, sc.noise_std, np.random.default_rng(seed))
