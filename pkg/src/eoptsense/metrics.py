"""Recovery metrics and the interpolated reliability map."""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from .errors import InvalidArgumentError

SUPPORT_TAU = 0.05


def support_of(x, tau=SUPPORT_TAU) -> tuple[int, ...]:
    """Indices with |x_i| > tau * max|x|."""
    x = np.abs(np.asarray(x, dtype=float))
    if x.size == 0 or x.max() == 0.0:
        return ()
    return tuple(int(i) for i in np.flatnonzero(x > tau * x.max()))


def recovery_success(x_hat, x_true, tau=SUPPORT_TAU) -> bool:
    x_hat = np.asarray(x_hat)
    x_true = np.asarray(x_true)
    if x_hat.shape != x_true.shape:
        raise InvalidArgumentError("x_hat and x_true differ in length")
    return support_of(x_hat, tau) == tuple(int(i) for i in np.flatnonzero(x_true))


def normalized_error(x_hat, x_true) -> float:
    x_true = np.asarray(x_true, dtype=float)
    nt = np.linalg.norm(x_true)
    if nt == 0:
        raise InvalidArgumentError("normalized error undefined for x_true = 0")
    return float(np.linalg.norm(x_true - np.asarray(x_hat, dtype=float)) / nt)


def spurious_power(x_hat, true_support) -> float:
    x_hat = np.asarray(x_hat, dtype=float)
    mask = np.ones(x_hat.shape[0], dtype=bool)
    mask[list(true_support)] = False
    return float(np.abs(x_hat[mask]).sum())


def mean_reliability(r) -> float:
    r = np.asarray(r, dtype=float)
    if r.size == 0:
        raise InvalidArgumentError("empty reliability vector")
    return float(r.mean())


@dataclass(frozen=True)
class ReliabilityMap:
    width: int
    height: int
    values: np.ndarray  # (height, width); row 0 is y = 0
    extent: tuple[float, float, float, float]  # (x0, x1, y0, y1)

    def to_pgm(self) -> str:
        """Plain P2 PGM, maxval 255, pixel = round(255 * r), top row = largest y."""
        px = np.rint(255.0 * np.clip(self.values, 0.0, 1.0)).astype(int)[::-1]
        lines = ["P2", f"{self.width} {self.height}", "255"]
        lines += [" ".join(str(v) for v in row) for row in px]
        return "\n".join(lines) + "\n"

    def to_json(self) -> str:
        return json.dumps({
            "width": self.width,
            "height": self.height,
            "extent": list(self.extent),
            "values": self.values.tolist(),
        })


def idw_interpolate(points, values, queries, d_floor, power=2.0) -> np.ndarray:
    points = np.asarray(points, dtype=float)
    queries = np.asarray(queries, dtype=float)
    d = np.hypot(queries[:, None, 0] - points[None, :, 0], queries[:, None, 1] - points[None, :, 1])
    w = 1.0 / np.maximum(d, d_floor) ** power
    return (w @ np.asarray(values, dtype=float)) / w.sum(axis=1)


def reliability_raster(sc, r, resolution=64) -> ReliabilityMap:
    """Inverse-distance (power 2) interpolation of sensor reliabilities.

    Cells are sampled at their centers over the scenario's square area.
    """
    if resolution < 2:
        raise InvalidArgumentError("resolution must be >= 2")
    ext = sc.grid.area_extent
    c = (np.arange(resolution) + 0.5) * ext / resolution
    xx, yy = np.meshgrid(c, c, indexing="xy")
    q = np.column_stack([xx.ravel(), yy.ravel()])
    vals = idw_interpolate(sc.sensor_positions, r, q, sc.grid.d_floor).reshape(resolution, resolution)
    return ReliabilityMap(resolution, resolution, vals, (0.0, ext, 0.0, ext))
