"""Toroidal window, PPP sampling and nearest-neighbour search."""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np

MIN_EXPECTED_POINTS = 100


@dataclass(frozen=True)
class Window:
    """Square window of side ``side`` metres with wrap-around edges."""

    side: float = 500.0
    topology: str = "torus"

    def __post_init__(self):
        if not (isinstance(self.side, (int, float)) and self.side > 0 and math.isfinite(self.side)):
            raise ValueError(f"window side must be a positive finite number, got {self.side!r}")
        if self.topology != "torus":
            raise ValueError("only the torus topology is supported")

    @property
    def area(self) -> float:
        return self.side * self.side

    def expected_count(self, lam: float) -> float:
        return lam * self.area

    def check_intensity(self, lam: float, name: str = "lambda") -> bool:
        """Warn when a PPP of intensity ``lam`` would have too few points for stable estimates."""
        if 0 < self.expected_count(lam) < MIN_EXPECTED_POINTS:
            warnings.warn(
                f"{name}={lam:g} on a {self.side:g} m window gives only "
                f"{self.expected_count(lam):.1f} expected points",
                RuntimeWarning,
                stacklevel=2,
            )
            return False
        return True


def sample_ppp(lam: float, window: Window, rng: np.random.Generator) -> np.ndarray:
    """Homogeneous PPP of intensity ``lam`` on ``window`` as an (n, 2) array."""
    if not lam >= 0:
        raise ValueError(f"intensity must be >= 0, got {lam}")
    n = int(rng.poisson(lam * window.area))
    return rng.uniform(0.0, window.side, size=(n, 2))


def torus_delta(a: np.ndarray, b: np.ndarray, side: float) -> np.ndarray:
    d = np.abs(np.asarray(a, dtype=float) - np.asarray(b, dtype=float))
    return np.where(d > 0.5 * side, side - d, d)


def torus_distance(a, b, side: float) -> np.ndarray:
    """Wrap-around Euclidean distance between broadcastable point arrays."""
    d = torus_delta(a, b, side)
    return np.sqrt(np.sum(d * d, axis=-1))


def nearest(point, points, window: Window) -> tuple[int, float]:
    """Index of the nearest of ``points`` to ``point`` and its toroidal distance.

    Ties go to the lowest index.
    """
    pts = np.asarray(points, dtype=float).reshape(-1, 2)
    if pts.shape[0] == 0:
        raise ValueError("nearest() needs a nonempty point set")
    d = torus_delta(pts, np.asarray(point, dtype=float).reshape(1, 2), window.side)
    d2 = d[:, 0] * d[:, 0] + d[:, 1] * d[:, 1]
    i = int(np.argmin(d2))
    return i, math.sqrt(d2[i])


class UniformGrid:
    """Bucket index over points on a torus for nearest-neighbour queries.

    Cells have side about 1/sqrt(lambda), so each holds O(1) points and a
    query inspects a few rings of cells.
    """

    def __init__(self, points, window: Window, cell: float | None = None):
        self.points = np.ascontiguousarray(np.asarray(points, dtype=float).reshape(-1, 2))
        self.window = window
        n = self.points.shape[0]
        if n == 0:
            raise ValueError("cannot index an empty point set")
        if cell is None:
            cell = window.side / math.sqrt(n)
        m = max(1, int(window.side // cell))
        self.m = m
        self.cell = window.side / m
        cx, cy = self._cell_of(self.points)
        flat = cx * m + cy
        self.order = np.argsort(flat, kind="stable")
        counts = np.bincount(flat, minlength=m * m)
        self.starts = np.concatenate(([0], np.cumsum(counts)))

    def _cell_of(self, pts):
        c = np.floor(pts / self.cell).astype(np.int64) % self.m
        return c[..., 0], c[..., 1]

    def _bucket(self, cx: int, cy: int) -> np.ndarray:
        k = (cx % self.m) * self.m + (cy % self.m)
        return self.order[self.starts[k]:self.starts[k + 1]]

    def query(self, point) -> tuple[int, float]:
        """Nearest indexed point (lowest index on ties) and its distance."""
        q = np.asarray(point, dtype=float).reshape(2)
        cx, cy = (int(v) for v in np.floor(q / self.cell).astype(np.int64) % self.m)
        side = self.window.side
        best_i, best_d2 = -1, math.inf
        ring = 0
        while True:
            if 2 * ring + 1 >= self.m:
                # ring covers the whole torus; fall back to a full scan
                i, d = nearest(q, self.points, self.window)
                return i, d
            cand = []
            for dx in range(-ring, ring + 1):
                for dy in range(-ring, ring + 1):
                    if max(abs(dx), abs(dy)) == ring:
                        cand.append(self._bucket(cx + dx, cy + dy))
            cand = np.concatenate(cand)
            if cand.size:
                d = torus_delta(self.points[cand], q, side)
                d2 = d[:, 0] * d[:, 0] + d[:, 1] * d[:, 1]
                j = np.lexsort((cand, d2))[0]
                if d2[j] < best_d2 or (d2[j] == best_d2 and cand[j] < best_i):
                    best_i, best_d2 = int(cand[j]), float(d2[j])
            # anything beyond this ring is at least ring * cell away
            if best_i >= 0 and math.sqrt(best_d2) < ring * self.cell:
                return best_i, math.sqrt(best_d2)
            ring += 1

    def query_many(self, queries) -> tuple[np.ndarray, np.ndarray]:
        q = np.asarray(queries, dtype=float).reshape(-1, 2)
        idx = np.empty(q.shape[0], dtype=np.int64)
        dist = np.empty(q.shape[0])
        for k in range(q.shape[0]):
            idx[k], dist[k] = self.query(q[k])
        return idx, dist
