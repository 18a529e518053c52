"""Dense vector arithmetic, deterministic random streams and order statistics."""

import numpy as np


def as_vector(v) -> np.ndarray:
    """Coerce to a finite 1-D float64 array. Raises ValueError on NaN/Inf."""
    arr = np.asarray(v, dtype=np.float64)
    if arr.ndim != 1:
        raise ValueError(f"expected a 1-D vector, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise ValueError("vector contains non-finite entries")
    return arr


def check_same_dim(*vs):
    dims = {len(v) for v in vs}
    if len(dims) > 1:
        raise ValueError(f"dimension mismatch: {sorted(dims)}")


def l2_norm(v) -> float:
    v = as_vector(v)
    return float(np.linalg.norm(v))


def normalize(v) -> np.ndarray:
    v = as_vector(v)
    n = np.linalg.norm(v)
    if n <= 0.0:
        raise ZeroNormError("cannot normalize a zero vector")
    return v / n


class ZeroNormError(ValueError):
    """Normalization of the zero vector; caller decides the policy."""


def coordinate_median(vs) -> np.ndarray:
    """Per-coordinate median; even counts use the midpoint of the two middle values."""
    if len(vs) == 0:
        raise ValueError("coordinate_median of empty list")
    stacked = np.stack([as_vector(v) for v in vs])
    return np.median(stacked, axis=0)


class RngStream:
    """Counter-based deterministic random stream.

    Keyed by (seed, worker, iteration, draw): the same lane always yields the
    same values regardless of execution order, and distinct lanes are
    statistically independent (Philox counter-based generator under the hood).
    """

    def __init__(self, seed: int, worker: int = 0, iteration: int = 0, draw: int = 0):
        self.seed = int(seed)
        self.worker = int(worker)
        self.iteration = int(iteration)
        self.draw = int(draw)

    def lane(self, worker=None, iteration=None) -> "RngStream":
        """Fork a fresh lane (draw counter reset); the parent is unchanged."""
        return RngStream(
            self.seed,
            self.worker if worker is None else worker,
            self.iteration if iteration is None else iteration,
        )

    def _next_generator(self) -> np.random.Generator:
        ss = np.random.SeedSequence(
            entropy=self.seed, spawn_key=(self.worker, self.iteration, self.draw)
        )
        self.draw += 1
        return np.random.Generator(np.random.Philox(ss))

    def gaussian(self, d: int) -> np.ndarray:
        if d < 1:
            raise ValueError("dimension must be >= 1")
        return self._next_generator().standard_normal(d)

    def gaussian_matrix(self, n: int, d: int) -> np.ndarray:
        return self._next_generator().standard_normal((n, d))

    def integers(self, low: int, high: int, size: int) -> np.ndarray:
        """`size` integers uniform on [low, high)."""
        return self._next_generator().integers(low, high, size=size)

    def __repr__(self):
        return (
            f"RngStream(seed={self.seed}, worker={self.worker}, "
            f"iteration={self.iteration}, draw={self.draw})"
        )


def gaussian_draw(stream: RngStream, d: int) -> np.ndarray:
    """d i.i.d. standard normal draws; advances the stream's draw counter."""
    return stream.gaussian(d)
