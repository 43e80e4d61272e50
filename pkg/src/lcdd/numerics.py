"""Array helpers and the seeded random-stream contract.

Signals are plain ``float64`` numpy arrays. Every stochastic routine in the
package draws through an :class:`RngStream`, so a ``(master_seed,
stream_index)`` pair fully determines its output.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

_U64 = (1 << 64) - 1


class ShapeError(ValueError):
    """Raised when two signals that must agree in shape do not."""


class InvalidStateError(RuntimeError):
    """Raised when coefficients describe an impossible diffusion step."""


def as_signal(x) -> np.ndarray:
    """Return ``x`` as a float64 array, rejecting NaN/Inf."""
    arr = np.asarray(x, dtype=np.float64)
    if not np.all(np.isfinite(arr)):
        raise ValueError("signal contains non-finite values")
    return arr


def check_same_shape(a: np.ndarray, b: np.ndarray) -> None:
    if np.shape(a) != np.shape(b):
        raise ShapeError(f"shape mismatch: {np.shape(a)} vs {np.shape(b)}")


@dataclass(frozen=True)
class RngStream:
    """An independent, reproducible stream of random draws.

    Streams with the same seed but different ``stream_index`` are derived
    through :class:`numpy.random.SeedSequence` spawn keys and are
    statistically independent.
    """

    master_seed: int
    stream_index: int = 0

    def generator(self) -> np.random.Generator:
        """A fresh generator positioned at the start of this stream."""
        seq = np.random.SeedSequence(
            self.master_seed & _U64, spawn_key=(self.stream_index & _U64,)
        )
        return np.random.Generator(np.random.PCG64(seq))

    def child(self, offset: int) -> "RngStream":
        return RngStream(self.master_seed, self.stream_index + offset)


def _check_shape(shape) -> tuple[int, ...]:
    if isinstance(shape, (int, np.integer)):
        shape = (shape,)
    shape = tuple(int(s) for s in shape)
    if len(shape) == 0 or any(s < 1 for s in shape):
        raise ValueError(f"shape must be nonempty with positive dims, got {shape}")
    return shape


def standard_normal(rng: RngStream, shape) -> np.ndarray:
    """I.i.d. N(0, 1) draws of the given shape from the start of ``rng``."""
    shape = _check_shape(shape)
    return rng.generator().standard_normal(shape)


def axpy(a: float, x, b: float, y) -> np.ndarray:
    """Elementwise ``a*x + b*y``."""
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    check_same_shape(x, y)
    return a * x + b * y
