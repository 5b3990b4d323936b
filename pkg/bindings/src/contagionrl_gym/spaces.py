"""Minimal Box space with the standard Gymnasium attribute surface.

Only what the bindings need: bounds, shape, dtype, containment, and
seeded sampling.  When the real ``gymnasium`` package is installed its
own spaces are interchangeable; this class exists so the bindings work
without it.
"""

from __future__ import annotations

import numpy as np


class Box:
    def __init__(self, low, high, dtype=np.float64):
        self.low = np.asarray(low, dtype=dtype)
        self.high = np.asarray(high, dtype=dtype)
        if self.low.shape != self.high.shape:
            raise ValueError("low/high shapes differ")
        if np.any(self.low > self.high):
            raise ValueError("low must not exceed high")
        self.shape = self.low.shape
        self.dtype = np.dtype(dtype)

    def contains(self, x) -> bool:
        x = np.asarray(x)
        return (x.shape == self.shape
                and bool(np.all(x >= self.low))
                and bool(np.all(x <= self.high)))

    def sample(self, rng: np.random.Generator | None = None) -> np.ndarray:
        rng = np.random.default_rng() if rng is None else rng
        return rng.uniform(self.low, self.high).astype(self.dtype)

    def __repr__(self):
        return f"Box(shape={self.shape}, dtype={self.dtype})"

    def __eq__(self, other):
        return (isinstance(other, Box)
                and np.array_equal(self.low, other.low)
                and np.array_equal(self.high, other.high)
                and self.dtype == other.dtype)
