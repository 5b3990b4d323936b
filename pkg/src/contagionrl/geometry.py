"""Toroidal (periodic-boundary) position arithmetic.

Positions live on a square grid of side ``G`` with both coordinates in
``[0, G)``; they are continuous real values, not integer cells.  All
displacement and distance computations use the shortest wrapped path.

The canonical signed displacement uses the mod form

    delta = (to - from + G/2) mod G - G/2

which is total and deterministic: at an exact antipode (separation of
G/2 along an axis) it yields -G/2, so the component range is
[-G/2, G/2).  Distances derived from it agree with the min-form
``min(|d|, G - |d|)`` per axis.
"""

from __future__ import annotations

import math

import numpy as np

from .errors import ConfigError


def _check_grid(grid_size: float) -> None:
    if grid_size <= 0:
        raise ConfigError(f"grid size must be positive, got {grid_size}")


def wrap_position(pos: np.ndarray, grid_size: float) -> np.ndarray:
    """Map coordinates into [0, grid_size) with periodic wrapping."""
    _check_grid(grid_size)
    return np.asarray(pos, dtype=float) % grid_size


def wrapped_delta(from_pos, to_pos, grid_size: float) -> np.ndarray:
    """Signed minimal displacement from ``from_pos`` to ``to_pos``.

    Broadcasts over leading axes; the last axis holds (x, y).  Each
    component lies in [-grid_size/2, grid_size/2).
    """
    _check_grid(grid_size)
    from_pos = np.asarray(from_pos, dtype=float)
    to_pos = np.asarray(to_pos, dtype=float)
    half = grid_size / 2.0
    return (to_pos - from_pos + half) % grid_size - half


def toroidal_distance(a, b, grid_size: float) -> np.ndarray | float:
    """Euclidean length of the wrapped displacement between two positions.

    Always in [0, (grid_size/2) * sqrt(2)].
    """
    delta = wrapped_delta(a, b, grid_size)
    return np.linalg.norm(delta, axis=-1)


def max_grid_distance(grid_size: float) -> float:
    """Supremum of the toroidal distance: (G/2) * sqrt(2).

    This is the attainable diagonal under periodic wrapping (realized at
    the antipode), not the unwrapped diagonal G * sqrt(2); it keeps
    normalized distances in [0, 1].
    """
    _check_grid(grid_size)
    return (grid_size / 2.0) * math.sqrt(2.0)
