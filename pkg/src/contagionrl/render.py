"""Minimal frame rendering: one raster per step, written as binary PPM.

Compartment colors follow the usual convention (blue susceptible, red
infected, green recovered, gray dead) with the agent drawn last as an
orange marker, so the agent's cell always shows the agent color.
"""

from __future__ import annotations

from pathlib import Path

import numpy as np

from .epidemic import Compartment, WorldState

BACKGROUND = (248, 249, 250)
COMPARTMENT_COLORS = {
    Compartment.S: (34, 139, 230),   # blue
    Compartment.I: (250, 82, 82),    # red
    Compartment.R: (64, 192, 87),    # green
    Compartment.D: (134, 142, 150),  # gray
}
AGENT_COLOR = (253, 126, 20)         # orange


def _paint_cell(frame: np.ndarray, x: float, y: float, grid_size: int,
                cell_px: int, color: tuple) -> None:
    col = int(x) % grid_size
    row = grid_size - 1 - (int(y) % grid_size)  # +y points up in the image
    frame[row * cell_px:(row + 1) * cell_px,
          col * cell_px:(col + 1) * cell_px] = color


def render_frame(world: WorldState, cell_px: int = 8) -> np.ndarray:
    """(G*px, G*px, 3) uint8 image of the world."""
    g = world.grid_size
    frame = np.empty((g * cell_px, g * cell_px, 3), dtype=np.uint8)
    frame[:] = BACKGROUND
    for i in range(world.n_humans):
        color = COMPARTMENT_COLORS[Compartment(world.compartments[i])]
        _paint_cell(frame, world.positions[i, 0], world.positions[i, 1],
                    g, cell_px, color)
    _paint_cell(frame, world.agent_pos[0], world.agent_pos[1], g, cell_px,
                AGENT_COLOR)
    return frame


def write_ppm(frame: np.ndarray, path: Path) -> None:
    height, width = frame.shape[:2]
    with open(path, "wb") as fh:
        fh.write(f"P6\n{width} {height}\n255\n".encode("ascii"))
        fh.write(frame.tobytes())


def dump_frames(worlds, out_dir: Path, cell_px: int = 8) -> list[Path]:
    """Write frame_00000.ppm, frame_00001.ppm, ... for a world stream."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    paths = []
    for idx, world in enumerate(worlds):
        path = out_dir / f"frame_{idx:05d}.ppm"
        write_ppm(render_frame(world, cell_px), path)
        paths.append(path)
    return paths
