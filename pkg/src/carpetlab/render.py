"""Grayscale rendering of the measure over a depth-k cell partition."""

from __future__ import annotations

import numpy as np

from .dimension import cell_atoms
from .errors import BadShape, BudgetExceeded
from .scenery import PhaseState
from .symbolic import BernoulliSpec


def heatmap_array(spec: BernoulliSpec, depth: int, phase: PhaseState,
                  width: int, height: int, budget: int = 4_000_000) -> np.ndarray:
    """Pixel intensities: log cell mass normalized to [0, 255], zero mass black."""
    if width < 16 or height < 16:
        raise BadShape("image dimensions must be at least 16")
    dense = spec.m ** depth * spec.n ** phase.ell(depth)
    if dense > 4 * budget:
        raise BudgetExceeded(f"dense cell grid of {dense} entries exceeds the budget")
    x, y, w, ell = cell_atoms(spec, depth, phase, budget)
    mk, nl = spec.m ** depth, spec.n ** ell
    grid = np.zeros((mk, nl))
    ix = np.rint(x * mk).astype(np.int64)
    iy = np.rint(y * nl).astype(np.int64)
    grid[ix, iy] = w
    px = np.minimum((np.arange(width) + 0.5) / width * mk, mk - 1).astype(np.int64)
    py = np.minimum((np.arange(height) + 0.5) / height * nl, nl - 1).astype(np.int64)
    cell = grid[px[None, :], py[:, None]]  # row 0 = bottom
    img = np.zeros((height, width), dtype=np.uint8)
    pos = cell > 0
    if pos.any():
        lo = np.log(cell[pos]).min()
        hi = np.log(cell[pos]).max()
        if hi == lo:
            img[pos] = 255
        else:
            img[pos] = np.rint((np.log(cell[pos]) - lo) / (hi - lo) * 255).astype(np.uint8)
    return img[::-1, :]  # top row first for image output


def write_ppm(img: np.ndarray, path) -> None:
    """Binary PPM (P6), gray written as equal RGB channels."""
    height, width = img.shape
    with open(path, "wb") as fh:
        fh.write(f"P6\n{width} {height}\n255\n".encode())
        fh.write(np.repeat(img.reshape(-1), 3).tobytes())


def render_heatmap(spec: BernoulliSpec, depth: int, phase: PhaseState,
                   width: int, height: int, path,
                   budget: int = 4_000_000) -> None:
    write_ppm(heatmap_array(spec, depth, phase, width, height, budget), path)
