"""Bilinear interpolation on uniform rectangular grids."""
from __future__ import annotations

import numpy as np


def bilinear(x0: float, dx: float, y0: float, dy: float, values: np.ndarray, x, y):
    """Interpolate ``values[i, j]`` sampled at ``(x0 + i*dx, y0 + j*dy)``.

    Queries outside the grid are clamped to its boundary. Returns
    ``(result, n_clamped)``; exact at grid nodes.
    """
    nx, ny = values.shape
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    fx = _snap((x - x0) / dx)
    fy = _snap((y - y0) / dy)
    outside = (fx < -1e-9) | (fx > nx - 1 + 1e-9) | (fy < -1e-9) | (fy > ny - 1 + 1e-9)
    fx = np.clip(fx, 0.0, nx - 1)
    fy = np.clip(fy, 0.0, ny - 1)
    i = np.minimum(fx.astype(np.intp), nx - 2)
    j = np.minimum(fy.astype(np.intp), ny - 2)
    tx = fx - i
    ty = fy - j
    v00 = values[i, j]
    v10 = values[i + 1, j]
    v01 = values[i, j + 1]
    v11 = values[i + 1, j + 1]
    out = (v00 * (1 - tx) + v10 * tx) * (1 - ty) + (v01 * (1 - tx) + v11 * tx) * ty
    # exact node values even where 1 - t rounding would leak the neighbours
    on_node = (tx == 0) & (ty == 0)
    out = np.where(on_node, v00, out)
    return out, int(np.count_nonzero(outside))


def _snap(f):
    # node coordinates rebuilt as x0 + i*dx may land a few ulps off the integer
    r = np.round(f)
    return np.where(np.abs(f - r) < 1e-9, r, f)
