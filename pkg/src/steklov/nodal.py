"""Zero-level polylines of sampled fields."""
from __future__ import annotations

import numpy as np
from skimage import measure

from .reconstruction import FieldGrid


def nodal_extract(grid: FieldGrid, level=0.0):
    """Polylines approximating ``{u = level}`` by marching squares with linear edge interpolation.

    Returns a list of ``(k, 2)`` arrays of plane coordinates.  Cells outside
    the domain or with NaN values are masked out.
    """
    u = np.where(np.isfinite(grid.u), grid.u, 0.0)
    mask = grid.inside & np.isfinite(grid.u)
    lines = measure.find_contours(u, level, mask=mask)
    out = []
    for ln in lines:
        r, c = ln[:, 0], ln[:, 1]
        x = np.interp(c, np.arange(len(grid.xs)), grid.xs)
        y = np.interp(r, np.arange(len(grid.ys)), grid.ys)
        out.append(np.column_stack([x, y]))
    return out


def rays_crossing_circle(lines, center, radius):
    """Number of sign changes of the nodal set along a circle, counted from polylines."""
    cnt = 0
    for ln in lines:
        d = np.hypot(ln[:, 0] - center[0], ln[:, 1] - center[1]) - radius
        cnt += int(np.sum(np.sign(d[:-1]) * np.sign(d[1:]) < 0))
    return cnt
