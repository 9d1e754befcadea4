"""Finite-difference stencils used to cross-check analytic derivatives."""

import numpy as np


def fd_jets(f, z, h):
    """Centered estimates of f', f'', f''' at z (fourth-order first two)."""
    f2, f1, f0, fm1, fm2 = f(z + 2 * h), f(z + h), f(z), f(z - h), f(z - 2 * h)
    d1 = (8.0 * (f1 - fm1) - (f2 - fm2)) / (12.0 * h)
    d2 = (-(f2 + fm2) + 16.0 * (f1 + fm1) - 30.0 * f0) / (12.0 * h * h)
    d3 = (f2 - 2.0 * f1 + 2.0 * fm1 - fm2) / (2.0 * h ** 3)
    return d1, d2, d3


def drop_near(grid, points, pad):
    """Grid values farther than pad from every listed point."""
    keep = np.ones(np.shape(grid), dtype=bool)
    for p in points:
        keep &= np.abs(grid - p) > pad
    return grid[keep]
