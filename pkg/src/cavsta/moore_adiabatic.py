"""Adiabatic (first-order) Moore functions for a slowly driven cavity.

The leading adiabatic solution of Moore's equations is

    F_ad(t) = I(t) + (1/2) (R+L)/(R-L) + cF,
    G_ad(t) = I(t) - (1/2) (R+L)/(R-L) + cG,

with I(t) the advance integral of 1/(R-L).  The anchoring constants are
cF = -1/2, cG = +1/2, fixed by matching the static pre-motion branch
(t +- L0)/d0; with that choice G_ad - F_ad = 1 - (R+L)/(R-L) exactly, which
encodes both boundary conditions.

Only the order-0 evaluation touches the quadrature table (and only inside
the motion window, where I is not elementary); derivatives 1..3 are closed
forms in the mirror-path jets, never numerical differences.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.interpolate import CubicHermiteSpline

from . import jets
from .errors import ConvergenceError, GeometryError
from .trajectory import TrajectoryPair

__all__ = ["AdiabaticMoore", "build", "eval_moore", "adiabatic_residual"]

_CF = -0.5
_CG = +0.5


@dataclass(frozen=True)
class AdiabaticMoore:
    """Evaluable adiabatic Moore pair for one TrajectoryPair.

    The advance integral I is tabulated on the motion window by cumulative
    composite Simpson and interpolated with a cubic Hermite spline whose node
    slopes are the exact integrand 1/(R-L); outside the window I is linear
    and evaluated in closed form.
    """

    pair: TrajectoryPair
    panels: int
    _spline: CubicHermiteSpline = field(repr=False, compare=False)
    I_end: float

    @classmethod
    def build(
        cls,
        pair: TrajectoryPair,
        panels: int = 4096,
        endpoint_tol: float = 1e-10,
        max_doublings: int = 6,
    ) -> "AdiabaticMoore":
        """Tabulate I(t) = t_lo/d0 + int_{t_lo}^t ds/(R-L) over the motion window.

        Panel count doubles until the window-end value moves by less than
        `endpoint_tol`; the integrand is smooth, so one doubling normally
        settles it.
        """
        if pair.gap_min() <= 0:
            raise GeometryError("R - L must stay positive")
        t_lo, t_hi = pair.motion_start, pair.motion_end
        n = int(panels)
        prev_end = None
        for _ in range(max_doublings + 1):
            nodes = np.linspace(t_lo, t_hi, n + 1)
            g_nodes = 1.0 / pair.gap(nodes)
            g_mid = 1.0 / pair.gap(0.5 * (nodes[:-1] + nodes[1:]))
            h = (t_hi - t_lo) / n
            inc = (h / 6.0) * (g_nodes[:-1] + 4.0 * g_mid + g_nodes[1:])
            I = np.empty(n + 1)
            I[0] = t_lo / pair.d0
            np.cumsum(inc, out=I[1:])
            I[1:] += I[0]
            end = I[-1]
            if prev_end is not None and abs(end - prev_end) <= endpoint_tol:
                break
            prev_end = end
            n *= 2
        else:
            raise ConvergenceError(
                f"advance integral did not settle to {endpoint_tol} "
                f"after {max_doublings} doublings"
            )
        spline = CubicHermiteSpline(nodes, I, g_nodes)
        return cls(pair=pair, panels=n, _spline=spline, I_end=float(end))

    # -- pieces ---------------------------------------------------------------

    def advance(self, z):
        """I(z): spline inside the motion window, exact linear outside."""
        z = np.asarray(z, dtype=float)
        scalar = z.ndim == 0
        zz = np.atleast_1d(z)
        t_lo, t_hi = self.pair.motion_start, self.pair.motion_end
        out = np.empty(zz.shape)
        below = zz < t_lo
        above = zz > t_hi
        inner = ~(below | above)
        out[inner] = self._spline(zz[inner])
        out[below] = zz[below] / self.pair.d0
        out[above] = self.I_end + (zz[above] - t_hi) / self.pair.df
        return float(out[0]) if scalar else out

    def _q_jet(self, z):
        """Jet of (R+L)/(R-L) at z (exact from the path polynomials)."""
        L = self.pair.left.jet(z)
        R = self.pair.right.jet(z)
        u = tuple(r + l for r, l in zip(R, L))
        v = tuple(r - l for r, l in zip(R, L))
        return jets.divide(u, v), jets.reciprocal(v)

    def jet(self, which: str, z):
        """(value, d1, d2, d3) of F_ad or G_ad at z; vectorized."""
        scalar = np.ndim(z) == 0
        zz = np.atleast_1d(np.asarray(z, dtype=float))
        q, r = self._q_jet(zz)
        if which == "F":
            s, c = +0.5, _CF
        elif which == "G":
            s, c = -0.5, _CG
        else:
            raise ValueError(f"which must be 'F' or 'G', got {which!r}")
        out = (
            self.advance(zz) + s * q[0] + c,
            r[0] + s * q[1],
            r[1] + s * q[2],
            r[2] + s * q[3],
        )
        if scalar:
            return tuple(float(a[0]) for a in out)
        return out

    def eval(self, which: str, z, order: int = 0):
        if order not in (0, 1, 2, 3):
            raise ValueError(f"order must be in 0..3, got {order}")
        return self.jet(which, z)[order]

    def F(self, z, order: int = 0):
        return self.eval("F", z, order)

    def G(self, z, order: int = 0):
        return self.eval("G", z, order)

    def F_jet(self, z):
        return self.jet("F", z)

    def G_jet(self, z):
        return self.jet("G", z)

    def kink_args(self, lo: float, hi: float):
        """Arguments where F_ad/G_ad lose smoothness: the trajectory breaks
        themselves (F_ad, G_ad are direct functions of their argument)."""
        b = np.union1d(self.pair.left.breaks, self.pair.right.breaks)
        b = b[(b > lo) & (b < hi)]
        return b, b.copy()

    def residual(self, times):
        """Sup over `times` of both Moore-equation residuals (res_L, res_R)."""
        t = np.asarray(times, dtype=float)
        L = self.pair.left(t)
        R = self.pair.right(t)
        res_l = np.max(np.abs(self.eval("G", t + L) - self.eval("F", t - L)))
        res_r = np.max(np.abs(self.eval("G", t + R) - self.eval("F", t - R) - 2.0))
        return float(res_l), float(res_r)


def build(pair: TrajectoryPair, panels: int = 4096, **kw) -> AdiabaticMoore:
    return AdiabaticMoore.build(pair, panels, **kw)


def eval_moore(am: AdiabaticMoore, which: str, z, order: int = 0):
    return am.eval(which, z, order)


def adiabatic_residual(am: AdiabaticMoore, times):
    return am.residual(times)
