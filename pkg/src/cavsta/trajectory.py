"""Piecewise-polynomial mirror trajectories for a 1D two-mirror cavity.

Lengths and times are measured in units of the initial right-mirror position
(c = hbar = k_B = 1), so the speed of light is 1.  A mirror path is a
piecewise polynomial of time, constant outside its motion window and C^3 at
every segment boundary; third derivatives must be exact because they enter
the renormalized energy density directly, so paths are stored as coefficient
tables, never as sampled data.

Reference protocols displace each mirror by the seventh-order smoothstep
delta(x) = 35x^4 - 84x^5 + 70x^6 - 20x^7, which rises from 0 to 1 on [0, 1]
with vanishing first, second and third derivatives at both ends.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import ContinuityError, GeometryError

__all__ = [
    "smoothstep7",
    "MirrorPath",
    "TrajectoryPair",
    "make_reference",
    "max_speed",
]

# Ascending coefficients of delta and its derivatives; _STEP_POWER[k] is the
# exponent of the leading monomial so order k evaluates as x**p * poly(x).
_STEP_COEFFS = {
    0: np.array([35.0, -84.0, 70.0, -20.0]),
    1: np.array([140.0, -420.0, 420.0, -140.0]),
    2: np.array([420.0, -1680.0, 2100.0, -840.0]),
    3: np.array([840.0, -5040.0, 8400.0, -4200.0]),
}
_STEP_POWER = {0: 4, 1: 3, 2: 2, 3: 1}

_MAX_ORDER = 3
_NCOEF = 8  # storage width: polynomial degree <= 7 per segment


def smoothstep7(x, order: int = 0):
    """Seventh-order smoothstep delta(x) or its order-th derivative.

    Clamps outside [0, 1]: order 0 returns 0 (x < 0) or 1 (x > 1), orders
    1..3 return 0 there.  Accepts scalars or arrays.
    """
    if order not in _STEP_COEFFS:
        raise ValueError(f"order must be in 0..3, got {order}")
    x = np.asarray(x, dtype=float)
    inside = (x >= 0.0) & (x <= 1.0)
    xc = np.where(inside, x, 0.0)
    c = _STEP_COEFFS[order]
    poly = c[3]
    for j in (2, 1, 0):
        poly = poly * xc + c[j]
    val = xc ** _STEP_POWER[order] * poly
    if order == 0:
        val = np.where(x > 1.0, 1.0, np.where(x < 0.0, 0.0, val))
    else:
        val = np.where(inside, val, 0.0)
    if val.ndim == 0:
        return float(val)
    return val


def _poly_derivative(coeffs: np.ndarray, order: int) -> np.ndarray:
    """Ascending-coefficient rows differentiated `order` times (same width)."""
    out = coeffs.copy()
    for _ in range(order):
        out = out[:, 1:] * np.arange(1, out.shape[1])
    pad = np.zeros((coeffs.shape[0], coeffs.shape[1] - out.shape[1]))
    return np.hstack([out, pad])


def _poly_shift(coeffs: np.ndarray, dt: float) -> np.ndarray:
    """Re-center an ascending coefficient row from u to u' = u - dt."""
    n = len(coeffs)
    out = np.zeros(n)
    # Taylor coefficients at the new origin: p^(k)(dt)/k!
    fact = 1.0
    work = coeffs.copy()
    for k in range(n):
        out[k] = _horner_row(work, dt) / fact
        work = work[1:] * np.arange(1, len(work))
        fact *= k + 1
        if len(work) == 0:
            break
    return out


def _horner_row(c: np.ndarray, u) -> float:
    val = c[-1]
    for j in range(len(c) - 2, -1, -1):
        val = val * u + c[j]
    return val


@dataclass(frozen=True)
class MirrorPath:
    """One mirror's position as a piecewise polynomial of time.

    `breaks` are the n+1 strictly increasing segment boundaries; `coeffs` is
    an (n, 8) array of ascending polynomial coefficients in the local
    variable u = t - breaks[i].  Outside [breaks[0], breaks[-1]] the path is
    constant (the boundary values), with all derivatives zero.

    `edges`, when given, pins the two constant extension values exactly;
    evaluating the boundary polynomial loses a few ulps, and quantities like
    the final cavity length deserve to be exact.  The pinned values must
    agree with the polynomial boundary values to continuity tolerance.
    """

    breaks: np.ndarray
    coeffs: np.ndarray
    edges: tuple | None = None
    _dcoeffs: tuple = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        breaks = np.atleast_1d(np.asarray(self.breaks, dtype=float))
        coeffs = np.atleast_2d(np.asarray(self.coeffs, dtype=float))
        if breaks.ndim != 1 or len(breaks) < 2:
            raise GeometryError("path needs at least one segment")
        if not np.all(np.diff(breaks) > 0):
            raise GeometryError("segment boundaries must strictly increase")
        if coeffs.shape[0] != len(breaks) - 1:
            raise GeometryError(
                f"{coeffs.shape[0]} coefficient rows for {len(breaks) - 1} segments"
            )
        if coeffs.shape[1] > _NCOEF:
            raise GeometryError(f"polynomial degree above {_NCOEF - 1} unsupported")
        if not np.all(np.isfinite(coeffs)) or not np.all(np.isfinite(breaks)):
            raise GeometryError("non-finite path data")
        if coeffs.shape[1] < _NCOEF:
            coeffs = np.hstack(
                [coeffs, np.zeros((coeffs.shape[0], _NCOEF - coeffs.shape[1]))]
            )
        object.__setattr__(self, "breaks", breaks)
        object.__setattr__(self, "coeffs", coeffs)
        object.__setattr__(
            self,
            "_dcoeffs",
            tuple(_poly_derivative(coeffs, k) for k in range(_MAX_ORDER + 1)),
        )
        ev = (
            float(coeffs[0, 0]),
            float(_horner_row(coeffs[-1], breaks[-1] - breaks[-2])),
        )
        if self.edges is None:
            object.__setattr__(self, "edges", ev)
        else:
            edges = (float(self.edges[0]), float(self.edges[1]))
            scale = max(1.0, float(np.max(np.abs(coeffs))))
            if max(abs(edges[0] - ev[0]), abs(edges[1] - ev[1])) > 1e-9 * scale:
                raise ContinuityError(
                    f"pinned edge values {edges} disagree with boundary "
                    f"polynomial values {ev}"
                )
            object.__setattr__(self, "edges", edges)
        self._check_c3()

    def _check_c3(self):
        """Value and derivatives 1..3 must match at every interior boundary,
        and derivatives 1..3 must vanish at both ends (constant extension)."""
        scale = max(1.0, float(np.max(np.abs(self.coeffs))))
        tol = 1e-9 * scale
        spans = np.diff(self.breaks)
        for k in range(_MAX_ORDER + 1):
            dc = self._dcoeffs[k]
            left_end = np.array(
                [_horner_row(dc[i], spans[i]) for i in range(len(spans))]
            )
            right_start = dc[:, 0]
            if k >= 1:
                if abs(left_end[-1]) > tol or abs(right_start[0]) > tol:
                    raise ContinuityError(
                        f"derivative {k} does not vanish at the motion window edge"
                    )
            interior = np.abs(left_end[:-1] - right_start[1:])
            if interior.size and np.max(interior) > tol:
                i = int(np.argmax(interior))
                raise ContinuityError(
                    f"derivative {k} jumps by {interior[i]:.3e} at t={self.breaks[i + 1]}"
                )

    # -- evaluation ---------------------------------------------------------

    def __call__(self, t, order: int = 0):
        """Exact piecewise-polynomial evaluation of position (order 0) or a
        time derivative (orders 1..3)."""
        if order not in range(_MAX_ORDER + 1):
            raise ValueError(f"order must be in 0..3, got {order}")
        t = np.asarray(t, dtype=float)
        val = self._eval_clamped(t, order)
        if order > 0:
            outside = (t < self.breaks[0]) | (t > self.breaks[-1])
            val = np.where(outside, 0.0, val)
        else:
            val = np.where(t <= self.breaks[0], self.edges[0], val)
            val = np.where(t >= self.breaks[-1], self.edges[1], val)
        if val.ndim == 0:
            return float(val)
        return val

    def _eval_clamped(self, t: np.ndarray, order: int) -> np.ndarray:
        tc = np.clip(t, self.breaks[0], self.breaks[-1])
        idx = np.searchsorted(self.breaks, tc, side="right") - 1
        idx = np.clip(idx, 0, len(self.breaks) - 2)
        u = tc - self.breaks[idx]
        c = self._dcoeffs[order][idx]
        val = c[..., -1]
        for j in range(_NCOEF - 2, -1, -1):
            val = val * u + c[..., j]
        return val

    def jet(self, t):
        """Position and derivatives 1..3 at t, as a 4-tuple of arrays."""
        t = np.asarray(t, dtype=float)
        outside = (t < self.breaks[0]) | (t > self.breaks[-1])
        pos = self._eval_clamped(t, 0)
        pos = np.where(t <= self.breaks[0], self.edges[0], pos)
        pos = np.where(t >= self.breaks[-1], self.edges[1], pos)
        vals = [pos]
        for k in range(1, _MAX_ORDER + 1):
            vals.append(np.where(outside, 0.0, self._eval_clamped(t, k)))
        return tuple(vals)

    # -- metadata and diagnostics -------------------------------------------

    @property
    def motion_start(self) -> float:
        return float(self.breaks[0])

    @property
    def motion_end(self) -> float:
        return float(self.breaks[-1])

    @property
    def initial_value(self) -> float:
        return self.edges[0]

    @property
    def final_value(self) -> float:
        return self.edges[1]

    def _segment_extrema(self, order: int):
        """Per-segment candidate extremal (u, segment) points of the order-th
        derivative: segment ends plus interior roots of the next derivative."""
        spans = np.diff(self.breaks)
        d_this = self._dcoeffs[order]
        d_next = self._dcoeffs[order + 1] if order < _MAX_ORDER else None
        for i, span in enumerate(spans):
            us = [0.0, float(span)]
            if d_next is not None:
                c = np.trim_zeros(d_next[i], "b")
                if len(c) > 1:
                    roots = np.polynomial.polynomial.polyroots(c)
                    for r in roots:
                        if abs(r.imag) < 1e-12 and 0.0 < r.real < span:
                            us.append(float(r.real))
            yield i, us

    def bounds(self) -> tuple[float, float]:
        """Exact (min, max) of the position over the whole time axis."""
        lo, hi = min(self.edges), max(self.edges)
        for i, us in self._segment_extrema(0):
            for u in us:
                v = _horner_row(self._dcoeffs[0][i], u)
                lo, hi = min(lo, v), max(hi, v)
        return lo, hi

    def max_speed(self) -> float:
        """Exact sup of |velocity|, found at polynomial critical points."""
        best = 0.0
        for i, us in self._segment_extrema(1):
            for u in us:
                best = max(best, abs(_horner_row(self._dcoeffs[1][i], u)))
        return best


def max_speed(path: MirrorPath) -> float:
    """Sup of |dX/dt| over the full time axis (exact, not grid-sampled:
    extrema of a piecewise polynomial are segment ends and derivative roots)."""
    return path.max_speed()


def _merged_gap_coeffs(left: MirrorPath, right: MirrorPath):
    """Ascending coefficients of R - L on the merged break grid."""
    breaks = np.union1d(left.breaks, right.breaks)
    lo = min(left.motion_start, right.motion_start)
    hi = max(left.motion_end, right.motion_end)
    breaks = breaks[(breaks >= lo) & (breaks <= hi)]
    rows = []
    for a in breaks[:-1]:
        row = np.zeros(_NCOEF)
        for sgn, path in ((1.0, right), (-1.0, left)):
            if a < path.motion_start:
                row[0] += sgn * path.initial_value
            elif a >= path.motion_end:
                row[0] += sgn * path.final_value
            else:
                i = int(np.searchsorted(path.breaks, a, side="right") - 1)
                i = min(i, len(path.breaks) - 2)
                row += sgn * _poly_shift(path.coeffs[i], a - path.breaks[i])
        rows.append(row)
    return breaks, np.array(rows)


@dataclass(frozen=True)
class TrajectoryPair:
    """Left and right mirror paths with their pre/post-motion geometry.

    Validates that the cavity never collapses: min over the full axis of
    R(t) - L(t) must stay positive (checked exactly on the merged piecewise
    polynomial, not on a sample grid).
    """

    left: MirrorPath
    right: MirrorPath
    tau: float
    L0: float = field(init=False)
    Lf: float = field(init=False)
    R0: float = field(init=False)
    Rf: float = field(init=False)

    def __post_init__(self):
        if not self.tau > 0:
            raise GeometryError(f"motion duration must be positive, got {self.tau}")
        object.__setattr__(self, "L0", self.left.initial_value)
        object.__setattr__(self, "Lf", self.left.final_value)
        object.__setattr__(self, "R0", self.right.initial_value)
        object.__setattr__(self, "Rf", self.right.final_value)
        if self.gap_min() <= 0:
            raise GeometryError("mirrors cross: R(t) - L(t) reaches zero")

    @property
    def d0(self) -> float:
        return self.R0 - self.L0

    @property
    def df(self) -> float:
        return self.Rf - self.Lf

    @property
    def motion_start(self) -> float:
        return min(self.left.motion_start, self.right.motion_start)

    @property
    def motion_end(self) -> float:
        return max(self.left.motion_end, self.right.motion_end)

    def gap_min(self) -> float:
        """Exact min of R(t) - L(t) over the whole time axis."""
        breaks, rows = _merged_gap_coeffs(self.left, self.right)
        spans = np.diff(breaks)
        best = min(self.d0, self.df)
        drows = rows[:, 1:] * np.arange(1, _NCOEF)
        for i, span in enumerate(spans):
            us = [0.0, float(span)]
            c = np.trim_zeros(drows[i], "b")
            if len(c) > 1:
                for r in np.polynomial.polynomial.polyroots(c):
                    if abs(r.imag) < 1e-12 and 0.0 < r.real < span:
                        us.append(float(r.real))
            elif len(c) == 0:
                us = [0.0]
            for u in us:
                best = min(best, _horner_row(rows[i], u))
        return best

    def gap(self, t, order: int = 0):
        """R(t) - L(t) or its time derivative."""
        return self.right(t, order) - self.left(t, order)


def _reference_path(x0: float, xf: float, tau: float) -> MirrorPath:
    """Path x0 + (xf - x0) * delta(t/tau) on [0, tau], constant outside."""
    row = np.zeros(_NCOEF)
    row[0] = x0
    row[4:8] = (xf - x0) * _STEP_COEFFS[0] / tau ** np.arange(4, 8)
    return MirrorPath(np.array([0.0, tau]), row[None, :], edges=(x0, xf))


def make_reference(
    family: str,
    L0: float = 0.0,
    Lf: float | None = None,
    R0: float = 1.0,
    eps: float = 0.0,
    tau: float = 1.0,
) -> TrajectoryPair:
    """Reference protocol L = L0 + (Lf-L0) delta(t/tau), R = R0 (1 - eps delta(t/tau)).

    Families constrain the endpoint geometry: `contraction` requires the
    final length not to exceed the initial one, `expansion` requires eps < 0
    with Lf = eps*R0, `rigid` requires eps < 0 with Lf = -eps*R0 and L0 = 0
    (otherwise the cavity length would not stay constant).  Reference paths
    may be superluminal; they are mathematical targets, and physical-speed
    checks apply to the trajectories actually driven.
    """
    if not tau > 0:
        raise GeometryError(f"tau must be positive, got {tau}")
    if not R0 > L0:
        raise GeometryError(f"need R0 > L0, got R0={R0}, L0={L0}")
    Rf = R0 * (1.0 - eps)

    if family == "contraction":
        if Lf is None:
            Lf = L0
        if Rf - Lf > R0 - L0 + 1e-15:
            raise GeometryError(
                f"contraction must not grow the cavity: df={Rf - Lf}, d0={R0 - L0}"
            )
    elif family == "expansion":
        if not eps < 0:
            raise GeometryError(f"expansion requires eps < 0, got {eps}")
        if Lf is None:
            Lf = eps * R0
        elif not np.isclose(Lf, eps * R0, rtol=1e-12, atol=1e-15):
            raise GeometryError(f"expansion requires Lf = eps*R0 = {eps * R0}, got {Lf}")
    elif family == "rigid":
        if not eps < 0:
            raise GeometryError(f"rigid motion requires eps < 0, got {eps}")
        if L0 != 0.0:
            raise GeometryError("rigid motion requires L0 = 0")
        if Lf is None:
            Lf = -eps * R0
        elif not np.isclose(Lf, -eps * R0, rtol=1e-12, atol=1e-15):
            raise GeometryError(f"rigid motion requires Lf = -eps*R0 = {-eps * R0}, got {Lf}")
    elif family == "custom":
        raise GeometryError(
            "custom family takes explicit MirrorPaths; build a TrajectoryPair directly"
        )
    else:
        raise GeometryError(f"unknown family {family!r}")

    if not Rf > Lf:
        raise GeometryError(f"final geometry collapses: Rf={Rf}, Lf={Lf}")

    left = _reference_path(L0, Lf, tau)
    right = _reference_path(R0, Rf, tau)
    return TrajectoryPair(left, right, tau)
