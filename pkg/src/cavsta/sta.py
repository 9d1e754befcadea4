"""Shortcut-to-adiabaticity effective trajectories.

A mirror driven along the effective trajectory makes the *exact* Moore
functions of the driven cavity coincide with the adiabatic Moore functions
of the reference protocol, so the field ends in the adiabatic target state
in finite time.  The defining conditions are

    G_ad(t + L_eff(t)) - F_ad(t - L_eff(t)) = 0,
    G_ad(t + R_eff(t)) - F_ad(t - R_eff(t)) = 2,

solved per time sample by bracketed root-finding with branch continuation.
For instantaneous reference motion the solution has the closed "limit"
form: constants joined by a uniform-velocity segment of slope

    v_lim = -(d0 - df) / (d0 + df),

negative for contractions, positive for expansions, zero for rigid motion.
Below a critical timescale tau_c the effective trajectories exceed the
speed of light; they are still returned, flagged, so callers can compare
them against the limit curves.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.interpolate import BPoly, PPoly
from scipy.optimize import brentq

from .errors import AdiabaticOrderError, BracketError, GeometryError
from .moore_adiabatic import AdiabaticMoore
from .trajectory import make_reference

__all__ = [
    "effective_position",
    "build_effective",
    "EffectiveTrajectory",
    "EffectivePair",
    "LimitTrajectory",
    "limit_trajectory",
    "continuity_check",
    "critical_tau",
    "default_window",
]

_TARGET = {"left": 0.0, "right": 2.0}
_SLOPE_CAP = 1e3  # keeps the interpolant finite across fold points


def default_window(pair) -> tuple[float, float]:
    """Run window [-(R0 + tau), tau + 3(Rf - Lf)]: one light-crossing before
    motion onset, three after, so post-motion relaxation is visible."""
    return (-(pair.R0 + pair.tau), pair.tau + 3.0 * (pair.Rf - pair.Lf))


def _default_bracket(am: AdiabaticMoore) -> tuple[float, float]:
    p = am.pair
    return (min(p.L0, p.Lf) - p.d0, max(p.R0, p.Rf) + p.d0)


def _solve_bracketed(am, side, t, lo, hi, max_expand=40):
    """Root of h(x) = G_ad(t+x) - F_ad(t-x) - target in [lo, hi], expanding
    the bracket geometrically until a sign change is straddled."""
    target = _TARGET[side]

    def h(x):
        return am.G(t + x) - am.F(t - x) - target

    flo, fhi = h(lo), h(hi)
    for _ in range(max_expand):
        if flo == 0.0:
            return lo
        if fhi == 0.0:
            return hi
        if flo < 0.0 < fhi:
            break
        half = 0.5 * (hi - lo)
        lo, hi = lo - half, hi + half
        flo, fhi = h(lo), h(hi)
    else:
        raise BracketError(f"no physical effective position for side={side} at t={t}")
    return brentq(h, lo, hi, xtol=1e-14, rtol=8.9e-16)


def effective_position(am: AdiabaticMoore, side: str, t: float, bracket=None) -> float:
    """Mirror position x solving the side's defining equation at time t.

    Default bracket [min(L0,Lf)-d0, max(R0,Rf)+d0], grown geometrically when
    the root is not straddled.  Raises AdiabaticOrderError when the root
    lies on a non-increasing branch of h (the first-order adiabatic Moore
    functions are decreasing at the probed arguments: reference too fast)."""
    if side not in _TARGET:
        raise ValueError(f"side must be 'left' or 'right', got {side!r}")
    lo, hi = bracket if bracket is not None else _default_bracket(am)
    x = _solve_bracketed(am, side, float(t), float(lo), float(hi))
    slope = am.G(t + x, order=1) + am.F(t - x, order=1)
    if not slope > 0.0:
        raise AdiabaticOrderError(
            f"defining equation not increasing at its root (h' = {slope:.3g})"
        )
    return x


def _solve_many(am, side, times, guesses, d0):
    """Vectorized solve of the defining equation, one root per time sample.

    Each sample gets a bracket centered on its guess, grown geometrically
    until it straddles an increasing crossing; a bracketed Newton iteration
    with bisection fallback then polishes all samples at once.  Samples that
    never straddle locally (near fold points of a too-fast protocol) fall
    back to the scalar global solver.
    """
    target = _TARGET[side]
    t = np.asarray(times, dtype=float)
    x = np.asarray(guesses, dtype=float)

    def h(xv):
        return am.G(t + xv) - am.F(t - xv) - target

    w = np.full(t.shape, 0.05 * d0)
    lo, hi = x - w, x + w
    flo, fhi = h(lo), h(hi)
    ok = (flo < 0.0) & (fhi > 0.0)
    for _ in range(24):
        if ok.all():
            break
        lo = np.where(ok, lo, lo - w)
        hi = np.where(ok, hi, hi + w)
        w = np.where(ok, w, 2.0 * w)
        flo, fhi = h(lo), h(hi)
        ok = (flo < 0.0) & (fhi > 0.0)
    stragglers = np.flatnonzero(~ok)

    xx = np.clip(x, lo, hi)
    done = ~ok
    for _ in range(80):
        g = am.G(t + xx)
        fv = am.F(t - xx)
        f = g - fv - target
        scale = np.maximum(1.0, np.maximum(np.abs(g), np.abs(fv)))
        done = done | (np.abs(f) <= 2e-14 * scale)
        if done.all():
            break
        lo = np.where(~done & (f < 0.0), xx, lo)
        hi = np.where(~done & (f > 0.0), xx, hi)
        m = am.G(t + xx, order=1) + am.F(t - xx, order=1)
        with np.errstate(divide="ignore", invalid="ignore"):
            xn = xx - f / m
        bad = ~np.isfinite(xn) | (xn <= lo) | (xn >= hi)
        xn = np.where(bad, 0.5 * (lo + hi), xn)
        step_small = np.abs(xn - xx) <= 1e-15 * np.maximum(1.0, np.abs(xx))
        xx = np.where(done, xx, xn)
        done = done | step_small
    out = xx
    if stragglers.size:
        glo, ghi = _default_bracket(am)
        for i in stragglers:
            out[i] = _solve_bracketed(am, side, float(t[i]), glo, ghi)
    return out


def _implicit_jet(am, side, times, positions):
    """Exact dx/dt and d2x/dt2 at solved samples, from differentiating the
    defining equation: with F' at t-x and G' at t+x,

        dx/dt   = (F' - G') / (F' + G'),
        d2x/dt2 = [F''(1-dx/dt)^2 - G''(1+dx/dt)^2] / (F' + G').

    Both are capped where F' + G' changes sign (fold of the branch)."""
    G1 = am.G(times + positions, order=1)
    F1 = am.F(times - positions, order=1)
    G2 = am.G(times + positions, order=2)
    F2 = am.F(times - positions, order=2)
    denom = G1 + F1
    mono = bool(np.all(denom > 0.0))
    safe = np.where(np.abs(denom) < 1e-12, 1e-12, denom)
    slopes = np.clip((F1 - G1) / safe, -_SLOPE_CAP, _SLOPE_CAP)
    curv = (F2 * (1.0 - slopes) ** 2 - G2 * (1.0 + slopes) ** 2) / safe
    curv = np.clip(curv, -_SLOPE_CAP, _SLOPE_CAP)
    return slopes, curv, mono


def _quintic_hermite(times, positions, slopes, curvatures) -> PPoly:
    """C^2 piecewise-quintic interpolant matching value, slope and curvature
    at every node.  The exact curvature data is what keeps the *third*
    derivative of the interpolant accurate to O(h^3); a cubic Hermite fit
    leaves O(h) third-derivative noise, which the energy density (built
    from third derivatives of the Moore functions) cannot tolerate."""
    bp = BPoly.from_derivatives(
        times, np.stack([positions, slopes, curvatures], axis=1)
    )
    return PPoly.from_bernstein_basis(bp)


def _spline_max_abs_speed(spline) -> float:
    """Exact sup of |dx/dt| over the interpolant: extrema of the derivative
    sit at nodes or at roots of the second derivative."""
    d1 = spline.derivative()
    cand = [np.abs(d1(spline.x))]
    crit = d1.derivative().roots(extrapolate=False)
    crit = np.real(crit[np.isreal(crit)])
    crit = crit[np.isfinite(crit)]
    if crit.size:
        cand.append(np.abs(d1(crit)))
    return float(np.max(np.concatenate(cand)))


def _refined_times(times: np.ndarray, factor: int) -> np.ndarray:
    parts = [
        np.linspace(times[i], times[i + 1], factor, endpoint=False)
        for i in range(len(times) - 1)
    ]
    parts.append(times[-1:])
    return np.concatenate(parts)


@dataclass(frozen=True)
class EffectiveTrajectory:
    """Sampled effective trajectory for one mirror, with interpolant.

    `times`/`positions` are the solved samples; `slopes` and `curvatures`
    are the exact implicit-function derivatives there, feeding a C^2
    quintic Hermite interpolant.  Outside the sample window the trajectory
    is the pre/post constant.  `realizable` is False when the curve reaches
    the speed of light (protocol faster than the critical timescale); such
    curves remain usable for plotting and limit-curve comparison.
    """

    side: str
    times: np.ndarray
    positions: np.ndarray
    slopes: np.ndarray
    curvatures: np.ndarray
    const_before: float
    const_after: float
    residual_sup: float
    realizable: bool
    monotone_ok: bool
    max_speed_sampled: float
    _spline: PPoly = field(repr=False, compare=False)

    def __call__(self, t, order: int = 0):
        if order not in (0, 1, 2, 3):
            raise ValueError(f"order must be in 0..3, got {order}")
        t = np.asarray(t, dtype=float)
        scalar = t.ndim == 0
        tt = np.atleast_1d(t)
        before = tt < self.times[0]
        after = tt > self.times[-1]
        inner = ~(before | after)
        out = np.zeros(tt.shape)
        out[inner] = self._spline(tt[inner], nu=order)
        if order == 0:
            out[before] = self.const_before
            out[after] = self.const_after
        return float(out[0]) if scalar else out

    def jet(self, t):
        return tuple(self(t, order=k) for k in range(4))

    def bounds(self) -> tuple[float, float]:
        """(min, max) of position over all time, exact for the interpolant:
        extrema sit at sample nodes or at roots of the spline derivative
        (the Hermite interpolant overshoots the raw samples slightly, so
        sampling any fixed grid instead would understate the range)."""
        cand = [self.positions, [self.const_before, self.const_after]]
        crit = self._spline.derivative().roots(extrapolate=False)
        # roots() flags identically-zero stretches (the constant pre/post
        # segments) with nan sentinels; only finite roots are extrema
        crit = np.real(crit[np.isreal(crit)])
        crit = crit[np.isfinite(crit)]
        if crit.size:
            cand.append(self._spline(crit))
        vals = np.concatenate([np.atleast_1d(c) for c in cand])
        lo, hi = float(np.min(vals)), float(np.max(vals))
        pad = 1e-12 * max(1.0, abs(hi), abs(lo))
        return lo - pad, hi + pad

    def max_speed(self) -> float:
        return self.max_speed_sampled

    @property
    def motion_start(self) -> float:
        return float(self.times[0])

    @property
    def breaks(self) -> np.ndarray:
        return np.array([self.times[0], self.times[-1]])


def build_effective(
    am: AdiabaticMoore,
    side: str,
    t_lo: float,
    t_hi: float,
    step: float | None = None,
    refine_tol: float = 1e-8,
    max_refine: int = 5,
) -> EffectiveTrajectory:
    """Solve the side's defining equation on [t_lo, t_hi].

    Starts from a uniform grid (default step tau/512) seeded with the
    reference mirror positions (the effective trajectory approaches the
    reference as the protocol slows down), then bisects sample intervals
    until Hermite interpolation reproduces midpoint solves to `refine_tol`,
    or the refinement budget is spent (which happens only for superluminal
    curves near fold points, where the solved branch genuinely jumps).
    """
    if side not in _TARGET:
        raise ValueError(f"side must be 'left' or 'right', got {side!r}")
    pair = am.pair
    if step is None:
        step = pair.tau / 512.0
    n = max(2, int(np.ceil((t_hi - t_lo) / step)))
    times = np.linspace(t_lo, t_hi, n + 1)

    ref_path = pair.right if side == "right" else pair.left
    positions = _solve_many(am, side, times, ref_path(times), pair.d0)

    monotone_ok = True
    for round_ in range(max_refine + 1):
        slopes, curvatures, mono = _implicit_jet(am, side, times, positions)
        monotone_ok = monotone_ok and mono
        spline = _quintic_hermite(times, positions, slopes, curvatures)
        if round_ == max_refine:
            break
        mids = 0.5 * (times[:-1] + times[1:])
        predicted = spline(mids)
        solved = _solve_many(am, side, mids, predicted, pair.d0)
        bad = np.abs(predicted - solved) > refine_tol
        if not bad.any():
            break
        times = np.concatenate([times, mids[bad]])
        positions = np.concatenate([positions, solved[bad]])
        order = np.argsort(times)
        times, positions = times[order], positions[order]
    x0 = pair.R0 if side == "right" else pair.L0

    residual = np.max(
        np.abs(am.G(times + positions) - am.F(times - positions) - _TARGET[side])
    )
    fd_speed = np.max(np.abs(np.diff(positions) / np.diff(times)))
    max_speed = float(max(fd_speed, _spline_max_abs_speed(spline)))
    return EffectiveTrajectory(
        side=side,
        times=times,
        positions=positions,
        slopes=slopes,
        curvatures=curvatures,
        const_before=x0,
        const_after=pair.Rf if side == "right" else pair.Lf,
        residual_sup=float(residual),
        realizable=max_speed < 1.0,
        monotone_ok=monotone_ok,
        max_speed_sampled=max_speed,
        _spline=spline,
    )


@dataclass(frozen=True)
class EffectivePair:
    """Two effective trajectories presented with the TrajectoryPair protocol,
    so the exact Moore solver and the energy quadrature can consume them."""

    left: EffectiveTrajectory
    right: EffectiveTrajectory

    @property
    def L0(self) -> float:
        return self.left.const_before

    @property
    def Lf(self) -> float:
        return self.left.const_after

    @property
    def R0(self) -> float:
        return self.right.const_before

    @property
    def Rf(self) -> float:
        return self.right.const_after

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
    def realizable(self) -> bool:
        return self.left.realizable and self.right.realizable

    def gap(self, t, order: int = 0):
        return self.right(t, order) - self.left(t, order)

    def gap_min(self) -> float:
        tt = np.union1d(
            _refined_times(self.left.times, 4), _refined_times(self.right.times, 4)
        )
        return float(np.min(self.right(tt) - self.left(tt)))


@dataclass(frozen=True)
class LimitTrajectory:
    """Closed-form effective trajectory for instantaneous reference motion:
    constant x0 before t_on, the line intercept + slope*t on (t_on, t_off),
    constant xf after t_off.  Generically discontinuous at the joints; the
    jumps close exactly when Lf*R0 = L0*Rf.

    The printed middle window is (-x0, xf).  When that interval is reversed
    (an expanding left mirror) the consistent mixed branch of the defining
    equations has slope -v_lim instead, and the joints follow from
    continuity; `slope` records the actual segment slope, `v_lim` the
    geometry invariant.
    """

    side: str
    x0: float
    xf: float
    intercept: float
    slope: float
    v_lim: float
    t_on: float
    t_off: float

    def __call__(self, t):
        t = np.asarray(t, dtype=float)
        scalar = t.ndim == 0
        tt = np.atleast_1d(t)
        mid = self.intercept + self.slope * tt
        out = np.where(tt <= self.t_on, self.x0, np.where(tt >= self.t_off, self.xf, mid))
        return float(out[0]) if scalar else out

    @property
    def breakpoints(self) -> tuple[float, float]:
        return (self.t_on, self.t_off)


def _limit_side(side, x0, xf, intercept, v):
    t_on, t_off = -x0, xf
    slope = v
    if x0 == xf:
        # no net motion of this mirror in the limit: constant curve
        return LimitTrajectory(side, x0, xf, x0, 0.0, v, -x0, -x0)
    if t_on >= t_off:
        # printed branch vacuous; mirrored branch with continuous joints
        slope = -v
        if slope == 0.0:
            raise GeometryError(
                f"limit trajectory degenerate for side={side}: empty middle "
                "window with zero limit velocity"
            )
        t_on = (x0 - intercept) / slope
        t_off = (xf - intercept) / slope
    return LimitTrajectory(side, x0, xf, intercept, slope, v, t_on, t_off)


def limit_trajectory(L0: float, Lf: float, R0: float, Rf: float):
    """Limit trajectories (left, right) for instantaneous reference motion.

    v_lim = -(d0-df)/(d0+df); the right middle piece is R_c + v_lim t on
    (-R0, Rf) with R_c = [2 d0 df + Lf d0 + L0 df]/(d0+df), the left analog
    has intercept [Lf d0 + L0 df]/(d0+df) on (-L0, Lf).
    """
    d0, df = R0 - L0, Rf - Lf
    if d0 <= 0 or df <= 0:
        raise GeometryError(f"degenerate cavity: d0={d0}, df={df}")
    # length change as a difference of displacements; endpoints that agree
    # to roundoff (rigid translations specified with decimal literals) must
    # give v = 0 exactly, not a few ulps of leftover cancellation noise
    num = (Rf - R0) - (Lf - L0)
    scale = max(1.0, abs(L0), abs(Lf), abs(R0), abs(Rf))
    if abs(num) <= 32.0 * np.finfo(float).eps * scale:
        num = 0.0
    v = num / (d0 + df)
    Rc = (2.0 * d0 * df + Lf * d0 + L0 * df) / (d0 + df)
    Lc = (Lf * d0 + L0 * df) / (d0 + df)
    return (
        _limit_side("left", L0, Lf, Lc, v),
        _limit_side("right", R0, Rf, Rc, v),
    )


def continuity_check(L0: float, Lf: float, R0: float, Rf: float) -> bool:
    """True iff the limit trajectories are continuous: Lf*R0 = L0*Rf
    (relative tolerance 1e-12)."""
    a, b = Lf * R0, L0 * Rf
    return bool(abs(a - b) <= 1e-12 * max(1.0, abs(a), abs(b)))


def critical_tau(
    family: str,
    L0: float,
    Lf: float | None,
    R0: float,
    eps: float,
    tau_lo: float,
    tau_hi: float,
    tol: float = 1e-3,
    step: float | None = None,
) -> float:
    """Timescale where the max effective-trajectory speed crosses 1.

    Rebuilds the adiabatic Moore functions and both effective trajectories
    per candidate tau and bisects on (max speed - 1); speeds come from
    finite differences on the sample table.  Raises BracketError when the
    range does not straddle the crossing ("all candidate tau physical" /
    "none physical").
    """
    if not 0 < tau_lo < tau_hi:
        raise ValueError(f"need 0 < tau_lo < tau_hi, got ({tau_lo}, {tau_hi})")

    def max_speed(tau: float) -> float:
        pair = make_reference(family, L0=L0, Lf=Lf, R0=R0, eps=eps, tau=tau)
        am = AdiabaticMoore.build(pair)
        lo, hi = default_window(pair)
        s = step if step is not None else tau / 512.0
        speeds = [
            build_effective(am, side, lo, hi, step=s).max_speed_sampled
            for side in ("left", "right")
        ]
        return max(speeds)

    f_lo = max_speed(tau_lo) - 1.0
    f_hi = max_speed(tau_hi) - 1.0
    if f_lo <= 0.0 and f_hi <= 0.0:
        raise BracketError("all candidate tau physical: no speed-of-light crossing")
    if f_lo >= 0.0 and f_hi >= 0.0:
        raise BracketError("no candidate tau physical: speed exceeds 1 everywhere")
    if f_lo < 0.0 < f_hi:
        raise BracketError(
            "speed increases with tau in this range; no physical crossing"
        )
    lo, hi = tau_lo, tau_hi
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if max_speed(mid) - 1.0 > 0.0:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)
