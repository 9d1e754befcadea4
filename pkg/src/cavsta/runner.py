"""Batch orchestration: one scenario per config file, CSV artifacts out.

A run builds the reference pair, its adiabatic and exact Moore functions,
the effective (STA) trajectories and their exact Moore functions, the limit
curves, and the energy/adiabaticity record, then writes:

    trajectories.csv   t, L_ref, R_ref, L_eff, R_eff, L_lim, R_lim
    moore.csv          z, F_ad, G_ad, F_exact, G_exact
    energy.csv         t, then per temperature E_ref, E_eff, E_ad, Q_ref, Q_eff
    summary.txt        key-value sections mirroring the config plus results

Superluminal pairs are refused by the exact solver; the run then reports
the gap (NaN columns, summary note) instead of dying, so sweeps can cross
the critical timescale.  All numeric output uses 17 significant digits and
fixed column order: identical configs give byte-identical files.
"""

from __future__ import annotations

import configparser
import io
import json
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace

import numpy as np

from . import sta
from .energy import ThermalState, energy_record
from .errors import CavstaError, SuperluminalError
from .moore_adiabatic import AdiabaticMoore
from .moore_exact import ExactMoore
from .trajectory import MirrorPath, TrajectoryPair, make_reference

__all__ = ["RunConfig", "load_config", "run", "sweep_tau", "RunResult", "SweepResult"]

_FMT = "%.17g"

# hard in-run checks (always enforced); strict mode adds realizability
_EXACT_RESIDUAL_MAX = 1e-6
_EFFECTIVE_RESIDUAL_MAX = 1e-9


@dataclass(frozen=True)
class RunConfig:
    family: str = "contraction"
    L0: float = 0.0
    Lf: float | None = None
    R0: float = 1.0
    eps: float = 0.0
    tau: float = 1.0
    temperatures: tuple = (0.0,)
    time_step: float | None = None  # None -> tau/64
    spatial_points: int = 2001
    moore_panels: int = 4096
    effective_step: float | None = None  # None -> tau/512
    effective_refine_tol: float = 1e-8
    root_tol: float = 1e-13
    quad_rtol: float = 1e-8
    window: tuple | None = None  # None -> [-(R0+tau), tau + 3(Rf-Lf)]
    out_dir: str = "out"
    csv: tuple = ("trajectories", "moore", "energy")
    tau_list: tuple = ()
    critical: bool = False
    tau_min: float = 0.2
    tau_max: float = 1.2
    custom_left: tuple | None = None  # (breaks, coeff rows)
    custom_right: tuple | None = None
    strict: bool = False
    threads: int = 1


def _parse_floats(text: str) -> tuple:
    return tuple(float(v) for v in text.replace(",", " ").split())


def load_config(path: str) -> RunConfig:
    cp = configparser.ConfigParser()
    read = cp.read(path)
    if not read:
        raise CavstaError(f"config file not found or unreadable: {path}")
    kw = {}
    geo = cp["geometry"] if cp.has_section("geometry") else {}
    for key in ("L0", "R0", "eps", "tau"):
        if key in geo:
            kw[key] = float(geo[key])
    if "Lf" in geo:
        kw["Lf"] = float(geo["Lf"])
    if "family" in geo:
        kw["family"] = geo["family"].strip()
    for side in ("left", "right"):
        bk, ck = f"{side}_breaks", f"{side}_coeffs"
        if bk in geo and ck in geo:
            kw[f"custom_{side}"] = (
                _parse_floats(geo[bk]),
                tuple(tuple(row) for row in json.loads(geo[ck])),
            )
    num = cp["numerics"] if cp.has_section("numerics") else {}
    if "temperatures" in num:
        kw["temperatures"] = _parse_floats(num["temperatures"])
    for key, cast in (
        ("spatial_points", int),
        ("moore_panels", int),
        ("effective_refine_tol", float),
        ("root_tol", float),
        ("quad_rtol", float),
    ):
        if key in num:
            kw[key] = cast(num[key])
    for key in ("time_step", "effective_step"):
        if key in num and num[key].strip() != "auto":
            kw[key] = float(num[key])
    if "window" in num and num["window"].strip() != "auto":
        lo, hi = _parse_floats(num["window"])
        kw["window"] = (lo, hi)
    out = cp["outputs"] if cp.has_section("outputs") else {}
    if "dir" in out:
        kw["out_dir"] = out["dir"].strip()
    if "csv" in out:
        kw["csv"] = tuple(s.strip() for s in out["csv"].split(",") if s.strip())
    if cp.has_section("sweep"):
        sw = cp["sweep"]
        if "tau_list" in sw:
            kw["tau_list"] = _parse_floats(sw["tau_list"])
        if "critical" in sw:
            kw["critical"] = sw.getboolean("critical")
        for key in ("tau_min", "tau_max"):
            if key in sw:
                kw[key] = float(sw[key])
    return RunConfig(**kw)


def _build_pair(cfg: RunConfig, tau: float | None = None) -> TrajectoryPair:
    tau = cfg.tau if tau is None else tau
    if cfg.family == "custom":
        if cfg.custom_left is None or cfg.custom_right is None:
            raise CavstaError("custom family needs left/right breaks and coeffs")
        left = MirrorPath(np.asarray(cfg.custom_left[0]), np.asarray(cfg.custom_left[1]))
        right = MirrorPath(np.asarray(cfg.custom_right[0]), np.asarray(cfg.custom_right[1]))
        return TrajectoryPair(left, right, tau)
    return make_reference(
        cfg.family, L0=cfg.L0, Lf=cfg.Lf, R0=cfg.R0, eps=cfg.eps, tau=tau
    )


def _time_grid(cfg: RunConfig, pair: TrajectoryPair, tau: float | None = None):
    tau = cfg.tau if tau is None else tau
    lo, hi = cfg.window if cfg.window is not None else sta.default_window(pair)
    dt = cfg.time_step if cfg.time_step is not None else tau / 64.0
    n = max(2, int(round((hi - lo) / dt)))
    return np.linspace(lo, hi, n + 1)


@dataclass
class RunResult:
    config: RunConfig
    files: list = field(default_factory=list)
    summary: dict = field(default_factory=dict)
    hard_failures: list = field(default_factory=list)
    strict_failures: list = field(default_factory=list)

    @property
    def exit_code(self) -> int:
        if self.hard_failures:
            return 1
        if self.config.strict and self.strict_failures:
            return 2
        return 0


def _fmt(v) -> str:
    if isinstance(v, bool):
        return "yes" if v else "no"
    if isinstance(v, float):
        return _FMT % v
    return str(v)


def _t_label(T: float) -> str:
    return ("%g" % T).replace("-", "m").replace(".", "p")


def _write_csv(path: str, header: list, columns: list) -> None:
    buf = io.StringIO()
    buf.write(",".join(header) + "\n")
    rows = len(columns[0])
    for i in range(rows):
        buf.write(",".join(_FMT % c[i] for c in columns) + "\n")
    with open(path, "w", encoding="utf-8", newline="\n") as f:
        f.write(buf.getvalue())


def _write_summary(path: str, sections: dict) -> None:
    buf = io.StringIO()
    for name, entries in sections.items():
        buf.write(f"[{name}]\n")
        for key, val in entries.items():
            buf.write(f"{key} = {_fmt(val)}\n")
        buf.write("\n")
    with open(path, "w", encoding="utf-8", newline="\n") as f:
        f.write(buf.getvalue())


def _scenario(cfg: RunConfig, tau: float | None = None):
    """Build everything one scenario needs; shared by run and sweep."""
    pair = _build_pair(cfg, tau)
    am = AdiabaticMoore.build(pair, cfg.moore_panels)
    times = _time_grid(cfg, pair, tau)
    t_lo, t_hi = float(times[0]), float(times[-1])
    eff_step = cfg.effective_step
    if eff_step is None:
        eff_step = (cfg.tau if tau is None else tau) / 512.0
    eff = {
        side: sta.build_effective(
            am, side, t_lo, t_hi, step=eff_step, refine_tol=cfg.effective_refine_tol
        )
        for side in ("left", "right")
    }
    eff_pair = sta.EffectivePair(eff["left"], eff["right"])
    lim_left, lim_right = sta.limit_trajectory(pair.L0, pair.Lf, pair.R0, pair.Rf)
    return pair, am, times, eff_pair, (lim_left, lim_right)


def _try_exact(pair, tol: float, notes: list, label: str):
    try:
        return ExactMoore(pair, tol=tol)
    except SuperluminalError as exc:
        notes.append(f"{label}: {exc}")
        return None


def run(cfg: RunConfig) -> RunResult:
    result = RunResult(config=cfg)
    pair, am, times, eff_pair, (lim_l, lim_r) = _scenario(cfg)
    notes: list = []
    exact_ref = _try_exact(pair, cfg.root_tol, notes, "reference pair")
    exact_eff = _try_exact(eff_pair, cfg.root_tol, notes, "effective pair")

    states = [ThermalState(T, pair.d0) for T in cfg.temperatures]
    record = energy_record(
        times,
        states,
        moore_ref=exact_ref,
        pair_ref=pair,
        moore_eff=exact_eff,
        pair_eff=eff_pair,
        points=cfg.spatial_points,
        rtol=cfg.quad_rtol,
        threads=cfg.threads,
    )

    res_ad = am.residual(times)
    res_exact = exact_ref.residuals(times) if exact_ref is not None else None
    if res_exact is not None and max(res_exact) > _EXACT_RESIDUAL_MAX:
        result.hard_failures.append(
            f"exact Moore residual {max(res_exact):.3e} above {_EXACT_RESIDUAL_MAX}"
        )
    for side in ("left", "right"):
        tr = getattr(eff_pair, side)
        if tr.residual_sup > _EFFECTIVE_RESIDUAL_MAX:
            result.hard_failures.append(
                f"effective {side} defining residual {tr.residual_sup:.3e} "
                f"above {_EFFECTIVE_RESIDUAL_MAX}"
            )
        if not tr.realizable:
            result.strict_failures.append(
                f"effective {side} trajectory superluminal "
                f"(max speed {tr.max_speed_sampled:.4g})"
            )
    for note in notes:
        result.strict_failures.append(note)

    os.makedirs(cfg.out_dir, exist_ok=True)

    if "trajectories" in cfg.csv:
        cols = [
            times,
            pair.left(times),
            pair.right(times),
            eff_pair.left(times),
            eff_pair.right(times),
            lim_l(times),
            lim_r(times),
        ]
        path = os.path.join(cfg.out_dir, "trajectories.csv")
        _write_csv(path, ["t", "L_ref", "R_ref", "L_eff", "R_eff", "L_lim", "R_lim"], cols)
        result.files.append(path)

    if "moore" in cfg.csv:
        nan = np.full_like(times, np.nan)
        cols = [
            times,
            am.F(times),
            am.G(times),
            exact_ref.solve_F(times)[0] if exact_ref is not None else nan,
            exact_ref.solve_G(times)[0] if exact_ref is not None else nan,
        ]
        path = os.path.join(cfg.out_dir, "moore.csv")
        _write_csv(path, ["z", "F_ad", "G_ad", "F_exact", "G_exact"], cols)
        result.files.append(path)

    if "energy" in cfg.csv:
        header = ["t"]
        cols = [times]
        for i, T in enumerate(cfg.temperatures):
            lab = _t_label(T)
            header += [
                f"E_ref_T{lab}",
                f"E_eff_T{lab}",
                f"E_ad_T{lab}",
                f"Q_ref_T{lab}",
                f"Q_eff_T{lab}",
            ]
            cols += [
                record.E_ref[i],
                record.E_eff[i],
                record.E_ad_ref[i],
                record.Q_ref[i],
                record.Q_eff[i],
            ]
        path = os.path.join(cfg.out_dir, "energy.csv")
        _write_csv(path, header, cols)
        result.files.append(path)

    results_section = {
        "window_start": float(times[0]),
        "window_end": float(times[-1]),
        "adiabatic_residual_L": res_ad[0],
        "adiabatic_residual_R": res_ad[1],
        "exact_residual_L": res_exact[0] if res_exact else float("nan"),
        "exact_residual_R": res_exact[1] if res_exact else float("nan"),
        "continuity_check": sta.continuity_check(pair.L0, pair.Lf, pair.R0, pair.Rf),
        "v_lim": lim_r.v_lim,
        "max_eff_speed_left": eff_pair.left.max_speed_sampled,
        "max_eff_speed_right": eff_pair.right.max_speed_sampled,
        "realizable_left": eff_pair.left.realizable,
        "realizable_right": eff_pair.right.realizable,
        "eff_residual_left": eff_pair.left.residual_sup,
        "eff_residual_right": eff_pair.right.residual_sup,
        "exact_reference_available": exact_ref is not None,
        "exact_effective_available": exact_eff is not None,
    }
    for i, T in enumerate(cfg.temperatures):
        lab = _t_label(T)
        results_section[f"q_ref_final_T{lab}"] = float(record.Q_ref[i, -1])
        results_section[f"q_eff_final_T{lab}"] = float(record.Q_eff[i, -1])
    for j, note in enumerate(notes):
        results_section[f"note_{j}"] = note
    if cfg.critical:
        try:
            tau_c = sta.critical_tau(
                cfg.family, cfg.L0, cfg.Lf, cfg.R0, cfg.eps, cfg.tau_min, cfg.tau_max
            )
            results_section["critical_tau"] = tau_c
        except CavstaError as exc:
            results_section["critical_tau"] = f"not found: {exc}"

    summary = {
        "geometry": {
            "family": cfg.family,
            "L0": cfg.L0,
            "Lf": pair.Lf,
            "R0": cfg.R0,
            "Rf": pair.Rf,
            "eps": cfg.eps,
            "tau": cfg.tau,
        },
        "numerics": {
            "temperatures": " ".join(_FMT % T for T in cfg.temperatures),
            "time_step": times[1] - times[0],
            "spatial_points": cfg.spatial_points,
            "moore_panels": cfg.moore_panels,
            "effective_refine_tol": cfg.effective_refine_tol,
            "root_tol": cfg.root_tol,
            "quad_rtol": cfg.quad_rtol,
        },
        "outputs": {"dir": cfg.out_dir, "csv": ", ".join(cfg.csv)},
        "results": results_section,
    }
    result.summary = summary
    path = os.path.join(cfg.out_dir, "summary.txt")
    _write_summary(path, summary)
    result.files.append(path)
    return result


@dataclass
class SweepResult:
    config: RunConfig
    files: list = field(default_factory=list)
    summary: dict = field(default_factory=dict)
    hard_failures: list = field(default_factory=list)
    strict_failures: list = field(default_factory=list)
    rows: list = field(default_factory=list)

    @property
    def exit_code(self) -> int:
        if self.hard_failures:
            return 1
        if self.config.strict and self.strict_failures:
            return 2
        return 0


def _limit_distance(eff, lim, times, tau: float) -> float:
    """Sup distance between effective and limit curves, excluding a width-2tau
    neighborhood (half-width tau) of each limit breakpoint."""
    keep = np.ones(times.shape, dtype=bool)
    for b in lim.breakpoints:
        keep &= np.abs(times - b) > tau
    if not keep.any():
        return float("nan")
    return float(np.max(np.abs(eff(times[keep]) - lim(times[keep]))))


def _sweep_one(cfg: RunConfig, tau: float) -> dict:
    pair, am, times, eff_pair, (lim_l, lim_r) = _scenario(cfg, tau)
    res_ad = am.residual(times)
    return {
        "tau": tau,
        "res_ad_L": res_ad[0],
        "res_ad_R": res_ad[1],
        "res_ad_max": max(res_ad),
        "max_eff_speed_left": eff_pair.left.max_speed_sampled,
        "max_eff_speed_right": eff_pair.right.max_speed_sampled,
        "dist_limit_left": _limit_distance(eff_pair.left, lim_l, times, tau),
        "dist_limit_right": _limit_distance(eff_pair.right, lim_r, times, tau),
        "realizable": 1.0 if eff_pair.realizable else 0.0,
    }


def sweep_tau(cfg: RunConfig, tau_list=None) -> SweepResult:
    taus = tuple(tau_list) if tau_list is not None else cfg.tau_list
    if len(taus) < 3:
        raise CavstaError(f"sweep needs at least 3 tau values, got {len(taus)}")
    if any(t2 <= t1 for t1, t2 in zip(taus, taus[1:])):
        raise CavstaError("tau_list must be sorted ascending")
    result = SweepResult(config=cfg)
    if cfg.threads > 1:
        with ThreadPoolExecutor(max_workers=cfg.threads) as ex:
            rows = list(ex.map(lambda t: _sweep_one(cfg, t), taus))
    else:
        rows = [_sweep_one(cfg, t) for t in taus]
    result.rows = rows

    keys = list(rows[0].keys())
    os.makedirs(cfg.out_dir, exist_ok=True)
    path = os.path.join(cfg.out_dir, "sweep.csv")
    _write_csv(path, keys, [np.array([r[k] for r in rows]) for k in keys])
    result.files.append(path)

    logs = np.log(np.array([r["res_ad_max"] for r in rows]))
    logt = np.log(np.array(taus))
    slope = float(np.polyfit(logt, logs, 1)[0])
    results_section = {
        "residual_loglog_slope": slope,
        "speeds_decrease_with_tau": bool(
            np.all(
                np.diff(
                    [max(r["max_eff_speed_left"], r["max_eff_speed_right"]) for r in rows]
                )
                <= 1e-9
            )
        ),
    }
    if cfg.critical:
        try:
            tau_c = sta.critical_tau(
                cfg.family, cfg.L0, cfg.Lf, cfg.R0, cfg.eps, cfg.tau_min, cfg.tau_max
            )
            results_section["critical_tau"] = tau_c
        except CavstaError as exc:
            results_section["critical_tau"] = f"not found: {exc}"
    for r in rows:
        if not r["realizable"]:
            result.strict_failures.append(f"tau={r['tau']:g} superluminal")
    summary = {
        "geometry": {
            "family": cfg.family,
            "L0": cfg.L0,
            "Lf": "auto" if cfg.Lf is None else cfg.Lf,
            "R0": cfg.R0,
            "eps": cfg.eps,
        },
        "sweep": {"tau_list": " ".join(_FMT % t for t in taus)},
        "results": results_section,
    }
    result.summary = summary
    spath = os.path.join(cfg.out_dir, "sweep_summary.txt")
    _write_summary(spath, summary)
    result.files.append(spath)
    return result
