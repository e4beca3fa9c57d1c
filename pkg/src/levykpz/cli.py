"""Command-line experiment runner.

``levykpz run CONFIG`` executes the config's preset and writes
``diagnostics.csv``, ``fits.csv`` and ``report.txt`` (plus binary snapshots
when requested) into the output directory.  ``sweep`` runs the q sweep,
``kernel`` prints stable-kernel values and ``validate`` only parses.

Exit codes: 0 all checks pass, 1 some check did not pass, 2 config error,
3 solver failure.
"""

from __future__ import annotations

import argparse
import csv
import math
import sys
import warnings
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import diagnostics as dg
from .config import SMALL_DATA_PRESETS, ExperimentConfig, load_config, sample_times
from .exceptions import ConfigError, ResolutionError
from .oracle import convolve_semigroup, fd_solve, fd_stable_dt
from .semigroup import KernelSpec, apply_semigroup, kernel_at, stable_kernel, verify_self_similarity
from .solver import ProblemSpec, Trajectory, run
from .spectral import Field, PeriodicGrid, read_snapshot, write_snapshot

EXIT_OK, EXIT_FAIL, EXIT_CONFIG, EXIT_SOLVER = 0, 1, 2, 3

MASS_TOL = 1e-4
MASS_TOL_LINEAR = 1e-12
MAX_PRINCIPLE_SLACK = 1e-9
MONOTONE_SLACK = 1e-10
PLATEAU_TOL = 0.01
DECAY_RATIO = 0.2
GROWTH_RATIO = 2.0
SLOPE_SLACK = 0.05
GRADIENT_DECAY_FACTOR = 3.0
DISSIPATION_TAIL = 0.01
LINEAR_SLOPE_REL = 0.05
GROWING_SLOPE = 0.02
NOISE_MODES = 8


@dataclass(frozen=True)
class Check:
    name: str
    status: str  # PASS | FAIL | INCONCLUSIVE
    detail: str

    def line(self) -> str:
        return f"{self.status:<12} {self.name:<22} {self.detail}"


def _verdict(name: str, ok, detail: str) -> Check:
    if ok is None:
        return Check(name, "INCONCLUSIVE", detail)
    return Check(name, "PASS" if ok else "FAIL", detail)


# ---------------------------------------------------------------- initial data

def _smooth_noise(grid: PeriodicGrid, seed: int) -> np.ndarray:
    """Random trigonometric polynomial with ``|k| <= 8`` and unit sup."""
    rng = np.random.default_rng(seed)
    F = np.zeros(grid.shape, dtype=complex)
    low = [np.r_[0:NOISE_MODES + 1], np.r_[-NOISE_MODES:0]]
    idx = np.concatenate(low) % grid.n
    sel = np.ix_(*([idx] * grid.dim))
    F[sel] = rng.standard_normal(F[sel].shape) + 1j * rng.standard_normal(F[sel].shape)
    s = np.fft.ifftn(F).real
    return s / np.abs(s).max()


def build_initial(cfg: ExperimentConfig) -> tuple[Field, dict]:
    """Initial datum from the config, with the small-data scaling applied.

    Returns the field and a dict of pre-run inputs recorded in the report.
    """
    init, grid = cfg.initial, cfg.grid
    info: dict[str, float] = {}
    if init["kind"] == "gaussian":
        u0 = grid.gaussian(init["amplitude"], init["width"])
    elif init["kind"] == "bump":
        u0 = grid.bump(init["amplitude"], init["width"])
    else:
        path = Path(init["path"])
        if not path.is_absolute() and cfg.source:
            path = Path(cfg.source).parent / path
        u0 = read_snapshot(path)
        if u0.grid != grid:
            raise ConfigError([(0, f"snapshot grid {u0.grid} differs from config grid {grid}")])
    if init["noise"] > 0:
        u0 = Field(grid, u0.values * (1 + init["noise"] * _smooth_noise(grid, cfg.seed)))
    if cfg.preset.startswith("evaporation") and np.any(u0.values < 0):
        raise ConfigError([(0, "evaporation presets need u0 >= 0")])
    if cfg.preset in SMALL_DATA_PRESETS:
        target = init["smallness"]
        c = dg.smallness_combination(u0, cfg.lam, cfg.q, cfg.symbol)
        info["smallness_raw"] = c
        if c >= target:
            # the combination is homogeneous of degree q-1 in the amplitude
            s = (0.5 * target / c) ** (1 / (cfg.q - 1))
            u0 = Field(grid, s * u0.values)
            info["amplitude_scale"] = s
            c = dg.smallness_combination(u0, cfg.lam, cfg.q, cfg.symbol)
        info["smallness"] = c
        info["smallness_target"] = target
    elif cfg.preset == "deposition-brownian-q2":
        info["smallness"] = dg.smallness_combination(u0, cfg.lam, cfg.q, cfg.symbol)
    return u0, info


def build_problem(cfg: ExperimentConfig, u0: Field, q: float | None = None) -> ProblemSpec:
    theorem = cfg.preset not in ("linear-selfsim", "validate", "kernel-table")
    return ProblemSpec(
        symbol=cfg.symbol,
        lam=cfg.lam,
        q=cfg.q if q is None else q,
        initial=u0,
        horizon=cfg.horizon,
        dt=cfg.dt,
        sample_times=sample_times(cfg),
        theorem_preset=theorem,
    )


# ---------------------------------------------------------------- checks

def _at(records, t):
    for r in records:
        if abs(r.t - t) <= 1e-9 * max(1.0, t):
            return r
    return None


def _fit(records, name, window=None):
    samples = [(r.t, getattr(r, name)) for r in records if r.t > 0]
    try:
        return dg.fit_power_law(samples, window)
    except ValueError:
        return None


def common_checks(records, lam: float) -> list[Check]:
    M = np.array([r.M for r in records])
    Q = np.array([r.Qcum for r in records])
    out = []
    if M[0] == 0:
        out.append(Check("mass-identity", "INCONCLUSIVE", "M(0) = 0"))
    else:
        res = float(np.max(np.abs(M - M[0] - lam * Q)) / abs(M[0]))
        tol = MASS_TOL_LINEAR if lam == 0 else MASS_TOL
        out.append(_verdict("mass-identity", res < tol, f"residual={res:.3e} < {tol:g}"))
    linf0, ginf0 = records[0].Linf, records[0].Ginf
    lmax = max(r.Linf for r in records)
    gmax = max(r.Ginf for r in records)
    ok = lmax <= linf0 * (1 + MAX_PRINCIPLE_SLACK) and gmax <= ginf0 * (1 + MAX_PRINCIPLE_SLACK)
    out.append(_verdict("max-principle", ok,
                        f"max|u|/|u0|={lmax / linf0:.12f}, max|grad u|/|grad u0|={gmax / ginf0:.12f}"))
    if lam != 0:
        d = np.diff(M) * np.sign(lam)
        worst = float(d.min()) if d.size else 0.0
        word = "nondecreasing" if lam > 0 else "nonincreasing"
        out.append(_verdict("mass-monotone", worst >= -MONOTONE_SLACK * abs(M[0]),
                            f"M {word}; worst step {worst:.3e}"))
        qd = float(np.diff(Q).min()) if Q.size > 1 else 0.0
        out.append(_verdict("Q-nondecreasing", qd >= 0, f"min increment {qd:.3e}"))
    return out


def _plateau_check(records) -> tuple[Check, dg.MassLimit]:
    lim = dg.estimate_mass_limit([r.t for r in records], [r.M for r in records])
    ok = None if math.isnan(lim.plateau_quality) else lim.plateau_quality < PLATEAU_TOL
    return _verdict("mass-plateau", ok,
                    f"|M(T)-M(T/2)|/M(T)={lim.plateau_quality:.3e} < {PLATEAU_TOL:g}; "
                    f"M(T)={lim.m_end:.10g}, M_inf~{lim.m_extrapolated:.10g}"), lim


def _gradient_decay_check(records, cfg: ExperimentConfig, D: float) -> Check:
    N, a = cfg.grid.dim, cfg.alpha
    p0 = dg.p0_exponent(N, a, cfg.q)
    beta = N * (1 - 1 / p0) / a
    vals = [r.t ** (1 / a) * (1 + r.t) ** beta * r.Gp0 for r in records]
    worst = max(vals)
    return _verdict("gradient-decay", worst <= GRADIENT_DECAY_FACTOR * D,
                    f"max t^(1/a)(1+t)^b|grad u|_p0={worst:.4e} <= 3 D(u0,p0)={3 * D:.4e} (p0={p0:.4f})")


def _smallness_check(info) -> Check:
    c, target = info["smallness"], info["smallness_target"]
    return _verdict("smallness-gate", c < target, f"combination={c:.4e} < {target:g}")


def preset_checks(cfg: ExperimentConfig, records, info) -> tuple[list[Check], dict]:
    """All report checks for a completed run, computed from recorded diagnostics."""
    checks = common_checks(records, cfg.lam)
    fits: dict[str, dg.ExponentFit] = {}
    T = records[-1].t
    N, a, q = cfg.grid.dim, cfg.alpha, cfg.q
    M0, MT = records[0].M, records[-1].M
    for name in ("M", "Linf", "Ginf", "L1", "Gq"):
        fit = _fit(records, name)
        if fit is not None:
            fits[name] = fit
    preset = cfg.preset
    if preset == "linear-selfsim":
        seq = [(r.t, r.SSE_r1) for r in records if r.t >= 4 and abs(math.log2(r.t) - round(math.log2(r.t))) < 1e-12]
        vals = [v for _, v in seq]
        if len(vals) < 2 or any(math.isnan(v) for v in vals):
            checks.append(Check("self-similar-decay", "INCONCLUSIVE", "too few resolved samples"))
        else:
            dec = all(b < c for c, b in zip(vals, vals[1:]))
            checks.append(_verdict("self-similar-decay", dec,
                                   "SSE_r1 at t=" + ", ".join(f"{t:g}:{v:.3e}" for t, v in seq)))
        for name, target in (("Linf", -N / a), ("Ginf", -(N + 1) / a)):
            fit = _fit(records, name, (4.0, 64.0))
            if fit is None:
                checks.append(Check(f"decay-slope-{name}", "INCONCLUSIVE", "window [4, 64] not sampled"))
                continue
            fits[f"{name}[4,64]"] = fit
            rel = abs(fit.slope - target) / abs(target)
            checks.append(_verdict(f"decay-slope-{name}", rel < LINEAR_SLOPE_REL,
                                   f"slope={fit.slope:.4f} vs {target:.4f} (rel {rel:.3%})"))
    elif preset == "deposition-subcritical":
        ratio = MT / M0
        checks.append(_verdict("mass-growth", ratio > GROWTH_RATIO, f"M(T)/M(0)={ratio:.4f} > {GROWTH_RATIO:g}"))
        bound = (1 + a - 2 * q) / (2 * q) if N == 1 else (N + a - (N + 1) * q) / a
        fit = fits.get("M")
        ok = None if fit is None else fit.slope >= bound - SLOPE_SLACK
        checks.append(_verdict("growth-rate", ok,
                               f"slope={fit.slope if fit else math.nan:.4f} >= {bound:.4f} - {SLOPE_SLACK:g}"))
    elif preset in ("deposition-supercritical", "evaporation-supercritical"):
        checks.append(_smallness_check(info))
        plateau, lim = _plateau_check(records)
        checks.append(plateau)
        checks.append(_gradient_decay_check(records, cfg, info["D"]))
        if preset == "evaporation-supercritical":
            checks.append(_verdict("positive-limit", lim.m_extrapolated > 0.5 * M0,
                                   f"M_inf~{lim.m_extrapolated:.6g} > 0.5 M(0)={0.5 * M0:.6g}"))
            r8, r64 = _at(records, 8.0), _at(records, 64.0)
            if r8 is None or r64 is None or math.isnan(r8.SSE_r1) or math.isnan(r64.SSE_r1):
                checks.append(Check("self-similar-decay", "INCONCLUSIVE", "t=8 or t=64 not sampled"))
            else:
                ok = r64.SSE_r1 < 0.5 * r8.SSE_r1 and r64.SSE_r2 < r8.SSE_r2
                checks.append(_verdict("self-similar-decay", ok,
                                       f"SSE_r1 {r8.SSE_r1:.3e} -> {r64.SSE_r1:.3e}, "
                                       f"SSE_r2 {r8.SSE_r2:.3e} -> {r64.SSE_r2:.3e} (t=8 -> 64)"))
    elif preset == "deposition-brownian-q2":
        plateau, _ = _plateau_check(records)
        checks.append(plateau)
        half = _at(records, T / 2)
        Q = records[-1].Qcum
        if half is None or Q <= 0:
            checks.append(Check("dissipation-cauchy", "INCONCLUSIVE", "T/2 not sampled"))
        else:
            frac = (Q - half.Qcum) / Q
            checks.append(_verdict("dissipation-cauchy", frac < DISSIPATION_TAIL,
                                   f"Q increment on [T/2,T] is {frac:.3%} of Q(T)={Q:.6g}"))
    elif preset == "evaporation-subcritical":
        ratio = MT / M0
        fit = fits.get("M")
        ok = None if fit is None else (ratio < DECAY_RATIO and fit.slope < 0)
        checks.append(_verdict("mass-decay", ok,
                               f"M(T)/M(0)={ratio:.4f} < {DECAY_RATIO:g}, "
                               f"slope={fit.slope if fit else math.nan:.4f} < 0"))
    return checks, fits


# ---------------------------------------------------------------- execution

def _write_report(path: Path, cfg: ExperimentConfig, header: list[str], checks: list[Check]) -> None:
    statuses = {c.status for c in checks}
    overall = "PASS" if statuses <= {"PASS"} and checks else ("FAIL" if "FAIL" in statuses else "INCONCLUSIVE")
    lines = [f"preset: {cfg.preset}"] + header
    lines += [f"warning: {w}" for w in cfg.warnings]
    lines += [c.line() for c in checks]
    lines.append(f"overall: {overall}")
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")


def _exit_for(checks: list[Check]) -> int:
    return EXIT_OK if checks and all(c.status == "PASS" for c in checks) else EXIT_FAIL


def _write_run_outputs(out: Path, traj: Trajectory, fits, snapshots: bool) -> None:
    out.mkdir(parents=True, exist_ok=True)
    dg.write_diagnostics_csv(out / "diagnostics.csv", traj.records)
    dg.write_fits_csv(out / "fits.csv", fits)
    if snapshots and traj.fields:
        snap = out / "snapshots"
        snap.mkdir(exist_ok=True)
        for i, f in enumerate(traj.fields):
            write_snapshot(snap / f"u_{i:04d}.bin", f)


def execute(cfg: ExperimentConfig, output: str | Path | None = None) -> int:
    """Run the config's preset, write artifacts and return the exit status."""
    out = Path(output if output is not None else cfg.output)
    out.mkdir(parents=True, exist_ok=True)
    if cfg.preset == "sweep-q":
        return sweep_q(cfg, out)
    if cfg.preset == "kernel-table":
        return _kernel_table(cfg, out)
    if cfg.preset == "validate":
        return _validate_oracles(cfg, out)
    u0, info = build_initial(cfg)
    problem = build_problem(cfg, u0)
    header = [f"config: {cfg.source or '<text>'}",
              f"alpha={cfg.alpha:g} q={cfg.q:g} lambda={cfg.lam:g} q_c={cfg.q_critical:g} "
              f"N={cfg.grid.dim} n={cfg.grid.n} lbox={cfg.grid.lbox:g} T={cfg.horizon:g} dt={cfg.dt:g}"]
    if cfg.preset in SMALL_DATA_PRESETS:
        p0 = dg.p0_exponent(cfg.grid.dim, cfg.alpha, cfg.q)
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            info["D"] = dg.d_quantity(u0, p0, cfg.symbol).value
    header += [f"input: {k}={v:.6g}" for k, v in info.items()]
    try:
        traj = run(problem)
    except ResolutionError as exc:
        _write_report(out / "report.txt", cfg, header,
                      [Check("solver", "FAIL", f"initial datum under-resolved: {exc}")])
        return EXIT_SOLVER
    header.append(f"status: {traj.status} steps={traj.steps} rejections={traj.rejections}")
    if not traj.completed:
        _write_run_outputs(out, traj, {}, cfg.snapshots)
        _write_report(out / "report.txt", cfg, header,
                      [Check("solver", "FAIL", f"{traj.status} at t={traj.failure_time:g}: {traj.message}")])
        return EXIT_SOLVER
    checks, fits = preset_checks(cfg, traj.records, info)
    _write_run_outputs(out, traj, fits, cfg.snapshots)
    _write_report(out / "report.txt", cfg, header, checks)
    return _exit_for(checks)


# ---------------------------------------------------------------- sweep

SWEEP_COLUMNS = ("q", "mass_ratio", "mass_slope", "dissipation_slope", "plateau_quality",
                 "regime", "threshold_regime", "status")


def classify_regime(lam: float, dissipation_slope: float) -> str:
    """Regime from the log-log slope of ``t ||grad u||_q**q / M**q``.

    A positive slope means ``int ||grad u||_q**q dt`` diverges, so the mass
    runs off (to zero for evaporation, to infinity for deposition); a
    nonpositive slope means the mass settles.
    """
    if lam == 0 or not dissipation_slope > 0:
        return "plateau"
    return "growing" if lam > 0 else "decaying-to-zero"


def threshold_regime(mass_ratio: float, mass_slope: float, plateau: float) -> str:
    """Fixed-threshold classification of the final mass behaviour."""
    if plateau < PLATEAU_TOL:
        return "plateau"
    if mass_ratio < DECAY_RATIO and mass_slope < 0:
        return "decaying-to-zero"
    if mass_slope > GROWING_SLOPE:
        return "growing"
    return "unclassified"


def sweep_row(cfg: ExperimentConfig, q: float, u0: Field, out: Path | None = None) -> dict:
    problem = build_problem(cfg, u0, q=q)
    traj = run(problem, store_fields=False, self_similar=False)
    row = {"q": q, "status": traj.status}
    if not traj.completed:
        row.update(mass_ratio=math.nan, mass_slope=math.nan, dissipation_slope=math.nan,
                   plateau_quality=math.nan, regime="failed", threshold_regime="failed")
        return row
    rec = traj.records
    M0 = rec[0].M
    lim = dg.estimate_mass_limit(traj.times, traj.series("M"))
    mfit = _fit(rec, "M")
    kappa = [(r.t, r.t * r.Gq ** q / r.M ** q) for r in rec if r.t > 0 and r.M > 0]
    try:
        kfit = dg.fit_power_law(kappa)
        kslope = kfit.slope
    except ValueError:
        kslope = math.nan
    mslope = mfit.slope if mfit is not None else math.nan
    row.update(mass_ratio=rec[-1].M / M0, mass_slope=mslope, dissipation_slope=kslope,
               plateau_quality=lim.plateau_quality,
               regime=classify_regime(cfg.lam, kslope),
               threshold_regime=threshold_regime(rec[-1].M / M0, mslope, lim.plateau_quality))
    if out is not None:
        out.mkdir(parents=True, exist_ok=True)
        dg.write_diagnostics_csv(out / "diagnostics.csv", rec)
    return row


def _fmt(v) -> str:
    return repr(float(v)) if isinstance(v, (float, np.floating)) else str(v)


def sweep_q(cfg: ExperimentConfig, output: str | Path | None = None) -> int:
    """One run per q in the sweep list; writes ``sweep.csv`` and ``report.txt``."""
    out = Path(output if output is not None else cfg.output)
    out.mkdir(parents=True, exist_ok=True)
    qs = cfg.sweep_q or (cfg.q,)
    u0, _ = build_initial(cfg)
    rows = [sweep_row(cfg, q, u0, out / f"q_{q:.4f}") for q in qs]
    with open(out / "sweep.csv", "w", newline="", encoding="utf-8") as fh:
        wr = csv.writer(fh)
        wr.writerow(SWEEP_COLUMNS)
        for r in rows:
            wr.writerow([_fmt(r[c]) for c in SWEEP_COLUMNS])
    qc = cfg.q_critical
    checks = [_dichotomy_check(rows, qc, cfg.lam, qs)]
    header = [f"config: {cfg.source or '<text>'}", f"q_c={qc:g} lambda={cfg.lam:g}"]
    header += [f"q={r['q']:g}: {r['regime']} (thresholds: {r['threshold_regime']})" for r in rows]
    _write_report(out / "report.txt", cfg, header, checks)
    if any(r["status"] != "completed" for r in rows):
        return EXIT_SOLVER
    return _exit_for(checks)


def sweep_transition(rows) -> float | None:
    """q at which the regime turns to plateau, or None if not a single flip."""
    runaway = [r["regime"] != "plateau" for r in sorted(rows, key=lambda r: r["q"])]
    qs = sorted(r["q"] for r in rows)
    flips = [i for i in range(1, len(runaway)) if runaway[i] != runaway[i - 1]]
    if len(flips) != 1 or not runaway[0]:
        return None
    i = flips[0]
    return 0.5 * (qs[i - 1] + qs[i])


def _dichotomy_check(rows, qc: float, lam: float, qs) -> Check:
    if lam == 0:
        ok = all(r["regime"] == "plateau" for r in rows)
        return _verdict("sweep-dichotomy", ok, "lambda=0: every row plateau")
    step = max(np.diff(sorted(qs))) if len(qs) > 1 else math.inf
    qt = sweep_transition(rows)
    if qt is None:
        return Check("sweep-dichotomy", "FAIL", "regimes do not flip exactly once across the q list")
    return _verdict("sweep-dichotomy", abs(qt - qc) <= step,
                    f"transition at q~{qt:.4f}, q_c={qc:.4f}, grid step {step:.4g}")


# ---------------------------------------------------------------- kernel / validate

def _kernel_table(cfg: ExperimentConfig, out: Path) -> int:
    k = cfg.kernel
    alpha, times, pts = k["alpha"], sorted(k["t"]), k["points"]
    grid = cfg.grid
    pts_arr = np.array(pts, dtype=float)
    if grid.dim == 2:
        pts_arr = np.stack([pts_arr, np.zeros_like(pts_arr)], axis=1)
    checks = []
    with open(out / "kernel.csv", "w", newline="", encoding="utf-8") as fh:
        wr = csv.writer(fh)
        wr.writerow(("t", "x", "p"))
        for t in times:
            try:
                vals = kernel_at(alpha, t, grid, pts_arr)
            except ResolutionError as exc:
                checks.append(Check(f"kernel t={t:g}", "FAIL", str(exc)))
                continue
            for x, v in zip(pts, vals):
                wr.writerow((repr(float(t)), repr(float(x)), repr(float(v))))
            m = float(stable_kernel(KernelSpec(alpha, t, grid)).values.sum() * grid.cell_volume)
            checks.append(_verdict(f"unit-mass t={t:g}", abs(m - 1) < 1e-12, f"mass={m:.15f}"))
    for t1, t2 in zip(times, times[1:]):
        r = math.log2(t2 / t1)
        if abs(r - round(r)) < 1e-12 and r > 0:
            try:
                dev = verify_self_similarity(alpha, t1, t2, grid)
                checks.append(_verdict(f"self-similar {t1:g}->{t2:g}", dev < 1e-6, f"deviation={dev:.3e}"))
            except ResolutionError as exc:
                checks.append(Check(f"self-similar {t1:g}->{t2:g}", "INCONCLUSIVE", str(exc)))
    _write_report(out / "report.txt", cfg, [f"alpha={alpha:g}"], checks)
    return _exit_for(checks)


def _validate_oracles(cfg: ExperimentConfig, out: Path) -> int:
    """Cross-check the spectral pipeline against the slow oracles."""
    grid = cfg.grid
    u0, _ = build_initial(cfg)
    checks = []
    if cfg.alpha == 2 and grid.n <= 256:
        t = 0.5
        a = apply_semigroup(u0, t, cfg.symbol).values
        b = convolve_semigroup(u0, t, 2.0).values
        dev = float(np.abs(a - b).max())
        checks.append(_verdict("convolution-oracle", dev < 1e-8, f"sup deviation={dev:.3e} at t={t:g}"))
    else:
        checks.append(Check("convolution-oracle", "INCONCLUSIVE", "needs alpha=2 and n <= 256"))
    try:
        problem = build_problem(cfg, u0)
        spec_run = run(problem)
        fd_run = fd_solve(problem, dt=0.5 * fd_stable_dt(problem))
        a, b = spec_run.fields[-1].values, fd_run.fields[-1].values
        dev = float(np.linalg.norm(a - b) / np.linalg.norm(a))
        checks.append(_verdict("finite-difference-oracle", dev < 1e-3,
                               f"relative L2 deviation={dev:.3e} at t={cfg.horizon:g}"))
        dg.write_diagnostics_csv(out / "diagnostics.csv", spec_run.records)
        dg.write_diagnostics_csv(out / "diagnostics_fd.csv", fd_run.records)
    except ValueError as exc:
        checks.append(Check("finite-difference-oracle", "INCONCLUSIVE", str(exc)))
    dg.write_fits_csv(out / "fits.csv", {})
    _write_report(out / "report.txt", cfg, [f"n={grid.n} lbox={grid.lbox:g}"], checks)
    return _exit_for(checks)


# ---------------------------------------------------------------- entry point

def _parse_grid(text: str) -> PeriodicGrid:
    parts = text.split(",")
    if len(parts) != 3:
        raise argparse.ArgumentTypeError("grid must be N,n,Lbox")
    try:
        return PeriodicGrid(int(parts[0]), int(parts[1]), float(parts[2]))
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from exc


def _parse_points(text: str) -> list[list[float]]:
    return [[float(c) for c in item.split(":")] for item in text.split(",") if item.strip()]


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="levykpz", description=__doc__.splitlines()[0])
    sub = ap.add_subparsers(dest="command", required=True)
    for name, text in (("run", "execute the config's preset"),
                       ("sweep", "run the q sweep of a config"),
                       ("validate", "parse and check a config without running it")):
        p = sub.add_parser(name, help=text)
        p.add_argument("config")
        if name != "validate":
            p.add_argument("--output", help="override the config's output directory")
    k = sub.add_parser("kernel", help="print stable-kernel values")
    k.add_argument("--alpha", type=float, required=True)
    k.add_argument("--t", type=float, required=True)
    k.add_argument("--grid", type=_parse_grid, required=True, help="N,n,Lbox")
    k.add_argument("--points", type=_parse_points, default=None,
                   help="comma-separated points; use x:y in two dimensions (default: 0..4)")
    return ap


def _print_violations(exc: ConfigError) -> None:
    for ln, msg in exc.violations:
        print(f"config error (line {ln}): {msg}" if ln else f"config error: {msg}", file=sys.stderr)


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    if args.command == "kernel":
        g = args.grid
        pts = args.points or [[float(x)] + [0.0] * (g.dim - 1) for x in range(5)]
        if any(len(p) != g.dim for p in pts):
            print(f"points must have {g.dim} coordinate(s)", file=sys.stderr)
            return EXIT_CONFIG
        try:
            vals = kernel_at(args.alpha, args.t, g, pts)
        except ValueError as exc:
            print(f"error: {exc}", file=sys.stderr)
            return EXIT_CONFIG
        for p, v in zip(pts, vals):
            print(" ".join(f"{c:.6g}" for c in p), f"{v:.15e}")
        return EXIT_OK
    try:
        cfg = load_config(args.config)
    except ConfigError as exc:
        _print_violations(exc)
        return EXIT_CONFIG
    except OSError as exc:
        print(f"cannot read config: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    for w in cfg.warnings:
        print(f"warning: {w}", file=sys.stderr)
    if args.command == "validate":
        print(f"{args.config}: ok (preset {cfg.preset})")
        return EXIT_OK
    try:
        if args.command == "sweep":
            if not cfg.sweep_q:
                print("config has no [sweep] q list", file=sys.stderr)
                return EXIT_CONFIG
            status = sweep_q(cfg, args.output)
        else:
            status = execute(cfg, args.output)
    except ConfigError as exc:
        _print_violations(exc)
        return EXIT_CONFIG
    out = Path(args.output or cfg.output)
    print(f"report: {out / 'report.txt'} (exit {status})")
    return status


if __name__ == "__main__":
    sys.exit(main())
