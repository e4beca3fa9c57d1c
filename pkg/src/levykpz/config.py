"""Experiment configuration files.

Grammar (UTF-8, one item per line)::

    # comment            ; also a comment
    [section]
    key = value

Values are numbers, words, comma-separated number lists (``1.05, 1.1``) or
comma-separated ``coefficient:exponent`` pairs (``1:2, 0.5:1.5``).  Unknown
sections or keys, malformed values and preset range violations are all
collected and reported together with their line numbers.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from pathlib import Path

from .diagnostics import critical_exponent
from .exceptions import ConfigError, InvalidSymbolError
from .spectral import PeriodicGrid
from .symbol import SymbolSpec, dominant_alpha

PRESETS = (
    "linear-selfsim",
    "deposition-subcritical",
    "deposition-supercritical",
    "deposition-brownian-q2",
    "evaporation-subcritical",
    "evaporation-supercritical",
    "sweep-q",
    "kernel-table",
    "validate",
)
SMALL_DATA_PRESETS = ("deposition-supercritical", "evaporation-supercritical")
BOX_FACTOR = 8.0


def _float_list(text: str) -> tuple[float, ...]:
    items = [s for s in (p.strip() for p in text.split(",")) if s]
    if not items:
        raise ValueError("empty list")
    return tuple(float(s) for s in items)


def _pair_list(text: str) -> tuple[tuple[float, float], ...]:
    out = []
    for item in (p.strip() for p in text.split(",")):
        if not item:
            continue
        a, sep, b = item.partition(":")
        if not sep:
            raise ValueError(f"expected coefficient:exponent, got {item!r}")
        out.append((float(a), float(b)))
    if not out:
        raise ValueError("empty list")
    return tuple(out)


def _bool(text: str) -> bool:
    low = text.lower()
    if low in ("1", "true", "yes", "on"):
        return True
    if low in ("0", "false", "no", "off"):
        return False
    raise ValueError(f"not a boolean: {text!r}")


def _int(text: str) -> int:
    return int(text, 10)


SCHEMA = {
    "experiment": {"preset": str, "output": str, "seed": _int, "snapshots": _bool},
    "symbol": {"kind": str, "alpha": float, "ell": float, "terms": _pair_list, "table": _pair_list},
    "problem": {"lambda": float, "q": float, "horizon": float, "dt": float,
                "schedule": str, "levels": _int, "per_octave": _int},
    "grid": {"dim": _int, "n": _int, "lbox": float},
    "initial": {"kind": str, "amplitude": float, "width": float, "path": str,
                "noise": float, "smallness": float},
    "sweep": {"q": _float_list},
    "kernel": {"alpha": float, "t": _float_list, "points": _float_list},
}

BASE_DEFAULTS = {
    "experiment": {"output": "out", "seed": 0, "snapshots": False},
    "symbol": {"kind": "fractional", "alpha": 1.5, "ell": 1.0},
    "problem": {"lambda": 0.0, "q": 2.0, "horizon": 64.0, "dt": 0.05,
                "schedule": "dyadic", "levels": 9, "per_octave": 4},
    "grid": {"dim": 1, "n": 2048, "lbox": 400.0},
    "initial": {"kind": "gaussian", "amplitude": 1.0, "width": 3.0, "noise": 0.0,
                "smallness": 0.1},
}

_DESKTOP_PROBLEM = {"horizon": 256.0, "dt": 0.05, "schedule": "geometric", "levels": 9}

PRESET_DEFAULTS = {
    "linear-selfsim": {
        "symbol": {"alpha": 2.0},
        "problem": {"lambda": 0.0, "q": 2.0, "horizon": 64.0, "dt": 0.25,
                    "schedule": "geometric", "levels": 7},
        "grid": {"n": 1024, "lbox": 128.0},
        "initial": {"width": 1.0},
    },
    "deposition-subcritical": {
        "problem": {"lambda": 1.0, "q": 1.2, **_DESKTOP_PROBLEM},
    },
    "deposition-supercritical": {
        "problem": {"lambda": 1.0, "q": 1.8, **_DESKTOP_PROBLEM},
    },
    "deposition-brownian-q2": {
        "symbol": {"alpha": 2.0},
        "problem": {"lambda": 1.0, "q": 2.0, "horizon": 1024.0, "dt": 0.02,
                    "schedule": "geometric", "levels": 9},
        "grid": {"n": 4096, "lbox": 256.0},
        "initial": {"amplitude": 0.5, "width": 0.5},
    },
    "evaporation-subcritical": {
        "problem": {"lambda": -1.0, "q": 1.2, **_DESKTOP_PROBLEM},
    },
    "evaporation-supercritical": {
        "problem": {"lambda": -1.0, "q": 2.0, **_DESKTOP_PROBLEM},
    },
    "sweep-q": {
        "problem": {"lambda": -1.0, "q": 2.0, **_DESKTOP_PROBLEM},
        "sweep": {"q": tuple(round(1.0 + 0.05 * k, 2) for k in range(1, 21))},
    },
    "kernel-table": {
        "grid": {"n": 16384, "lbox": 1024.0},
        "kernel": {"alpha": 1.5, "t": (1.0, 4.0), "points": (0.0, 0.5, 1.0, 2.0, 4.0)},
    },
    "validate": {
        "symbol": {"alpha": 2.0},
        "problem": {"lambda": -1.0, "q": 2.0, "horizon": 1.0, "dt": 1e-3, "levels": 3},
        "grid": {"n": 256, "lbox": 8.0},
        "initial": {"width": 1.0},
    },
}


@dataclass
class ExperimentConfig:
    preset: str
    output: str
    seed: int
    snapshots: bool
    symbol: SymbolSpec
    lam: float
    q: float
    horizon: float
    dt: float
    schedule: str
    levels: int
    per_octave: int
    grid: PeriodicGrid
    initial: dict
    sweep_q: tuple[float, ...] = ()
    kernel: dict = field(default_factory=dict)
    warnings: list[str] = field(default_factory=list)
    source: str = ""

    @property
    def alpha(self) -> float:
        return dominant_alpha(self.symbol)

    @property
    def q_critical(self) -> float:
        return critical_exponent(self.grid.dim, self.alpha)


_SECTION = re.compile(r"^\[\s*([A-Za-z0-9_-]+)\s*\]$")


def _strip_comment(line: str) -> str:
    for mark in ("#", ";"):
        pos = line.find(mark)
        if pos >= 0:
            line = line[:pos]
    return line.strip()


def _read_entries(text: str):
    """Parse raw text into ``{section: {key: (value, line)}}`` plus violations."""
    entries: dict[str, dict[str, tuple[object, int]]] = {}
    errors: list[tuple[int, str]] = []
    section = None
    for ln, raw in enumerate(text.splitlines(), start=1):
        line = _strip_comment(raw)
        if not line:
            continue
        m = _SECTION.match(line)
        if m:
            section = m.group(1).lower()
            if section not in SCHEMA:
                errors.append((ln, f"unknown section [{section}]"))
            entries.setdefault(section, {})
            continue
        key, sep, value = line.partition("=")
        key, value = key.strip().lower(), value.strip()
        if not sep or not key:
            errors.append((ln, f"expected 'key = value', got {raw.strip()!r}"))
            continue
        if section is None:
            errors.append((ln, f"key '{key}' appears before any [section]"))
            continue
        if section not in SCHEMA:
            continue
        conv = SCHEMA[section].get(key)
        if conv is None:
            errors.append((ln, f"unknown key '{key}' in [{section}]"))
            continue
        if key in entries[section]:
            errors.append((ln, f"duplicate key '{key}' in [{section}]"))
            continue
        try:
            entries[section][key] = (conv(value), ln)
        except ValueError as exc:
            errors.append((ln, f"[{section}] {key}: bad value {value!r} ({exc})"))
    return entries, errors


def parse_config(text: str, source: str = "") -> ExperimentConfig:
    """Parse and validate a config; raise ``ConfigError`` listing every problem."""
    entries, errors = _read_entries(text)
    preset_entry = entries.get("experiment", {}).get("preset")
    if preset_entry is None:
        errors.append((0, "missing [experiment] preset"))
        raise ConfigError(errors)
    preset, preset_line = preset_entry
    if preset not in PRESETS:
        errors.append((preset_line, f"unknown preset {preset!r}; choose one of {', '.join(PRESETS)}"))
        raise ConfigError(errors)

    values: dict[str, dict[str, object]] = {}
    lines: dict[tuple[str, str], int] = {}
    for layer in (BASE_DEFAULTS, PRESET_DEFAULTS[preset]):
        for sec, kv in layer.items():
            values.setdefault(sec, {}).update(kv)
    for sec, kv in entries.items():
        for key, (val, ln) in kv.items():
            values.setdefault(sec, {})[key] = val
            lines[(sec, key)] = ln

    def line_of(sec, key):
        return lines.get((sec, key), 0)

    sym = values["symbol"]
    symbol = None
    try:
        kind = str(sym["kind"]).lower()
        if kind == "fractional":
            symbol = SymbolSpec.fractional(sym["alpha"], sym["ell"])
        elif kind == "multifractional":
            if "terms" not in sym:
                raise InvalidSymbolError("multifractional symbol needs 'terms'")
            symbol = SymbolSpec.multifractional(sym["terms"])
        elif kind == "tabulated":
            if "table" not in sym:
                raise InvalidSymbolError("tabulated symbol needs 'table'")
            r, a = zip(*sym["table"])
            symbol = SymbolSpec.tabulated(r, a, sym["alpha"], sym["ell"])
        else:
            errors.append((line_of("symbol", "kind"), f"unknown symbol kind {kind!r}"))
    except InvalidSymbolError as exc:
        errors.append((line_of("symbol", "kind"), f"invalid symbol: {exc}"))

    g = values["grid"]
    grid = None
    try:
        grid = PeriodicGrid(g["dim"], g["n"], g["lbox"])
    except ValueError as exc:
        errors.append((line_of("grid", "n") or line_of("grid", "dim"), f"invalid grid: {exc}"))

    p = values["problem"]
    init = dict(values["initial"])
    for key, ok, msg in (
        ("q", p["q"] > 1, "q must exceed 1"),
        ("horizon", p["horizon"] > 0, "horizon must be positive"),
        ("dt", 0 < p["dt"] <= p["horizon"], "dt must lie in (0, horizon]"),
        ("levels", p["levels"] >= 1, "levels must be >= 1"),
        ("per_octave", p["per_octave"] >= 1, "per_octave must be >= 1"),
    ):
        if not ok:
            errors.append((line_of("problem", key), msg))
    if p["schedule"] not in ("dyadic", "geometric"):
        errors.append((line_of("problem", "schedule"), "schedule must be 'dyadic' or 'geometric'"))
    if init["kind"] not in ("gaussian", "bump", "file"):
        errors.append((line_of("initial", "kind"), "initial kind must be gaussian, bump or file"))
    elif init["kind"] == "file" and not init.get("path"):
        errors.append((line_of("initial", "kind"), "initial kind 'file' needs a path"))
    if init["kind"] != "file" and not init["width"] > 0:
        errors.append((line_of("initial", "width"), "initial width must be positive"))
    if not 0 <= init["noise"] < 1:
        errors.append((line_of("initial", "noise"), "noise must lie in [0, 1)"))

    cfg = None
    if symbol is not None and grid is not None:
        cfg = ExperimentConfig(
            preset=preset,
            output=values["experiment"]["output"],
            seed=values["experiment"]["seed"],
            snapshots=values["experiment"]["snapshots"],
            symbol=symbol,
            lam=p["lambda"],
            q=p["q"],
            horizon=p["horizon"],
            dt=p["dt"],
            schedule=p["schedule"],
            levels=p["levels"],
            per_octave=p["per_octave"],
            grid=grid,
            initial=init,
            sweep_q=tuple(values.get("sweep", {}).get("q", ())),
            kernel=dict(values.get("kernel", {})),
            source=source,
        )
        errors.extend(_preset_violations(cfg, line_of))
        _box_warning(cfg)
    if errors:
        raise ConfigError(errors)
    return cfg


def _preset_violations(cfg: ExperimentConfig, line_of) -> list[tuple[int, str]]:
    out = []
    preset = cfg.preset
    lam_line, q_line = line_of("problem", "lambda"), line_of("problem", "q")
    alpha = cfg.alpha
    qc = cfg.q_critical
    nonlinear = preset.startswith(("deposition", "evaporation")) or preset == "sweep-q"
    if nonlinear and not 1 < alpha <= 2:
        out.append((line_of("symbol", "alpha"),
                    f"nonlinear presets need alpha in (1, 2] for well-posedness, got {alpha:g}"))
    if preset.startswith("deposition") and not cfg.lam > 0:
        out.append((lam_line, f"deposition regime requires lambda > 0, got {cfg.lam:g}"))
    if preset.startswith("evaporation") and not cfg.lam < 0:
        out.append((lam_line, f"evaporation regime requires lambda < 0 "
                              f"(mass-decay theorem hypothesis), got {cfg.lam:g}"))
    if preset.endswith("-subcritical") and not 1 < cfg.q <= qc + 1e-12:
        out.append((q_line, f"subcritical presets need 1 < q <= (N+alpha)/(N+1) = {qc:g}, got {cfg.q:g}"))
    if preset.endswith("-supercritical") and not cfg.q > qc + 1e-12:
        out.append((q_line, f"supercritical presets need q > (N+alpha)/(N+1) = {qc:g}, got {cfg.q:g}"))
    if preset == "deposition-brownian-q2":
        if cfg.q < 2:
            out.append((q_line, f"Brownian bounded-mass preset needs q >= 2, got {cfg.q:g}"))
        terms = cfg.symbol.terms or ((cfg.symbol.ell, cfg.symbol.alpha),)
        if not any(e == 2 for _, e in terms):
            out.append((line_of("symbol", "kind"), "Brownian preset needs a non-degenerate alpha=2 term"))
    if preset == "linear-selfsim" and cfg.lam != 0:
        out.append((lam_line, "linear-selfsim runs the linear equation; lambda must be 0"))
    if preset.startswith("evaporation") and cfg.initial["kind"] != "file" and cfg.initial["amplitude"] < 0:
        out.append((line_of("initial", "amplitude"), "evaporation presets need u0 >= 0"))
    if preset == "sweep-q":
        if len(cfg.sweep_q) < 2:
            out.append((line_of("sweep", "q"), "sweep needs at least two q values"))
        elif not (min(cfg.sweep_q) < qc < max(cfg.sweep_q)):
            out.append((line_of("sweep", "q"), f"q list must straddle q_c = {qc:g}"))
        elif min(cfg.sweep_q) <= 1:
            out.append((line_of("sweep", "q"), "all swept q must exceed 1"))
    if preset == "kernel-table":
        k = cfg.kernel
        if not 0 < k.get("alpha", 0) <= 2:
            out.append((line_of("kernel", "alpha"), "kernel alpha must lie in (0, 2]"))
        if any(t <= 0 for t in k.get("t", ())):
            out.append((line_of("kernel", "t"), "kernel times must be positive"))
    return out


def _box_warning(cfg: ExperimentConfig) -> None:
    if cfg.preset in ("kernel-table", "validate"):
        return
    need = BOX_FACTOR * cfg.horizon ** (1 / cfg.alpha)
    if cfg.grid.lbox < need:
        cfg.warnings.append(
            f"lbox={cfg.grid.lbox:g} < {BOX_FACTOR:g}*T^(1/alpha)={need:.4g}; "
            "wrap-around may pollute L^1 diagnostics"
        )


def load_config(path) -> ExperimentConfig:
    path = Path(path)
    return parse_config(path.read_text(encoding="utf-8"), source=str(path))


def sample_times(cfg: ExperimentConfig) -> tuple[float, ...]:
    from .solver import dyadic_times, geometric_times

    if cfg.schedule == "dyadic":
        return dyadic_times(cfg.horizon, cfg.levels)
    return geometric_times(cfg.horizon, cfg.levels, cfg.per_octave)

