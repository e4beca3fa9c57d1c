"""Measurements taken along trajectories: mass, norms, rates and asymptotics."""

from __future__ import annotations

import csv
import logging
import math
import warnings
from dataclasses import astuple, dataclass, fields
from typing import TYPE_CHECKING, NamedTuple

import numpy as np

from .exceptions import InvalidDataError, ResolutionError, UndefinedNormalizationError
from .semigroup import KernelSpec, semigroup_multiplier, stable_kernel
from .spectral import Field, lp_norm, lp_norm_values
from .symbol import SymbolSpec, dominant_alpha

if TYPE_CHECKING:
    from .solver import ProblemSpec, Trajectory

logger = logging.getLogger(__name__)

CSV_COLUMNS = ("t", "M", "L1", "L2", "Linf", "G1", "Gp0", "G2", "Gq", "Ginf",
               "Qcum", "SSE_r1", "SSE_r2", "tail_frac")
FIT_COLUMNS = ("quantity", "t_a", "t_b", "slope", "rms")


@dataclass
class DiagnosticsRecord:
    t: float
    M: float
    L1: float
    L2: float
    Linf: float
    G1: float
    Gp0: float
    G2: float
    Gq: float
    Ginf: float
    Qcum: float
    SSE_r1: float = math.nan
    SSE_r2: float = math.nan
    tail_frac: float = math.nan

    def row(self) -> list[str]:
        return [repr(float(v)) for v in astuple(self)]


@dataclass(frozen=True)
class ExponentFit:
    t_a: float
    t_b: float
    slope: float
    intercept: float
    rms: float
    count: int


@dataclass(frozen=True)
class MassLimit:
    """Estimate of ``lim M(t)`` from the tail of a trajectory."""

    m_end: float
    m_extrapolated: float
    plateau_quality: float


class SupResult(NamedTuple):
    value: float
    argmax: float
    bracketed: bool


def critical_exponent(dim: int, alpha: float) -> float:
    return (dim + alpha) / (dim + 1)


def p0_interval(dim: int, alpha: float, q: float) -> tuple[float, float]:
    """Open interval of admissible gradient-decay exponents ``p0``."""
    left = critical_exponent(dim, alpha)
    denom = dim + 1 - alpha
    right = dim / denom if denom > 0 else math.inf
    return left, min(right, q)


def p0_exponent(dim: int, alpha: float, q: float) -> float:
    """Midpoint of the admissible ``p0`` interval; ``ValueError`` if it is empty."""
    left, right = p0_interval(dim, alpha, q)
    if not right > left:
        raise ValueError(f"no admissible p0 for N={dim}, alpha={alpha}, q={q}")
    return 0.5 * (left + right)


def mass(f: Field) -> float:
    return float(f.values.sum() * f.grid.cell_volume)


def gradient_magnitude_values(f: Field) -> np.ndarray:
    F = np.fft.fftn(f.values)
    g2 = sum(np.fft.ifftn(1j * w * F).real ** 2 for w in f.grid.derivative_wavevectors)
    return np.sqrt(g2)


def tail_fraction(f: Field) -> float:
    """Share of ``||f||_1`` sitting in the outer half of the box."""
    g = f.grid
    outer = np.zeros(g.shape, dtype=bool)
    for c in g.coords:
        outer |= np.abs(c) > g.lbox / 2
    a = np.abs(f.values)
    total = a.sum()
    return float(a[outer].sum() / total) if total > 0 else 0.0


def make_record(f: Field, t: float, problem: ProblemSpec, qcum: float) -> DiagnosticsRecord:
    vol = f.grid.cell_volume
    gm = gradient_magnitude_values(f)
    try:
        p0 = p0_exponent(f.grid.dim, problem.alpha, problem.q)
        gp0 = lp_norm_values(gm, p0, vol)
    except ValueError:
        gp0 = math.nan
    return DiagnosticsRecord(
        t=t,
        M=mass(f),
        L1=lp_norm(f, 1),
        L2=lp_norm(f, 2),
        Linf=lp_norm(f, math.inf),
        G1=lp_norm_values(gm, 1, vol),
        Gp0=gp0,
        G2=lp_norm_values(gm, 2, vol),
        Gq=lp_norm_values(gm, problem.q, vol),
        Ginf=float(gm.max()),
        Qcum=qcum,
        tail_frac=tail_fraction(f),
    )


def mass_identity_residual(traj: Trajectory) -> float:
    """``max |M(t) - M(0) - lambda Q(t)| / M(0)`` over the recorded samples."""
    if not traj.completed:
        raise ValueError(f"trajectory did not complete ({traj.status})")
    M = traj.series("M")
    Q = traj.series("Qcum")
    if M[0] == 0:
        raise UndefinedNormalizationError("M(0) = 0; residual has no normalization")
    return float(np.max(np.abs(M - M[0] - traj.problem.lam * Q)) / abs(M[0]))


def default_time_ladder(t_min: float = 1e-4, t_max: float = 1e4, per_decade: int = 8) -> np.ndarray:
    decades = math.log10(t_max / t_min)
    return t_min * 10.0 ** (np.arange(round(decades * per_decade) + 1) / per_decade)


def d_quantity(v: Field, p: float, spec: SymbolSpec, t_grid=None) -> SupResult:
    """Sup over a time ladder of ``t**(1/a) (1+t)**beta ||grad exp(-tL) v||_p``.

    ``beta = (N/a)(1 - 1/p)``.  A maximum at either end of the ladder is
    reported as unbracketed and warned about.
    """
    t_grid = default_time_ladder() if t_grid is None else np.asarray(t_grid, dtype=float)
    if t_grid.size < 2 or math.log10(t_grid[-1] / t_grid[0]) < 4 - 1e-9:
        raise ValueError("time ladder must span at least 4 decades")
    g = v.grid
    alpha = dominant_alpha(spec)
    beta = g.dim / alpha * (1 - 1 / p)
    F = np.fft.fftn(v.values)
    vals = np.empty(t_grid.size)
    for i, t in enumerate(t_grid):
        Ft = F * semigroup_multiplier(g, spec, t)
        gm = np.sqrt(sum(np.fft.ifftn(1j * w * Ft).real ** 2 for w in g.derivative_wavevectors))
        vals[i] = t ** (1 / alpha) * (1 + t) ** beta * lp_norm_values(gm, p, g.cell_volume)
    i = int(np.argmax(vals))
    bracketed = 0 < i < t_grid.size - 1
    if not bracketed:
        warnings.warn(f"D(v,p) maximum at ladder end t={t_grid[i]:.3g}; sup not bracketed",
                      stacklevel=2)
    return SupResult(float(vals[i]), float(t_grid[i]), bracketed)


def smallness_combination(u0: Field, lam: float, q: float, spec: SymbolSpec) -> float:
    """``|lam| ||grad u0||_inf**(q-p0) D(u0, p0)**(p0-1)`` with the midpoint ``p0``."""
    p0 = p0_exponent(u0.grid.dim, dominant_alpha(spec), q)
    gsup = float(gradient_magnitude_values(u0).max())
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        D = d_quantity(u0, p0, spec).value
    return abs(lam) * gsup ** (q - p0) * D ** (p0 - 1)


def self_similar_error(u_t: Field, m_inf: float, t: float, r: float, alpha: float) -> float:
    """``t**(N(1-1/r)/alpha) ||u_t - m_inf p_alpha(t)||_r``."""
    N = u_t.grid.dim
    if m_inf == 0:
        diff = u_t.values
    else:
        diff = u_t.values - m_inf * stable_kernel(KernelSpec(alpha, t, u_t.grid)).values
    weight = t ** (N * (1 - 1 / r) / alpha)
    return weight * lp_norm_values(diff, r, u_t.grid.cell_volume)


def estimate_mass_limit(times, masses) -> MassLimit:
    """Limit of ``M`` from its values at ``T/4, T/2, T`` (Aitken extrapolation).

    For ``M(t) = M_inf + C t**-s`` the dyadic samples form a geometric
    sequence, which Aitken's delta-squared step sums exactly.
    """
    times = np.asarray(times, dtype=float)
    masses = np.asarray(masses, dtype=float)
    T = times[-1]
    m_end = float(masses[-1])

    def at(t):
        j = int(np.argmin(np.abs(times - t)))
        return float(masses[j]) if abs(times[j] - t) <= 1e-9 * T else None

    m_half, m_quarter = at(T / 2), at(T / 4)
    plateau = abs(m_end - m_half) / abs(m_end) if (m_half is not None and m_end != 0) else math.nan
    extrap = m_end
    if m_half is not None and m_quarter is not None:
        d1, d2 = m_half - m_quarter, m_end - m_half
        denom = d2 - d1
        if d1 != 0 and 0 < d2 / d1 < 1 and denom != 0:
            extrap = m_end - d2 * d2 / denom
    return MassLimit(m_end, float(extrap), float(plateau))


def attach_self_similar_errors(traj: Trajectory, m_inf: float | None = None) -> None:
    """Fill ``SSE_r1``/``SSE_r2`` on every record whose kernel is resolvable."""
    traj.m_inf = estimate_mass_limit(traj.times, traj.series("M"))
    if m_inf is None:
        m_inf = traj.m_inf.m_extrapolated
    if not traj.fields:
        return
    alpha = traj.problem.alpha
    for rec, f in zip(traj.records, traj.fields):
        if rec.t <= 0:
            continue
        try:
            rec.SSE_r1 = self_similar_error(f, m_inf, rec.t, 1, alpha)
            rec.SSE_r2 = self_similar_error(f, m_inf, rec.t, 2, alpha)
        except ResolutionError:
            pass


def fit_power_law(samples, window=None) -> ExponentFit:
    """Least-squares line through ``(log t, log value)`` inside ``window``."""
    data = np.asarray(samples, dtype=float)
    t, v = data[:, 0], data[:, 1]
    if window is None:
        window = (t.max() / 16, t.max())
    ta, tb = window
    if not ta < tb:
        raise ValueError(f"empty fit window [{ta}, {tb}]")
    sel = (t >= ta * (1 - 1e-12)) & (t <= tb * (1 + 1e-12))
    if sel.sum() < 5:
        raise ValueError(f"fit window [{ta:g}, {tb:g}] holds {int(sel.sum())} samples; need 5")
    if np.any(v[sel] <= 0) or not np.all(np.isfinite(v[sel])):
        raise InvalidDataError("power-law fit needs positive finite values")
    x, y = np.log(t[sel]), np.log(v[sel])
    slope, intercept = np.polyfit(x, y, 1)
    rms = float(np.sqrt(np.mean((y - (slope * x + intercept)) ** 2)))
    return ExponentFit(float(ta), float(tb), float(slope), float(intercept), rms, int(sel.sum()))


def ben_artzi_koch_gap(w: Field, R: float) -> float:
    """Right side minus left side of the ``L^1`` bound by local gradient and far mass.

    ``||w||_1 <= 2R int_{|x|<=3R} |grad w| + 2 int_{|x|>R} |w|``.
    """
    g = w.grid
    if not 0 < 3 * R < g.lbox:
        raise ValueError(f"need 0 < 3R < lbox, got R={R}, lbox={g.lbox}")
    vol = g.cell_volume
    r = g.radius
    a = np.abs(w.values)
    gm = gradient_magnitude_values(w)
    lhs = a.sum() * vol
    rhs = 2 * R * gm[r <= 3 * R].sum() * vol + 2 * a[r > R].sum() * vol
    return float(rhs - lhs)


def write_diagnostics_csv(path, records) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        wr = csv.writer(fh)
        wr.writerow(CSV_COLUMNS)
        for rec in records:
            wr.writerow(rec.row())


def write_fits_csv(path, fits: dict[str, ExponentFit]) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        wr = csv.writer(fh)
        wr.writerow(FIT_COLUMNS)
        for name, fit in fits.items():
            wr.writerow([name, repr(fit.t_a), repr(fit.t_b), repr(fit.slope), repr(fit.rms)])


def read_diagnostics_csv(path) -> list[DiagnosticsRecord]:
    names = [f.name for f in fields(DiagnosticsRecord)]
    with open(path, newline="", encoding="utf-8") as fh:
        rows = list(csv.reader(fh))
    if tuple(rows[0]) != CSV_COLUMNS:
        raise ValueError(f"{path}: unexpected header {rows[0]}")
    return [DiagnosticsRecord(**dict(zip(names, map(float, row)))) for row in rows[1:]]
