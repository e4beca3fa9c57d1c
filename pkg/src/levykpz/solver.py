"""Time integration of ``u_t = -L u + lambda |grad u|**q`` on a periodic box.

Long runs use a second-order exponential integrator built on the Duhamel
formula (ETD2RK): the linear part is propagated exactly by its Fourier
multiplier and only the nonlinearity is quadratured.  ``picard_solve``
iterates the Duhamel map itself, as an independent route to the same
solution over short horizons.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field

import numpy as np

from . import diagnostics
from .exceptions import (
    BlowUpError,
    HorizonTooLargeError,
    NoConvergenceError,
    ResolutionError,
    StepControlError,
)
from .semigroup import symbol_on_grid
from .spectral import Field, PeriodicGrid, dealias_mask, lp_norm, spectrum_tail_ratio
from .symbol import SymbolSpec, dominant_alpha

logger = logging.getLogger(__name__)

BLOWUP_FACTOR = 10.0
RESOLUTION_TAIL = 1e-8
MAX_REJECTIONS = 4


def dyadic_times(horizon: float, levels: int) -> tuple[float, ...]:
    """``horizon * 2**-m`` for ``m = levels-1 .. 0``."""
    return tuple(horizon * 2.0**-m for m in range(levels - 1, -1, -1))


def geometric_times(horizon: float, levels: int, per_octave: int) -> tuple[float, ...]:
    """Dyadic schedule refined to ``per_octave`` points per doubling."""
    count = (levels - 1) * per_octave + 1
    exps = np.arange(count)[::-1] / per_octave
    return tuple(float(horizon * 2.0**-e) for e in exps)


@dataclass(frozen=True, eq=False)
class ProblemSpec:
    symbol: SymbolSpec
    lam: float
    q: float
    initial: Field
    horizon: float
    dt: float
    sample_times: tuple[float, ...] = ()
    theorem_preset: bool = False

    def __post_init__(self):
        if not self.q > 1:
            raise ValueError(f"q must exceed 1, got {self.q}")
        if not self.horizon > 0:
            raise ValueError("horizon must be positive")
        if not 0 < self.dt <= self.horizon:
            raise ValueError(f"dt must lie in (0, horizon], got {self.dt}")
        times = tuple(float(t) for t in (self.sample_times or (self.horizon,)))
        if any(b <= a for a, b in zip(times, times[1:])):
            raise ValueError("sample_times must be strictly increasing")
        if times[0] <= 0 or times[-1] > self.horizon * (1 + 1e-14):
            raise ValueError("sample_times must lie in (0, horizon]")
        object.__setattr__(self, "sample_times", times)
        if not self.initial.is_finite():
            raise ValueError("initial datum has non-finite values")
        if self.theorem_preset:
            u0 = self.initial.values
            if np.any(u0 < 0) or not np.any(u0 > 0):
                raise ValueError("theorem presets need u0 >= 0 and u0 not identically zero")

    @property
    def grid(self) -> PeriodicGrid:
        return self.initial.grid

    @property
    def alpha(self) -> float:
        return dominant_alpha(self.symbol)

    def replace(self, **changes) -> ProblemSpec:
        kw = {k: getattr(self, k) for k in self.__dataclass_fields__}
        kw.update(changes)
        return ProblemSpec(**kw)


@dataclass
class Trajectory:
    problem: ProblemSpec
    times: list[float] = field(default_factory=list)
    fields: list[Field] = field(default_factory=list)
    records: list = field(default_factory=list)
    status: str = "completed"
    failure_time: float | None = None
    message: str = ""
    steps: int = 0
    rejections: int = 0
    m_inf: diagnostics.MassLimit | None = None

    @property
    def completed(self) -> bool:
        return self.status == "completed"

    def series(self, name: str) -> np.ndarray:
        return np.array([getattr(r, name) for r in self.records], dtype=float)


def phi1(z: np.ndarray) -> np.ndarray:
    """``(exp(z) - 1)/z`` with a series branch near zero."""
    z = np.asarray(z, dtype=float)
    out = np.empty_like(z)
    small = np.abs(z) < 1e-4
    zs = z[small]
    out[small] = 1 + zs / 2 + zs**2 / 6 + zs**3 / 24
    zb = z[~small]
    out[~small] = np.expm1(zb) / zb
    return out


def phi2(z: np.ndarray) -> np.ndarray:
    """``(exp(z) - 1 - z)/z**2`` with a series branch near zero."""
    z = np.asarray(z, dtype=float)
    out = np.empty_like(z)
    small = np.abs(z) < 5e-2
    zs = z[small]
    acc = np.zeros_like(zs)
    for k in range(9, -1, -1):
        acc = acc * zs + 1.0 / math.factorial(k + 2)
    out[small] = acc
    zb = z[~small]
    out[~small] = (np.expm1(zb) - zb) / zb**2
    return out


class _Kernel:
    """Precomputed spectral arrays shared by the steppers of one problem."""

    def __init__(self, problem: ProblemSpec):
        self.problem = problem
        g = problem.grid
        self.grid = g
        self.a = symbol_on_grid(g, problem.symbol)
        self.mask = dealias_mask(g, problem.q)
        self.dwv = g.derivative_wavevectors
        self.vol = g.cell_volume
        self._coef: dict[float, tuple[np.ndarray, ...]] = {}

    def coefficients(self, dt: float):
        c = self._coef.get(dt)
        if c is None:
            z = -dt * self.a
            c = (np.exp(z), dt * phi1(z), dt * phi2(z))
            if len(self._coef) > 8:
                self._coef.clear()
            self._coef[dt] = c
        return c

    def nonlinear(self, u_hat: np.ndarray):
        """Dealiased transform of ``lam*|grad u|**q`` and ``||grad u||_q**q``."""
        p = self.problem
        grads = [np.fft.ifftn(1j * w * u_hat).real for w in self.dwv]
        g2 = grads[0] ** 2
        for gj in grads[1:]:
            g2 += gj**2
        pw = g2 if p.q == 2 else g2 ** (p.q / 2)
        gq = float(pw.sum() * self.vol)
        if p.lam == 0:
            return np.zeros_like(u_hat), gq
        N_hat = np.fft.fftn(p.lam * pw)
        N_hat[~self.mask] = 0.0
        return N_hat, gq

    def advance(self, u_hat, N0, dt):
        E, w1, w2 = self.coefficients(dt)
        if self.problem.lam == 0:
            return E * u_hat, None, None
        a_hat = E * u_hat + w1 * N0
        N1, _ = self.nonlinear(a_hat)
        return a_hat + w2 * (N1 - N0), N1, a_hat


def nonlinearity(f: Field, lam: float, q: float) -> Field:
    """``lam * |grad f|**q`` pointwise, dealiased."""
    if not q > 1:
        raise ValueError(f"q must exceed 1, got {q}")
    if lam == 0:
        return Field(f.grid, np.zeros(f.grid.shape))
    grads = [np.fft.ifftn(1j * w * np.fft.fftn(f.values)).real for w in f.grid.derivative_wavevectors]
    pw = sum(g**2 for g in grads) ** (q / 2)
    F = np.fft.fftn(lam * pw)
    F[~dealias_mask(f.grid, q)] = 0.0
    return Field(f.grid, np.fft.ifftn(F).real)


def _blowup_bound(problem: ProblemSpec) -> float:
    return BLOWUP_FACTOR * float(np.abs(problem.initial.values).max())


def step(f: Field, dt: float, problem: ProblemSpec, t: float = 0.0) -> Field:
    """Advance ``f`` by one exponential-integrator step of size ``dt``."""
    if not dt > 0:
        raise ValueError(f"dt must be positive, got {dt}")
    k = _Kernel(problem)
    u_hat = np.fft.fftn(f.values)
    N0, _ = k.nonlinear(u_hat)
    new_hat, _, _ = k.advance(u_hat, N0, dt)
    out = np.fft.ifftn(new_hat).real
    _guard(out, t + dt, _blowup_bound(problem))
    return Field(f.grid, out)


def _guard(values: np.ndarray, t: float, bound: float) -> None:
    sup = float(np.abs(values).max())
    if not math.isfinite(sup):
        raise StepControlError(t)
    if sup > bound:
        raise BlowUpError(t, sup, bound)


def check_resolution(f: Field, q: float = 2.0, tail: float = RESOLUTION_TAIL) -> float:
    ratio = spectrum_tail_ratio(f, q)
    if ratio > tail:
        raise ResolutionError(
            f"initial spectrum tail {ratio:.2e} above {tail:.0e} of peak; refine the grid"
        )
    return ratio


def _schedule(problem: ProblemSpec):
    """Split ``[0, T]`` into steps of ``dt``, shortened to land on sample times."""
    t = 0.0
    dt = problem.dt
    for ts in problem.sample_times:
        nsteps = max(1, math.ceil((ts - t) / dt - 1e-9))
        h = (ts - t) / nsteps
        for i in range(nsteps):
            yield t + i * h, h, (i == nsteps - 1)
        t = ts


def run(problem: ProblemSpec, *, store_fields: bool = True, resolution_check: bool = True,
        self_similar: bool = True) -> Trajectory:
    """Integrate ``problem`` to its horizon, recording diagnostics at sample times.

    Failures (blow-up, non-finite values) end the run early; the returned
    trajectory then carries the partial record and a failure status.
    """
    if resolution_check:
        check_resolution(problem.initial, problem.q)
    k = _Kernel(problem)
    grid = problem.grid
    bound = _blowup_bound(problem)
    traj = Trajectory(problem)
    u_hat = np.fft.fftn(problem.initial.values)
    N0, gq = k.nonlinear(u_hat)
    qcum = 0.0

    def sample(t, values, qcum):
        f = Field(grid, values)
        traj.times.append(t)
        if store_fields:
            traj.fields.append(f)
        traj.records.append(diagnostics.make_record(f, t, problem, qcum))

    sample(0.0, problem.initial.values.copy(), 0.0)
    t_end = 0.0
    try:
        for t0, h, is_sample in _schedule(problem):
            new_hat, values = _accepted_step(k, u_hat, N0, h, t0, bound, traj)
            u_hat = new_hat
            N0_new, gq_new = k.nonlinear(u_hat)
            qcum += 0.5 * h * (gq + gq_new)
            N0, gq = N0_new, gq_new
            traj.steps += 1
            t_end = t0 + h
            if is_sample:
                sample(t_end, values, qcum)
    except (BlowUpError, StepControlError) as exc:
        traj.status = "blow-up" if isinstance(exc, BlowUpError) else "step-control-failure"
        traj.failure_time = exc.t
        traj.message = str(exc)
        logger.warning("run stopped: %s", exc)
        return traj
    if self_similar and len(traj.records) > 1:
        diagnostics.attach_self_similar_errors(traj)
    return traj


def _accepted_step(k: _Kernel, u_hat, N0, h, t0, bound, traj):
    """One macro step; on a guard violation retry with 2, 4, ... substeps."""
    for level in range(MAX_REJECTIONS + 1):
        sub = 2**level
        hs = h / sub
        cur, N = u_hat, N0
        try:
            # overflow is caught by the guard, so numpy need not warn about it
            with np.errstate(over="ignore", invalid="ignore"):
                for i in range(sub):
                    if i:
                        N, _ = k.nonlinear(cur)
                    cur, _, _ = k.advance(cur, N, hs)
                values = np.fft.ifftn(cur).real
            _guard(values, t0 + h, bound)
            return cur, values
        except (BlowUpError, StepControlError):
            if level == MAX_REJECTIONS:
                raise
            traj.rejections += 1
    raise AssertionError("unreachable")


@dataclass
class PicardResult:
    field: Field
    distances: list[float]
    ratios: list[float]
    nodes: np.ndarray

    @property
    def iterations(self) -> int:
        return len(self.distances)


def picard_solve(problem: ProblemSpec, horizon: float, max_iter: int = 50,
                 tol: float = 1e-10, nodes: int = 16) -> PicardResult:
    """Fixed point of the Duhamel map on ``[0, horizon]``.

    The time integral uses composite midpoint cells with the nonlinearity
    frozen at each cell's midpoint and the semigroup weight integrated
    exactly.  Iterates are stored at the cell midpoints; the first iterate is
    ``exp(-tL) u0``.
    """
    if nodes < 16:
        raise ValueError("picard_solve needs at least 16 quadrature nodes")
    if not horizon > 0:
        raise ValueError("horizon must be positive")
    k = _Kernel(problem)
    a = k.a
    d = horizon / nodes
    tau = (np.arange(nodes) + 0.5) * d
    u0_hat = np.fft.fftn(problem.initial.values)
    free_nodes = np.exp(-np.multiply.outer(tau, a)) * u0_hat
    free_end = np.exp(-horizon * a) * u0_hat
    E_full = np.exp(-d * a)
    E_half = np.exp(-0.5 * d * a)
    w_full = d * phi1(-d * a)
    w_half = 0.5 * d * phi1(-0.5 * d * a)

    cur_nodes = free_nodes.copy()
    cur_end = free_end.copy()
    distances: list[float] = []
    ratios: list[float] = []
    bad = 0
    for _ in range(max_iter):
        N = np.array([k.nonlinear(cur_nodes[i])[0] for i in range(nodes)])
        new_nodes = np.empty_like(cur_nodes)
        acc = np.zeros_like(u0_hat)
        for i in range(nodes):
            new_nodes[i] = free_nodes[i] + E_half * acc + w_half * N[i]
            acc = E_full * acc + w_full * N[i]
        new_end = free_end + acc
        diff_nodes = np.fft.ifftn(new_nodes - cur_nodes, axes=tuple(range(1, a.ndim + 1))).real
        diff_end = np.fft.ifftn(new_end - cur_end).real
        dist = max(float(np.abs(diff_nodes).max()), float(np.abs(diff_end).max()))
        distances.append(dist)
        if len(distances) > 1 and distances[-2] > 0:
            ratio = dist / distances[-2]
            ratios.append(ratio)
            bad = bad + 1 if ratio >= 1 else 0
            if bad >= 3:
                raise HorizonTooLargeError(
                    f"Picard map not contracting on horizon {horizon:g} (ratio {ratio:.3g})"
                )
        cur_nodes, cur_end = new_nodes, new_end
        if dist < tol:
            out = Field(problem.grid, np.fft.ifftn(cur_end).real)
            return PicardResult(out, distances, ratios, tau)
    raise NoConvergenceError(f"Picard iteration did not reach tol={tol:g} in {max_iter} iterations")
