"""Low-tech reference solvers used to cross-check the spectral pipeline.

Both are deliberately slow: a direct periodic convolution with the sampled
kernel, and an explicit finite-difference scheme for the Brownian case.
"""

from __future__ import annotations

import math

import numpy as np

from . import diagnostics
from .exceptions import StepControlError
from .semigroup import KernelSpec, stable_kernel
from .solver import ProblemSpec, Trajectory
from .spectral import Field
from .symbol import SymbolKind

MAX_CONV_POINTS = {1: 256, 2: 64}
FD_SAFETY = 2.0


def convolve_semigroup(f: Field, t: float, alpha: float) -> Field:
    """``exp(-t(-Delta)**(alpha/2)) f`` by direct periodic convolution.

    The sampled kernel is clipped at zero and renormalized to unit mass, so
    constants are fixed and nonnegative data stay nonnegative.
    """
    g = f.grid
    if g.n > MAX_CONV_POINTS[g.dim]:
        raise ValueError(f"direct convolution limited to n <= {MAX_CONV_POINTS[g.dim]} in {g.dim}-d")
    if t == 0:
        return Field(g, f.values.copy())
    kern = np.clip(stable_kernel(KernelSpec(alpha, t, g)).values, 0.0, None)
    kern = np.fft.ifftshift(kern)  # origin to index 0
    kern /= kern.sum()
    out = np.zeros(g.shape)
    for offset in np.ndindex(*g.shape):
        w = kern[offset]
        if w != 0.0:
            out += w * np.roll(f.values, offset, axis=tuple(range(g.dim)))
    return Field(g, out)


def _brownian_coefficient(problem: ProblemSpec) -> float:
    s = problem.symbol
    if s.kind is SymbolKind.FRACTIONAL and s.alpha == 2:
        return s.ell
    if s.kind is SymbolKind.MULTIFRACTIONAL and all(e == 2 for _, e in s.terms):
        return sum(c for c, _ in s.terms)
    raise ValueError("fd_solve handles only the pure Brownian symbol (alpha = 2)")


def fd_stable_dt(problem: ProblemSpec) -> float:
    h = problem.grid.h
    return h * h / (2 * problem.grid.dim * _brownian_coefficient(problem) * FD_SAFETY)


def _laplacian(u: np.ndarray, h: float) -> np.ndarray:
    out = -2 * u.ndim * u
    for ax in range(u.ndim):
        out = out + np.roll(u, 1, axis=ax) + np.roll(u, -1, axis=ax)
    return out / (h * h)


def _grad_sq(u: np.ndarray, h: float) -> np.ndarray:
    out = np.zeros_like(u)
    for ax in range(u.ndim):
        out += ((np.roll(u, -1, axis=ax) - np.roll(u, 1, axis=ax)) / (2 * h)) ** 2
    return out


def fd_solve(problem: ProblemSpec, dt: float | None = None) -> Trajectory:
    """Explicit Euler with centred second-order differences, for ``L = -ell*Delta``.

    ``dt`` defaults to ``problem.dt`` and must respect
    ``dt <= h**2 / (2 N ell * 2)``.  Steps are shortened to land on the
    problem's sample times.
    """
    ell = _brownian_coefficient(problem)
    dt = problem.dt if dt is None else dt
    limit = fd_stable_dt(problem)
    if dt > limit * (1 + 1e-12):
        raise ValueError(f"dt={dt:g} violates the explicit stability bound {limit:g}")
    g = problem.grid
    h, vol, lam, q = g.h, g.cell_volume, problem.lam, problem.q
    traj = Trajectory(problem)
    u = problem.initial.values.copy()
    qcum = 0.0

    def sample(t):
        f = Field(g, u.copy())
        traj.times.append(t)
        traj.fields.append(f)
        traj.records.append(diagnostics.make_record(f, t, problem, qcum))

    sample(0.0)
    t = 0.0
    for ts in problem.sample_times:
        nsteps = max(1, math.ceil((ts - t) / dt - 1e-9))
        k = (ts - t) / nsteps
        for _ in range(nsteps):
            pw = _grad_sq(u, h) ** (q / 2)
            u = u + k * (ell * _laplacian(u, h) + lam * pw)
            qcum += k * float(pw.sum() * vol)
            traj.steps += 1
        if not np.all(np.isfinite(u)):
            err = StepControlError(ts)
            traj.status, traj.failure_time, traj.message = "step-control-failure", ts, str(err)
            return traj
        t = ts
        sample(t)
    return traj
