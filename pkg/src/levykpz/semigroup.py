"""The linear semigroup ``exp(-tL)`` and the alpha-stable kernel.

Both act through Fourier multipliers, so on the torus they are exact up to
floating point.  ``stable_kernel`` returns the periodized kernel, i.e. the
sum of the whole-space kernel over all images of the box.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .exceptions import ResolutionError
from .spectral import Field, PeriodicGrid
from .symbol import SymbolSpec, evaluate_radial

RESOLUTION_WIDTH_CELLS = 4.0


@dataclass(frozen=True)
class KernelSpec:
    alpha: float
    t: float
    grid: PeriodicGrid

    def __post_init__(self):
        if not self.t > 0:
            raise ValueError(f"kernel time must be positive, got {self.t}")
        if not 0 < self.alpha <= 2:
            raise ValueError(f"alpha must lie in (0, 2], got {self.alpha}")

    @property
    def width(self) -> float:
        return self.t ** (1.0 / self.alpha)


def symbol_on_grid(grid: PeriodicGrid, spec: SymbolSpec) -> np.ndarray:
    return evaluate_radial(spec, grid.xi_abs)


def semigroup_multiplier(grid: PeriodicGrid, spec: SymbolSpec, t: float) -> np.ndarray:
    return np.exp(-t * symbol_on_grid(grid, spec))


def apply_semigroup(f: Field, t: float, spec: SymbolSpec) -> Field:
    """``exp(-tL) f``: scale every Fourier coefficient by ``exp(-t a(xi))``."""
    if t < 0:
        raise ValueError(f"semigroup time must be nonnegative, got {t}")
    if t == 0:
        return Field(f.grid, f.values.copy())
    F = np.fft.fftn(f.values) * semigroup_multiplier(f.grid, spec, t)
    return Field(f.grid, np.fft.ifftn(F).real)


def check_kernel_resolved(spec: KernelSpec) -> None:
    if spec.width < RESOLUTION_WIDTH_CELLS * spec.grid.h:
        raise ResolutionError(
            f"kernel width t^(1/alpha)={spec.width:.4g} below "
            f"{RESOLUTION_WIDTH_CELLS:g}h={RESOLUTION_WIDTH_CELLS * spec.grid.h:.4g}"
        )


def _kernel_modes(grid: PeriodicGrid, alpha: float, t: float) -> np.ndarray:
    return np.exp(-t * grid.xi_abs**alpha) / (2.0 * grid.lbox) ** grid.dim


def stable_kernel(spec: KernelSpec) -> Field:
    """Sample ``p_alpha(., t)`` on the grid by inverting ``exp(-t|xi|**alpha)``.

    The result has unit mass exactly (zero mode) and may show ringing of
    order ``1e-9`` below zero; it is not clipped.
    """
    check_kernel_resolved(spec)
    g = spec.grid
    vals = np.fft.ifftn(_kernel_modes(g, spec.alpha, spec.t)).real * g.n**g.dim
    # ifftn centers the kernel at index 0; the grid's origin sits at n/2
    return Field(g, np.fft.fftshift(vals))


def _evaluate_kernel_series(grid: PeriodicGrid, alpha: float, t: float,
                            pts1d: np.ndarray) -> np.ndarray:
    """Evaluate the periodized kernel's Fourier series on a tensor grid of points."""
    modes = _kernel_modes(grid, alpha, t)
    E = np.exp(1j * np.multiply.outer(pts1d, grid.xi1d))
    if grid.dim == 1:
        return (E @ modes).real
    return (E @ modes @ E.T).real


def verify_self_similarity(alpha: float, t1: float, t2: float, grid: PeriodicGrid,
                           max_points: int = 257) -> float:
    """Max deviation of ``p(x, t2)`` from ``s**-N p(x/s, t1)``, ``s=(t2/t1)**(1/alpha)``.

    Points are grid points in the inner half of the box.  When ``x/s`` is not
    a grid point the coarse-time kernel is evaluated through its Fourier
    series, which is exact for the band-limited periodized kernel.  The
    deviation is relative to ``max p(., t2)``.
    """
    if not (t1 > 0 and t2 >= t1):
        raise ValueError("need 0 < t1 <= t2")
    m = math.log2(t2 / t1)
    if abs(m - round(m)) > 1e-12:
        raise ValueError(f"t2/t1={t2 / t1:g} is not an integer power of two")
    if t2 == t1:
        return 0.0
    k1 = KernelSpec(alpha, t1, grid)
    k2 = KernelSpec(alpha, t2, grid)
    check_kernel_resolved(k1)
    p2 = stable_kernel(k2).values
    s = (t2 / t1) ** (1.0 / alpha)
    N = grid.dim
    center = grid.n // 2
    inner = np.nonzero(np.abs(grid.x1d) <= grid.lbox / 2)[0]
    si = round(s)
    if abs(s - si) < 1e-12:
        p1 = stable_kernel(k1).values
        idx = inner[(inner - center) % si == 0]
        idx_coarse = center + (idx - center) // si
        sel = np.ix_(*([idx] * N))
        sel_coarse = np.ix_(*([idx_coarse] * N))
        fine, coarse = p2[sel], p1[sel_coarse]
    else:
        stride = max(1, math.ceil(inner.size / max_points))
        idx = inner[::stride]
        fine = p2[np.ix_(*([idx] * N))]
        coarse = _evaluate_kernel_series(grid, alpha, t1, grid.x1d[idx] / s)
    dev = np.abs(fine - s**-N * coarse)
    return float(dev.max() / np.abs(p2).max())


def kernel_at(alpha: float, t: float, grid: PeriodicGrid, points) -> np.ndarray:
    """Periodized ``p_alpha(x, t)`` at arbitrary points via its Fourier series.

    ``points`` has shape ``(m,)`` in one dimension or ``(m, N)``.
    """
    spec = KernelSpec(alpha, t, grid)
    check_kernel_resolved(spec)
    pts = np.asarray(points, dtype=float).reshape(-1, grid.dim)
    modes = _kernel_modes(grid, alpha, t)
    E = [np.exp(1j * np.multiply.outer(pts[:, d], grid.xi1d)) for d in range(grid.dim)]
    if grid.dim == 1:
        return (E[0] @ modes).real
    return np.einsum("ja,ab,jb->j", E[0], modes, E[1]).real
