"""Periodic grids, lattice fields and their discrete Fourier machinery.

The whole space is truncated to the box ``[-lbox, lbox)**N`` with ``n`` points
per dimension.  Transforms use numpy's unnormalized FFT, so for a field ``f``
with coefficients ``F``::

    sum |f|**2 * h**N == sum |F|**2 * h**N / n**N

(``SpectralField.parseval_factor`` is that ``h**N / n**N``).
"""

from __future__ import annotations

import struct
from dataclasses import dataclass
from functools import cached_property
from pathlib import Path

import numpy as np

SNAPSHOT_MAGIC = b"LKPZFLD1"
_HEADER = struct.Struct("<8sqqd")


@dataclass(frozen=True)
class PeriodicGrid:
    dim: int
    n: int
    lbox: float

    def __post_init__(self):
        if self.dim not in (1, 2):
            raise ValueError(f"dim must be 1 or 2, got {self.dim}")
        if self.n < 8 or self.n & (self.n - 1):
            raise ValueError(f"n must be a power of two >= 8, got {self.n}")
        if not self.lbox > 0:
            raise ValueError(f"lbox must be positive, got {self.lbox}")

    @property
    def h(self) -> float:
        return 2.0 * self.lbox / self.n

    @property
    def shape(self) -> tuple[int, ...]:
        return (self.n,) * self.dim

    @property
    def cell_volume(self) -> float:
        return self.h**self.dim

    @cached_property
    def x1d(self) -> np.ndarray:
        return -self.lbox + self.h * np.arange(self.n)

    @cached_property
    def coords(self) -> tuple[np.ndarray, ...]:
        return tuple(np.meshgrid(*([self.x1d] * self.dim), indexing="ij"))

    @cached_property
    def radius(self) -> np.ndarray:
        return np.sqrt(sum(c**2 for c in self.coords))

    @cached_property
    def k1d(self) -> np.ndarray:
        """Integer mode indices in FFT order (``-n/2`` is the Nyquist mode)."""
        return np.fft.fftfreq(self.n, d=1.0 / self.n)

    @cached_property
    def xi1d(self) -> np.ndarray:
        return np.pi * self.k1d / self.lbox

    @cached_property
    def wavevectors(self) -> tuple[np.ndarray, ...]:
        return tuple(np.meshgrid(*([self.xi1d] * self.dim), indexing="ij"))

    @cached_property
    def derivative_wavevectors(self) -> tuple[np.ndarray, ...]:
        # odd derivatives of the unpaired Nyquist mode are dropped
        xi = self.xi1d.copy()
        xi[self.n // 2] = 0.0
        return tuple(np.meshgrid(*([xi] * self.dim), indexing="ij"))

    @cached_property
    def xi_abs(self) -> np.ndarray:
        return np.sqrt(sum(w**2 for w in self.wavevectors))

    def field(self, values) -> Field:
        return Field(self, np.asarray(values, dtype=float))

    def constant(self, c: float) -> Field:
        return Field(self, np.full(self.shape, float(c)))

    def gaussian(self, amplitude: float = 1.0, width: float = 1.0, center=None) -> Field:
        c = np.zeros(self.dim) if center is None else np.broadcast_to(center, (self.dim,))
        r2 = sum((x - c0) ** 2 for x, c0 in zip(self.coords, c))
        return Field(self, amplitude * np.exp(-r2 / (2.0 * width**2)))

    def bump(self, amplitude: float = 1.0, radius: float = 1.0, center=None) -> Field:
        """Smooth compactly supported ``exp(1 - 1/(1 - r**2))`` profile."""
        c = np.zeros(self.dim) if center is None else np.broadcast_to(center, (self.dim,))
        r2 = sum((x - c0) ** 2 for x, c0 in zip(self.coords, c)) / radius**2
        out = np.zeros(self.shape)
        inside = r2 < 1.0
        out[inside] = amplitude * np.exp(1.0 - 1.0 / (1.0 - r2[inside]))
        return Field(self, out)


@dataclass(frozen=True, eq=False)
class Field:
    """Real lattice function on a ``PeriodicGrid``."""

    grid: PeriodicGrid
    values: np.ndarray

    def __post_init__(self):
        if self.values.shape != self.grid.shape:
            raise ValueError(f"field shape {self.values.shape} != grid shape {self.grid.shape}")

    def is_finite(self) -> bool:
        return bool(np.all(np.isfinite(self.values)))

    def _other(self, other):
        if isinstance(other, Field):
            if other.grid != self.grid:
                raise ValueError("fields live on different grids")
            return other.values
        return other

    def __add__(self, other):
        return Field(self.grid, self.values + self._other(other))

    __radd__ = __add__

    def __sub__(self, other):
        return Field(self.grid, self.values - self._other(other))

    def __rsub__(self, other):
        return Field(self.grid, self._other(other) - self.values)

    def __mul__(self, other):
        return Field(self.grid, self.values * self._other(other))

    __rmul__ = __mul__

    def __neg__(self):
        return Field(self.grid, -self.values)


@dataclass(frozen=True, eq=False)
class SpectralField:
    grid: PeriodicGrid
    coeffs: np.ndarray

    @property
    def parseval_factor(self) -> float:
        return self.grid.cell_volume / self.grid.n**self.grid.dim


def forward(f: Field) -> SpectralField:
    return SpectralField(f.grid, np.fft.fftn(f.values))


def inverse(F: SpectralField) -> Field:
    return Field(F.grid, np.fft.ifftn(F.coeffs).real)


def gradient_values(grid: PeriodicGrid, values: np.ndarray, coeffs=None) -> list[np.ndarray]:
    """Array-level spectral gradient; pass ``coeffs`` to skip the forward FFT."""
    F = np.fft.fftn(values) if coeffs is None else coeffs
    return [np.fft.ifftn(1j * w * F).real for w in grid.derivative_wavevectors]


def gradient(f: Field) -> list[Field]:
    return [Field(f.grid, g) for g in gradient_values(f.grid, f.values)]


def gradient_magnitude(f: Field) -> Field:
    comps = gradient_values(f.grid, f.values)
    return Field(f.grid, np.sqrt(sum(g**2 for g in comps)))


def lp_norm_values(values: np.ndarray, p: float, cell_volume: float) -> float:
    if p < 1:
        raise ValueError(f"L^p norm needs p >= 1, got {p}")
    a = np.abs(values)
    if np.isinf(p):
        return float(a.max())
    if p == 1:
        return float(a.sum() * cell_volume)
    if p == 2:
        return float(np.sqrt(np.sum(a * a) * cell_volume))
    return float((np.sum(a**p) * cell_volume) ** (1.0 / p))


def lp_norm(f: Field, p: float) -> float:
    return lp_norm_values(f.values, p, f.grid.cell_volume)


def dealias_fraction(q: float) -> float:
    return 2.0 / 3.0 if q <= 3 else 0.5


def dealias_mask(grid: PeriodicGrid, q: float) -> np.ndarray:
    """Boolean mask of retained modes for nonlinearity exponent ``q``."""
    cutoff = dealias_fraction(q) * grid.n / 2
    keep1d = np.abs(grid.k1d) <= cutoff
    mask = keep1d
    for _ in range(grid.dim - 1):
        mask = np.multiply.outer(mask, keep1d)
    return mask


def dealias(F: SpectralField, q: float) -> SpectralField:
    if not q > 1:
        raise ValueError(f"dealiasing is defined for q > 1, got {q}")
    return SpectralField(F.grid, np.where(dealias_mask(F.grid, q), F.coeffs, 0.0))


def spectrum_tail_ratio(f: Field, q: float = 2.0) -> float:
    """Largest coefficient beyond the dealiasing cutoff relative to the peak."""
    F = np.abs(np.fft.fftn(f.values))
    peak = F.max()
    if peak == 0:
        return 0.0
    tail = F[~dealias_mask(f.grid, q)]
    return float(tail.max() / peak) if tail.size else 0.0


def write_snapshot(path, f: Field) -> Path:
    """Write ``f`` as header + row-major float64 data, plus a text sidecar."""
    path = Path(path)
    g = f.grid
    with open(path, "wb") as fh:
        fh.write(_HEADER.pack(SNAPSHOT_MAGIC, g.dim, g.n, g.lbox))
        fh.write(np.ascontiguousarray(f.values, dtype="<f8").tobytes())
    sidecar = path.with_name(path.name + ".txt")
    sidecar.write_text(
        f"magic = {SNAPSHOT_MAGIC.decode()}\ndim = {g.dim}\nn = {g.n}\nlbox = {g.lbox!r}\n"
        f"dtype = float64-le\norder = row-major\n",
        encoding="utf-8",
    )
    return path


def read_snapshot(path) -> Field:
    data = Path(path).read_bytes()
    magic, dim, n, lbox = _HEADER.unpack_from(data)
    if magic != SNAPSHOT_MAGIC:
        raise ValueError(f"{path}: bad snapshot magic {magic!r}")
    grid = PeriodicGrid(int(dim), int(n), float(lbox))
    values = np.frombuffer(data, dtype="<f8", offset=_HEADER.size)
    if values.size != n**dim:
        raise ValueError(f"{path}: expected {n**dim} values, found {values.size}")
    return Field(grid, values.reshape(grid.shape).astype(float))
