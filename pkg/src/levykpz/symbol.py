"""Fourier symbols of radial Lévy diffusion operators.

A symbol is the multiplier ``a(xi)`` with ``(L v)^ = a(xi) v^``.  Three
families are supported, all real, radial and nonnegative:

* ``fractional``      ``a = ell * |xi|**alpha``
* ``multifractional`` ``a = sum_j a_j * |xi|**alpha_j`` (a Brownian part is the
  term ``(a_0, 2)``)
* ``tabulated``       piecewise-linear interpolation of samples in ``|xi|``

Every symbol is split as ``a = ell*|xi|**alpha + k(xi)`` where ``alpha`` is the
smallest exponent present and ``k`` is the remainder.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field

import numpy as np

from .exceptions import InvalidSymbolError, OutOfRangeError

DEFAULT_RUNGS = 20
DEFAULT_LADDER_FACTOR = 0.5


class SymbolKind(str, enum.Enum):
    FRACTIONAL = "fractional"
    MULTIFRACTIONAL = "multifractional"
    TABULATED = "tabulated"


@dataclass(frozen=True)
class SymbolSpec:
    """Immutable description of a radial Lévy symbol.

    Prefer the ``fractional``/``multifractional``/``tabulated`` constructors;
    they fill ``alpha`` and ``ell`` consistently.
    """

    kind: SymbolKind
    alpha: float
    ell: float = 1.0
    terms: tuple[tuple[float, float], ...] = ()
    table: tuple[tuple[float, ...], tuple[float, ...]] | None = field(default=None, repr=False)

    def __post_init__(self):
        object.__setattr__(self, "kind", SymbolKind(self.kind))
        if not 0.0 < self.alpha <= 2.0:
            raise InvalidSymbolError(f"alpha must lie in (0, 2], got {self.alpha}")
        if not self.ell > 0.0:
            raise InvalidSymbolError(f"ell must be positive, got {self.ell}")
        if self.kind is SymbolKind.MULTIFRACTIONAL:
            if not self.terms:
                raise InvalidSymbolError("multifractional symbol needs at least one term")
            for coef, expo in self.terms:
                if not coef > 0.0:
                    raise InvalidSymbolError(f"term coefficient must be positive, got {coef}")
                if not 0.0 < expo <= 2.0:
                    raise InvalidSymbolError(f"term exponent must lie in (0, 2], got {expo}")
            amin = min(e for _, e in self.terms)
            if not np.isclose(self.alpha, amin, rtol=0, atol=1e-14):
                raise InvalidSymbolError(f"alpha={self.alpha} is not the minimum exponent {amin}")
        elif self.kind is SymbolKind.TABULATED:
            if self.table is None:
                raise InvalidSymbolError("tabulated symbol needs a table")
            r, a = (np.asarray(c, dtype=float) for c in self.table)
            if r.ndim != 1 or r.shape != a.shape or r.size < 2:
                raise InvalidSymbolError("table must be two equal-length 1-d sequences")
            if r[0] != 0.0 or a[0] != 0.0:
                raise InvalidSymbolError("table must start at |xi| = 0 with a(0) = 0")
            if np.any(np.diff(r) <= 0.0):
                raise InvalidSymbolError("table wavenumbers must be strictly increasing")
            if np.any(a < 0.0):
                raise InvalidSymbolError("tabulated symbol must be nonnegative")

    @classmethod
    def fractional(cls, alpha: float, ell: float = 1.0) -> SymbolSpec:
        return cls(SymbolKind.FRACTIONAL, alpha=alpha, ell=ell)

    @classmethod
    def multifractional(cls, terms) -> SymbolSpec:
        terms = tuple((float(c), float(e)) for c, e in terms)
        if not terms:
            raise InvalidSymbolError("multifractional symbol needs at least one term")
        alpha = min(e for _, e in terms)
        ell = sum(c for c, e in terms if e == alpha)
        return cls(SymbolKind.MULTIFRACTIONAL, alpha=alpha, ell=ell, terms=terms)

    @classmethod
    def tabulated(cls, xi_abs, values, alpha: float, ell: float = 1.0) -> SymbolSpec:
        table = (tuple(float(v) for v in xi_abs), tuple(float(v) for v in values))
        return cls(SymbolKind.TABULATED, alpha=alpha, ell=ell, table=table)


def evaluate_radial(spec: SymbolSpec, r) -> np.ndarray:
    """Evaluate the symbol at radii ``r = |xi|`` (any array shape)."""
    r = np.abs(np.asarray(r, dtype=float))
    if spec.kind is SymbolKind.FRACTIONAL:
        return spec.ell * r**spec.alpha
    if spec.kind is SymbolKind.MULTIFRACTIONAL:
        out = np.zeros_like(r)
        for coef, expo in spec.terms:
            out += coef * r**expo
        return out
    rt, at = (np.asarray(c) for c in spec.table)
    if np.any(r > rt[-1]):
        raise OutOfRangeError(f"|xi|={r.max():.6g} beyond table range [0, {rt[-1]:.6g}]")
    return np.interp(r, rt, at)


def evaluate(spec: SymbolSpec, xi):
    """Evaluate ``a(xi)`` at wavenumber vector(s).

    ``xi`` is a vector of components or an array whose last axis holds the
    components.  A single vector gives a float.
    """
    xi = np.asarray(xi, dtype=float)
    if xi.ndim == 0:
        xi = xi[None]
    val = evaluate_radial(spec, np.sqrt(np.sum(xi**2, axis=-1)))
    return float(val) if val.ndim == 0 else val


def dominant_alpha(spec: SymbolSpec) -> float:
    """Smallest stability index present in the symbol."""
    if spec.kind is SymbolKind.MULTIFRACTIONAL:
        if not spec.terms:
            raise InvalidSymbolError("multifractional symbol has no terms")
        return min(e for _, e in spec.terms)
    return spec.alpha


def remainder(spec: SymbolSpec, r) -> np.ndarray:
    """``k(xi) = a(xi) - ell*|xi|**alpha`` at radii ``r``."""
    r = np.abs(np.asarray(r, dtype=float))
    return evaluate_radial(spec, r) - spec.ell * r ** dominant_alpha(spec)


def perturbation_ladder(xi_min: float, rungs: int = DEFAULT_RUNGS,
                        factor: float = DEFAULT_LADDER_FACTOR) -> np.ndarray:
    """Geometric radii decreasing to ``xi_min``."""
    return xi_min * factor ** -np.arange(rungs - 1, -1, -1, dtype=float)


def check_perturbation_condition(spec: SymbolSpec, xi_min: float, ratio_tol: float,
                                 rungs: int = DEFAULT_RUNGS,
                                 factor: float = DEFAULT_LADDER_FACTOR):
    """Sample ``k(xi)/|xi|**alpha`` as ``|xi|`` shrinks to ``xi_min``.

    Returns ``(ok, ratios)`` where ``ok`` holds when the ratios are
    nonincreasing along the ladder and the last one is below ``ratio_tol``.
    """
    if not xi_min > 0 or not ratio_tol > 0:
        raise ValueError("xi_min and ratio_tol must be positive")
    r = perturbation_ladder(xi_min, rungs, factor)
    ratios = np.abs(remainder(spec, r)) / r ** dominant_alpha(spec)
    slack = 1e-12 * max(1.0, float(np.max(ratios)))
    decreasing = bool(np.all(np.diff(ratios) <= slack))
    return decreasing and bool(ratios[-1] < ratio_tol), ratios
