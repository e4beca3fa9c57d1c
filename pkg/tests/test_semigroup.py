from __future__ import annotations

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from levykpz.diagnostics import fit_power_law, self_similar_error
from levykpz.exceptions import ResolutionError
from levykpz.semigroup import (
    KernelSpec,
    apply_semigroup,
    check_kernel_resolved,
    kernel_at,
    stable_kernel,
    verify_self_similarity,
)
from levykpz.spectral import PeriodicGrid, gradient_magnitude, lp_norm
from levykpz.symbol import SymbolSpec

HEAT = SymbolSpec.fractional(2.0)


def heat_gaussian(g, sigma, t):
    var = sigma**2 + 2 * t
    return sigma / math.sqrt(var) * np.exp(-g.x1d**2 / (2 * var))


def test_identity_at_zero_and_constants_fixed():
    g = PeriodicGrid(1, 64, 5.0)
    f = g.gaussian(1.0, 1.0)
    np.testing.assert_array_equal(apply_semigroup(f, 0.0, HEAT).values, f.values)
    for t in (0.1, 3.0, 100.0):
        np.testing.assert_allclose(apply_semigroup(g.constant(2.5), t, SymbolSpec.fractional(1.3)).values,
                                   2.5, rtol=1e-14)
    with pytest.raises(ValueError):
        apply_semigroup(f, -1.0, HEAT)


def test_heat_evolution_of_gaussian():
    g = PeriodicGrid(1, 512, 40.0)
    for t in (0.5, 2.0):
        out = apply_semigroup(g.gaussian(1.0, 1.0), t, HEAT).values
        assert np.abs(out - heat_gaussian(g, 1.0, t)).max() < 1e-8


def test_kernel_values_at_origin():
    g = PeriodicGrid(1, 1024, 20.0)
    p = stable_kernel(KernelSpec(2.0, 1.0, g))
    assert p.values[g.n // 2] == pytest.approx(0.28209479177387814, abs=1e-12)
    gc = PeriodicGrid(1, 32768, 1024.0)
    pc = stable_kernel(KernelSpec(1.0, 1.0, gc))
    assert pc.values[gc.n // 2] == pytest.approx(1 / math.pi, abs=1e-6)


@pytest.mark.parametrize("alpha", [0.5, 1.0, 1.5, 2.0])
def test_kernel_unit_mass(alpha):
    g = PeriodicGrid(1, 4096, 200.0)
    p = stable_kernel(KernelSpec(alpha, 2.0, g))
    assert p.values.sum() * g.h == pytest.approx(1.0, abs=1e-12)


def test_kernel_resolution_rule():
    g = PeriodicGrid(1, 64, 8.0)  # h = 0.25, so width must be >= 1
    check_kernel_resolved(KernelSpec(2.0, 1.0, g))
    with pytest.raises(ResolutionError):
        stable_kernel(KernelSpec(2.0, 0.5, g))
    with pytest.raises(ValueError):
        KernelSpec(2.0, 0.0, g)
    with pytest.raises(ValueError):
        KernelSpec(2.5, 1.0, g)


def test_kernel_at_matches_grid_samples_and_2d():
    g = PeriodicGrid(1, 2048, 64.0)
    p = stable_kernel(KernelSpec(1.5, 2.0, g)).values
    idx = np.array([1024, 1030, 1100])
    np.testing.assert_allclose(kernel_at(1.5, 2.0, g, g.x1d[idx]), p[idx], atol=1e-14)
    g2 = PeriodicGrid(2, 128, 16.0)
    p2 = stable_kernel(KernelSpec(2.0, 1.0, g2)).values
    pts = [[0.0, 0.0], [g2.x1d[70], g2.x1d[60]]]
    np.testing.assert_allclose(kernel_at(2.0, 1.0, g2, pts), [p2[64, 64], p2[70, 60]], atol=1e-14)
    assert p2[64, 64] == pytest.approx(1 / (4 * math.pi), abs=1e-10)


def test_self_similarity_examples():
    g = PeriodicGrid(1, 1024, 32.0)
    assert verify_self_similarity(2.0, 1.0, 4.0, g) < 1e-8
    assert verify_self_similarity(2.0, 1.0, 1.0, g) == 0.0
    gc = PeriodicGrid(1, 131072, 8192.0)
    assert verify_self_similarity(1.0, 1.0, 2.0, gc) < 1e-6
    with pytest.raises(ValueError):
        verify_self_similarity(2.0, 1.0, 3.0, g)
    with pytest.raises(ValueError):
        verify_self_similarity(2.0, 2.0, 1.0, g)


@settings(max_examples=20, deadline=None)
@given(s=st.floats(0.01, 5.0), t=st.floats(0.01, 5.0), alpha=st.floats(0.3, 2.0))
def test_semigroup_property(s, t, alpha):
    g = PeriodicGrid(1, 128, 10.0)
    sym = SymbolSpec.fractional(alpha)
    f = g.gaussian(1.0, 1.0) - 0.5 * g.gaussian(1.0, 0.5, center=2.0)
    a = apply_semigroup(apply_semigroup(f, s, sym), t, sym).values
    b = apply_semigroup(f, s + t, sym).values
    assert np.abs(a - b).max() <= 1e-12 * np.abs(b).max() + 1e-15


@settings(max_examples=20, deadline=None)
@given(t=st.floats(0.05, 20.0), alpha=st.floats(1.0, 2.0), signed=st.booleans())
def test_contraction_in_lp(t, alpha, signed):
    g = PeriodicGrid(1, 512, 30.0)
    sym = SymbolSpec.fractional(alpha)
    f = g.gaussian(1.0, 1.0) + g.bump(0.7, 2.0, center=5.0)
    if signed:
        f = f - g.gaussian(1.2, 0.8, center=-6.0)
    out = apply_semigroup(f, t, sym)
    for p in (1, 2, math.inf):
        assert lp_norm(out, p) <= lp_norm(f, p) * (1 + 1e-10)


@pytest.mark.parametrize("alpha", [1.0, 1.5, 2.0])
def test_positivity_up_to_ringing(alpha):
    g = PeriodicGrid(1, 1024, 40.0)
    f = g.bump(1.0, 1.0)
    for t in (0.1, 1.0, 10.0):
        assert apply_semigroup(f, t, SymbolSpec.fractional(alpha)).values.min() >= -1e-9


@pytest.mark.parametrize("alpha, lbox, n", [(1.5, 512.0, 4096), (2.0, 128.0, 1024)])
def test_bump_decay_slopes(alpha, lbox, n):
    g = PeriodicGrid(1, n, lbox)
    sym = SymbolSpec.fractional(alpha)
    v = g.bump(1.0, 1.0)
    ts = 2.0 ** (np.arange(25) / 4)
    outs = [apply_semigroup(v, t, sym) for t in ts]
    s1 = fit_power_law([(t, lp_norm(o, math.inf)) for t, o in zip(ts, outs)], (1.0, 64.0)).slope
    s2 = fit_power_law([(t, lp_norm(gradient_magnitude(o), math.inf)) for t, o in zip(ts, outs)],
                       (1.0, 64.0)).slope
    assert abs(s1 + 1 / alpha) < 0.05 / alpha
    assert abs(s2 + 2 / alpha) < 0.05 * 2 / alpha


def test_linear_self_similar_limit_for_multifractional_symbol():
    g = PeriodicGrid(1, 4096, 512.0)
    sym = SymbolSpec.multifractional([(1, 1.5), (1, 2)])
    v = g.gaussian(1.0, 1.0)
    M = float(v.values.sum() * g.h)
    err = {t: self_similar_error(apply_semigroup(v, t, sym), M, t, 1, 1.5) for t in (4, 64)}
    assert err[64] < 0.5 * err[4]
