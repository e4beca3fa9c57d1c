from __future__ import annotations

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from levykpz.exceptions import InvalidSymbolError, OutOfRangeError
from levykpz.symbol import (
    SymbolKind,
    SymbolSpec,
    check_perturbation_condition,
    dominant_alpha,
    evaluate,
    evaluate_radial,
    perturbation_ladder,
    remainder,
)

alphas = st.floats(min_value=0.05, max_value=2.0)
coefs = st.floats(min_value=0.01, max_value=10.0)


def test_fractional_brownian_value():
    assert evaluate(SymbolSpec.fractional(2.0, 1.0), (3.0, 4.0)) == pytest.approx(25.0, rel=1e-15)


@pytest.mark.parametrize(
    "spec",
    [
        SymbolSpec.fractional(1.3, 2.0),
        SymbolSpec.multifractional([(1, 2), (2, 1.5)]),
        SymbolSpec.tabulated([0, 1, 2], [0, 1, 3], alpha=1.0),
    ],
)
def test_symbol_vanishes_at_origin(spec):
    assert evaluate(spec, (0.0, 0.0)) == 0.0
    assert evaluate(spec, 0.0) == 0.0


def test_multifractional_value():
    spec = SymbolSpec.multifractional([(1, 2), (2, 1.5)])
    assert evaluate(spec, (2.0,)) == pytest.approx(4 + 2 * 2**1.5, rel=1e-14)
    assert evaluate(spec, (2.0,)) == pytest.approx(9.656854249492380, rel=1e-14)


@pytest.mark.parametrize(
    "spec, expected",
    [
        (SymbolSpec.multifractional([(1, 1.5), (1, 1.2)]), 1.2),
        (SymbolSpec.fractional(1.7), 1.7),
        (SymbolSpec.multifractional([(1, 2), (1, 1.5)]), 1.5),
    ],
)
def test_dominant_alpha(spec, expected):
    assert dominant_alpha(spec) == expected


def test_multifractional_ell_sums_minimal_terms():
    spec = SymbolSpec.multifractional([(0.5, 1.5), (0.25, 1.5), (3.0, 2.0)])
    assert spec.alpha == 1.5
    assert spec.ell == pytest.approx(0.75)
    assert spec.kind is SymbolKind.MULTIFRACTIONAL


def test_perturbation_condition_fractional_has_zero_ratios():
    ok, ratios = check_perturbation_condition(SymbolSpec.fractional(1.5), 1e-6, 1e-3)
    assert ok
    assert np.all(ratios == 0.0)


def test_perturbation_condition_multifractional_ratio_is_power():
    spec = SymbolSpec.multifractional([(1, 1.2), (1, 1.8)])
    ok, ratios = check_perturbation_condition(spec, 2.0**-20, 1e-3)
    r = perturbation_ladder(2.0**-20)
    assert ok
    np.testing.assert_allclose(ratios, r**0.6, rtol=1e-10)
    assert np.all(np.diff(ratios) < 0)


def test_perturbation_condition_rejects_misdeclared_ell():
    r = np.linspace(0.0, 10.0, 2001)
    spec = SymbolSpec.tabulated(r, 2.0 * r**1.5, alpha=1.5, ell=1.0)
    xi_min = 0.01
    ok, ratios = check_perturbation_condition(spec, xi_min, 0.1, rungs=8)
    assert not ok
    # piecewise-linear interpolation error stays small on this fine table
    np.testing.assert_allclose(ratios, 1.0, atol=0.05)


def test_ladder_shape():
    r = perturbation_ladder(1e-3)
    assert r.size == 20
    assert r[-1] == pytest.approx(1e-3)
    np.testing.assert_allclose(r[1:] / r[:-1], 0.5)


@pytest.mark.parametrize(
    "kwargs",
    [
        dict(kind="fractional", alpha=0.0),
        dict(kind="fractional", alpha=2.5),
        dict(kind="fractional", alpha=1.0, ell=0.0),
        dict(kind="multifractional", alpha=1.0, terms=()),
        dict(kind="multifractional", alpha=1.0, terms=((-1.0, 1.0),)),
        dict(kind="multifractional", alpha=1.5, terms=((1.0, 1.0), (1.0, 1.5))),
        dict(kind="tabulated", alpha=1.0, table=((0.0, 1.0), (0.5, 1.0))),
        dict(kind="tabulated", alpha=1.0, table=((0.0, 1.0, 0.5), (0.0, 1.0, 2.0))),
        dict(kind="tabulated", alpha=1.0, table=((0.0, 1.0), (0.0, -1.0))),
    ],
)
def test_invalid_symbols(kwargs):
    with pytest.raises(InvalidSymbolError):
        SymbolSpec(**kwargs)


def test_tabulated_out_of_range():
    spec = SymbolSpec.tabulated([0, 1], [0, 1], alpha=1.0)
    with pytest.raises(OutOfRangeError):
        evaluate_radial(spec, [0.5, 2.0])


def test_remainder_of_multifractional():
    spec = SymbolSpec.multifractional([(1, 1.5), (2, 2)])
    r = np.array([0.5, 1.0, 3.0])
    np.testing.assert_allclose(remainder(spec, r), 2 * r**2, rtol=1e-14)


@settings(max_examples=50, deadline=None)
@given(alpha=alphas, ell=coefs, x=st.floats(-50, 50), y=st.floats(-50, 50))
def test_radial_symmetry(alpha, ell, x, y):
    spec = SymbolSpec.fractional(alpha, ell)
    base = evaluate(spec, (x, y))
    for v in ((y, x), (-x, y), (x, -y), (-y, -x)):
        assert evaluate(spec, v) == pytest.approx(base, rel=1e-13, abs=0)
    rot = (x * math.cos(0.3) - y * math.sin(0.3), x * math.sin(0.3) + y * math.cos(0.3))
    assert evaluate(spec, rot) == pytest.approx(base, rel=1e-12, abs=1e-300)


@settings(max_examples=50, deadline=None)
@given(
    terms=st.lists(st.tuples(coefs, st.floats(0.1, 2.0)), min_size=1, max_size=4),
    r1=st.floats(0, 100),
    r2=st.floats(0, 100),
)
def test_multifractional_monotone(terms, r1, r2):
    spec = SymbolSpec.multifractional(terms)
    lo, hi = sorted((r1, r2))
    assert evaluate_radial(spec, lo) <= evaluate_radial(spec, hi)


@settings(max_examples=50, deadline=None)
@given(
    alpha=st.floats(0.1, 1.5),
    extra=st.lists(st.tuples(coefs, st.floats(0.01, 0.5)), min_size=0, max_size=3),
    ell=coefs,
    r=st.floats(0, 1),
)
def test_lower_bound_inside_unit_ball(alpha, extra, ell, r):
    terms = [(ell, alpha)] + [(c, alpha + d) for c, d in extra]
    spec = SymbolSpec.multifractional(terms)
    assert evaluate_radial(spec, r) >= spec.ell * r**spec.alpha * (1 - 1e-14)
