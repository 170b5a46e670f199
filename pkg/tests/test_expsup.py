import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from cycleagg.expsup import (EMPTY, ApproximationError, ExpSuperposition, distributive_sum, evaluate,
                             ladder_for_iterations, nominal_window, reciprocal_square_superposition,
                             reciprocal_superposition, relative_error_sweep, shifted, superposition_2d,
                             window_for_region)


def test_printed_window_has_63_terms():
    sup = reciprocal_superposition(0.5, 2, 60)
    assert len(sup) == 63
    assert max(sup.rates) == pytest.approx(math.e) and min(sup.rates) == pytest.approx(math.exp(-30))
    assert all(c == pytest.approx(0.5 * lam) for c, lam in sup.terms())


def test_nominal_window_mapping():
    assert nominal_window(1, 30, 0.5) == (2, 60)
    assert ladder_for_iterations(26).window() == (2, 60)


def test_evaluate_basics():
    assert evaluate(EMPTY, 3.0) == 0
    one = ExpSuperposition((1.0,), (0.0,))
    assert np.all(evaluate(one, np.array([0.1, 5.0, 1e6])) == 1.0)


def test_rates_must_be_distinct():
    with pytest.raises(ValueError):
        ExpSuperposition((1.0, 2.0), (0.5, 0.5))


def test_reciprocal_accuracy_band():
    # the printed window is accurate where both truncations are negligible
    sup = reciprocal_superposition(0.5, 2, 60)
    s, _, _, rel = relative_error_sweep(sup, math.exp(2), math.exp(15), 200)
    assert rel.max() <= 1e-6


def test_printed_window_inaccurate_near_one():
    # rates above e^1 are missing, so s of order 1 is outside the accurate band
    sup = reciprocal_superposition(0.5, 2, 60)
    assert abs(sup(1.0) - 1.0) > 1e-2


@pytest.mark.parametrize("lo,hi", [(math.exp(-30), math.e), (1e-3, 1e3), (0.2, 10.0)])
def test_derived_window_covers_region(lo, hi):
    m, M = window_for_region(lo, hi, 0.5, 1e-6)
    sup = reciprocal_superposition(0.5, m, M)
    assert relative_error_sweep(sup, lo, hi, 400)[3].max() <= 1e-6


def test_shift_identity():
    a, m, M = 0.5, 2, 60
    sup, sh = reciprocal_superposition(a, m, M), shifted(a, m, M)
    for s in np.geomspace(1e-8, 1e8, 50):
        lhs = sup(math.exp(a) * s)
        rhs = math.exp(-a) * sh(s)
        assert abs(lhs - rhs) <= 1e-14 * abs(rhs)


def test_error_is_scale_quasi_invariant():
    a, m, M = 0.5, 10, 40
    sup, sh = reciprocal_superposition(a, m, M), shifted(a, m, M)
    for s in np.geomspace(1e-3, 1e3, 30):
        e1 = sup(math.exp(a) * s) * math.exp(a) * s - 1
        e2 = sh(s) * s - 1
        assert abs(e1 - e2) <= 1e-13


def test_reciprocal_square_kernel():
    m, M = window_for_region(0.5, 5.0, 0.5, 1e-7)
    sup = reciprocal_square_superposition(0.5, m, M)
    rel = relative_error_sweep(sup, 0.5, 5.0, 100, exact=lambda s: 1 / s ** 2)[3]
    assert rel.max() <= 1e-6


@settings(max_examples=40, deadline=None)
@given(st.floats(0.01, 100))
def test_linearity(s):
    a = reciprocal_superposition(0.5, 3, 10)
    b = ExpSuperposition((2.0, -1.0), (0.3, 7.0))
    assert (a + b)(s) == pytest.approx(a(s) + b(s), rel=1e-12, abs=1e-15)


def test_distributive_form():
    sup = reciprocal_superposition(0.5, 6, 30)
    slacks = np.random.default_rng(2).uniform(0.1, 5, 40)
    lhs = sum(evaluate(sup, s) for s in slacks)
    assert distributive_sum(sup, slacks) == pytest.approx(lhs, rel=1e-12)


def test_ladder():
    assert ladder_for_iterations(0).L == 4
    lads = [ladder_for_iterations(i, j_max=2) for i in range(10)]
    assert all(b.L >= a.L for a, b in zip(lads, lads[1:]))
    for a, b in zip(lads, lads[1:]):
        lo_a, hi_a = a.region(a.L)
        lo_b, hi_b = b.region(b.L)
        assert lo_b <= lo_a and hi_a <= hi_b
    regs = lads[-1].regions()
    assert all(r2[0] < r1[0] for r1, r2 in zip(regs, regs[1:]))
    with pytest.raises(ValueError):
        ladder_for_iterations(-1)


def test_2d_empty_region():
    assert len(superposition_2d("reciprocal", 2.0, (0, 0, 0, 1))) == 0


def test_2d_constant_kernel():
    sup = superposition_2d("constant", 2.0, (0, 1, 0, 1))
    assert sup.terms() == [(1.0, 0.0, 0.0)]


def test_2d_reciprocal_kernel():
    sup = superposition_2d("reciprocal", 2.0, (0, 1, 0, 1), tol=1e-3, max_terms=400)
    assert len(sup) <= 400 and sup.max_rel_error <= 1e-3
    u, v = np.meshgrid(np.linspace(0.05, 0.95, 13), np.linspace(0.05, 0.95, 13))
    exact = 1 / (2 - u ** 2 + v ** 2)
    assert np.max(np.abs(sup(u, v) - exact) / exact) <= 1e-3


def test_2d_sampled_kernel():
    sup = superposition_2d(lambda s: 1 / s ** 2, 3.0, (0, 1, 0, 1), tol=1e-3)
    assert sup.max_rel_error <= 1e-3


def test_2d_budget_exceeded():
    with pytest.raises(ApproximationError):
        superposition_2d("reciprocal", 1.0001, (0, 1, 0, 1), tol=1e-9, max_terms=9)


def test_2d_quarter_plane_only():
    with pytest.raises(ValueError):
        superposition_2d("reciprocal", 2.0, (-1, 1, 0, 1))
