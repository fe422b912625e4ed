from __future__ import annotations

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from siegel_renorm.errors import ConfigurationError, DegenerateInputError, SingularDerivativeError
from siegel_renorm.pairs import PSI_DISK, THETA, FactorPair, golden_factor
from siegel_renorm.series import (
    Disk,
    TaylorDisk,
    compose,
    conj_variable,
    derivative,
    evaluate,
    l1_norm,
    nonlinearity,
    nonlinearity_inverse,
    norms,
    rescale,
)

UNIT = Disk(0.0, 1.0)

coeff = st.complex_numbers(max_magnitude=1.0, allow_nan=False, allow_infinity=False)


def test_disk_rejects_nonpositive_radius():
    with pytest.raises(DegenerateInputError):
        Disk(0.0, 0.0)


def test_evaluate_constant_and_identity():
    one = TaylorDisk.constant(1.0, Disk(0.3 + 0.1j, 0.5), 6)
    assert evaluate(one, 0.41 - 0.2j) == 1.0
    ident = TaylorDisk(UNIT, [0.0, 1.0])
    assert evaluate(ident, 0.5) == 0.5


def test_golden_factor_matches_direct_quadratic():
    # independent oracle: f(z**2) = (P(1 + s z) - 1) / s with P the golden quadratic
    rot = np.exp(2j * np.pi * THETA)

    def quad(z):
        return rot * z - 0.5 * rot * z * z

    s = quad(1.0) - 1.0
    f = golden_factor(PSI_DISK, 12)
    z = np.sqrt(PSI_DISK.center + 0.2 * PSI_DISK.radius * np.exp(1j * np.linspace(0, 6, 9)))
    direct = (quad(1.0 + s * z) - 1.0) / s
    assert np.allclose(evaluate(f, z * z), direct, rtol=0, atol=1e-14)
    assert abs(evaluate(f, 0.0) - 1.0) < 1e-15


def test_compose_with_identity_is_exact():
    d = Disk(0.2 - 0.1j, 0.7)
    f = TaylorDisk(d, np.arange(1, 9) * (0.3 + 0.1j) ** np.arange(8))
    g = compose(f, TaylorDisk.identity(d, 7), check_range=False)
    assert np.array_equal(g.coeffs, f.coeffs)


def test_compose_square_with_linear():
    lam = 0.3 - 0.7j
    q2 = TaylorDisk.from_polynomial([0, 0, 1], UNIT, 4)
    lin = TaylorDisk.from_polynomial([0, lam], UNIT, 4)
    out = compose(q2, lin, check_range=False)
    expected = np.zeros(5, dtype=complex)
    expected[2] = lam * lam
    assert np.array_equal(out.coeffs, expected)


def test_compose_affine_pair():
    p = TaylorDisk(UNIT, [1, 1, 0])
    q = TaylorDisk(UNIT, [0, 2, 0])
    assert np.array_equal(compose(p, q, check_range=False).coeffs, np.array([1, 2, 0], dtype=complex))


def test_compose_order_mismatch_raises():
    with pytest.raises(ConfigurationError):
        compose(TaylorDisk(UNIT, [1, 1]), TaylorDisk(UNIT, [0, 0.1, 0]))


@settings(max_examples=40, deadline=None)
@given(st.lists(coeff, min_size=1, max_size=13), st.lists(coeff, min_size=1, max_size=13), st.floats(0, 2 * np.pi))
def test_compose_agrees_with_nested_evaluation(fc, gc, angle):
    order = (len(fc) - 1) * (len(gc) - 1) + len(gc)
    g = TaylorDisk(UNIT, np.array(gc) * 0.5 / max(1.0, float(np.abs(gc).sum()))).truncate(order)
    f = TaylorDisk(UNIT, fc).truncate(order)
    z = 0.5 * np.exp(1j * angle) * np.linspace(0, 1, 5)
    direct = evaluate(f, evaluate(g, z))
    composed = evaluate(compose(f, g, check_range=False), z)
    scale = max(1.0, float(np.max(np.abs(direct))))
    assert np.max(np.abs(composed - direct)) <= 1e-10 * scale


def test_rescale_is_composition_with_linear_map():
    f = TaylorDisk(UNIT, [0.1, 0.4j, 0.2, -0.1])
    g = rescale(f, 0.5j, UNIT)
    z = np.array([0.3, -0.2 + 0.4j])
    assert np.allclose(evaluate(g, z), evaluate(f, 0.5j * z), atol=1e-15)


def test_derivative_of_constant_vanishes():
    d = derivative(TaylorDisk.constant(3.0, UNIT, 4))
    assert not np.any(d.coeffs)


def test_derivative_power_rule():
    r = 0.5
    f = TaylorDisk(Disk(0.1, r), [0, 0, 1])
    d = derivative(f)
    assert np.allclose(d.coeffs, [0, 2 / r])


def test_derivative_order_too_large():
    with pytest.raises(DegenerateInputError):
        derivative(TaylorDisk(UNIT, [1, 2]), 2)


def test_derivative_of_golden_factor_matches_central_difference():
    f = golden_factor(Disk(0.0, 1.0), 10)
    h = 1e-5
    fd = (evaluate(f, h) - evaluate(f, -h)) / (2 * h)
    exact = evaluate(derivative(f), 0.0)
    assert abs(exact - fd) <= 1e-8 * abs(exact)


@settings(max_examples=20, deadline=None)
@given(st.lists(coeff, min_size=3, max_size=13), st.integers(0, 2**32 - 1))
def test_derivative_matches_finite_differences(cs, seed):
    d = Disk(0.2 + 0.1j, 0.8)
    f = TaylorDisk(d, cs)
    rng = np.random.default_rng(seed)
    z = d.center + 0.5 * d.radius * rng.uniform(0, 1, 10) * np.exp(2j * np.pi * rng.uniform(0, 1, 10))
    h = 1e-5
    fd = (evaluate(f, z + h) - evaluate(f, z - h)) / (2 * h)
    exact = evaluate(derivative(f), z)
    scale = np.maximum(np.abs(exact), 1.0)
    assert np.all(np.abs(exact - fd) <= 1e-6 * scale)


def test_conj_variable_fixes_real_series():
    f = TaylorDisk(Disk(0.3, 0.5), [1.0, -2.0, 0.5])
    g = conj_variable(f)
    assert g.domain == f.domain and np.array_equal(g.coeffs, f.coeffs)


def test_conj_variable_of_rotation():
    f = TaylorDisk(UNIT, [0, 1j])
    assert np.array_equal(conj_variable(f).coeffs, np.array([0, -1j]))


@given(st.lists(coeff, min_size=1, max_size=10), coeff)
def test_conj_variable_is_involution(cs, center):
    f = TaylorDisk(Disk(center, 0.7), cs)
    g = conj_variable(conj_variable(f))
    assert g.domain == f.domain and np.array_equal(g.coeffs, f.coeffs)


def test_norms_of_simple_pairs():
    zero = FactorPair(TaylorDisk(UNIT, [0, 0]), TaylorDisk(UNIT, [0, 0]))
    n = norms(zero)
    assert (n.l1, n.sup) == (0.0, 0.0)
    one = FactorPair(TaylorDisk(UNIT, [1, 0]), TaylorDisk(UNIT, [0, 0]))
    n = norms(one)
    assert (n.l1, n.sup) == (1.0, 1.0)


@given(st.lists(coeff, min_size=1, max_size=12), st.lists(coeff, min_size=1, max_size=12))
def test_sup_never_exceeds_l1(a, b):
    n = norms(FactorPair(TaylorDisk(UNIT, a), TaylorDisk(UNIT, b)))
    assert n.sup <= n.l1 + 1e-12


def test_l1_counts_real_and_imaginary_parts():
    assert l1_norm(TaylorDisk(UNIT, [1 - 2j, 0.5j])) == 3.5


def test_nonlinearity_of_identity_is_zero():
    assert not np.any(nonlinearity(TaylorDisk.identity(Disk(0.0, 0.5), 8)).coeffs)


def test_nonlinearity_of_moebius_map():
    # x / (1 - x) has nonlinearity 2 / (1 - x) = 2 sum x**k
    r, n = 0.5, 30
    alpha = TaylorDisk(Disk(0.0, r), np.r_[0.0, r ** np.arange(1, n + 1)])
    nl = nonlinearity(alpha)
    expected = 2 * r ** np.arange(nl.order + 1)
    assert np.allclose(nl.coeffs, expected, rtol=0, atol=1e-12)


def test_nonlinearity_singular_derivative():
    with pytest.raises(SingularDerivativeError):
        nonlinearity(TaylorDisk(UNIT, [0, 0, 1, 0]))


def test_nonlinearity_inverse_of_zero_is_identity():
    out = nonlinearity_inverse(TaylorDisk.constant(0.0, Disk(0.0, 0.5), 6))
    assert np.array_equal(out.coeffs, TaylorDisk.identity(Disk(0.0, 0.5), out.order).coeffs)


@pytest.mark.parametrize("poly", [[0, 1, 0.01], [0, 1, 0, 0.02]])
def test_nonlinearity_round_trip(poly):
    d = Disk(0.0, 0.5)
    alpha = TaylorDisk.from_polynomial(poly, d, 40)
    back = nonlinearity_inverse(nonlinearity(alpha))
    z = d.boundary(32, 0.9)
    assert np.max(np.abs(evaluate(back, z) - evaluate(alpha, z))) < 1e-10


@given(st.lists(coeff, min_size=1, max_size=8))
def test_nonlinearity_inverse_is_tangent_to_identity(cs):
    d = Disk(0.0, 0.5)
    out = nonlinearity_inverse(TaylorDisk(d, np.array(cs) * 0.1))
    assert evaluate(out, 0.0) == 0
    assert abs(evaluate(derivative(out), 0.0) - 1.0) < 1e-12


def test_compose_warns_when_range_leaves_disk():
    from siegel_renorm.errors import RangeWarning

    with pytest.warns(RangeWarning):
        compose(TaylorDisk(UNIT, [0, 1]), TaylorDisk(UNIT, [2, 0]))
