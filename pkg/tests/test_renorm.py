from __future__ import annotations

import numpy as np
import pytest

from siegel_renorm.errors import DegenerateScalingError
from siegel_renorm.pairs import FactorPair, higher_commutator_coeffs, initial_pair, residuals
from siegel_renorm.renorm import check_renormalizable, renormalize, rg, scaling_factor
from siegel_renorm.series import derivative, evaluate

REFERENCE_LAMBDA = 0.220265 - 0.708481j


def test_fixed_point_is_renormalizable(p_star):
    rep = check_renormalizable(p_star)
    assert rep.ok
    assert min(rep.inc1_margin, rep.inc2_margin, rep.inc3_margin) > 0


def test_large_scaling_breaks_first_inclusion(p_star):
    assert not check_renormalizable(p_star, lam=3 * scaling_factor(p_star)).inc1_ok


def test_zero_scaling_keeps_first_two_inclusions(p_star):
    rep = check_renormalizable(p_star, lam=0.0)
    assert rep.inc1_ok and rep.inc2_ok


def test_fixed_point_is_fixed(p_star):
    assert (rg(p_star)[0] - p_star).l1() < 1e-8


def test_renormalized_second_map_is_normalised():
    p = initial_pair(30, 30)
    for _ in range(3):
        assert abs(evaluate(renormalize(p).psi, 0.0) - 1.0) < 1e-14
        p = rg(p)[0]


def test_rg_output_is_almost_commuting_and_normalised():
    p = initial_pair(40, 50)
    for _ in range(5):
        p, _, _ = rg(p)
        r = residuals(p)
        assert r.max_abs() < 1e-10
        assert abs(r.rnorm) < 1e-13


def test_projection_is_negligible_on_commuting_input():
    # the starting pair is exactly commuting, so renormalization keeps it almost commuting
    _, k, _ = rg(initial_pair(40, 50))
    assert max(abs(k.a), abs(k.b), abs(k.c)) < 1e-10


@pytest.mark.parametrize("k", [2, 3, 4])
def test_commutator_order_is_preserved(k):
    p = initial_pair(40, 50)
    assert max(abs(c) for c in higher_commutator_coeffs(p, k)) < 1e-9
    q = rg(p)[0]
    assert max(abs(c) for c in higher_commutator_coeffs(q, k)) < 1e-9


def test_degenerate_scaling_raises(p_star):
    p = FactorPair(p_star.phi - evaluate(p_star.phi, 0.0), p_star.psi)
    with pytest.raises(DegenerateScalingError):
        renormalize(p)


def test_iterated_rg_contracts_after_transient():
    p = initial_pair(40, 50)
    steps = []
    for _ in range(15):
        q = rg(p)[0]
        steps.append((q - p).l1())
        p = q
    # the unstable direction takes over later; the first fifteen steps shrink
    assert steps[-1] < steps[0] / 50
    assert np.all(np.diff(steps[8:]) < 0)


def test_scaling_factor_of_fixed_point(refined_result):
    assert abs(refined_result.lam - REFERENCE_LAMBDA) < 1e-5


def test_scaling_factor_modulus(refined_result):
    assert abs(abs(refined_result.lam) - abs(REFERENCE_LAMBDA)) < 1e-6


def _deta(p, z):
    return evaluate(derivative(p.phi), z * z) * 2 * z


def test_derivative_at_return_point_equals_inverse_scaling(p_refined):
    lam = scaling_factor(p_refined)
    c = _deta(p_refined, p_refined.eta(p_refined.xi(0.0)))
    assert abs(c - 1 / lam) < 1e-6


def test_derivative_at_return_point_has_inverse_scaling_modulus(p_refined):
    lam = scaling_factor(p_refined)
    c = _deta(p_refined, p_refined.eta(p_refined.xi(0.0)))
    assert abs(abs(c) - 1 / abs(lam)) < 1e-6
