from __future__ import annotations

import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from siegel_renorm.errors import DegenerateLineError
from siegel_renorm.renorm import scaling_factor
from siegel_renorm.series import derivative, evaluate
from siegel_renorm.spectral import (
    ALPHA_0,
    ALPHA_SQ,
    cone_bounds,
    cone_invariance_check,
    induced_l1,
    invariant_lines,
    line_quadratic,
    power_iteration,
    projected_contraction,
    spectral_projectors,
    spectrum,
    unstable_eigenvectors,
)


def _antilinear(rng, n: int) -> np.ndarray:
    a, b = rng.standard_normal((2, n, n))
    return np.block([[a, b], [b, -a]])


def test_zero_matrix_spectrum():
    rep = spectrum(np.zeros((6, 6)))
    assert np.all(rep.eigenvalues == 0)
    assert rep.pairing_defect == 0 and rep.unstable == ()


def test_antilinear_matrices_have_paired_spectra():
    rep = spectrum(_antilinear(np.random.default_rng(0), 5))
    assert rep.pairing_defect < 1e-12


def test_desk_spectrum_has_one_unstable_pair(L0):
    rep = spectrum(L0)
    assert rep.unstable_pairs == 1 and len(rep.unstable) == 2
    assert rep.pairing_defect < 1e-6
    assert rep.max_stable_modulus < 1 - 1e-3


def test_unstable_modulus_agrees_with_power_iteration(L0):
    rep = spectrum(L0)
    mod = abs(rep.unstable[0])
    power = math.sqrt(power_iteration(L0.matrix @ L0.matrix))
    assert abs(power - mod) <= 1e-6 * mod


def test_contracting_matrix_without_projectors():
    rng = np.random.default_rng(1)
    m = rng.standard_normal((8, 8))
    m *= 0.4 / induced_l1(m)
    assert projected_contraction(m) <= induced_l1(m) ** 3 < 1


def test_projected_contraction_with_projectors(L0):
    _, rights, lefts = unstable_eigenvectors(L0)
    s0, s1 = spectral_projectors(rights, lefts)
    assert projected_contraction(L0, e0=s0, e1=s1) < 1


def test_unprojected_contraction_fails(L0):
    assert projected_contraction(L0) > 1


def test_unit_imaginary_lines():
    lines = invariant_lines(1j)
    assert (lines.a_plus, lines.a_minus) == (1.0, -1.0)


def test_real_scaling_has_no_lines():
    with pytest.raises(DegenerateLineError):
        invariant_lines(0.5)


@given(st.complex_numbers(min_magnitude=0.1, max_magnitude=10).filter(lambda z: abs(z.imag) > 1e-3))
def test_line_slopes_solve_the_quadratic(lam):
    lines = invariant_lines(lam)
    for a in (lines.a_plus, lines.a_minus):
        assert abs(line_quadratic(a, lam)) < 1e-12 * max(1.0, a * a) * abs(lam)


def test_lines_are_invariant_under_conjugate_scaling(p_star):
    lam = scaling_factor(p_star)
    lines = invariant_lines(lam)
    for v in (lines.v_plus, lines.v_minus):
        image = lam * np.conj(v)
        assert abs(math.sin(np.angle(image / v))) < 1e-10


def test_modified_lines_solve_their_quadratic(p_refined):
    lam = scaling_factor(p_refined)
    r2 = abs(lam) ** 2
    deta = evaluate(derivative(p_refined.phi), r2 * r2) * 2 * r2
    lam_t = lam / np.conj(deta)
    lines = invariant_lines(lam_t)
    for a in (lines.a_plus, lines.a_minus):
        assert abs(line_quadratic(a, lam_t)) < 1e-12


def test_cone_headroom_arithmetic():
    assert math.acos(0.5967) - math.acos(0.71) > 0.075
    assert ALPHA_SQ == math.acos(0.5967) and ALPHA_0 == math.acos(0.71)


def test_first_cone_bound(p_refined):
    assert cone_bounds(p_refined).item1_residual < 1e-6


def test_second_cone_bound(p_refined):
    assert cone_bounds(p_refined).item2_arg < 1.062


def test_third_cone_bound(p_refined):
    assert cone_bounds(p_refined).item3_tailsum < 0.075


def test_fourth_cone_bounds(p_refined):
    first, sup = cone_bounds(p_refined).item4_args
    assert first < 1.066 and sup < 0.398


def test_tail_sum_is_insensitive_to_term_count(p_refined):
    a = cone_bounds(p_refined, N_terms=10).item3_tailsum
    b = cone_bounds(p_refined, N_terms=20).item3_tailsum
    assert abs(a - b) < 1e-4


def test_cone_containment_at_zero_and_one(p_refined):
    rep = cone_invariance_check(p_refined)
    assert rep.margin("0") > 1e-3 and rep.margin("1") > 1e-3


def test_cone_containment_at_all_levels(p_refined):
    rep = cone_invariance_check(p_refined)
    assert rep.ok, [c for c in rep.checks if not c.ok]


def test_doubled_cone_fails_containment(p_refined):
    rep = cone_invariance_check(p_refined, angles=(2 * ALPHA_0, 2 * ALPHA_SQ))
    assert not rep.ok
