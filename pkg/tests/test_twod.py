from __future__ import annotations

import numpy as np
import pytest

from siegel_renorm.errors import CoordinateChangeError, ProjectionError, SiegelRenormError
from siegel_renorm.newton import solve_fixed_point
from siegel_renorm.pairs import FactorPair, project
from siegel_renorm.quasiarc import compose_words, renorm_words
from siegel_renorm.renorm import rg
from siegel_renorm.series import Disk, TaylorDisk, sup_norm
from siegel_renorm.twod import (
    Y_RADIUS,
    BiDiskMap,
    Pair2D,
    Polydisk,
    _Composite,
    ac_conditions,
    collapse,
    distance_to_embedding,
    embed,
    first_second_gap,
    fit_map,
    inverse_grid,
    local_taylor,
    membership,
    newton_1d,
    norm_2d,
    pair_distance,
    prerenorm_2d,
    project_ac_2d,
    project_critical,
    rescale,
    spectral_coincidence,
    y_perturbation,
)


def _sample(domain: Polydisk, n: int = 7) -> tuple[np.ndarray, np.ndarray]:
    t = np.linspace(0.1, 0.9, n)
    w = domain.disk.center + 0.6 * domain.disk.radius * np.exp(2j * np.pi * t)
    return np.sqrt(w), 0.5 * domain.y_radius * np.exp(2j * np.pi * t[::-1])


@pytest.fixture(scope="module")
def embedded(p_star):
    return embed(p_star)


@pytest.fixture(scope="module")
def scaled(embedded):
    pre = prerenorm_2d(embedded, 2)
    return rescale(pre.pair, pre.ell)


def test_embedding_round_trip(p_star, embedded):
    back = collapse(embedded)
    assert np.array_equal(back.phi.coeffs, p_star.phi.coeffs)
    assert np.array_equal(back.psi.coeffs, p_star.psi.coeffs)
    assert back.phi.domain == p_star.phi.domain


def test_embedding_has_no_y_dependence(embedded):
    assert embedded.delta == 0.0
    assert first_second_gap(embedded) == 0.0
    assert distance_to_embedding(embedded) == 0.0


def test_norm_of_embedding_averages_factor_sups(p_star, embedded):
    expected = 0.5 * (sup_norm(p_star.phi) + sup_norm(p_star.psi))
    assert abs(norm_2d(embedded) - expected) <= 1e-12 * expected


def test_bidisk_map_round_trip(embedded):
    m = embedded.A
    back = BiDiskMap.from_dict(m.to_dict())
    assert np.array_equal(back.even, m.even) and np.array_equal(back.odd, m.odd)
    assert back.domain == m.domain


def test_bidisk_map_rejects_bad_shape():
    with pytest.raises(SiegelRenormError):
        BiDiskMap(Polydisk(Disk(0.0, 1.0)), np.zeros((3, 2, 2)), np.zeros((3, 2, 2)))


def test_fit_reproduces_polynomial_map():
    domain = Polydisk(Disk(0.3 + 0.1j, 0.5), 0.4)

    def func(x, y):
        return x**3 + 2 * y * x**2 - 1, x * y**2 + 0.5j * x**4

    m = fit_map(func, domain, 6, 4)
    x, y = _sample(domain)
    for got, want in zip(m(x, y), func(x, y)):
        assert np.max(np.abs(got - want)) < 1e-12


def test_pair_distance_vanishes_on_itself(embedded):
    assert pair_distance(embedded, embedded) == 0.0


def test_newton_1d_inverts_a_cubic():
    x = newton_1d(lambda u: u**3 + u, np.array([2.0 + 0j]), np.array([1.0 + 0j]))
    assert abs(x[0] ** 3 + x[0] - 2) < 1e-13


def test_newton_1d_reports_degenerate_model():
    with pytest.raises(CoordinateChangeError):
        newton_1d(lambda u: np.ones_like(u), np.array([2.0 + 0j]), np.array([0j]))


def test_prerenormalization_of_embedding_follows_the_words(p_star, embedded):
    pre = prerenorm_2d(embedded, 2)
    for m, disk, word in ((pre.pair.A, p_star.phi.domain, renorm_words(2)[0]), (pre.pair.B, p_star.psi.domain, renorm_words(2)[1])):
        x, y = inverse_grid(Polydisk(disk, Y_RADIUS), scale=pre.ell, size=8)
        want = compose_words(p_star, word, x)
        got = m(x, y)
        assert np.max(np.abs(got[0] - want)) < 1e-9
        assert np.max(np.abs(got[1] - want)) < 1e-9


@pytest.mark.parametrize("delta", [0.0, 1e-3, 1e-2])
def test_coordinate_change_inverse(p_star, embedded, delta):
    s = y_perturbation(embedded, delta, gap=delta) if delta else embedded
    pre = prerenorm_2d(s, 2)
    assert pre.coordinate_change.residual(*inverse_grid(Polydisk(p_star.phi.domain, Y_RADIUS), scale=pre.ell)) < 1e-9


@pytest.mark.parametrize("delta", [1e-2, 1e-3])
def test_rescaled_distance_to_embedding_is_quadratic(embedded, delta):
    s = y_perturbation(embedded, delta, gap=delta)
    pre = prerenorm_2d(s, 2)
    dist = distance_to_embedding(rescale(pre.pair, pre.ell))
    assert dist <= 100 * s.delta * (first_second_gap(s) + s.delta)


def test_critical_shift_is_zero_on_embedding(scaled):
    shift = project_critical(scaled)
    assert abs(shift.c1) < 1e-9 and abs(shift.c2) < 1e-9


def _translate(s: Pair2D, h: float) -> Pair2D:
    def conj(m):
        def f(x, y):
            u, v = m(x + h, y)
            return u - h, v

        return _Composite(f)

    return Pair2D(conj(s.A), conj(s.B))


def _critical_derivatives(s: Pair2D) -> tuple[complex, complex]:
    def first(m1, m2):
        return lambda x: m2(*m1(x, np.zeros_like(x)))[0]

    return local_taylor(first(s.A, s.B), 0.0, 2)[1], local_taylor(first(s.B, s.A), 0.0, 2)[1]


def test_critical_shift_recovers_translation(scaled):
    shift = project_critical(_translate(scaled, 0.01))
    assert abs(abs(shift.c1) - 0.01) < 1e-8
    assert all(abs(d) < 1e-10 for d in _critical_derivatives(shift.pair))


def test_critical_shift_on_perturbed_pair(embedded):
    delta = 1e-3
    s = y_perturbation(embedded, delta, gap=delta)
    pre = prerenorm_2d(s, 2)
    shift = project_critical(rescale(pre.pair, pre.ell))
    assert all(abs(d) < 1e-10 for d in _critical_derivatives(shift.pair))
    slope = local_taylor(lambda u: shift.pair.B(u, np.zeros_like(u))[0], 0.0, 2)[1]
    assert abs(slope) <= 10 * delta**2


def test_critical_point_outside_window_raises(scaled):
    with pytest.raises(ProjectionError):
        project_critical(_translate(scaled, 0.5), window=0.05)


def test_ac_projection_is_identity_on_commuting_pair():
    f = TaylorDisk.from_polynomial([1.0, -0.5], Disk(0.0, 1.5), 4)
    m = embed(FactorPair(f, f)).B
    shift = project_ac_2d(Pair2D(m, m))
    assert max(abs(shift.a), abs(shift.b), abs(shift.c)) < 1e-10


def _perturbed(p: FactorPair) -> FactorPair:
    bump = TaylorDisk.from_polynomial([1e-3, 2e-3, 0.0, 0.0, 1e-3j], p.phi.domain, p.phi.order)
    return FactorPair(p.phi + bump, p.psi)


def test_ac_projection_agrees_with_factor_projection(p_star):
    q = _perturbed(p_star)
    _, coeffs = project(q)
    shift = project_ac_2d(embed(q))
    assert abs(shift.a - coeffs.a) < 1e-10
    assert abs(shift.b - coeffs.b) < 1e-10
    assert abs(shift.c - coeffs.c) < 1e-10
    assert np.max(np.abs(ac_conditions(shift.pair))) < 1e-11


def test_ac_projection_is_idempotent(p_star):
    first = project_ac_2d(embed(_perturbed(p_star)))
    again = project_ac_2d(first.pair)
    assert max(abs(again.a), abs(again.b), abs(again.c)) < 1e-10


def test_output_y_dependence_is_quadratic(embedded):
    from siegel_renorm.twod import rg_2d

    ratios = []
    for delta in (1e-2, 1e-3):
        s = y_perturbation(embedded, delta, gap=delta)
        ratios.append(rg_2d(s).pair.delta / s.delta**2)
    assert max(ratios) < 100


def test_membership(embedded):
    rep = membership(embedded)
    assert rep.ok and rep.delta == 0.0
    assert not membership(y_perturbation(embedded, 0.05)).ok


def test_rg_commutes_with_embedding_at_refined_point(p_refined, refined_rg_2d):
    twice = rg(rg(p_refined)[0])[0]
    assert pair_distance(refined_rg_2d.pair, embed(twice)) < 1e-8


def test_refined_embedding_is_fixed(p_refined, refined_rg_2d):
    assert pair_distance(refined_rg_2d.pair, embed(p_refined)) < 1e-7


@pytest.fixture(scope="module")
def coincidence():
    return spectral_coincidence(solve_fixed_point(80, 100).pair)


def test_embedded_eigendirections_grow_like_squared_eigenvalue(coincidence):
    assert coincidence.growth
    assert max(coincidence.relative_errors) < 1e-3


def test_y_directions_contract(coincidence):
    assert len(coincidence.y_ratios) == 2
    assert max(coincidence.y_ratios) < 1.0
    assert coincidence.zero_derivative == 0.0
    assert coincidence.ok


def test_coincidence_rejects_bad_direction_count(p_star):
    with pytest.raises(SiegelRenormError):
        spectral_coincidence(p_star, k_dirs=0)


def test_prerenormalization_needs_level_two(embedded):
    with pytest.raises(SiegelRenormError):
        prerenorm_2d(embedded, 1)


def test_collapse_rejects_composites(scaled):
    with pytest.raises(SiegelRenormError):
        collapse(scaled)
