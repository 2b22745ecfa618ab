import math

import numpy as np
import pytest
from numpy.testing import assert_allclose

from limitcones.cartan import LinearForm, p_theta, two_rho
from limitcones.cones import SampledCone, directed_hausdorff, i_invariance_defect, normalize
from limitcones.deformation import build_sym3_schottky, symmetric_power
from limitcones.errors import EmptyEstimateError, InvalidFormError, InvalidInputError
from limitcones.invariants import (
    LimitConeEstimate,
    anosov_certificate,
    completeness_level,
    estimate_critical_exponent,
    estimate_growth_indicator,
    estimate_limit_cone,
    fit_log_count,
)
from limitcones.subgroups import folded_plane_sl3_in_sl4, random_block_elements
from limitcones.words import MarkedGroup, compute_ball

SYM3 = np.array([3.0, 1.0, -1.0, -3.0]) / math.sqrt(20)


def schottky2(length, angle=math.pi / 4):
    a = np.diag([math.exp(length / 2), math.exp(-length / 2)])
    c, s = math.cos(angle), math.sin(angle)
    r = np.array([[c, -s], [s, c]])
    return MarkedGroup([a, r @ a @ r.T])


@pytest.fixture(scope="module")
def sl2_ball():
    return compute_ball(schottky2(6.0), 10)


@pytest.fixture(scope="module")
def sym3_ball():
    return compute_ball(build_sym3_schottky(), 7, jordan=True)


def test_cyclic_group_gives_one_ray():
    a = np.diag(np.exp([3.0, 1.0, -1.0, -3.0]))
    est = estimate_limit_cone(MarkedGroup([a]), 10, cutoff=1.0)
    assert len(est.cone) == 1
    assert_allclose(est.cone.directions[0], SYM3, atol=1e-12)
    assert est.count_used == 20


def test_block_subgroup_directions_lie_on_folded_plane():
    rng = np.random.default_rng(0)
    gens = random_block_elements(2, rng)
    est = estimate_limit_cone(MarkedGroup(gens), 6, cutoff=0.5)
    plane = folded_plane_sl3_in_sl4()
    assert max(plane.angle_to(d) for d in est.cone.directions) <= 1e-8


def test_jordan_kind_discards_unipotent_words():
    u = symmetric_power(np.array([[1.0, 1.0], [0.0, 1.0]]))
    h = symmetric_power(np.diag([math.e, 1 / math.e]))
    # the cyclic unipotent group has no Jordan directions at all
    with pytest.raises(EmptyEstimateError):
        estimate_limit_cone(MarkedGroup([u]), 6, cutoff=1e-6, kind="jordan")
    est = estimate_limit_cone(MarkedGroup([u, h]), 4, cutoff=1e-6, kind="jordan")
    ball = compute_ball(MarkedGroup([u, h]), 4, jordan=True)
    nonzero = np.linalg.norm(ball.lam, axis=1) > 1e-6
    assert est.count_used == int(nonzero.sum()) < len(ball)


def test_empty_estimate_error():
    with pytest.raises(EmptyEstimateError):
        estimate_limit_cone(schottky2(1.0), 2, cutoff=1e6)


def test_monotone_in_radius(sym3_ball):
    small = estimate_limit_cone(sym3_ball, 5, cutoff=2.0).cone
    big = estimate_limit_cone(sym3_ball, 6, cutoff=2.0).cone
    assert directed_hausdorff(small, big) == 0
    assert len(small) <= len(big)


def test_estimate_is_i_invariant():
    rng = np.random.default_rng(5)
    gens = []
    for _ in range(2):
        x = rng.standard_normal((4, 4))
        if np.linalg.det(x) < 0:
            x[0] *= -1
        gens.append(x / np.linalg.det(x) ** 0.25)
    est = estimate_limit_cone(MarkedGroup(gens), 5, cutoff=1.0)
    assert i_invariance_defect(est.cone) <= 1e-6


def test_jordan_directions_approach_cartan_estimate():
    rng = np.random.default_rng(1)
    gens = []
    for _ in range(2):
        x = np.eye(3) + 0.6 * rng.standard_normal((3, 3))
        gens.append(x / np.cbrt(np.linalg.det(x)))
    ball = compute_ball(MarkedGroup(gens), 8, jordan=True)
    dists = []
    for n in (4, 6, 8):
        jor = estimate_limit_cone(ball, n, cutoff=1e-6, kind="jordan").cone
        car = estimate_limit_cone(ball, n, cutoff=1e-6).cone
        dists.append(directed_hausdorff(jor, car))
    assert dists[0] >= dists[1] >= dists[2]


def test_theta_kind_is_projection_of_cartan(sym3_ball):
    for theta in [(1,), (2,), (1, 3)]:
        th = estimate_limit_cone(sym3_ball, 6, cutoff=2.0, kind="theta", theta=theta).cone
        car = estimate_limit_cone(sym3_ball, 6, cutoff=2.0).cone
        ref = SampledCone(normalize(p_theta(theta, car.directions)))
        assert directed_hausdorff(th, ref) <= 1e-10
        assert directed_hausdorff(ref, th) <= 1e-10


def test_limit_cone_estimate_round_trip(sym3_ball):
    est = estimate_limit_cone(sym3_ball, 5, cutoff=2.0)
    again = LimitConeEstimate.from_dict(est.to_dict())
    assert again.cone == est.cone
    assert again.ball_radius == 5 and again.count_used == est.count_used


def test_completeness_level_and_fit():
    lengths = np.repeat(np.arange(6), 3)
    values = lengths * 2.0
    assert completeness_level(values, lengths, 5) == 10.0
    # exact exponential counts give the exact rate
    v = np.log(np.arange(1, 2001)) / 0.7
    slope, _, resid, ts, counts = fit_log_count(v, (2.0, 10.0))
    assert slope == pytest.approx(0.7, rel=2e-2)
    assert resid < 0.05


def test_growth_indicator_bounded_by_two_rho(sym3_ball):
    est = estimate_growth_indicator(sym3_ball, (1, 2, 3), SYM3)
    assert est.value > 0
    assert est.value <= two_rho(SYM3) + 0.1
    assert est.to_dict()["norm"] == "euclidean"


def test_growth_indicator_is_homogeneous(sl2_ball):
    v = np.array([1.0, -1.0]) / math.sqrt(2)
    one = estimate_growth_indicator(sl2_ball, (1,), v)
    two = estimate_growth_indicator(sl2_ball, (1,), 2 * v)
    assert two.value == pytest.approx(2 * one.value, rel=1e-12)


def test_growth_indicator_validates_v(sl2_ball):
    with pytest.raises(InvalidInputError):
        estimate_growth_indicator(sl2_ball, (1,), [-1.0, 1.0])
    with pytest.raises(InvalidInputError):
        estimate_growth_indicator(sl2_ball, (1,), [1.0, -1.0], eps_list=[0.1, 0.2])
    with pytest.raises(InvalidInputError):
        estimate_growth_indicator(compute_ball(build_sym3_schottky(), 3), (2,), SYM3)


def test_growth_flags_sparse_counts(sl2_ball):
    est = estimate_growth_indicator(sl2_ball, (1,), [1.0, -1.0], min_count=10**9)
    assert not est.is_reliable
    assert est.half_angle_used is None


def test_rank_one_growth_matches_norm_exponent(sl2_ball):
    v = np.array([1.0, -1.0]) / math.sqrt(2)
    psi = estimate_growth_indicator(sl2_ball, (1,), v).value
    delta_norm = estimate_critical_exponent(sl2_ball, "norm").value
    assert psi == pytest.approx(delta_norm, rel=0.1)
    assert psi <= delta_norm + 0.1


def test_exponent_matches_word_count_rate():
    group = schottky2(16.0)
    ball = compute_ball(group, 9)
    est = estimate_critical_exponent(ball, LinearForm([1.0, 0.0]))
    # here mu_1 is close to c * |gamma|; the count by phi then grows like 3^{T / c}
    outer = ball.lengths == 9
    c = float(np.mean(ball.mu[outer, 0]) / 9)
    assert est.value == pytest.approx(math.log(3) / c, rel=0.1)
    lo, hi = est.poincare_bracket
    assert est.poincare_exponent == pytest.approx(est.value, rel=0.1)
    assert lo <= hi


def test_squaring_generators_halves_exponent():
    g = schottky2(8.0)
    sq = g.with_generators([x @ x for x in g.generators])
    phi = LinearForm([1.0, 0.0])
    d1 = estimate_critical_exponent(g, phi, 9).value
    d2 = estimate_critical_exponent(sq, phi, 9).value
    assert d2 == pytest.approx(d1 / 2, rel=0.1)


def test_two_rho_exponent_heuristic(sym3_ball):
    est = estimate_critical_exponent(sym3_ball, LinearForm.two_rho(4))
    assert 0 <= est.value <= 1 + 0.1


def test_invalid_form():
    with pytest.raises(InvalidFormError):
        estimate_critical_exponent(schottky2(4.0), LinearForm([0.0, 1.0]), 6)
    with pytest.raises(InvalidInputError):
        estimate_critical_exponent(schottky2(4.0), "volume", 6)


def test_poincare_sums_reported(sl2_ball):
    est = estimate_critical_exponent(sl2_ball, LinearForm([1.0, 0.0]))
    assert len(est.poincare_sums) == 5
    sums = [est.poincare_sums[s] for s in sorted(est.poincare_sums)]
    assert all(a >= b for a, b in zip(sums, sums[1:]))


def test_anosov_certificate_schottky_and_unipotent():
    cert = anosov_certificate(schottky2(6.0), (1,), 8)
    assert cert.certified
    assert cert.slopes[1] > 1.0
    u = np.array([[1.0, 0.02], [0.0, 1.0]])
    bad = anosov_certificate(MarkedGroup([np.diag([math.e**3, math.e**-3]), u]), (1,), 8)
    assert bad.slopes[1] <= 0.05
    with pytest.raises(InvalidInputError):
        anosov_certificate(schottky2(6.0), (1,), 3)


def test_anosov_certificate_sym3_stable(sym3_ball):
    c5 = anosov_certificate(sym3_ball, (1, 2, 3), 5)
    c7 = anosov_certificate(sym3_ball, (1, 2, 3), 7)
    for a in (1, 2, 3):
        assert c7.slopes[a] > 0
        assert abs(c7.slopes[a] - c5.slopes[a]) <= 0.2 * c5.slopes[a]
    d = c7.to_dict()
    assert d["min_slope"] == c7.min_slope
