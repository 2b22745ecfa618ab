import math

import numpy as np
import pytest
from numpy.testing import assert_allclose, assert_array_equal

from limitcones import config
from limitcones.cartan import cartan_projection, jordan_projection
from limitcones.cones import normalize
from limitcones.deformation import (
    FoldedNeighbourhood,
    RepresentationFamily,
    anchor_direction,
    build_section7_family,
    build_sym3_family,
    build_sym3_schottky,
    hull_escape,
    is_loxodromic,
    random_traceless,
    run_continuity_experiment,
    run_growth_continuity,
    symmetric_power,
)
from limitcones.errors import InvalidInputError
from limitcones.invariants import estimate_growth_indicator, estimate_limit_cone
from limitcones.subgroups import V0_RAY
from limitcones.words import compute_ball

SYM3 = np.array([3.0, 1.0, -1.0, -3.0]) / math.sqrt(20)


def test_symmetric_cube_weights():
    for t in (0.3, 1.0, 2.5):
        g = symmetric_power(np.diag([math.exp(t), math.exp(-t)]))
        assert_allclose(cartan_projection(g), [3 * t, t, -t, -3 * t], atol=1e-12)


def test_symmetric_cube_is_a_homomorphism_and_orthogonal_on_rotations():
    rng = np.random.default_rng(0)
    for _ in range(20):
        x, y = rng.standard_normal((2, 2, 2))
        assert_allclose(symmetric_power(x @ y), symmetric_power(x) @ symmetric_power(y), atol=1e-10)
    r = symmetric_power(np.array([[math.cos(0.4), -math.sin(0.4)], [math.sin(0.4), math.cos(0.4)]]))
    assert_allclose(r @ r.T, np.eye(4), atol=1e-14)
    with pytest.raises(InvalidInputError):
        symmetric_power(np.eye(3))


def test_sym3_schottky_cone_concentrates_on_ray():
    est = estimate_limit_cone(build_sym3_schottky(), 8, cutoff=5.0)
    # the image of an SL(2) group only has directions on one ray
    assert np.max(np.linalg.norm(est.cone.directions - SYM3, axis=1)) <= 1e-8


def test_random_traceless_and_loxodromic():
    x = random_traceless(4, 3)
    assert abs(np.trace(x)) < 1e-14
    assert np.linalg.norm(x) == pytest.approx(1.0)
    assert_array_equal(x, random_traceless(4, 3))
    assert is_loxodromic(np.diag([3.0, 1.0, 0.5, 1 / 1.5]))
    assert not is_loxodromic(np.diag([2.0, 0.5, 1.0, 1.0]))


def test_section7_family_defaults():
    fam = build_section7_family()
    a, b = fam.base.generators
    assert_allclose(cartan_projection(a), [4, 1, 0, -5], atol=1e-12)
    assert_allclose(jordan_projection(b), [3, 0, 0, -3], atol=1e-10)
    assert np.abs(b[3, :3]).max() < 1e-15 and np.abs(b[:3, 3]).max() < 1e-15
    # t = 0 gives the base generators exactly
    g0 = fam.generators_at(0.0)
    assert g0[0] is fam.base.generators[0] or np.array_equal(g0[0], a)
    assert_array_equal(g0[1], b)
    assert all(ok for t, ok in fam.loxodromic.items() if t > 0)
    for t in (1e-3, 1e-2, 1e-1):
        gt = fam.generators_at(t)
        assert np.linalg.det(gt[1]) == pytest.approx(1.0, abs=1e-10)
        assert is_loxodromic(gt[1])
        assert_array_equal(gt[0], a)


def test_section7_family_validation():
    with pytest.raises(InvalidInputError):
        build_section7_family(v=(1.0, 4.0, -5.0))
    with pytest.raises(InvalidInputError):
        build_section7_family(v=(4.0, 1.0, -4.0))
    with pytest.raises(InvalidInputError):
        build_section7_family(w1=-1.0)
    with pytest.raises(InvalidInputError):
        build_section7_family(conjugator=np.eye(4)[::-1])


def test_non_loxodromic_seed_warns():
    # seed 7 leaves a complex conjugate eigenvalue pair in every b_t
    with pytest.warns(UserWarning, match="loxodromic"):
        fam = build_section7_family(seed=7)
    assert not any(fam.loxodromic.values())


def test_perturbation_validation():
    base = build_sym3_schottky()
    with pytest.raises(InvalidInputError):
        RepresentationFamily(base, {5: np.zeros((4, 4))}, (0.1,))
    with pytest.raises(InvalidInputError):
        RepresentationFamily(base, {0: np.eye(4)}, (0.1,))


def test_neighbourhood_pieces():
    nb = FoldedNeighbourhood()
    assert nb.piece(V0_RAY)[0] == 3
    assert nb.piece([3, 1, 0, -4])[0] == 1
    assert nb.piece([3, 0, -1, -2])[0] == 2
    assert nb.piece(SYM3)[0] == 0
    with pytest.raises(InvalidInputError):
        FoldedNeighbourhood(kappa=1.5)


def test_neighbourhood_midpoint_property():
    # unit vectors of C1 - V0 and C2 - V0 at least 0.1 rad from V0 have midpoints outside C
    nb = FoldedNeighbourhood()
    rng = np.random.default_rng(0)
    e1 = normalize(np.array([1.0, 1, 0, -2]))
    e2 = normalize(np.array([2.0, 0, -1, -1]))

    def sector(edge, count):
        ang_max = math.acos(edge @ V0_RAY)
        t = rng.uniform(0.1, ang_max, count)
        f = normalize(edge - (edge @ V0_RAY) * V0_RAY)
        pts = np.cos(t)[:, None] * V0_RAY + np.sin(t)[:, None] * f
        fuzz = rng.standard_normal(pts.shape) * 0.01
        fuzz -= fuzz.mean(axis=1, keepdims=True)
        return normalize(pts + fuzz)

    w1 = sector(e1, 400)
    w2 = sector(e2, 400)
    w1 = w1[nb.piece(w1) == 1]
    w2 = w2[nb.piece(w2) == 2]
    assert len(w1) > 100 and len(w2) > 100
    mids = normalize((w1[:, None, :] + w2[None, :, :]).reshape(-1, 4))
    assert not nb.contains(mids).any()


def test_block_group_stays_in_neighbourhood_and_midpoint_escapes():
    fam = build_section7_family()
    nb = FoldedNeighbourhood()
    est = estimate_limit_cone(fam.at(0.0), 6, cutoff=1.0)
    res = hull_escape(est.cone, anchor_direction(fam), nb)
    assert res["raw_outside"] == 0
    assert nb.contains(est.cone.directions).all()
    assert res["w_outside"]
    assert anchor_direction(fam) == pytest.approx(normalize(np.array([4.0, 1, 0, -5])))


def test_sym3_continuity_report():
    fam = build_sym3_family(schedule=(0.1, 0.02, 0.0))
    rep = run_continuity_experiment(fam, ladder=(5, 6), cutoff=5.0)
    assert rep.complete
    for n in (5, 6):
        d = rep.distances(n)
        assert d[0.0] == 0.0
        assert d[0.02] <= d[0.1] + 0.02
        row = rep.row(0.0, n)
        assert row.escape == row.loss == row.hausdorff == row.lsc_defect == 0.0
    again = run_continuity_experiment(fam, ladder=(5, 6), cutoff=5.0)
    assert again.to_dict() == rep.to_dict()


def test_continuity_budget_gives_partial_report():
    fam = build_sym3_family(schedule=(0.1, 0.0))
    rep = run_continuity_experiment(fam, ladder=(4, 12), budget=1000)
    assert not rep.complete
    assert rep.rows == []
    assert "budget" in rep.error


def test_growth_continuity_table():
    fam = build_sym3_family(schedule=(0.05, 0.0))
    table = run_growth_continuity(fam, (1, 2, 3), [SYM3], 6)
    assert table.within_bound
    ball0 = compute_ball(fam.at(0.0), 6)
    direct = estimate_growth_indicator(ball0, (1, 2, 3), SYM3, window=table.fit_window)
    i0 = table.schedule.index(0.0)
    assert table.values[i0, 0] == direct.value
    assert table.max_delta()[0.0] == 0.0
    assert set(table.to_dict()) >= {"values", "fit_window", "two_rho"}


def test_family_serialisation():
    fam = build_section7_family()
    d = fam.to_dict()
    assert d["name"] == "sl3-block-deformation"
    assert d["params"]["seed"] == 0
    assert d["schema"] == config.SCHEMA_VERSION
    assert len(d["perturbations"]["1"]) == 4
