import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from numpy.testing import assert_allclose, assert_array_equal

from limitcones.cartan import cartan_projection_batch
from limitcones.cones import SampledCone, directed_hausdorff, normalize
from limitcones.errors import InvalidInputError
from limitcones.subgroups import (
    V0_RAY,
    FoldedSubgroupCone,
    block_case_fold,
    folded_plane_sl3_in_sl4,
    random_block_elements,
    reductive_subgroup_cone,
    sharpness_test,
    subgroup_cone,
)

SYM3 = np.array([3.0, 1.0, -1.0, -3.0]) / math.sqrt(20)


@pytest.fixture(scope="module")
def plane():
    return folded_plane_sl3_in_sl4()


def test_case_split_examples(plane):
    assert_array_equal(block_case_fold([3, 1, -4]), [3, 1, 0, -4])
    assert_array_equal(block_case_fold([3, -1, -2]), [3, 0, -1, -2])
    v1, v2 = plane.exact_pieces
    assert v1.contains([3, 1, 0, -4]) and not v2.contains([3, 1, 0, -4])
    assert v2.contains([3, 0, -1, -2]) and not v1.contains([3, 0, -1, -2])
    assert v1.contains(V0_RAY) and v2.contains(V0_RAY)


def test_block_elements_against_case_split():
    rng = np.random.default_rng(0)
    h = random_block_elements(1000, rng)
    mu = cartan_projection_batch(h)
    block = cartan_projection_batch(h[:, :3, :3])
    assert np.max(np.abs(mu - block_case_fold(block))) <= 1e-8
    plane = folded_plane_sl3_in_sl4()
    assert np.all(plane.contains(mu, tol=1e-8))


def test_folded_plane_samples(plane):
    d = plane.folded.directions
    assert np.all(plane.contains(d, tol=1e-10))
    # both pieces are covered, including V0 and the far edges
    pieces = [np.array([p.contains(x, tol=1e-10) for x in d]) for p in plane.exact_pieces]
    assert pieces[0].sum() > 50 and pieces[1].sum() > 50
    for r in ([1, 1, 0, -2], [2, 0, -1, -1], [1, 0, 0, -1]):
        assert np.min(np.linalg.norm(d - normalize(np.array(r, float)), axis=1)) < 1e-10


def test_reductive_cone_examples(plane):
    # the whole block chamber folds to the same samples
    e = normalize(np.array([[2.0, -1, -1, 0], [1, 1, -2, 0]]))
    t = np.linspace(0, 1, 181)[:, None]
    rays = (1 - t) * e[0] + t * e[1]
    folded = reductive_subgroup_cone(rays).folded
    assert max(plane.angle_to(folded.directions)) <= 1e-10
    assert directed_hausdorff(plane.folded, folded) <= 0.01
    assert_allclose(reductive_subgroup_cone([SYM3]).folded.directions[0], SYM3)
    assert_allclose(reductive_subgroup_cone([[1.0, -1, 0, 0]]).folded.directions[0], V0_RAY, atol=1e-15)
    with pytest.raises(InvalidInputError):
        reductive_subgroup_cone([[1.0, 1, 0, 0]])


@settings(max_examples=30)
@given(st.lists(st.lists(st.floats(-5, 5), min_size=4, max_size=4), min_size=1, max_size=8))
def test_folding_is_idempotent_and_covers_orbit(raw):
    x = np.array(raw)
    x -= x.mean(axis=1, keepdims=True)
    x = x[np.linalg.norm(x, axis=1) > 1e-3]
    if len(x) == 0:
        return
    once = reductive_subgroup_cone(x).folded
    twice = reductive_subgroup_cone(once.directions).folded
    assert_allclose(twice.directions, once.directions, atol=1e-15)
    # a permuted copy of the input folds to the same set
    perm = reductive_subgroup_cone(x[:, ::-1][:, [2, 0, 3, 1]]).folded
    assert directed_hausdorff(perm, once) <= 1e-12


def test_sharpness_examples(plane):
    rep = sharpness_test(SampledCone([SYM3]), plane)
    assert rep.sharp
    # closest point: V1, angle arcsin(sqrt(1/15))
    assert rep.min_angle == pytest.approx(math.asin(math.sqrt(1 / 15)), abs=1e-12)
    on_v0 = sharpness_test(SampledCone([SYM3, [1, 0, 0, -1]]), "sl3-block-in-sl4")
    assert on_v0.min_angle == 0.0
    assert not on_v0.sharp
    assert not sharpness_test(SampledCone([[1, 0, 0, -1]]), plane, threshold=0.0).sharp


def test_sharpness_verdict_monotone_in_threshold(plane):
    rep_lo = sharpness_test(SampledCone([SYM3]), plane, threshold=0.1)
    rep_hi = sharpness_test(SampledCone([SYM3]), plane, threshold=0.3)
    assert rep_lo.sharp and not rep_hi.sharp


def test_subgroup_registry_and_round_trip(plane):
    assert subgroup_cone("sl3-block-in-sl4") == plane
    again = FoldedSubgroupCone.from_dict(plane.to_dict())
    assert again == plane
    with pytest.raises(InvalidInputError):
        subgroup_cone("so3-in-sl4")
    with pytest.raises(InvalidInputError):
        subgroup_cone({"rays": [[1, -1, 0, 0]], "colour": "red"})
    sampled = subgroup_cone({"rays": [[1.0, -1, 0, 0]]})
    assert sharpness_test(SampledCone([[1, 0, 0, -1]]), sampled).min_angle == 0.0
