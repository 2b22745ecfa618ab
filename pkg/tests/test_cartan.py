import itertools
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from numpy.testing import assert_allclose, assert_array_equal

from limitcones.cartan import (
    AmbientGroup,
    LinearForm,
    WeylElement,
    cartan_projection,
    cartan_projection_batch,
    exterior_power,
    fold_to_chamber,
    fundamental_weight,
    in_chamber,
    jordan_projection,
    mu_from_exterior_logs,
    normalize_theta,
    opposite_theta,
    opposition_involution,
    p_theta,
    random_sl,
    simple_root,
    theta_blocks,
    two_rho,
    wall_reflection,
    weyl_action,
    weyl_subgroup,
)
from limitcones.errors import InvalidInputError

E = math.e
PHI_LOG = math.log((3 + math.sqrt(5)) / 2)

zero_sum = st.lists(st.floats(-50, 50), min_size=2, max_size=6).map(lambda x: np.array(x) - np.mean(x))


def test_ambient_group():
    g = AmbientGroup(4)
    assert g.rank == 3
    with pytest.raises(InvalidInputError):
        AmbientGroup(1)


def test_cartan_diagonal():
    g = np.diag([E**3, E, E**-4, 1.0])
    assert_allclose(cartan_projection(g), [3, 1, 0, -4], atol=1e-12)


def test_cartan_orthogonal_is_zero():
    assert_allclose(cartan_projection([[0, 1], [-1, 0]]), [0, 0], atol=1e-15)


def test_cartan_symmetric_2x2_against_characteristic_polynomial():
    # eigenvalues of [[2,1],[1,1]] are the roots of t^2 - 3t + 1
    roots = np.roots([1, -3, 1])
    expected = np.log(np.sort(roots)[::-1])
    assert_allclose(cartan_projection([[2, 1], [1, 1]]), expected, atol=1e-14)
    assert_allclose(cartan_projection([[2, 1], [1, 1]])[0], PHI_LOG, atol=1e-14)


def test_cartan_rejects_bad_input():
    with pytest.raises(InvalidInputError):
        cartan_projection([[2, 0], [0, 2]])
    with pytest.raises(InvalidInputError):
        cartan_projection([[1, 2, 3]])
    with pytest.raises(InvalidInputError):
        cartan_projection([[np.nan, 0], [0, 1]])


def test_jordan_examples():
    assert_allclose(jordan_projection([[1, 1], [0, 1]]), [0, 0], atol=1e-15)
    assert_allclose(jordan_projection(np.diag([E**3, E, E**-4, 1.0])), [3, 1, 0, -4], atol=1e-12)
    assert_allclose(jordan_projection([[2, 1], [1, 1]]), [PHI_LOG, -PHI_LOG], atol=1e-14)


def test_jordan_complex_pair_counts_twice():
    r = 2.0
    g = np.array([[0, -r, 0], [r, 0, 0], [0, 0, 1 / r**2]])
    assert_allclose(jordan_projection(g), [math.log(2)] * 2 + [-2 * math.log(2)], atol=1e-14)


def test_inverse_identity_and_jordan_bound():
    rng = np.random.default_rng(11)
    gs = random_sl(4, rng, size=200)
    for g in gs:
        mu = cartan_projection(g)
        assert_allclose(cartan_projection(np.linalg.inv(g)), opposition_involution(mu), atol=1e-9)
        assert np.linalg.norm(jordan_projection(g)) <= np.linalg.norm(mu) + 1e-9


def test_jordan_of_powers_is_linear():
    rng = np.random.default_rng(3)
    for g in random_sl(3, rng, size=20):
        lam = jordan_projection(g)
        for n in range(1, 11):
            h = np.linalg.matrix_power(g, n)
            if np.linalg.cond(h) > 1e8:
                break  # double precision cannot resolve the small eigenvalues any more
            assert_allclose(jordan_projection(h), n * lam, rtol=1e-6, atol=1e-8)


def test_batch_matches_single():
    rng = np.random.default_rng(0)
    gs = random_sl(4, rng, size=50)
    assert_allclose(cartan_projection_batch(gs), [cartan_projection(g) for g in gs], atol=1e-13)


def test_random_sl_has_det_one():
    rng = np.random.default_rng(1)
    assert_allclose(np.linalg.det(random_sl(5, rng, size=30)), 1.0, atol=1e-10)


def test_exterior_power_against_minors():
    rng = np.random.default_rng(5)
    g = rng.standard_normal((4, 4))
    w2 = exterior_power(g, 2)
    subsets = list(itertools.combinations(range(4), 2))
    for a, rows in enumerate(subsets):
        for b, cols in enumerate(subsets):
            assert w2[a, b] == pytest.approx(np.linalg.det(g[np.ix_(rows, cols)]))
    # functoriality
    h = rng.standard_normal((4, 4))
    assert_allclose(exterior_power(g @ h, 2), w2 @ exterior_power(h, 2), atol=1e-10)
    assert_allclose(exterior_power(g, 4), [[np.linalg.det(g)]])


def test_mu_from_exterior_logs_matches_mpmath_on_ill_conditioned_product():
    mpmath = pytest.importorskip("mpmath")
    mpmath.mp.dps = 80
    rng = np.random.default_rng(8)
    g = random_sl(4, rng)
    p = 40
    gp = np.linalg.matrix_power(g, 1)
    top = []
    for k in range(1, 4):
        w = exterior_power(gp, k)
        m = mpmath.matrix(w.tolist()) ** p
        top.append(float(mpmath.log(max(mpmath.svd_r(m, compute_uv=False)))))
    mu_ref = mu_from_exterior_logs(top)
    from limitcones.words import power_cartan_projection

    assert_allclose(power_cartan_projection(g, p), mu_ref, atol=1e-9)
    # the direct double-precision product loses the bottom singular value
    direct = np.linalg.svd(np.linalg.matrix_power(g, p), compute_uv=False)
    assert direct[-1] > 0


def test_opposition_involution_examples():
    assert_allclose(opposition_involution([3, 1, 0, -4]), [4, 0, -1, -3])
    assert_allclose(opposition_involution([2.5, -2.5]), [2.5, -2.5])


@given(zero_sum)
def test_opposition_is_involution(v):
    assert_array_equal(opposition_involution(opposition_involution(v)), v)


def test_p_theta_examples():
    assert_allclose(p_theta((1, 3), [3, 1, 0, -4]), [3, 0.5, 0.5, -4])
    assert_allclose(p_theta((1, 2, 3), [3, 1, 0, -4]), [3, 1, 0, -4])
    assert theta_blocks((1, 3), 4) == [[0], [1, 2], [3]]


@settings(max_examples=50)
@given(st.lists(st.floats(-20, 20), min_size=4, max_size=4), st.sets(st.integers(1, 3), min_size=1))
def test_p_theta_properties(x, theta):
    v = np.array(x) - np.mean(x)
    p = p_theta(theta, v)
    assert_allclose(p_theta(theta, p), p, atol=1e-12)
    assert np.linalg.norm(p) <= np.linalg.norm(v) + 1e-9
    for w in weyl_subgroup(theta, 4):
        # W_theta is generated by reflections in roots outside theta
        assert_allclose(p_theta(theta, w(v)), p, atol=1e-9)


def test_roots_and_weights():
    v = [3, 1, 0, -4]
    assert simple_root(2, v) == 1
    assert two_rho(v) == 22
    assert fundamental_weight(2, v) == 4
    with pytest.raises(InvalidInputError):
        simple_root(4, v)
    with pytest.raises(InvalidInputError):
        fundamental_weight(0, v)


def test_linear_form_constructors_match_functions():
    v = np.array([3.0, 1.0, 0.0, -4.0])
    assert LinearForm.simple_root(2, 4)(v) == simple_root(2, v)
    assert LinearForm.two_rho(4)(v) == two_rho(v)
    assert LinearForm.fundamental_weight(2, 4)(v) == fundamental_weight(2, v)
    assert LinearForm.coordinate(1, 4)(v) == 3.0
    assert LinearForm.simple_root(1, 4).opposite() == LinearForm.simple_root(3, 4)
    assert LinearForm.fundamental_weight(2, 4).is_theta_form((2,))
    assert not LinearForm.simple_root(2, 4).is_theta_form((2,))


def test_linear_form_compose_with_weyl():
    rng = np.random.default_rng(2)
    phi = LinearForm(rng.standard_normal(4))
    w = WeylElement((2, 0, 3, 1))
    for v in rng.standard_normal((10, 4)):
        assert phi.compose(w)(v) == pytest.approx(phi(w(v)))


def test_fold_examples():
    v, w = fold_to_chamber([1, -3, 2, 0])
    assert_array_equal(v, [2, 1, 0, -3])
    assert_array_equal(w([1, -3, 2, 0]), v)
    v2, w2 = fold_to_chamber([3, 1, 0, -4])
    assert w2.is_identity
    assert_array_equal(v2, [3, 1, 0, -4])


@given(zero_sum, st.randoms(use_true_random=False))
def test_weyl_action_properties(v, rnd):
    perm = list(range(len(v)))
    rnd.shuffle(perm)
    w = WeylElement(tuple(perm))
    wv = weyl_action(w, v)
    assert np.linalg.norm(wv) == pytest.approx(np.linalg.norm(v))
    assert_array_equal(fold_to_chamber(wv)[0], fold_to_chamber(v)[0])
    assert_allclose((w * w.inverse())(v), v)
    assert in_chamber(fold_to_chamber(v)[0])


def test_weyl_group_composition_and_reflections():
    s1 = wall_reflection(1, 3)
    s2 = wall_reflection(2, 3)
    assert (s1 * s1).is_identity
    assert ((s1 * s2) * (s1 * s2) * (s1 * s2)).is_identity
    assert len(weyl_subgroup((1,), 4)) == math.factorial(3) * 1
    assert len(weyl_subgroup((2,), 4)) == 2 * 2
    assert len(weyl_subgroup((1, 2, 3), 4)) == 1


def test_theta_helpers():
    assert normalize_theta([3, 1, 1], 4) == (1, 3)
    assert opposite_theta((1,), 4) == (1, 3)
    with pytest.raises(InvalidInputError):
        normalize_theta([], 4)
    with pytest.raises(InvalidInputError):
        normalize_theta([4], 4)
