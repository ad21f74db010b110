import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from aldc import CodeConfig
from aldc.constructions import basis_code, hypercube, random_code
from aldc.core import boundedness, density, is_simple, pair_lengths
from aldc.errors import EmptyCodeError, ParameterError, PreconditionError, UnsupportedQueryCountError
from aldc.reduction import (
    bucket_to_2bounded,
    default_k,
    dyadic_buckets,
    heavy_coordinates,
    reduce_to_simple,
    remove_heavy_pairs,
)

from helpers import planted_code


def test_heavy_coordinates_break_ties_by_index():
    pts = np.array([[1.0, 1.0, 1.0, 0.5], [0.0, -3.0, 2.0, 3.0]])
    mask = heavy_coordinates(pts, 3)
    assert mask[0].tolist() == [True, True, False, False]
    assert mask[1].tolist() == [False, True, False, True]


@settings(max_examples=50, deadline=None)
@given(arrays(np.float64, (6, 5), elements=st.floats(-5, 5, allow_nan=False)), st.integers(2, 8))
def test_heavy_coordinate_count_and_survivor_bound(pts, k):
    mask = heavy_coordinates(pts, k)
    assert np.all(mask.sum(axis=1) == min(k - 1, 5))
    # every light coordinate satisfies |x_i| <= ||x|| / sqrt(k)
    norms = np.linalg.norm(pts, axis=1, keepdims=True)
    light = ~mask
    assert np.all(np.abs(pts)[light] <= (norms / math.sqrt(k)).repeat(5, axis=1)[light] + 1e-12)


def test_remove_heavy_pairs_on_hypercube():
    cube = hypercube(4)
    out = remove_heavy_pairs(cube, 2)
    # point 2 is (0,1,0,0); its only heavy coordinate is 1
    assert all(2 not in t for t in out.matchings[1].tuples)
    assert any(2 in t for t in cube.matchings[1].tuples)
    assert cube.total_matched - out.total_matched <= 2 * cube.n


def test_remove_heavy_pairs_noop_when_matched_coordinates_are_light():
    pts = np.zeros((4, 6))
    pts[:, 4:] = 10.0  # the two dominant coordinates are never matched
    pts[:, 0] = [0.0, 1.0, 0.0, 1.0]
    pts[:, 1] = [0.0, 0.0, 1.0, 1.0]
    code = CodeConfig.build(pts, 2, {0: [(0, 1), (2, 3)], 1: [(0, 2), (1, 3)]})
    assert remove_heavy_pairs(code, 3) == code


def test_remove_heavy_pairs_total_removals_bounded():
    for s in range(50):
        code = random_code(8, 24, 2, 0.3, seed=s)
        k = int(np.random.default_rng(s).integers(2, 6))
        out = remove_heavy_pairs(code, k)
        assert code.total_matched - out.total_matched <= k * code.n


def test_remove_heavy_pairs_parameter_guard():
    with pytest.raises(ParameterError):
        remove_heavy_pairs(hypercube(2), 1)


def test_reduce_noop_steps_double_points():
    # unit vectors sharing two dominant unmatched coordinates; each pair spans e_0
    d, n = 6, 8
    pts = np.zeros((n, d))
    pts[:, 4], pts[:, 5] = 10.0, 9.0
    pts[:, 0] = np.linspace(0.1, 0.8, n)
    pts /= np.linalg.norm(pts, axis=1, keepdims=True)
    code = CodeConfig.build(pts, 2, {0: [(0, 7), (1, 6), (2, 5)]})
    alpha = 0.9
    out, tr = reduce_to_simple(code, alpha=alpha)
    assert tr.k == 3
    assert tr.pairs_removed_step1 == 0 and tr.zero_points_discarded == 0
    assert out.n == 2 * n and out.total_matched == 6
    assert tr.alpha_guaranteed == pytest.approx(math.sqrt(alpha**2 - 1 / 3))
    assert is_simple(out, tr.alpha_guaranteed)


def test_reduce_corollary_default_alpha_one():
    out, tr = reduce_to_simple(hypercube(4), k=2, alpha=1.0)
    assert tr.alpha_guaranteed == pytest.approx(1 / math.sqrt(2))
    assert is_simple(out, tr.alpha_guaranteed - 1e-9)
    assert default_k(1.0) == 2


def test_reduce_on_planted_codes():
    d = 20
    for s in range(10):
        alpha = float(np.random.default_rng(s).uniform(0.3, 0.9))
        code = planted_code(d, alpha, 50 + s)
        out, tr = reduce_to_simple(code, alpha=alpha)
        assert is_simple(out, math.sqrt(alpha**2 - 1 / tr.k) - 1e-9)
        assert density(out) >= density(code) - tr.k / d
        assert out.n <= 2 * code.n
        assert tr.pairs_removed_step1 <= tr.k * code.n
        assert len(tr.sign_choices) * 2 == out.total_matched


def test_reduce_output_is_antipodally_symmetric():
    code = planted_code(20, 0.5, 3)
    out, tr = reduce_to_simple(code, alpha=0.5)
    n0 = out.n // 2
    assert np.array_equal(out.points[n0:], -out.points[:n0])
    assert np.allclose(np.linalg.norm(out.points, axis=1), 1.0)


def test_reduce_errors():
    code = random_code(6, 12, 2, 0.3, seed=1)
    with pytest.raises(PreconditionError):
        reduce_to_simple(code, alpha=0.99)
    with pytest.raises(ParameterError):
        reduce_to_simple(hypercube(3), k=1, alpha=1.0)
    with pytest.raises(UnsupportedQueryCountError):
        reduce_to_simple(basis_code(3))


def test_reduce_warns_when_dimension_is_small():
    _, tr = reduce_to_simple(hypercube(3), alpha=1.0)
    assert not tr.corollary_hypothesis_ok and tr.warnings


def test_dyadic_buckets_boundaries():
    b, count = dyadic_buckets(np.array([1.0, 1.5, 2.0, 3.9, 4.0]))
    assert count == 2
    assert b.tolist() == [0, 0, 1, 1, 1]  # the top endpoint c joins the last bucket


def test_bucket_single_class_is_rescale():
    cube = hypercube(3).scaled(5.0)
    out = bucket_to_2bounded(cube)
    assert out.matchings == cube.matchings
    assert boundedness(out) == (1.0, 1.0)


def test_bucket_two_length_classes():
    # half the pairs at length 1.5, half at length 3
    pts = np.array([[0, 0], [1.5, 0], [0, 5], [1.5, 5], [10, 0], [13, 0], [10, 5], [13, 5]], dtype=float)
    code = CodeConfig.build(pts, 2, {0: [(0, 1), (2, 3), (4, 5), (6, 7)]})
    out = bucket_to_2bounded(code)
    # lengths are measured relative to the shortest pair, so 1.5 and 3 land in [1, 2]
    assert out.total_matched >= 2
    lo, hi = boundedness(out)
    assert 1.0 <= lo <= hi <= 2.0


def test_bucket_splits_classes_beyond_factor_two():
    pts = np.array([[0, 0], [1.5, 0], [0, 5], [1.5, 5], [10, 0], [14, 0], [10, 5], [14, 5], [20, 0], [24, 0]],
                   dtype=float)
    code = CodeConfig.build(pts, 2, {0: [(0, 1), (2, 3), (4, 5), (6, 7), (8, 9)]})
    out = bucket_to_2bounded(code)
    assert out.matchings[0].tuples == ((4, 5), (6, 7), (8, 9))
    # relative length 4/1.5 sits in bucket [2, 4), which is mapped onto [1, 2)
    assert boundedness(out) == pytest.approx((4 / 3, 4 / 3))


def test_bucket_output_is_two_bounded_and_dense_enough():
    for s in range(20):
        code = random_code(6, 30, 2, 0.2, seed=s)
        lengths = pair_lengths(code)
        c = lengths.max() / lengths.min()
        out = bucket_to_2bounded(code)
        lo, hi = boundedness(out)
        assert 1.0 - 1e-12 <= lo and hi <= 2.0 + 1e-12
        assert out.total_matched >= code.total_matched / max(1, math.ceil(math.log2(c))) - 1e-9


def test_bucket_empty_code():
    with pytest.raises(EmptyCodeError):
        bucket_to_2bounded(CodeConfig.build(np.eye(2), 2))
