import numpy as np
import pytest

from iapg import (
    box_blur,
    dense,
    forward_difference,
    identity,
    op_norm_sq,
    op_sum,
    random_sparse,
    scaled,
    sparse_triplet,
)


def dense_of(op):
    """Materialize an operator column by column."""
    cols = [op.apply(e) for e in np.eye(op.cols)]
    return np.column_stack(cols)


def test_forward_difference_apply():
    A = forward_difference(3)
    assert A.shape == (2, 3)
    np.testing.assert_array_equal(A.apply([1.0, 2.0, 4.0]), [1.0, 2.0])
    np.testing.assert_array_equal(forward_difference(2).apply([0.0, 1.0]), [1.0])
    np.testing.assert_array_equal(forward_difference(5).apply(np.ones(5)), np.zeros(4))
    np.testing.assert_array_equal(forward_difference(4).apply([1.0, 3.0, 3.0, 0.0]), [2.0, 0.0, -3.0])


def test_forward_difference_adjoint():
    A = forward_difference(3)
    np.testing.assert_array_equal(A.apply_adjoint([1.0, 1.0]), [-1.0, 0.0, 1.0])


def test_forward_difference_needs_two_points():
    with pytest.raises(ValueError):
        forward_difference(1)


def test_identity_roundtrip():
    I = identity(4)
    x = np.array([1.0, 0.0, -2.0, 3.0])
    np.testing.assert_array_equal(I.apply(x), x)
    np.testing.assert_array_equal(I.apply_adjoint(x), x)


def test_dense_apply_and_adjoint():
    D = dense([[1.0, 2.0], [3.0, 4.0]])
    np.testing.assert_array_equal(D.apply([1.0, 1.0]), [3.0, 7.0])
    np.testing.assert_array_equal(D.apply_adjoint([1.0, 1.0]), [4.0, 6.0])


def test_dimension_mismatch_raises():
    A = forward_difference(4)
    with pytest.raises(ValueError):
        A.apply(np.zeros(3))
    with pytest.raises(ValueError):
        A.apply_adjoint(np.zeros(4))


def test_box_blur_examples():
    C = box_blur(5, 2)
    out = C.apply(np.ones(5))
    # t=3 (1-indexed) has w=2: five neighbours averaged with weight 1/4
    assert out[2] == pytest.approx(5.0 / 4.0)
    # w=0 boundary rows pass the sample through
    x = np.array([3.0, 1.0, 4.0, 1.0, 5.0])
    out = C.apply(x)
    assert out[0] == x[0]
    assert out[4] == x[4]
    out = box_blur(3, 1).apply(np.array([0.0, 3.0, 0.0]))
    assert out[1] == pytest.approx(3.0 / 2.0)


def test_box_blur_row_structure():
    n, l = 9, 3
    C = box_blur(n, l)
    M = dense_of(C)
    t = np.arange(1, n + 1)
    w = np.minimum(np.minimum(t - 1, l), n - t)
    for i in range(n):
        row = M[i]
        if w[i] == 0:
            expected = np.zeros(n)
            expected[i] = 1.0
            np.testing.assert_array_equal(row, expected)
        else:
            lo, hi = i - w[i], i + w[i]
            np.testing.assert_array_equal(row[lo : hi + 1], np.full(2 * w[i] + 1, 1.0 / (2 * w[i])))
            assert np.all(row[:lo] == 0) and np.all(row[hi + 1 :] == 0)
            # the paper's formula sums 2w+1 entries of weight 1/(2w)
            assert row.sum() == pytest.approx((2 * w[i] + 1) / (2 * w[i]), abs=1e-15)


def test_box_blur_range_check():
    with pytest.raises(ValueError):
        box_blur(5, 0)
    with pytest.raises(ValueError):
        box_blur(5, 6)


def test_random_sparse_deterministic():
    A1 = random_sparse(32, 16, seed=7)
    A2 = random_sparse(32, 16, seed=7)
    np.testing.assert_array_equal(dense_of(A1), dense_of(A2))
    A3 = random_sparse(32, 16, seed=8)
    assert not np.array_equal(dense_of(A1), dense_of(A3))


def test_random_sparse_values_in_unit_interval():
    M = dense_of(random_sparse(64, 64, seed=0))
    vals = M[M != 0]
    assert vals.size > 0
    assert np.all((vals >= 0) & (vals <= 1))


def test_random_sparse_density_concentration():
    # nnz ~ Binomial(mn, 1/sqrt(mn)): mean 128, sd ~ sqrt(128); nearly every
    # seed should land within three standard deviations
    target, sd = 128.0, np.sqrt(128.0)
    hits = 0
    for seed in range(200):
        A = random_sparse(128, 128, seed=seed)
        if abs(A.nnz - target) <= 3 * sd:
            hits += 1
    assert hits >= 190


def test_scaled_and_sum():
    D = dense([[1.0, 2.0], [3.0, 4.0]])
    S = scaled(D, -2.0)
    np.testing.assert_array_equal(S.apply([1.0, 1.0]), [-6.0, -14.0])
    np.testing.assert_array_equal(S.apply_adjoint([1.0, 0.0]), [-2.0, -4.0])
    T = op_sum(D, S)  # D - 2D = -D
    x = np.array([0.5, -1.5])
    np.testing.assert_array_equal(T.apply(x), D.apply(x) + S.apply(x))
    np.testing.assert_array_equal(T.apply_adjoint(x), D.apply_adjoint(x) + S.apply_adjoint(x))


def test_sum_shape_mismatch():
    with pytest.raises(ValueError):
        op_sum(identity(3), identity(4))


def _operator_zoo(rng):
    return [
        dense(rng.standard_normal((6, 4))),
        sparse_triplet(5, 7, [0, 2, 4, 2], [1, 3, 0, 3], [1.0, -2.0, 0.5, 4.0]),
        forward_difference(9),
        box_blur(9, 3),
        identity(6),
        scaled(forward_difference(7), 1.7),
        op_sum(random_sparse(8, 8, seed=3), identity(8)),
    ]


def test_adjoint_consistency():
    rng = np.random.default_rng(42)
    for op in _operator_zoo(rng):
        norm_sq = op_norm_sq(op)
        for _ in range(100):
            x = rng.standard_normal(op.cols)
            y = rng.standard_normal(op.rows)
            lhs = float(op.apply(x) @ y)
            rhs = float(x @ op.apply_adjoint(y))
            tol = 1e-10 * (1 + np.linalg.norm(x) * np.linalg.norm(y)) * max(1.0, norm_sq)
            assert abs(lhs - rhs) <= tol


def test_op_norm_sq_identity():
    assert op_norm_sq(identity(7)) == pytest.approx(1.0, rel=1e-8)


def test_op_norm_sq_single_row():
    assert op_norm_sq(dense([[-1.0, 1.0]])) == pytest.approx(2.0, rel=1e-8)


def test_op_norm_sq_matches_svd():
    A = forward_difference(16)
    exact = np.linalg.svd(dense_of(A), compute_uv=False)[0] ** 2
    assert op_norm_sq(A) == pytest.approx(exact, rel=0.01)
    assert op_norm_sq(A) <= 4.0 + 1e-12

    rng = np.random.default_rng(11)
    for _ in range(5):
        M = rng.standard_normal((12, 9))
        exact = np.linalg.svd(M, compute_uv=False)[0] ** 2
        assert op_norm_sq(dense(M)) == pytest.approx(exact, rel=0.01)


def test_op_norm_sq_zero_operator():
    assert op_norm_sq(dense(np.zeros((3, 3)))) == 0.0
