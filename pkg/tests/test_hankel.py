import numpy as np
import pytest

from expofill.hankel import (
    HankelShape,
    antidiagonal_weights,
    column_embed,
    column_extract,
    combined_weight_matrix,
    hankel_adjoint,
    hankel_embed,
    hankel_operator_matrix,
)


def rand_c(rng, *shape):
    return rng.standard_normal(shape) + 1j * rng.standard_normal(shape)


class TestHankelShape:
    def test_near_square(self):
        assert HankelShape.near_square(15) == HankelShape(8, 8)
        assert HankelShape.near_square(16) == HankelShape(9, 8)
        assert HankelShape.near_square(1) == HankelShape(1, 1)

    def test_length(self):
        assert HankelShape(3, 4).length == 6

    def test_invalid(self):
        with pytest.raises(ValueError):
            HankelShape(0, 3)


class TestEmbed:
    def test_small(self):
        h = hankel_embed(np.array([1.0, 2.0, 3.0]), HankelShape(2, 2))
        assert np.array_equal(h, [[1, 2], [2, 3]])

    def test_singleton(self):
        h = hankel_embed(np.array([2 + 1j]), HankelShape(1, 1))
        assert np.array_equal(h, [[2 + 1j]])

    def test_entries_match_index_formula(self):
        rng = np.random.default_rng(0)
        x = rand_c(rng, 7)
        h = hankel_embed(x, HankelShape(4, 4))
        for i in range(4):
            for j in range(4):
                assert h[i, j] == x[i + j]
        # every anti-diagonal is constant
        for k in range(7):
            vals = [h[i, k - i] for i in range(4) if 0 <= k - i < 4]
            assert len(set(vals)) == 1

    def test_shape_mismatch(self):
        with pytest.raises(ValueError):
            hankel_embed(np.ones(5), HankelShape(2, 2))

    def test_adjoint_small(self):
        m = np.array([[1.0, 2.0], [3.0, 4.0]])
        assert np.array_equal(hankel_adjoint(m), [1, 5, 4])
        assert np.array_equal(hankel_adjoint(np.array([[5j]])), [5j])

    def test_adjoint_identity(self):
        rng = np.random.default_rng(1)
        for _ in range(120):
            length = int(rng.integers(1, 25))
            s1 = int(rng.integers(1, length + 1))
            shape = HankelShape(s1, length + 1 - s1)
            x = rand_c(rng, length)
            m = rand_c(rng, shape.s1, shape.s2)
            lhs = np.vdot(m, hankel_embed(x, shape))
            rhs = np.vdot(hankel_adjoint(m), x)
            assert abs(lhs - rhs) <= 1e-12 * max(abs(lhs), 1.0)

    def test_operator_matrix_consistent(self):
        rng = np.random.default_rng(2)
        shape = HankelShape(3, 5)
        op = hankel_operator_matrix(shape)
        x = rand_c(rng, 7)
        assert np.allclose((op @ x).reshape(3, 5), hankel_embed(x, shape))


class TestWeights:
    def test_square_2x2(self):
        assert np.array_equal(
            antidiagonal_weights(HankelShape(2, 2)), [1, 2, 1])

    def test_row_shape_all_ones(self):
        assert np.array_equal(
            antidiagonal_weights(HankelShape(1, 6)), np.ones(6))

    def test_matches_counting_loop(self):
        for s1, s2 in [(3, 4), (5, 2), (4, 4), (1, 1), (6, 3)]:
            shape = HankelShape(s1, s2)
            counts = np.zeros(shape.length)
            for i in range(s1):
                for j in range(s2):
                    counts[i + j] += 1
            assert np.array_equal(antidiagonal_weights(shape), counts)

    def test_diagonal_composition(self):
        rng = np.random.default_rng(3)
        for _ in range(30):
            length = int(rng.integers(1, 20))
            s1 = int(rng.integers(1, length + 1))
            shape = HankelShape(s1, length + 1 - s1)
            x = rand_c(rng, length)
            w = antidiagonal_weights(shape)
            got = hankel_adjoint(hankel_embed(x, shape))
            assert np.abs(got - w * x).max() <= 1e-12 * np.abs(w * x).max()


class TestColumns:
    def test_extract(self):
        assert np.array_equal(column_extract(np.eye(2), 0), [1, 0])

    def test_embed_zeroes_other_columns(self):
        rng = np.random.default_rng(4)
        m = rand_c(rng, 4, 3)
        proj = column_embed(column_extract(m, 1), 1, 3)
        assert np.array_equal(proj[:, 1], m[:, 1])
        assert np.all(proj[:, [0, 2]] == 0)

    def test_adjointness(self):
        rng = np.random.default_rng(5)
        for _ in range(120):
            n1 = int(rng.integers(1, 8))
            n2 = int(rng.integers(1, 8))
            r = int(rng.integers(0, n2))
            m = rand_c(rng, n1, n2)
            v = rand_c(rng, n1)
            lhs = np.vdot(v, column_extract(m, r))
            rhs = np.vdot(column_embed(v, r, n2), m)
            assert abs(lhs - rhs) <= 1e-12 * max(abs(lhs), 1.0)

    def test_out_of_range(self):
        with pytest.raises(ValueError):
            column_extract(np.eye(2), 2)
        with pytest.raises(ValueError):
            column_embed(np.ones(2), 3, 3)


class TestCombinedWeights:
    def test_small(self):
        c = combined_weight_matrix(3, 2, HankelShape(2, 2))
        assert np.array_equal(c, [[1, 1], [2, 2], [1, 1]])

    def test_single_column_is_weights(self):
        shape = HankelShape(4, 3)
        c = combined_weight_matrix(6, 1, shape)
        assert np.array_equal(c[:, 0], antidiagonal_weights(shape))

    def test_operator_composition_identity(self):
        rng = np.random.default_rng(6)
        for _ in range(25):
            length = int(rng.integers(1, 15))
            s1 = int(rng.integers(1, length + 1))
            shape = HankelShape(s1, length + 1 - s1)
            r = int(rng.integers(1, 7))
            x = rand_c(rng, length, r)
            acc = np.zeros_like(x)
            for j in range(r):
                acc += column_embed(
                    hankel_adjoint(hankel_embed(column_extract(x, j), shape)),
                    j, r)
            c = combined_weight_matrix(length, r, shape)
            assert np.abs(acc - c * x).max() <= 1e-12 * np.abs(c * x).max()

    def test_shape_mismatch(self):
        with pytest.raises(ValueError):
            combined_weight_matrix(5, 2, HankelShape(2, 2))


def test_single_exponential_is_rank_one():
    rng = np.random.default_rng(7)
    for _ in range(10):
        f = rng.random()
        tau = 10 + 30 * rng.random()
        z = np.exp(-1.0 / tau + 2j * np.pi * f)
        length = int(rng.integers(8, 24))
        vec = z ** np.arange(length)
        h = hankel_embed(vec, HankelShape.near_square(length))
        s = np.linalg.svd(h, compute_uv=False)
        assert s[1] <= 1e-10 * s[0]
