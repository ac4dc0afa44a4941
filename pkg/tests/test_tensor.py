import numpy as np
import pytest

from expofill.tensor import (
    CPFactors,
    SamplingMask,
    apply_mask,
    cp_synthesize,
    frobenius_norm,
    khatri_rao,
    khatri_rao_list,
    matricize_mask,
    mode_n_fold,
    mode_n_unfold,
)


def rand_c(rng, *shape):
    return rng.standard_normal(shape) + 1j * rng.standard_normal(shape)


def unfold_column_index(multi, dims, n):
    """Direct evaluation of the matricization column-index map: the first
    remaining index varies fastest."""
    j = 0
    stride = 1
    for k in range(len(dims)):
        if k == n:
            continue
        j += multi[k] * stride
        stride *= dims[k]
    return j


class TestCPSynthesize:
    def test_single_outer_product(self):
        f = CPFactors([np.array([[1.0], [2.0]]),
                       np.array([[1.0], [1j]])])
        expected = np.array([[1, 1j], [2, 2j]])
        assert np.allclose(cp_synthesize(f), expected)

    def test_zero_weights(self):
        rng = np.random.default_rng(0)
        f = CPFactors([rand_c(rng, 3, 2), rand_c(rng, 4, 2)],
                      weights=np.zeros(2))
        assert np.all(cp_synthesize(f) == 0)

    def test_matches_bruteforce_summation(self):
        rng = np.random.default_rng(1)
        dims = (5, 4, 5)
        r = 4
        factors = [rand_c(rng, d, r) for d in dims]
        weights = rand_c(rng, r)
        x = cp_synthesize(CPFactors(factors, weights))
        brute = np.zeros(dims, dtype=complex)
        for i in range(dims[0]):
            for j in range(dims[1]):
                for k in range(dims[2]):
                    brute[i, j, k] = sum(
                        weights[s] * factors[0][i, s] * factors[1][j, s]
                        * factors[2][k, s]
                        for s in range(r)
                    )
        assert np.abs(x - brute).max() <= 1e-12 * np.abs(brute).max()

    def test_mismatched_columns_rejected(self):
        with pytest.raises(ValueError):
            CPFactors([np.ones((3, 2)), np.ones((4, 3))])

    def test_one_way_tensor(self):
        f = CPFactors([np.array([[1.0, 2.0], [3.0, 4.0]])])
        assert np.allclose(cp_synthesize(f), [3.0, 7.0])


class TestUnfoldFold:
    def test_matrix_mode_one_is_identity(self):
        rng = np.random.default_rng(2)
        x = rand_c(rng, 3, 5)
        assert np.array_equal(mode_n_unfold(x, 0), x)

    def test_enumerated_index_map(self):
        # 2x2x2 with values 1..8 in canonical (first index fastest) order
        x = np.arange(1, 9, dtype=complex).reshape((2, 2, 2), order="F")
        m = mode_n_unfold(x, 1)
        assert m.shape == (2, 4)
        assert np.array_equal(m, np.array([[1, 2, 5, 6], [3, 4, 7, 8]]))
        # generic check against the index formula
        rng = np.random.default_rng(3)
        dims = (3, 4, 2, 3)
        y = rand_c(rng, *dims)
        for n in range(4):
            u = mode_n_unfold(y, n)
            for _ in range(30):
                multi = tuple(rng.integers(0, d) for d in dims)
                j = unfold_column_index(multi, dims, n)
                assert u[multi[n], j] == y[multi]

    def test_roundtrip(self):
        rng = np.random.default_rng(4)
        x = rand_c(rng, 3, 4, 5)
        for n in range(3):
            assert np.array_equal(
                mode_n_fold(mode_n_unfold(x, n), x.shape, n), x)

    def test_fold_then_unfold(self):
        rng = np.random.default_rng(5)
        dims = (4, 3, 5)
        for n in range(3):
            kn = 60 // dims[n]
            m = rand_c(rng, dims[n], kn)
            assert np.array_equal(mode_n_unfold(mode_n_fold(m, dims, n), n), m)

    def test_fold_1xk(self):
        m = np.arange(6, dtype=complex).reshape(1, 6)
        x = mode_n_fold(m, (1, 6), 0)
        assert np.array_equal(x.ravel(order="F"), m.ravel())

    def test_errors(self):
        x = np.zeros((2, 2))
        with pytest.raises(ValueError):
            mode_n_unfold(x, 2)
        with pytest.raises(ValueError):
            mode_n_fold(np.zeros((2, 3)), (2, 2), 0)


class TestKhatriRao:
    def test_single_columns(self):
        a = np.array([[1.0], [2.0]])
        b = np.array([[1.0], [3.0]])
        assert np.array_equal(khatri_rao(a, b).ravel(), [1, 3, 2, 6])

    def test_scalars(self):
        assert khatri_rao(np.array([[2.0]]), np.array([[3.0]]))[0, 0] == 6.0

    def test_column_mismatch(self):
        with pytest.raises(ValueError):
            khatri_rao(np.ones((2, 2)), np.ones((2, 3)))

    def test_unfolding_identity(self):
        rng = np.random.default_rng(6)
        dims = (4, 3, 5)
        r = 3
        factors = [rand_c(rng, d, r) for d in dims]
        x = cp_synthesize(CPFactors(factors))
        for n in range(3):
            mats = [factors[m] for m in reversed(range(3)) if m != n]
            pred = factors[n] @ khatri_rao_list(mats, rank=r).T
            got = mode_n_unfold(x, n)
            assert np.abs(pred - got).max() <= 1e-12 * np.abs(got).max()

    def test_empty_list_needs_rank(self):
        with pytest.raises(ValueError):
            khatri_rao_list([])
        assert khatri_rao_list([], rank=3).shape == (1, 3)


class TestSamplingMask:
    def test_indices_sorted_and_deduped(self):
        idx = [[1, 1], [0, 0], [1, 1], [2, 0]]
        m = SamplingMask((3, 2), idx)
        assert m.count == 3
        assert np.array_equal(np.sort(m.flat_indices), m.flat_indices)

    def test_out_of_range_rejected(self):
        with pytest.raises(ValueError):
            SamplingMask((2, 2), [[0, 2]])

    def test_full_mask_keeps_everything(self):
        rng = np.random.default_rng(7)
        x = rand_c(rng, 3, 4)
        omega = SamplingMask.full((3, 4))
        assert np.array_equal(apply_mask(x, omega), x)
        assert omega.sampling_ratio == 1.0

    def test_apply_mask_norm_bound(self):
        rng = np.random.default_rng(8)
        x = rand_c(rng, 4, 4, 4)
        flat = rng.permutation(64)[:20]
        omega = SamplingMask(
            (4, 4, 4),
            np.stack(np.unravel_index(flat, (4, 4, 4), order="F"), axis=1))
        assert frobenius_norm(apply_mask(x, omega)) <= frobenius_norm(x)

    def test_apply_mask_matches_indicator_loop(self):
        rng = np.random.default_rng(9)
        dims = (3, 4, 2)
        x = rand_c(rng, *dims)
        flat = rng.permutation(24)[:11]
        omega = SamplingMask(
            dims, np.stack(np.unravel_index(flat, dims, order="F"), axis=1))
        masked = apply_mask(x, omega)
        kept = {tuple(row) for row in omega.indices}
        for idx in np.ndindex(dims):
            expected = x[idx] if idx in kept else 0.0
            assert masked[idx] == expected

    def test_energy_partition(self):
        rng = np.random.default_rng(10)
        dims = (5, 3, 4)
        x = rand_c(rng, *dims)
        flat = rng.permutation(60)[:33]
        omega = SamplingMask(
            dims, np.stack(np.unravel_index(flat, dims, order="F"), axis=1))
        total = frobenius_norm(x) ** 2
        split = (frobenius_norm(apply_mask(x, omega)) ** 2
                 + frobenius_norm(apply_mask(x, omega.complement())) ** 2)
        assert abs(split - total) <= 1e-12 * total

    def test_dims_mismatch(self):
        with pytest.raises(ValueError):
            apply_mask(np.zeros((2, 2)), SamplingMask.full((2, 3)))


class TestMatricizeMask:
    def test_full_mask(self):
        omega = SamplingMask.full((3, 4, 2))
        for n in range(3):
            assert matricize_mask(omega, n).all()

    def test_commutes_with_unfolding(self):
        rng = np.random.default_rng(11)
        dims = (4, 3, 5)
        x = rand_c(rng, *dims)
        flat = rng.permutation(60)[:25]
        omega = SamplingMask(
            dims, np.stack(np.unravel_index(flat, dims, order="F"), axis=1))
        for n in range(3):
            lhs = mode_n_unfold(apply_mask(x, omega), n)
            rhs = np.where(matricize_mask(omega, n), mode_n_unfold(x, n), 0)
            assert np.array_equal(lhs, rhs)

    def test_singleton_maps_by_index_formula(self):
        dims = (3, 4, 5)
        multi = (1, 2, 3)
        omega = SamplingMask(dims, [multi])
        for n in range(3):
            m = matricize_mask(omega, n)
            assert m.sum() == 1
            j = unfold_column_index(multi, dims, n)
            assert m[multi[n], j]


class TestFrobeniusNorm:
    def test_zero(self):
        assert frobenius_norm(np.zeros((3, 3))) == 0.0

    def test_single_entry(self):
        assert frobenius_norm(np.array([3 + 4j])) == pytest.approx(5.0)

    def test_matches_accumulation_loop(self):
        rng = np.random.default_rng(12)
        x = rand_c(rng, 4, 3, 2)
        acc = 0.0
        for idx in np.ndindex(x.shape):
            acc += abs(x[idx]) ** 2
        assert frobenius_norm(x) == pytest.approx(np.sqrt(acc), rel=1e-12)
