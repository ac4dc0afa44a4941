import numpy as np
import pytest
import scipy.linalg

from expofill.svt import complex_svd, nuclear_norm, soft_threshold_singular


def rand_c(rng, *shape):
    return rng.standard_normal(shape) + 1j * rng.standard_normal(shape)


def rand_unitary(rng, n):
    q, r = np.linalg.qr(rand_c(rng, n, n))
    return q * (np.diag(r) / np.abs(np.diag(r)))


def prox_objective(z, m, tau):
    return tau * nuclear_norm(z) + 0.5 * np.linalg.norm(z - m) ** 2


class TestComplexSvd:
    def test_diagonal(self):
        res = complex_svd(np.diag([3.0, 1.0]))
        assert np.allclose(res.sigma, [3.0, 1.0])

    def test_rank_one(self):
        rng = np.random.default_rng(0)
        u0 = rand_c(rng, 5)
        v0 = rand_c(rng, 4)
        u0 /= np.linalg.norm(u0)
        v0 /= np.linalg.norm(v0)
        res = complex_svd(2.0 * np.outer(u0, v0.conj()))
        assert res.sigma[0] == pytest.approx(2.0)
        assert np.allclose(res.sigma[1:], 0.0, atol=1e-12)

    def test_invariants(self):
        rng = np.random.default_rng(1)
        for _ in range(20):
            m = rand_c(rng, 6, 4)
            res = complex_svd(m)
            k = min(m.shape)
            assert np.all(np.diff(res.sigma) <= 0)
            assert np.allclose(res.u.conj().T @ res.u, np.eye(k), atol=1e-10)
            assert np.allclose(res.v.conj().T @ res.v, np.eye(k), atol=1e-10)
            rec = (res.u * res.sigma[None, :]) @ res.v.conj().T
            assert np.linalg.norm(rec - m) <= 1e-10 * np.linalg.norm(m)

    def test_sigma_matches_gram_eigenvalues(self):
        # independent oracle: eigenvalues of the Gram matrix
        rng = np.random.default_rng(2)
        m = rand_c(rng, 6, 4)
        res = complex_svd(m)
        eig = scipy.linalg.eigh(m.conj().T @ m, eigvals_only=True)[::-1]
        assert np.allclose(res.sigma, np.sqrt(np.maximum(eig, 0.0)),
                           rtol=1e-8, atol=1e-10)

    def test_nonfinite_rejected(self):
        with pytest.raises(ValueError):
            complex_svd(np.array([[np.nan, 0.0], [0.0, 1.0]]))


class TestSoftThreshold:
    def test_everything_below_tau_gives_zero(self):
        rng = np.random.default_rng(3)
        m = 0.01 * rand_c(rng, 3, 3)
        assert np.allclose(soft_threshold_singular(m, 10.0), 0.0)

    def test_rank_one_shrinks_exactly(self):
        rng = np.random.default_rng(4)
        u0 = rand_c(rng, 4)
        v0 = rand_c(rng, 4)
        u0 /= np.linalg.norm(u0)
        v0 /= np.linalg.norm(v0)
        m = 2.0 * np.outer(u0, v0.conj())
        z = soft_threshold_singular(m, 0.5)
        assert np.allclose(z, 1.5 * np.outer(u0, v0.conj()), atol=1e-12)

    def test_nonpositive_tau_rejected(self):
        with pytest.raises(ValueError):
            soft_threshold_singular(np.eye(2), 0.0)
        with pytest.raises(ValueError):
            soft_threshold_singular(np.eye(2), -1.0)

    def test_prox_beats_random_probes(self):
        rng = np.random.default_rng(5)
        tau = 0.3
        for _ in range(5):
            m = rand_c(rng, 3, 3)
            z = soft_threshold_singular(m, tau)
            obj0 = prox_objective(z, m, tau)
            probes = (z[None, :, :]
                      + rng.choice([1e-3, 1e-2, 0.1, 1.0], size=(1000, 1, 1))
                      * rand_c(rng, 1000, 3, 3))
            nucs = np.linalg.svd(probes, compute_uv=False).sum(axis=1)
            objs = tau * nucs + 0.5 * np.linalg.norm(
                probes - m[None, :, :], axis=(1, 2)) ** 2
            assert objs.min() >= obj0 - 1e-12 * max(1.0, obj0)

    def test_nonexpansive(self):
        rng = np.random.default_rng(6)
        for _ in range(100):
            a = rand_c(rng, 4, 5)
            b = rand_c(rng, 4, 5)
            tau = float(rng.random()) + 0.05
            lhs = np.linalg.norm(soft_threshold_singular(a, tau)
                                 - soft_threshold_singular(b, tau))
            assert lhs <= np.linalg.norm(a - b) * (1 + 1e-12)

    def test_zero_maps_to_zero(self):
        assert np.all(soft_threshold_singular(np.zeros((3, 2)), 0.7) == 0)

    def test_vanishing_tau_limit_is_identity(self):
        # the identity limit, probed at tiny tau since tau must be positive
        rng = np.random.default_rng(7)
        m = rand_c(rng, 4, 4)
        z = soft_threshold_singular(m, 1e-12)
        assert np.linalg.norm(z - m) <= 4 * 1e-12 + 1e-10 * np.linalg.norm(m)

    def test_unitary_invariance(self):
        rng = np.random.default_rng(8)
        for _ in range(10):
            a = rand_c(rng, 5, 5)
            q = rand_unitary(rng, 5)
            tau = 0.4
            lhs = nuclear_norm(soft_threshold_singular(q @ a, tau))
            rhs = nuclear_norm(soft_threshold_singular(a, tau))
            assert abs(lhs - rhs) <= 1e-10 * max(1.0, rhs)
