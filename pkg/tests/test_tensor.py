import itertools

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from tensor_sandwich import (
    CPModel,
    PreconditionError,
    StructuralError,
    add_noise_snr,
    coherence,
    cp_to_dense,
    fold3,
    generate_synthetic,
    khatri_rao,
    kruskal_rank_at_least_2,
    relative_error,
    unfold3,
    vec_slice,
)


def triple_loop(A, B, C):
    n1, n2, n3 = A.shape[0], B.shape[0], C.shape[0]
    out = np.zeros((n1, n2, n3))
    for h in range(n1):
        for j in range(n2):
            for k in range(n3):
                out[h, j, k] = sum(A[h, i] * B[j, i] * C[k, i] for i in range(A.shape[1]))
    return out


def random_model(rng, n1, n2, n3, r):
    return CPModel(rng.standard_normal((n1, r)), rng.standard_normal((n2, r)),
                   rng.standard_normal((n3, r)))


class TestCPToDense:
    def test_rank_one_indicator(self):
        e = np.array([[1.0], [0.0]])
        t = cp_to_dense(CPModel(e, e, e))
        expected = np.zeros((2, 2, 2))
        expected[0, 0, 0] = 1.0
        np.testing.assert_array_equal(t, expected)

    def test_cancellation(self):
        rng = np.random.default_rng(0)
        a, b, c = (rng.standard_normal((3, 1)) for _ in range(3))
        model = CPModel(np.hstack([a, a]), np.hstack([b, b]), np.hstack([c, -c]))
        np.testing.assert_allclose(cp_to_dense(model), 0.0, atol=1e-15)

    def test_matches_triple_loop_all_small_shapes(self):
        rng = np.random.default_rng(1)
        for n1, n2, n3 in itertools.product(range(1, 6), repeat=3):
            r = int(rng.integers(1, 4))
            m = random_model(rng, n1, n2, n3, r)
            np.testing.assert_allclose(cp_to_dense(m), triple_loop(m.A, m.B, m.C),
                                       rtol=0, atol=1e-12)

    def test_mismatched_ranks(self):
        with pytest.raises(StructuralError):
            CPModel(np.ones((2, 2)), np.ones((2, 3)), np.ones((2, 2)))

    def test_model_is_immutable(self):
        m = CPModel(np.ones((2, 1)), np.ones((2, 1)), np.ones((2, 1)))
        with pytest.raises(ValueError):
            m.A[0, 0] = 5.0


class TestKhatriRao:
    def test_identity_factors(self):
        I = np.eye(2)
        K = khatri_rao(I, I)
        np.testing.assert_array_equal(K[:, 0], [1, 0, 0, 0])
        np.testing.assert_array_equal(K[:, 1], [0, 0, 0, 1])

    def test_single_column_follows_vec_ordering(self):
        # row q = i + n1*j holds a_i * b_j
        K = khatri_rao(np.array([[1.0], [2.0]]), np.array([[3.0], [4.0]]))
        expected = [1 * 3, 2 * 3, 1 * 4, 2 * 4]
        np.testing.assert_array_equal(K[:, 0], expected)

    def test_rows_against_explicit_pairs(self):
        rng = np.random.default_rng(2)
        A, B = rng.standard_normal((3, 2)), rng.standard_normal((4, 2))
        K = khatri_rao(A, B)
        for i in range(3):
            for j in range(4):
                np.testing.assert_allclose(K[i + 3 * j], A[i] * B[j])

    def test_column_mismatch(self):
        with pytest.raises(StructuralError):
            khatri_rao(np.ones((2, 2)), np.ones((2, 3)))


class TestUnfold:
    def test_scalar(self):
        np.testing.assert_array_equal(unfold3(np.full((1, 1, 1), 5.0)), [[5.0]])

    def test_rows_are_vectorized_slices(self):
        t = np.random.default_rng(3).standard_normal((2, 3, 4))
        U = unfold3(t)
        for k in range(4):
            flat = [t[i, j, k] for j in range(3) for i in range(2)]
            np.testing.assert_array_equal(U[k], flat)
            np.testing.assert_array_equal(U[k], vec_slice(t[:, :, k]))

    def test_fold_roundtrip(self):
        t = np.random.default_rng(4).standard_normal((3, 2, 5))
        np.testing.assert_array_equal(fold3(unfold3(t), t.shape), t)

    def test_cp_identity(self):
        m = random_model(np.random.default_rng(5), 3, 3, 3, 2)
        np.testing.assert_allclose(unfold3(cp_to_dense(m)), m.C @ khatri_rao(m.A, m.B).T,
                                   atol=1e-12)

    @settings(max_examples=60, deadline=None)
    @given(st.integers(1, 5), st.integers(1, 5), st.integers(1, 5), st.integers(1, 3),
           st.integers(0, 2**31))
    def test_cp_identity_property(self, n1, n2, n3, r, seed):
        m = random_model(np.random.default_rng(seed), n1, n2, n3, r)
        np.testing.assert_allclose(unfold3(cp_to_dense(m)), m.C @ khatri_rao(m.A, m.B).T,
                                   rtol=0, atol=1e-12)


class TestCoherence:
    def test_maximally_coherent(self):
        assert coherence(np.eye(8)[:, :2]) == pytest.approx(4.0)

    def test_flat_vector(self):
        assert coherence(np.full((4, 1), 0.5)) == pytest.approx(1.0)

    def test_random_basis_matches_projector(self):
        Q, _ = np.linalg.qr(np.random.default_rng(6).standard_normal((50, 5)))
        P = Q @ Q.T
        direct = (50 / 5) * max(np.linalg.norm(P @ np.eye(50)[:, i]) ** 2 for i in range(50))
        mu = coherence(Q)
        assert mu == pytest.approx(direct, rel=1e-12)
        assert 1.0 <= mu <= 10.0

    def test_rejects_non_orthonormal(self):
        with pytest.raises(PreconditionError):
            coherence(np.ones((4, 2)))

    @settings(max_examples=40, deadline=None)
    @given(st.integers(1, 30), st.integers(1, 30), st.integers(0, 2**31))
    def test_bounds(self, n, r, seed):
        r = min(r, n)
        Q, _ = np.linalg.qr(np.random.default_rng(seed).standard_normal((n, r)))
        mu = coherence(Q)
        assert 1.0 - 1e-12 <= mu <= n / r + 1e-12


def pairwise_rank_oracle(M):
    for a, b in itertools.combinations(range(M.shape[1]), 2):
        sv = np.linalg.svd(M[:, [a, b]], compute_uv=False)
        if sv[-1] <= 1e-10 * max(sv[0], 1e-300):
            return False
    return bool(np.all(np.linalg.norm(M, axis=0) > 0))


class TestKruskal:
    def test_parallel(self):
        assert not kruskal_rank_at_least_2(np.ones((2, 2)))

    def test_identity(self):
        assert kruskal_rank_at_least_2(np.eye(2))

    def test_zero_column(self):
        assert not kruskal_rank_at_least_2(np.array([[1.0, 0.0], [2.0, 0.0]]))

    def test_gaussian_trials(self):
        for seed in range(100):
            M = np.random.default_rng(seed).standard_normal((2, 5))
            assert kruskal_rank_at_least_2(M)
            assert pairwise_rank_oracle(M)

    def test_agrees_with_pairwise_svd(self):
        rng = np.random.default_rng(7)
        for _ in range(50):
            M = rng.integers(-2, 3, size=(2, 4)).astype(float)
            if np.all(np.linalg.norm(M, axis=0) > 0):
                assert kruskal_rank_at_least_2(M) == pairwise_rank_oracle(M)

    def test_needs_two_rows(self):
        with pytest.raises(PreconditionError):
            kruskal_rank_at_least_2(np.ones((1, 3)))


class TestSynthetic:
    def test_deterministic(self):
        m1, t1 = generate_synthetic(10, 3, seed=42)
        m2, t2 = generate_synthetic(10, 3, seed=42)
        np.testing.assert_array_equal(m1.C, m2.C)
        np.testing.assert_array_equal(t1, t2)

    def test_unit_columns_equal_weights(self):
        m, _ = generate_synthetic(50, 3, seed=0, weights=np.ones(3))
        for F in (m.A, m.B, m.C):
            np.testing.assert_allclose(np.linalg.norm(F, axis=0), 1.0, atol=1e-12)

    def test_default_weights_mass_ratio(self):
        m, _ = generate_synthetic(20, 4, seed=1)
        mass = [np.linalg.norm(cp_to_dense(CPModel(m.A[:, [i]], m.B[:, [i]], m.C[:, [i]])))
                for i in range(4)]
        # ||w a o b o c||_F = w for unit vectors
        np.testing.assert_allclose(mass, 1.0 / np.arange(1, 5) ** 2, rtol=1e-12)
        assert mass[0] ** 2 / mass[3] ** 2 == pytest.approx(256.0)

    def test_rank_above_n(self):
        with pytest.raises(PreconditionError):
            generate_synthetic(3, 4, seed=0)

    def test_full_column_rank(self):
        for seed in range(20):
            m, _ = generate_synthetic(12, 6, seed=seed)
            for F in (m.A, m.B):
                assert np.linalg.svd(F, compute_uv=False)[-1] > 1e-8


class TestNoise:
    def test_infinite_snr_is_identity(self):
        _, t = generate_synthetic(6, 2, seed=0)
        np.testing.assert_array_equal(add_noise_snr(t, np.inf, seed=1), t)

    def test_exact_ratio(self):
        _, t = generate_synthetic(10, 2, seed=0)
        noisy = add_noise_snr(t, 20.0, seed=3)
        ratio = np.linalg.norm(noisy - t) / np.linalg.norm(t)
        assert abs(ratio - 1e-2) < 1e-12

    def test_seeds_differ_ratio_same(self):
        _, t = generate_synthetic(10, 2, seed=0)
        n1 = add_noise_snr(t, 30.0, seed=1) - t
        n2 = add_noise_snr(t, 30.0, seed=2) - t
        assert not np.allclose(n1, n2)
        assert np.linalg.norm(n1) == pytest.approx(np.linalg.norm(n2), rel=1e-12)

    def test_zero_tensor(self):
        with pytest.raises(PreconditionError):
            add_noise_snr(np.zeros((2, 2, 2)), 10.0, seed=0)


class TestRelativeError:
    def test_exact(self):
        _, t = generate_synthetic(5, 2, seed=0)
        assert relative_error(t, t) == 0.0

    def test_double(self):
        _, t = generate_synthetic(5, 2, seed=0)
        assert relative_error(2 * t, t) == pytest.approx(1.0, abs=1e-15)

    def test_constructed_perturbation(self):
        _, t = generate_synthetic(5, 2, seed=0)
        E = np.random.default_rng(9).standard_normal(t.shape)
        E *= 0.1 * np.linalg.norm(t) / np.linalg.norm(E)
        assert abs(relative_error(t + E, t) - 0.1) < 1e-12

    def test_shape_mismatch(self):
        with pytest.raises(StructuralError):
            relative_error(np.ones((2, 2, 2)), np.ones((2, 2, 3)))
