import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from bdris import tensor_core as tc
from bdris.design import DesignConfig, build_training_design
from bdris.errors import DegenerateInputError, DimensionError


def crand(rng, *shape):
    return rng.standard_normal(shape) + 1j * rng.standard_normal(shape)


dims = st.integers(min_value=1, max_value=5)


# --- vec / unvec ---------------------------------------------------------

def test_vec_column_major():
    np.testing.assert_array_equal(tc.vec(np.array([[1, 3], [2, 4]])), [1, 2, 3, 4])
    np.testing.assert_array_equal(tc.vec(np.array([[7j]])), [7j])


def test_unvec_examples():
    np.testing.assert_array_equal(tc.unvec(np.array([1, 2, 3, 4]), 2, 2), [[1, 3], [2, 4]])
    v = np.arange(5.0)
    np.testing.assert_array_equal(tc.unvec(v, 5, 1)[:, 0], v)
    with pytest.raises(DimensionError):
        tc.unvec(np.array([1, 2, 3]), 2, 2)


@given(dims, dims, st.integers(0, 2**32 - 1))
def test_vec_unvec_roundtrip(I, J, seed):
    M = crand(np.random.default_rng(seed), I, J)
    v = tc.vec(M)
    assert v.shape == (I * J,)
    # element (i + j*rows) is M[i, j]
    assert v[(I - 1) + (J - 1) * I] == M[I - 1, J - 1]
    np.testing.assert_array_equal(tc.unvec(v, I, J), M)


# --- Kronecker family ----------------------------------------------------

def test_kron_examples():
    A = crand(np.random.default_rng(1), 3, 2)
    np.testing.assert_array_equal(tc.kron(A, np.eye(1)), A)
    np.testing.assert_array_equal(tc.kron(np.array([[1], [2]]), np.array([[1], [0]]))[:, 0], [1, 0, 2, 0])


@given(dims, dims, dims, dims, st.integers(0, 2**32 - 1))
def test_kron_index_formula(ra, ca, rb, cb, seed):
    rng = np.random.default_rng(seed)
    A, B = crand(rng, ra, ca), crand(rng, rb, cb)
    K = tc.kron(A, B)
    assert K.shape == (ra * rb, ca * cb)
    iA, jA, iB, jB = ra - 1, 0, rb - 1, cb - 1
    assert K[iA * rb + iB, jA * cb + jB] == pytest.approx(A[iA, jA] * B[iB, jB])


def test_block_kron_single_block_and_khatri_rao():
    rng = np.random.default_rng(2)
    H, G = crand(rng, 2, 3), crand(rng, 4, 3)
    np.testing.assert_allclose(tc.block_kron(H, G, 1), np.kron(H, G))
    kr = tc.block_kron(H, G, 3)
    np.testing.assert_allclose(kr, tc.khatri_rao(H, G))
    for j in range(3):
        np.testing.assert_allclose(kr[:, j], np.kron(H[:, j], G[:, j]))


def test_block_kron_blocks():
    rng = np.random.default_rng(3)
    H, G, Q = crand(rng, 2, 6), crand(rng, 3, 6), 3
    T = tc.block_kron(H, G, Q)
    assert T.shape == (6, 3 * 4)
    for q in range(Q):
        np.testing.assert_allclose(T[:, 4 * q : 4 * q + 4], np.kron(H[:, 2 * q : 2 * q + 2], G[:, 2 * q : 2 * q + 2]))
    with pytest.raises(DimensionError):
        tc.block_kron(H, G, 4)


# --- unfold / fold / n-mode product ---------------------------------------

@pytest.fixture
def T_example():
    T = np.empty((2, 2, 2))
    T[:, :, 0] = [[1, 2], [3, 4]]
    T[:, :, 1] = [[5, 6], [7, 8]]
    return T


def test_unfold_examples(T_example):
    np.testing.assert_array_equal(tc.unfold(T_example, 1), [[1, 2, 5, 6], [3, 4, 7, 8]])
    np.testing.assert_array_equal(tc.unfold(T_example, 3), [[1, 3, 2, 4], [5, 7, 6, 8]])
    np.testing.assert_array_equal(tc.fold(tc.unfold(T_example, 3), 3, (2, 2, 2)), T_example)
    single = np.arange(6.0).reshape(2, 3, 1)
    np.testing.assert_array_equal(tc.unfold(single, 1), single[:, :, 0])
    assert tc.fold(np.array([[3.0]]), 2, (1, 1, 1)).shape == (1, 1, 1)
    with pytest.raises(ValueError):
        tc.unfold(T_example, 4)


def test_unfold_2_slices_transposed(T_example):
    # mode 2 stacks the transposed frontal slices side by side
    np.testing.assert_array_equal(tc.unfold(T_example, 2), np.hstack([T_example[:, :, 0].T, T_example[:, :, 1].T]))


@given(dims, dims, dims, st.sampled_from([1, 2, 3]), st.integers(0, 2**32 - 1))
def test_fold_unfold_roundtrip(a, b, c, n, seed):
    T = crand(np.random.default_rng(seed), a, b, c)
    M = tc.unfold(T, n)
    assert M.shape[0] == T.shape[n - 1]
    np.testing.assert_array_equal(tc.fold(M, n, T.shape), T)


def test_n_mode_product():
    np.testing.assert_array_equal(tc.n_mode_product(np.array([[[2.0]]]), np.array([[3.0]]), 1), [[[6.0]]])
    rng = np.random.default_rng(4)
    T = crand(rng, 3, 4, 5)
    for n in (1, 2, 3):
        A = crand(rng, 2, T.shape[n - 1])
        out = tc.n_mode_product(T, A, n)
        np.testing.assert_allclose(tc.unfold(out, n), A @ tc.unfold(T, n))
    # mode-1 product acts slice by slice
    A = crand(rng, 2, 3)
    out = tc.n_mode_product(T, A, 1)
    np.testing.assert_allclose(out[:, :, 2], A @ T[:, :, 2])


# --- permutation P -------------------------------------------------------

def test_permutation_examples():
    np.testing.assert_array_equal(tc.permutation_P(3, 1, 1), np.eye(3))
    expected = np.eye(4)[:, [0, 2, 1, 3]]
    np.testing.assert_array_equal(tc.permutation_P(1, 2, 2), expected)


@pytest.mark.parametrize("Nbar,Q,K", [(2, 2, 8), (1, 4, 5), (3, 2, 18), (2, 3, 12)])
def test_permutation_identities(Nbar, Q, K):
    P = tc.permutation_P(Nbar, Q, K)
    assert P.shape == (K * Q * Nbar, K * Q * Nbar)
    np.testing.assert_array_equal(P.T @ P, np.eye(P.shape[0]))
    rng = np.random.default_rng(K)
    H = crand(rng, 3, Nbar * Q)
    Ibar = np.tile(np.eye(K), (1, Q))
    np.testing.assert_allclose(tc.block_kron(Ibar, H, Q), np.kron(np.eye(K), H) @ P, atol=1e-13)


# --- pinv ---------------------------------------------------------------

@given(st.integers(1, 6), st.integers(1, 6), st.integers(0, 2**32 - 1))
@settings(max_examples=40)
def test_pinv_penrose(m, n, seed):
    M = crand(np.random.default_rng(seed), m, n)
    X = tc.pinv(M)
    tol = 1e-9
    np.testing.assert_allclose(M @ X @ M, M, atol=tol)
    np.testing.assert_allclose(X @ M @ X, X, atol=tol)
    np.testing.assert_allclose((M @ X).conj().T, M @ X, atol=tol)
    np.testing.assert_allclose((X @ M).conj().T, X @ M, atol=tol)


def test_pinv_rank_deficient():
    u = np.array([[1.0], [2.0], [0.0]])
    M = u @ u.T
    np.testing.assert_allclose(M @ tc.pinv(M) @ M, M, atol=1e-12)


# --- rank-one approximation ---------------------------------------------

def _power_iteration(M, iters=500):
    v = np.ones(M.shape[1], dtype=complex)
    for _ in range(iters):
        v = M.conj().T @ (M @ v)
        v /= np.linalg.norm(v)
    return np.linalg.norm(M @ v)


def test_rank_one_exact_input():
    rng = np.random.default_rng(5)
    g, h = crand(rng, 4), crand(rng, 3)
    u, s, v = tc.rank_one_approx(np.outer(g, h))
    assert s == pytest.approx(np.linalg.norm(g) * np.linalg.norm(h))
    assert abs(abs(np.vdot(u, g)) - np.linalg.norm(g)) < 1e-10
    assert abs(abs(np.vdot(v, h.conj())) - np.linalg.norm(h)) < 1e-10
    np.testing.assert_allclose(s * np.outer(u, v.conj()), np.outer(g, h), atol=1e-12)


def test_rank_one_identity():
    u, s, v = tc.rank_one_approx(np.eye(2))
    assert s == pytest.approx(1.0)
    assert np.linalg.norm(np.eye(2) - s * np.outer(u, v.conj())) == pytest.approx(1.0)


def test_rank_one_phase_convention():
    rng = np.random.default_rng(6)
    u, s, v = tc.rank_one_approx(crand(rng, 5, 4))
    first = u[np.flatnonzero(np.abs(u) > 0)[0]]
    assert abs(first.imag) < 1e-14 and first.real > 0
    assert np.linalg.norm(u) == pytest.approx(1.0)
    assert np.linalg.norm(v) == pytest.approx(1.0)


def test_rank_one_matches_power_iteration():
    rng = np.random.default_rng(7)
    M = crand(rng, 6, 4)
    _, s, _ = tc.rank_one_approx(M)
    assert s == pytest.approx(_power_iteration(M), rel=1e-10)


def test_rank_one_zero_raises():
    with pytest.raises(DegenerateInputError):
        tc.rank_one_approx(np.zeros((3, 2)))


# --- Kronecker rearrangement --------------------------------------------

@given(st.integers(1, 3), st.integers(1, 3), st.integers(1, 3), st.integers(0, 2**32 - 1))
@settings(max_examples=30)
def test_kron_rearrange_rank_one(M_R, M_T, Nbar, seed):
    rng = np.random.default_rng(seed)
    H, G = crand(rng, M_T, Nbar), crand(rng, M_R, Nbar)
    Zbar = tc.kron_rearrange(np.kron(H, G), M_R, M_T, Nbar)
    assert Zbar.shape == (M_R * Nbar, M_T * Nbar)
    np.testing.assert_allclose(Zbar, np.outer(tc.vec(G), tc.vec(H)), atol=1e-12)
    assert np.linalg.matrix_rank(Zbar) == 1
    np.testing.assert_allclose(tc.kron_unrearrange(Zbar, M_R, M_T, Nbar), np.kron(H, G), atol=1e-12)


def test_kron_rearrange_scalar():
    np.testing.assert_array_equal(tc.kron_rearrange(np.array([[3 + 1j]]), 1, 1, 1), [[3 + 1j]])


def test_nearest_kronecker_tail_energy():
    rng = np.random.default_rng(8)
    Z = crand(rng, 4, 4)
    Zbar = tc.kron_rearrange(Z, 2, 2, 2)
    u, s, v = tc.rank_one_approx(Zbar)
    approx = tc.kron_unrearrange(s * np.outer(u, v.conj()), 2, 2, 2)
    sv = np.linalg.svd(Zbar, compute_uv=False)
    assert abs(np.linalg.norm(Z - approx) ** 2 - np.sum(sv[1:] ** 2)) < 1e-10


def test_blkdiag():
    A, B = np.ones((1, 2)), 2 * np.ones((2, 1))
    out = tc.blkdiag(A, B)
    assert out.shape == (3, 3)
    np.testing.assert_array_equal(out[1:, 2], [2, 2])
    assert out[0, 2] == 0


def test_unfolding_against_design():
    # S_n == unfold(S_full, n) @ P for the block-diagonal stacked tensor
    d = build_training_design(DesignConfig(2, 3, 12, rotated=True, seed=1))
    P = tc.permutation_P(2, 3, 12)
    np.testing.assert_allclose(tc.unfold(d.full_tensor, 1) @ P, d.S1, atol=1e-14)
    np.testing.assert_allclose(tc.unfold(d.full_tensor, 2) @ P, d.S2, atol=1e-14)
