"""Dense complex matrix and third-order tensor algebra.

Conventions used throughout the package:

* ``vec`` stacks columns (column-major / Fortran order).
* A third-order tensor is a plain ``(d1, d2, d3)`` ndarray; ``T[:, :, k]`` is
  its k-th frontal slice.
* Unfoldings follow the slice-based definitions::

      unfold(T, 1) = [T..1, ..., T..K]                  (d1 x d2*d3)
      unfold(T, 2) = [T..1^T, ..., T..K^T]              (d2 x d1*d3)
      unfold(T, 3) = [vec(T..1), ..., vec(T..K)]^T      (d3 x d1*d2)
"""

from __future__ import annotations

import numpy as np

from .errors import DegenerateInputError, DimensionError


def vec(M: np.ndarray) -> np.ndarray:
    """Stack the columns of ``M`` into a single vector."""
    return np.asarray(M).reshape(-1, order="F")


def unvec(v: np.ndarray, I: int, J: int) -> np.ndarray:
    """Inverse of :func:`vec`: reshape a length ``I*J`` vector into ``I x J``."""
    v = np.asarray(v)
    if v.size != I * J:
        raise DimensionError(f"cannot unvec length {v.size} into {I}x{J}")
    return v.reshape(I, J, order="F")


def kron(A: np.ndarray, B: np.ndarray) -> np.ndarray:
    return np.kron(np.atleast_2d(A), np.atleast_2d(B))


def block_kron(H: np.ndarray, G: np.ndarray, Q: int) -> np.ndarray:
    """Block Kronecker product ``[H1 (x) G1, ..., HQ (x) GQ]``.

    ``H`` and ``G`` are split into ``Q`` equal-width column blocks. The two
    block widths may differ (this is needed for products such as
    ``[I_K, ..., I_K] |x| H``); with width one for both operands the result is
    the Khatri-Rao product.
    """
    H = np.atleast_2d(H)
    G = np.atleast_2d(G)
    if Q < 1 or H.shape[1] % Q or G.shape[1] % Q:
        raise DimensionError(
            f"column counts {H.shape[1]} and {G.shape[1]} not divisible by Q={Q}"
        )
    Lh = H.shape[1] // Q
    Lg = G.shape[1] // Q
    return np.concatenate(
        [
            np.kron(H[:, q * Lh : (q + 1) * Lh], G[:, q * Lg : (q + 1) * Lg])
            for q in range(Q)
        ],
        axis=1,
    )


def khatri_rao(H: np.ndarray, G: np.ndarray) -> np.ndarray:
    """Column-wise Kronecker product (block Kronecker with unit blocks)."""
    H = np.atleast_2d(H)
    return block_kron(H, G, H.shape[1])


def _check_mode(n: int) -> None:
    if n not in (1, 2, 3):
        raise ValueError(f"mode must be 1, 2 or 3, got {n!r}")


def unfold(T: np.ndarray, n: int) -> np.ndarray:
    _check_mode(n)
    T = np.asarray(T)
    if T.ndim != 3:
        raise DimensionError(f"expected a third-order tensor, got ndim={T.ndim}")
    d1, d2, d3 = T.shape
    if n == 1:
        return T.reshape(d1, d2 * d3, order="F")
    if n == 2:
        return T.transpose(1, 0, 2).reshape(d2, d1 * d3, order="F")
    return T.reshape(d1 * d2, d3, order="F").T


def fold(M: np.ndarray, n: int, dims: tuple[int, int, int]) -> np.ndarray:
    """Inverse of :func:`unfold` for a tensor of shape ``dims``."""
    _check_mode(n)
    M = np.atleast_2d(M)
    d1, d2, d3 = dims
    expected = {1: (d1, d2 * d3), 2: (d2, d1 * d3), 3: (d3, d1 * d2)}[n]
    if M.shape != expected:
        raise DimensionError(
            f"mode-{n} unfolding of {dims} must be {expected}, got {M.shape}"
        )
    if n == 1:
        return M.reshape(d1, d2, d3, order="F")
    if n == 2:
        return M.reshape(d2, d1, d3, order="F").transpose(1, 0, 2)
    return M.T.reshape(d1, d2, d3, order="F")


def n_mode_product(T: np.ndarray, A: np.ndarray, n: int) -> np.ndarray:
    """Return ``T x_n A``, i.e. the tensor whose mode-n unfolding is ``A @ unfold(T, n)``."""
    _check_mode(n)
    A = np.atleast_2d(A)
    dims = list(np.shape(T))
    if A.shape[1] != dims[n - 1]:
        raise DimensionError(
            f"matrix with {A.shape[1]} columns cannot act on mode {n} of size {dims[n - 1]}"
        )
    dims[n - 1] = A.shape[0]
    return fold(A @ unfold(T, n), n, tuple(dims))


def permutation_P(Nbar: int, Q: int, K: int) -> np.ndarray:
    """Permutation linking full and group-wise 1-/2-mode unfoldings.

    With ``E = [I_Q (x) e_1, ..., I_Q (x) e_K] (x) I_Nbar`` (``e_k`` the k-th
    column of ``I_K``) this returns ``E^T``, the orientation for which

        S_n = unfold(S_full, n) @ P,   n = 1, 2
        [I_K, ..., I_K] |x| H = (I_K (x) H) @ P

    hold, ``S_full`` being the ``N x N x K`` block-diagonal training tensor.
    ``E`` itself maps the group ordering back to the full one.
    """
    eye_q = np.eye(Q)
    eye_k = np.eye(K)
    inner = np.concatenate(
        [np.kron(eye_q, eye_k[:, [k]]) for k in range(K)], axis=1
    )
    return np.kron(inner, np.eye(Nbar)).T


def pinv(M: np.ndarray) -> np.ndarray:
    """Moore-Penrose pseudo-inverse.

    Singular values below ``max(rows, cols) * eps * sigma_max`` are treated as
    zero.
    """
    M = np.atleast_2d(M)
    rcond = max(M.shape) * np.finfo(float).eps
    return np.linalg.pinv(M, rcond=rcond)


def rank_one_approx(M: np.ndarray) -> tuple[np.ndarray, float, np.ndarray]:
    """Dominant singular triple ``(u, sigma, v)`` so that ``sigma * u v^H``
    is the best rank-one approximation of ``M``.

    The phase of the pair is fixed by making the first nonzero entry of ``u``
    real and nonnegative.
    """
    M = np.atleast_2d(M)
    if not np.any(M):
        raise DegenerateInputError("rank-one approximation of an all-zero matrix")
    U, s, Vh = np.linalg.svd(M, full_matrices=False)
    u = U[:, 0]
    v = Vh[0].conj()
    nz = np.flatnonzero(np.abs(u) > 0)[0]
    phase = u[nz] / abs(u[nz])
    # u v^H is unchanged when both vectors share the same unit phase factor
    return u / phase, float(s[0]), v / phase


def kron_rearrange(Zq: np.ndarray, M_R: int, M_T: int, Nbar: int) -> np.ndarray:
    """Rearrange ``H (x) G`` (``M_R*M_T x Nbar^2``) into ``vec(G) vec(H)^T``.

    Index map (zero-based)::

        out[m_R + n2*M_R, m_T + n1*M_T] = Zq[m_R + m_T*M_R, n2 + n1*Nbar]
    """
    Zq = np.atleast_2d(Zq)
    if Zq.shape != (M_R * M_T, Nbar * Nbar):
        raise DimensionError(
            f"expected a {(M_R * M_T, Nbar * Nbar)} block, got {Zq.shape}"
        )
    # axes (m_R, m_T, n2, n1) -> (m_R, n2, m_T, n1)
    four = Zq.reshape(M_R, M_T, Nbar, Nbar, order="F").transpose(0, 2, 1, 3)
    return four.reshape(M_R * Nbar, M_T * Nbar, order="F")


def kron_unrearrange(Zbar: np.ndarray, M_R: int, M_T: int, Nbar: int) -> np.ndarray:
    """Inverse of :func:`kron_rearrange`."""
    Zbar = np.atleast_2d(Zbar)
    if Zbar.shape != (M_R * Nbar, M_T * Nbar):
        raise DimensionError(
            f"expected a {(M_R * Nbar, M_T * Nbar)} matrix, got {Zbar.shape}"
        )
    four = Zbar.reshape(M_R, Nbar, M_T, Nbar, order="F").transpose(0, 2, 1, 3)
    return four.reshape(M_R * M_T, Nbar * Nbar, order="F")


def blkdiag(*blocks: np.ndarray) -> np.ndarray:
    """Block-diagonal matrix from 2-D blocks (complex-safe)."""
    blocks = [np.atleast_2d(b) for b in blocks]
    rows = sum(b.shape[0] for b in blocks)
    cols = sum(b.shape[1] for b in blocks)
    dtype = np.result_type(*blocks)
    out = np.zeros((rows, cols), dtype=dtype)
    r = c = 0
    for b in blocks:
        out[r : r + b.shape[0], c : c + b.shape[1]] = b
        r += b.shape[0]
        c += b.shape[1]
    return out
