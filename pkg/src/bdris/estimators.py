"""LS, BTKF and BTALS channel estimators for BD-RIS.

All three consume the matched-filtered pilot tensor ``Y`` (``M_R x M_T x K``)
and a :class:`~bdris.design.TrainingDesign`.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np

from . import tensor_core as tc
from .channel import ChannelPair, ReceivedPilots, crandn
from .design import TrainingDesign, validate_identifiability
from .errors import ConfigurationError, DegenerateInputError, NumericalFailure


@dataclass(frozen=True, eq=False)
class EstimationResult:
    """Estimator output.

    ``T_hat`` is always set. ``H_hat``/``G_hat`` are ``None`` for LS;
    ``iterations``/``residuals`` are only filled by BTALS. ``alpha``/``beta``
    hold per-group scalars relating the estimates to the truth once
    :func:`resolve_scaling` has been applied.
    """

    T_hat: np.ndarray
    H_hat: np.ndarray | None = None
    G_hat: np.ndarray | None = None
    Q: int = 1
    iterations: int = 0
    residuals: list[float] = field(default_factory=list)
    converged: bool = False
    alpha: np.ndarray | None = None
    beta: np.ndarray | None = None


@dataclass(frozen=True)
class BtalsOptions:
    eta: float = 1e-6
    max_iters: int = 200
    init_seed: object = None
    # update with the full block-diagonal tensor; False uses
    # the group block form [I_K ... I_K] |x| H
    full_form: bool = True

    def __post_init__(self):
        if not self.eta > 0:
            raise ValueError("eta must be positive")
        if self.max_iters < 1:
            raise ValueError("max_iters must be at least 1")


def _pilot_array(Y) -> np.ndarray:
    return Y.Y if isinstance(Y, ReceivedPilots) else np.asarray(Y)


def _require(design: TrainingDesign, algorithm: str, M_T: int = 1, M_R: int = 1) -> None:
    report = validate_identifiability(design, M_T, M_R, algorithm)
    if not report.passed:
        raise ConfigurationError(report.summary(), report)


def _ls_filter(Y3: np.ndarray, design: TrainingDesign) -> np.ndarray:
    if design.s3_orthogonal:
        # S3^H S3 = (K / Nbar) I: matched filter
        Z = (design.Nbar / design.K) * (design.S3.conj().T @ Y3)
    else:
        Z = tc.pinv(design.S3) @ Y3
    return Z.T


def estimate_ls(Y, design: TrainingDesign) -> EstimationResult:
    """Least-squares estimate of the combined channel ``H |x| G``."""
    _require(design, "LS")
    Y3 = tc.unfold(_pilot_array(Y), 3)
    return EstimationResult(T_hat=_ls_filter(Y3, design), Q=design.Q)


def estimate_btkf(Y, design: TrainingDesign) -> EstimationResult:
    """Closed-form block Tucker Kronecker factorization.

    LS filtering followed by one nearest-Kronecker (rank-one) factorization per
    group. The dominant singular value is split evenly between the two factors
    so that ``H_q (x) G_q`` is the best Kronecker approximation of the block.
    """
    _require(design, "BTKF")
    Yarr = _pilot_array(Y)
    M_R, M_T, _ = Yarr.shape
    Nb, Q = design.Nbar, design.Q
    Z = _ls_filter(tc.unfold(Yarr, 3), design)

    G_hat = np.empty((M_R, Nb * Q), dtype=complex)
    H_hat = np.empty((M_T, Nb * Q), dtype=complex)
    for q in range(Q):
        Zq = Z[:, q * Nb * Nb : (q + 1) * Nb * Nb]
        u, s, v = tc.rank_one_approx(tc.kron_rearrange(Zq, M_R, M_T, Nb))
        root = np.sqrt(s)
        G_hat[:, q * Nb : (q + 1) * Nb] = tc.unvec(root * u, M_R, Nb)
        H_hat[:, q * Nb : (q + 1) * Nb] = tc.unvec(root * v.conj(), M_T, Nb)

    return EstimationResult(
        T_hat=tc.block_kron(H_hat, G_hat, Q), H_hat=H_hat, G_hat=G_hat, Q=Q
    )


def _gram_full(S_full: np.ndarray, F: np.ndarray) -> np.ndarray:
    # [S]_(n) (I_K (x) F)^T  ==  [S_1 F^T, ..., S_K F^T]
    N, _, K = S_full.shape
    return np.einsum("ijk,mj->ikm", S_full, F).reshape(N, K * F.shape[0])


def _gram_block(S_blk: np.ndarray, F: np.ndarray, Q: int, K: int) -> np.ndarray:
    # S_n ([I_K, ..., I_K] |x| F)^T
    Ibar = np.tile(np.eye(K), (1, Q))
    return S_blk @ tc.block_kron(Ibar, F, Q).T


def estimate_btals(
    Y,
    design: TrainingDesign,
    opts: BtalsOptions | None = None,
    init_H: np.ndarray | None = None,
) -> EstimationResult:
    """Block Tucker alternating least squares.

    Alternates the LS updates of ``G`` (from the mode-1 unfolding) and ``H``
    (from the mode-2 unfolding) until the normalized residual changes by at
    most ``opts.eta`` or ``opts.max_iters`` is reached. ``init_H`` overrides
    the random initialization.
    """
    opts = opts or BtalsOptions()
    Yarr = _pilot_array(Y)
    M_R, M_T, K = Yarr.shape
    _require(design, "BTALS", M_T, M_R)
    Q = design.Q

    Y1, Y2, Y3 = tc.unfold(Yarr, 1), tc.unfold(Yarr, 2), tc.unfold(Yarr, 3)
    y3_energy = float(np.vdot(Y3, Y3).real)
    if y3_energy == 0:
        raise DegenerateInputError("received pilot tensor is all zeros")

    if opts.full_form:
        S_full = design.full_tensor
        S_full_t = S_full.transpose(1, 0, 2)
        left = lambda F: _gram_full(S_full, F)  # noqa: E731
        right = lambda F: _gram_full(S_full_t, F)  # noqa: E731
    else:
        left = lambda F: _gram_block(design.S1, F, Q, K)  # noqa: E731
        right = lambda F: _gram_block(design.S2, F, Q, K)  # noqa: E731

    if init_H is None:
        H = crandn(np.random.default_rng(opts.init_seed), M_T, design.N)
    else:
        H = np.array(init_H, dtype=complex)

    residuals: list[float] = []
    converged = False
    prev = np.inf
    for _ in range(opts.max_iters):
        G = Y1 @ tc.pinv(left(H))
        H = Y2 @ tc.pinv(right(G))
        diff = Y3 - design.S3 @ tc.block_kron(H, G, Q).T
        eps = float(np.vdot(diff, diff).real) / y3_energy
        if not np.isfinite(eps):
            raise NumericalFailure(f"non-finite residual at iteration {len(residuals) + 1}")
        residuals.append(eps)
        if abs(eps - prev) <= opts.eta:
            converged = True
            break
        prev = eps

    return EstimationResult(
        T_hat=tc.block_kron(H, G, Q),
        H_hat=H,
        G_hat=G,
        Q=Q,
        iterations=len(residuals),
        residuals=residuals,
        converged=converged,
    )


def resolve_scaling(result: EstimationResult, truth: ChannelPair) -> EstimationResult:
    """Remove the per-group scaling ambiguity using the true channels.

    Each group's ``G_hat`` is rescaled by its LS fit onto the true block and
    ``H_hat`` by the inverse, so ``T_hat`` is unchanged. The returned
    ``alpha``/``beta`` are the fitted scalars of the *input* estimates
    (``G_hat ~ alpha G``, ``H_hat ~ beta H``).
    """
    if result.H_hat is None or result.G_hat is None:
        raise ValueError("result carries no per-channel estimates")
    Nb, Q = truth.Nbar, truth.Q
    G_new = result.G_hat.astype(complex)
    H_new = result.H_hat.astype(complex)
    alpha = np.empty(Q, dtype=complex)
    beta = np.empty(Q, dtype=complex)
    for q in range(Q):
        cols = slice(q * Nb, (q + 1) * Nb)
        g_hat, h_hat = tc.vec(result.G_hat[:, cols]), tc.vec(result.H_hat[:, cols])
        g, h = tc.vec(truth.G[:, cols]), tc.vec(truth.H[:, cols])
        g_energy = np.vdot(g_hat, g_hat).real
        if g_energy == 0 or np.vdot(h_hat, h_hat).real == 0:
            raise DegenerateInputError(f"group {q} estimate has zero norm")
        a = np.vdot(g_hat, g) / g_energy
        G_new[:, cols] *= a
        H_new[:, cols] /= a
        alpha[q] = np.vdot(g, g_hat) / np.vdot(g, g).real
        beta[q] = np.vdot(h, h_hat) / np.vdot(h, h).real
    return replace(
        result,
        H_hat=H_new,
        G_hat=G_new,
        T_hat=tc.block_kron(H_new, G_new, Q),
        alpha=alpha,
        beta=beta,
    )
