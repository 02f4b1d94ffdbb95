"""Ground-truth channels and received-pilot synthesis."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import tensor_core as tc
from .design import TrainingDesign, dft_matrix
from .errors import DimensionError


def crandn(rng: np.random.Generator, *shape) -> np.ndarray:
    """i.i.d. CN(0, 1) samples."""
    return (rng.standard_normal(shape) + 1j * rng.standard_normal(shape)) / np.sqrt(2.0)


@dataclass(frozen=True, eq=False)
class ChannelPair:
    """TX-RIS channel ``H`` (``M_T x N``) and RIS-RX channel ``G`` (``M_R x N``)."""

    H: np.ndarray
    G: np.ndarray
    Nbar: int
    Q: int

    def __post_init__(self):
        N = self.Nbar * self.Q
        if self.H.shape[1] != N or self.G.shape[1] != N:
            raise DimensionError(
                f"H {self.H.shape} and G {self.G.shape} must both have N={N} columns"
            )

    @property
    def M_T(self) -> int:
        return self.H.shape[0]

    @property
    def M_R(self) -> int:
        return self.G.shape[0]

    @property
    def N(self) -> int:
        return self.Nbar * self.Q

    def H_block(self, q: int) -> np.ndarray:
        return self.H[:, q * self.Nbar : (q + 1) * self.Nbar]

    def G_block(self, q: int) -> np.ndarray:
        return self.G[:, q * self.Nbar : (q + 1) * self.Nbar]


@dataclass(frozen=True, eq=False)
class ReceivedPilots:
    """Noisy received-pilot tensor ``Y`` (``M_R x M_T x K``)."""

    Y: np.ndarray
    snr_db: float
    noise_seed: object
    noiseless_power: float
    noise_var: float = 0.0

    @property
    def K(self) -> int:
        return self.Y.shape[2]


def draw_channels(M_T: int, M_R: int, Nbar: int, Q: int, seed=None) -> ChannelPair:
    """i.i.d. Rayleigh channels with unit-variance entries."""
    rng = np.random.default_rng(seed)
    N = Nbar * Q
    H = crandn(rng, M_T, N)
    G = crandn(rng, M_R, N)
    return ChannelPair(H=H, G=G, Nbar=Nbar, Q=Q)


def combined_channel(ch: ChannelPair) -> np.ndarray:
    """``H |x| G``, of shape ``(M_R*M_T, Nbar^2*Q)``."""
    return tc.block_kron(ch.H, ch.G, ch.Q)


def _check_geometry(design: TrainingDesign, ch: ChannelPair) -> None:
    if (design.Nbar, design.Q) != (ch.Nbar, ch.Q):
        raise DimensionError(
            f"design geometry (Nbar={design.Nbar}, Q={design.Q}) does not match "
            f"channel geometry (Nbar={ch.Nbar}, Q={ch.Q})"
        )


def noiseless_pilots(design: TrainingDesign, ch: ChannelPair) -> np.ndarray:
    """``sum_q S_q x_1 G_q x_2 H_q``, shape ``(M_R, M_T, K)``."""
    _check_geometry(design, ch)
    Nb, Q = design.Nbar, design.Q
    Gq = ch.G.reshape(ch.M_R, Q, Nb).transpose(1, 0, 2)
    Hq = ch.H.reshape(ch.M_T, Q, Nb).transpose(1, 0, 2)
    return np.einsum("qri,qijk,qtj->rtk", Gq, design.group_tensors, Hq, optimize=True)


def noise_variance(noiseless_power: float, n_entries: int, snr_db: float) -> float:
    if np.isposinf(snr_db):
        return 0.0
    return noiseless_power / (n_entries * 10.0 ** (snr_db / 10.0))


def synthesize_pilots(design: TrainingDesign, ch: ChannelPair, snr_db: float, seed=None) -> ReceivedPilots:
    """Matched-filtered received pilots at the given per-realization SNR.

    The noise variance is set so that ``||Y0||^2 / E||B||^2`` equals
    ``10**(snr_db/10)``; ``snr_db = inf`` disables noise.
    """
    Y0 = noiseless_pilots(design, ch)
    power = float(np.vdot(Y0, Y0).real)
    var = noise_variance(power, Y0.size, snr_db)
    Y = Y0
    if var > 0:
        rng = np.random.default_rng(seed)
        Y = Y0 + np.sqrt(var) * crandn(rng, *Y0.shape)
    return ReceivedPilots(Y=Y, snr_db=float(snr_db), noise_seed=seed, noiseless_power=power, noise_var=var)


def default_pilots(M_T: int, T: int) -> np.ndarray:
    """First ``M_T`` rows of the ``T``-point DFT matrix (``X X^H = T I``)."""
    if T < M_T:
        raise ValueError(f"pilot length T={T} must be at least M_T={M_T}")
    return dft_matrix(T)[:M_T]


def synthesize_prefilter_pilots(
    design: TrainingDesign,
    ch: ChannelPair,
    X: np.ndarray | None,
    snr_db: float,
    seed=None,
) -> ReceivedPilots:
    """Simulate ``G S_k H^T X + B_k`` per block and matched-filter with ``X^H / c``.

    ``X`` must have orthogonal rows, ``X X^H = c I``. The raw per-sample noise
    variance follows the same SNR rule as :func:`synthesize_pilots`; after
    filtering it is divided by ``c``.
    """
    if X is None:
        X = default_pilots(ch.M_T, ch.M_T)
    X = np.atleast_2d(X)
    if X.shape[0] != ch.M_T or X.shape[1] < ch.M_T:
        raise ValueError(f"pilot matrix must be M_T x T with T >= M_T, got {X.shape}")
    gram = X @ X.conj().T
    c = gram[0, 0].real
    if c <= 0 or not np.allclose(gram, c * np.eye(ch.M_T), atol=1e-10 * c):
        raise ValueError("pilot matrix rows are not orthogonal with equal energy")

    Y0 = noiseless_pilots(design, ch)
    power = float(np.vdot(Y0, Y0).real)
    var = noise_variance(power, Y0.size, snr_db)
    raw = np.einsum("rtk,ts->rsk", Y0, X)
    if var > 0:
        rng = np.random.default_rng(seed)
        raw = raw + np.sqrt(var) * crandn(rng, *raw.shape)
    Y = np.einsum("rsk,ts->rtk", raw, X.conj()) / c
    return ReceivedPilots(Y=Y, snr_db=float(snr_db), noise_seed=seed, noiseless_power=power, noise_var=var / c)
