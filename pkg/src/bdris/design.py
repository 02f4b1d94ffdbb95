"""BD-RIS training tensor construction and identifiability checks.

A group-connected BD-RIS with ``Q`` groups of ``Nbar`` elements is trained over
``K = K1 * K2`` blocks. Group ``q`` uses the slices::

    S_q[:, :, k] = Theta[k2, q] * Z[:, :, k1],      k = k2 * K1 + k1

where ``Z`` holds ``K1`` cyclically shifted unitary DFT matrices and ``Theta``
is a ``K2 x Q`` Hadamard or DFT matrix. Optionally every slice is rotated as
``D_k S D_k^*`` with random unit-modulus diagonals, which breaks slice
proportionality inside a group.
"""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field
from functools import cached_property
from pathlib import Path

import numpy as np
import scipy.linalg

from . import tensor_core as tc

ALGORITHMS = ("LS", "BTKF", "BTALS")
THETA_KINDS = ("dft", "hadamard")

# tolerance on |<a, b>| / (|a| |b|) for calling two slices proportional
PROPORTIONAL_TOL = 1e-10


def default_split(Nbar: int, Q: int, K: int) -> tuple[int, int]:
    """Pick ``(K1, K2)`` with ``K1 * K2 = K`` and ``K1 <= Nbar**2``."""
    if K % Q == 0 and K // Q <= Nbar * Nbar:
        return K // Q, Q
    K1 = max(d for d in range(1, min(K, Nbar * Nbar) + 1) if K % d == 0)
    return K1, K // K1


@dataclass(frozen=True)
class DesignConfig:
    """Geometry and training parameters of a BD-RIS training design.

    ``K1``/``K2`` default to :func:`default_split`. ``rotated`` applies random
    unit-modulus rotations drawn from ``seed``.
    """

    Nbar: int
    Q: int
    K: int
    K1: int | None = None
    K2: int | None = None
    theta_kind: str = "dft"
    rotated: bool = False
    seed: int = 0

    def __post_init__(self):
        for name in ("Nbar", "Q", "K"):
            if int(getattr(self, name)) < 1:
                raise ValueError(f"{name} must be a positive integer")
        kind = self.theta_kind.lower()
        if kind not in THETA_KINDS:
            raise ValueError(f"theta_kind must be one of {THETA_KINDS}, got {self.theta_kind!r}")
        object.__setattr__(self, "theta_kind", kind)
        K1, K2 = self.K1, self.K2
        if K1 is None and K2 is None:
            K1, K2 = default_split(self.Nbar, self.Q, self.K)
        elif K1 is None:
            K1 = self.K // K2
        elif K2 is None:
            K2 = self.K // K1
        if K1 < 1 or K2 < 1 or K1 * K2 != self.K:
            raise ValueError(f"K1={K1}, K2={K2} do not factor K={self.K}")
        if K1 > self.Nbar**2:
            raise ValueError(f"K1={K1} exceeds Nbar^2={self.Nbar**2}")
        object.__setattr__(self, "K1", int(K1))
        object.__setattr__(self, "K2", int(K2))

    @property
    def N(self) -> int:
        return self.Nbar * self.Q

    @classmethod
    def for_algorithm(cls, algorithm: str, Nbar: int, Q: int, K: int, **kw) -> "DesignConfig":
        """Config with the algorithm's default rotation setting (BTALS rotates)."""
        kw.setdefault("rotated", algorithm.upper() == "BTALS")
        return cls(Nbar=Nbar, Q=Q, K=K, **kw)


# ---------------------------------------------------------------------------
# building blocks
# ---------------------------------------------------------------------------


def dft_matrix(n: int, unitary: bool = False) -> np.ndarray:
    idx = np.arange(n)
    F = np.exp(-2j * np.pi * np.outer(idx, idx) / n)
    return F / np.sqrt(n) if unitary else F


def _is_prime(p: int) -> bool:
    return p >= 2 and all(p % d for d in range(2, int(p**0.5) + 1))


def _paley(p: int) -> np.ndarray:
    """Paley I (p = 3 mod 4, order p+1) or Paley II (p = 1 mod 4, order 2(p+1))."""
    residues = {(x * x) % p for x in range(1, p)}
    chi = np.array([0] + [1 if x in residues else -1 for x in range(1, p)])
    jac = chi[(np.arange(p)[None, :] - np.arange(p)[:, None]) % p]
    ones = np.ones(p, dtype=int)
    if p % 4 == 3:
        C = np.block([[np.zeros((1, 1), dtype=int), ones[None, :]], [-ones[:, None], jac]])
        return np.eye(p + 1, dtype=int) + C
    C = np.block([[np.zeros((1, 1), dtype=int), ones[None, :]], [ones[:, None], jac]])
    zero_blk = np.array([[1, -1], [-1, -1]])
    pm_blk = np.array([[1, 1], [1, -1]])
    return np.kron(C, pm_blk) + np.kron((C == 0).astype(int), zero_blk)


def hadamard(n: int) -> np.ndarray:
    """Hadamard matrix of order ``n`` from Sylvester doubling of a Paley core.

    Covers 1, 2 and every order ``2**a * m`` with ``m = p + 1`` (``p`` prime,
    ``p = 3 mod 4``) or ``m = 2 (p + 1)`` (``p`` prime, ``p = 1 mod 4``).
    Raises ``ValueError`` otherwise.
    """
    if n >= 1 and n & (n - 1) == 0:
        return scipy.linalg.hadamard(n)
    m, twos = n, 1
    while True:
        if m % 4 == 0 and _is_prime(m - 1) and (m - 1) % 4 == 3:
            return np.kron(scipy.linalg.hadamard(twos), _paley(m - 1))
        if m % 4 == 0 and (m // 2 - 1) % 4 == 1 and _is_prime(m // 2 - 1):
            return np.kron(scipy.linalg.hadamard(twos), _paley(m // 2 - 1))
        if m % 2 or m < 4:
            break
        m //= 2
        twos *= 2
    raise ValueError(f"no Hadamard construction available for order {n}; use theta_kind='dft'")


def build_base_tensor(Nbar: int, K1: int) -> np.ndarray:
    """``Nbar x Nbar x K1`` tensor of cyclically shifted unitary DFT matrices.

    Slice ``k1 = a * Nbar + b`` is ``roll_rows^a(F) roll_cols^b``; with
    ``K1 = Nbar**2`` the mode-3 unfolding satisfies ``Z3^H Z3 = Nbar I``.
    """
    if not 1 <= K1 <= Nbar * Nbar:
        raise ValueError(f"K1 must lie in [1, {Nbar * Nbar}], got {K1}")
    F = dft_matrix(Nbar, unitary=True)
    Z = np.empty((Nbar, Nbar, K1), dtype=complex)
    for k1 in range(K1):
        a, b = divmod(k1, Nbar)
        Z[:, :, k1] = np.roll(np.roll(F, a, axis=0), b, axis=1)
    return Z


def build_theta(K2: int, Q: int, kind: str = "dft") -> np.ndarray:
    """``K2 x Q`` unit-modulus group scaling matrix (truncated Hadamard/DFT)."""
    n = max(K2, Q)
    kind = kind.lower()
    if kind == "dft":
        full = dft_matrix(n)
    elif kind == "hadamard":
        full = hadamard(n).astype(complex)
    else:
        raise ValueError(f"unknown theta kind {kind!r}")
    return full[:K2, :Q]


def apply_random_rotation(slice_: np.ndarray, w_row: np.ndarray) -> np.ndarray:
    """Return ``D slice D^*`` with ``D = diag(w_row)``."""
    w_row = np.asarray(w_row)
    if not np.allclose(np.abs(w_row), 1.0, atol=1e-12):
        raise ValueError("rotation entries must have unit modulus")
    return w_row[:, None] * slice_ * w_row.conj()[None, :]


def rotation_matrices(Nbar: int, Q: int, K: int, seed) -> np.ndarray:
    """``(Q, K, Nbar)`` unit-modulus rotations, first column fixed to one."""
    rng = np.random.default_rng(seed)
    psi = rng.uniform(0.0, 2.0 * np.pi, size=(Q, K, Nbar - 1))
    W = np.ones((Q, K, Nbar), dtype=complex)
    W[:, :, 1:] = np.exp(1j * psi)
    return W


# ---------------------------------------------------------------------------
# training design
# ---------------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class TrainingDesign:
    """Per-group training tensors plus their cached unfoldings.

    ``group_tensors`` has shape ``(Q, Nbar, Nbar, K)``; ``S1``/``S2`` are the
    block-diagonal group mode-1/2 unfoldings (``N x Nbar*K*Q``) and ``S3`` the
    compact mode-3 unfolding (``K x Nbar^2*Q``).
    """

    config: DesignConfig
    group_tensors: np.ndarray
    rotation: np.ndarray
    theta: np.ndarray
    S1: np.ndarray = field(repr=False)
    S2: np.ndarray = field(repr=False)
    S3: np.ndarray = field(repr=False)

    @property
    def Nbar(self) -> int:
        return self.config.Nbar

    @property
    def Q(self) -> int:
        return self.config.Q

    @property
    def K(self) -> int:
        return self.config.K

    @property
    def N(self) -> int:
        return self.config.N

    @cached_property
    def s3_orthogonal(self) -> bool:
        """True when ``S3^H S3 = (K / Nbar) I`` holds by construction."""
        cfg = self.config
        if cfg.rotated or cfg.K1 != cfg.Nbar**2 or cfg.K2 < cfg.Q:
            return False
        gram = self.theta.conj().T @ self.theta
        return bool(np.allclose(gram, cfg.K2 * np.eye(cfg.Q), atol=1e-9 * cfg.K2))

    @cached_property
    def proportional(self) -> bool:
        return has_proportional_slices(self)

    @cached_property
    def s1_full_row_rank(self) -> bool:
        return _full_rank(self.S1, rows=True)

    @cached_property
    def s2_full_row_rank(self) -> bool:
        return _full_rank(self.S2, rows=True)

    @cached_property
    def s3_full_column_rank(self) -> bool:
        return self.s3_orthogonal or _full_rank(self.S3, rows=False)

    @cached_property
    def full_tensor(self) -> np.ndarray:
        """The ``N x N x K`` block-diagonal training tensor."""
        Nb = self.Nbar
        S = np.zeros((self.N, self.N, self.K), dtype=complex)
        for q in range(self.Q):
            S[q * Nb : (q + 1) * Nb, q * Nb : (q + 1) * Nb, :] = self.group_tensors[q]
        return S

    def to_dict(self) -> dict:
        return asdict(self.config)

    def save(self, path) -> None:
        Path(path).write_text(json.dumps(self.to_dict(), indent=2) + "\n")

    @classmethod
    def from_dict(cls, data: dict) -> "TrainingDesign":
        allowed = set(DesignConfig.__dataclass_fields__)
        unknown = set(data) - allowed
        if unknown:
            raise ValueError(f"unknown design keys: {sorted(unknown)}")
        return build_training_design(DesignConfig(**data))

    @classmethod
    def load(cls, path) -> "TrainingDesign":
        return cls.from_dict(json.loads(Path(path).read_text()))


def build_training_design(config: DesignConfig) -> TrainingDesign:
    Nb, Q, K, K1, K2 = config.Nbar, config.Q, config.K, config.K1, config.K2
    Z = build_base_tensor(Nb, K1)
    theta = build_theta(K2, Q, config.theta_kind)

    # slice k = k2*K1 + k1 -> theta[k2, q] * Z[:, :, k1]
    base = np.einsum("bq,ijc->qijbc", theta, Z).reshape(Q, Nb, Nb, K)

    if config.rotated:
        W = rotation_matrices(Nb, Q, K, config.seed)
        # same as apply_random_rotation on every (q, k) slice
        tensors = np.einsum("qki,qijk,qkj->qijk", W, base, W.conj())
        S1 = tc.blkdiag(*(tc.unfold(tensors[q], 1) for q in range(Q)))
        S2 = tc.blkdiag(*(tc.unfold(tensors[q], 2) for q in range(Q)))
        S3 = np.concatenate([tc.unfold(tensors[q], 3) for q in range(Q)], axis=1)
    else:
        W = np.ones((Q, K, Nb), dtype=complex)
        tensors = base
        Z1, Z2, Z3 = tc.unfold(Z, 1), tc.unfold(Z, 2), tc.unfold(Z, 3)
        S1 = tc.blkdiag(*(np.kron(theta[:, q][None, :], Z1) for q in range(Q)))
        S2 = tc.blkdiag(*(np.kron(theta[:, q][None, :], Z2) for q in range(Q)))
        S3 = np.kron(theta, Z3)

    return TrainingDesign(
        config=config, group_tensors=tensors, rotation=W, theta=theta, S1=S1, S2=S2, S3=S3
    )


def assemble_scattering_matrix(design: TrainingDesign, k: int) -> np.ndarray:
    """Block-diagonal ``N x N`` scattering matrix of training block ``k`` (zero-based)."""
    if not 0 <= k < design.K:
        raise IndexError(f"block index {k} outside [0, {design.K})")
    return tc.blkdiag(*(design.group_tensors[q, :, :, k] for q in range(design.Q)))


def _any_proportional(rows: np.ndarray, tol: float) -> bool:
    # rows: (K, L) vectorised slices
    norms = np.linalg.norm(rows, axis=1)
    gram = np.abs(rows.conj() @ rows.T)
    bound = np.outer(norms, norms)
    close = np.abs(gram - bound) <= tol * np.maximum(bound, 1e-300)
    np.fill_diagonal(close, False)
    return bool(close.any())


def has_proportional_slices(design: TrainingDesign, tol: float = PROPORTIONAL_TOL) -> bool:
    """Whether two frontal slices of one group are scalar multiples.

    For scalar groups (``Nbar == 1``) per-group proportionality is automatic,
    so the check is made on the full diagonal slices instead.
    """
    if design.Nbar == 1:
        rows = design.group_tensors[:, 0, 0, :].T
        return _any_proportional(rows, tol)
    for q in range(design.Q):
        rows = tc.unfold(design.group_tensors[q], 3)
        if _any_proportional(rows, tol):
            return True
    return False


# ---------------------------------------------------------------------------
# identifiability
# ---------------------------------------------------------------------------


@dataclass
class ValidationReport:
    algorithm: str
    checks: dict[str, bool]

    @property
    def passed(self) -> bool:
        return all(self.checks.values())

    @property
    def violations(self) -> list[str]:
        return [name for name, ok in self.checks.items() if not ok]

    def __bool__(self) -> bool:
        return self.passed

    def summary(self) -> str:
        if self.passed:
            return f"{self.algorithm}: pass"
        return f"{self.algorithm}: fail ({'; '.join(self.violations)})"


def _full_rank(M: np.ndarray, rows: bool) -> bool:
    target = M.shape[0] if rows else M.shape[1]
    if target > min(M.shape):
        return False
    s = np.linalg.svd(M, compute_uv=False)
    return int(np.sum(s > max(M.shape) * np.finfo(float).eps * s[0])) == target


def validate_identifiability(
    design: DesignConfig | TrainingDesign,
    M_T: int = 1,
    M_R: int = 1,
    algorithm: str = "BTKF",
) -> ValidationReport:
    """Check the training/geometry conditions needed by ``algorithm``.

    Failures are reported, never raised.
    """
    algorithm = algorithm.upper()
    if algorithm not in ALGORITHMS:
        raise ValueError(f"algorithm must be one of {ALGORITHMS}, got {algorithm!r}")
    cfg = design.config if isinstance(design, TrainingDesign) else design
    N, K = cfg.N, cfg.K
    checks: dict[str, bool] = {}

    if algorithm in ("LS", "BTKF"):
        checks["K >= Nbar^2*Q"] = K >= cfg.Nbar**2 * cfg.Q
        if checks["K >= Nbar^2*Q"]:
            td = design if isinstance(design, TrainingDesign) else build_training_design(cfg)
            checks["S3 full column rank"] = td.s3_full_column_rank
        return ValidationReport(algorithm, checks)

    checks["K*M_T >= N"] = K * M_T >= N
    checks["K*M_R >= N"] = K * M_R >= N
    checks["K >= 3"] = K >= 3
    td = design if isinstance(design, TrainingDesign) else build_training_design(cfg)
    checks["no proportional frontal slices"] = not td.proportional
    checks["S1 full row rank"] = td.s1_full_row_rank
    checks["S2 full row rank"] = td.s2_full_row_rank
    return ValidationReport(algorithm, checks)
