"""NMSE metric, complexity model and the seeded Monte-Carlo sweep runner."""

from __future__ import annotations

import csv
import io
import itertools
import json
import math
import os
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path

import numpy as np

from .channel import combined_channel, draw_channels, synthesize_pilots
from .design import ALGORITHMS, DesignConfig, build_training_design, validate_identifiability
from .estimators import BtalsOptions, estimate_btals, estimate_btkf, estimate_ls, resolve_scaling

THREADS_ENV = "BDRIS_THREADS"


def nmse(C_hat: np.ndarray, C: np.ndarray) -> float:
    """``||C - C_hat||_F^2 / ||C||_F^2``."""
    C_hat = np.asarray(C_hat)
    C = np.asarray(C)
    if C_hat.shape != C.shape:
        raise ValueError(f"shape mismatch: {C_hat.shape} vs {C.shape}")
    ref = float(np.vdot(C, C).real)
    if ref == 0:
        raise ValueError("reference matrix is zero")
    diff = C - C_hat
    return float(np.vdot(diff, diff).real) / ref


def to_db(x: float) -> float:
    return 10.0 * math.log10(x) if x > 0 else -math.inf


def flop_estimate(
    algorithm: str,
    M_T: int,
    M_R: int,
    Nbar: int,
    Q: int,
    K: int,
    iterations: float = 1,
    T: int | None = None,
) -> float:
    """Dominant-term operation count (unit constants).

    LS: ``M_R T K Nbar^2 Q``; BTKF adds ``Q Nbar^2 M_R M_T`` for the rank-one
    stage; BTALS: ``I Nbar^2 Q K (M_R + M_T)``. ``T`` defaults to ``M_T``.
    """
    T = M_T if T is None else T
    algorithm = algorithm.upper()
    ls = M_R * T * K * Nbar**2 * Q
    if algorithm == "LS":
        return float(ls)
    if algorithm == "BTKF":
        return float(ls + Q * Nbar**2 * M_R * M_T)
    if algorithm == "BTALS":
        return float(iterations * Nbar**2 * Q * K * (M_R + M_T))
    raise ValueError(f"unknown algorithm {algorithm!r}")


# ---------------------------------------------------------------------------
# sweep configuration
# ---------------------------------------------------------------------------


@dataclass
class SweepConfig:
    """Monte-Carlo grid.

    ``antennas`` holds ``(M_T, M_R)`` pairs and ``groups`` ``(Nbar, Q)`` pairs.
    Each ``k`` entry is a block count, the string ``"min"`` (``Nbar^2 Q``), or a
    ``(K1, K2)`` pair. ``snr_db`` entries may be ``inf`` for noiseless runs.
    """

    antennas: list = field(default_factory=lambda: [(2, 2)])
    groups: list = field(default_factory=lambda: [(2, 4)])
    k: list = field(default_factory=lambda: ["min"])
    snr_db: list = field(default_factory=lambda: [0.0, 10.0, 20.0, 30.0])
    algorithms: list = field(default_factory=lambda: ["LS", "BTKF"])
    trials: int = 200
    seed: int = 0
    theta_kind: str = "dft"
    btals: dict = field(default_factory=dict)
    output: str = "-"

    def __post_init__(self):
        self.antennas = [tuple(int(x) for x in a) for a in self.antennas]
        self.groups = [tuple(int(x) for x in g) for g in self.groups]
        self.snr_db = [float(s) for s in self.snr_db]
        self.algorithms = [a.upper() for a in self.algorithms]
        bad = [a for a in self.algorithms if a not in ALGORITHMS]
        if bad:
            raise ValueError(f"unknown algorithms {bad}; expected a subset of {ALGORITHMS}")
        for name, pairs in (("antennas", self.antennas), ("groups", self.groups)):
            if not pairs or any(len(p) != 2 or min(p) < 1 for p in pairs):
                raise ValueError(f"{name} must be a non-empty list of positive pairs")
        if not self.k or not self.snr_db:
            raise ValueError("k and snr_db must be non-empty")
        for entry in self.k:
            _check_k_entry(entry)
        if int(self.trials) < 1:
            raise ValueError("trials must be at least 1")
        self.trials = int(self.trials)
        self.seed = int(self.seed)
        if self.seed < 0:
            raise ValueError("seed must be non-negative")
        unknown = set(self.btals) - {"eta", "max_iters"}
        if unknown:
            raise ValueError(f"unknown btals options: {sorted(unknown)}")
        BtalsOptions(**self.btals)

    @classmethod
    def from_dict(cls, data: dict) -> "SweepConfig":
        allowed = {f.name for f in fields(cls)}
        unknown = set(data) - allowed
        if unknown:
            raise ValueError(f"unknown config keys: {sorted(unknown)}")
        return cls(**data)

    @classmethod
    def load(cls, path) -> "SweepConfig":
        return cls.from_dict(json.loads(Path(path).read_text()))

    def btals_options(self, init_seed=None) -> BtalsOptions:
        return BtalsOptions(init_seed=init_seed, **self.btals)


def _check_k_entry(entry) -> None:
    if entry == "min":
        return
    if isinstance(entry, (list, tuple)):
        if len(entry) != 2 or min(int(e) for e in entry) < 1:
            raise ValueError(f"(K1, K2) entry must hold two positive integers, got {entry!r}")
        return
    if isinstance(entry, bool) or not isinstance(entry, int) or entry < 1:
        raise ValueError(f"invalid k entry {entry!r}")


def resolve_k(entry, Nbar: int, Q: int) -> tuple[int, int | None, int | None]:
    """Return ``(K, K1, K2)`` for a ``k`` grid entry (``K1``/``K2`` may be ``None``)."""
    if entry == "min":
        return Nbar * Nbar * Q, None, None
    if isinstance(entry, (list, tuple)):
        K1, K2 = int(entry[0]), int(entry[1])
        return K1 * K2, K1, K2
    return int(entry), None, None


CSV_COLUMNS = [
    "algorithm", "mt", "mr", "nbar", "q", "n", "k", "k1", "k2", "snr_db", "trials",
    "nmse", "nmse_db", "nmse_h", "nmse_g", "iters_mean", "iters_max", "converged_frac",
    "flops", "status",
]


@dataclass
class ResultRow:
    algorithm: str
    mt: int
    mr: int
    nbar: int
    q: int
    n: int
    k: int
    k1: int
    k2: int
    snr_db: float
    trials: int
    nmse: float = math.nan
    nmse_db: float = math.nan
    nmse_h: float = math.nan
    nmse_g: float = math.nan
    iters_mean: float = math.nan
    iters_max: float = math.nan
    converged_frac: float = math.nan
    flops: float = math.nan
    status: str = "ok"
    wall_time: float = math.nan

    @property
    def skipped(self) -> bool:
        return self.status != "ok"


# ---------------------------------------------------------------------------
# runner
# ---------------------------------------------------------------------------


@dataclass
class _Point:
    index: int
    M_T: int
    M_R: int
    Nbar: int
    Q: int
    K: int
    K1: int | None
    K2: int | None


def _grid(cfg: SweepConfig) -> list[_Point]:
    points = []
    for i, ((mt, mr), (nb, q), entry) in enumerate(
        itertools.product(cfg.antennas, cfg.groups, cfg.k)
    ):
        K, K1, K2 = resolve_k(entry, nb, q)
        points.append(_Point(i, mt, mr, nb, q, K, K1, K2))
    return points


def _stream(*key: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence([int(k) for k in key]))


def _run_point(cfg: SweepConfig, p: _Point) -> list[ResultRow]:
    started = time.perf_counter()
    rotation_seed = int(np.random.SeedSequence([cfg.seed, p.index, 7]).generate_state(1)[0])

    designs, status = {}, {}
    for alg in cfg.algorithms:
        try:
            dcfg = DesignConfig.for_algorithm(
                alg, p.Nbar, p.Q, p.K, K1=p.K1, K2=p.K2,
                theta_kind=cfg.theta_kind, seed=rotation_seed,
            )
            design = build_training_design(dcfg)
        except ValueError as exc:
            status[alg] = f"skipped: {exc}"
            continue
        report = validate_identifiability(design, p.M_T, p.M_R, alg)
        if report.passed:
            designs[alg] = design
            status[alg] = "ok"
        else:
            status[alg] = "skipped: " + "; ".join(report.violations)

    n_snr = len(cfg.snr_db)
    acc = {
        (alg, s): {"nmse": [], "h": [], "g": [], "iters": [], "conv": []}
        for alg in designs
        for s in range(n_snr)
    }
    for trial in range(cfg.trials):
        ch = draw_channels(p.M_T, p.M_R, p.Nbar, p.Q, _stream(cfg.seed, p.index, trial, 0))
        C = combined_channel(ch)
        for s, snr in enumerate(cfg.snr_db):
            pilots = {}
            for alg, design in designs.items():
                rotated = design.config.rotated
                if rotated not in pilots:
                    noise = _stream(cfg.seed, p.index, trial, 1, s, int(rotated))
                    pilots[rotated] = synthesize_pilots(design, ch, snr, noise)
                Y = pilots[rotated]
                if alg == "LS":
                    res = estimate_ls(Y, design)
                elif alg == "BTKF":
                    res = estimate_btkf(Y, design)
                else:
                    opts = cfg.btals_options(_stream(cfg.seed, p.index, trial, 2, s))
                    res = estimate_btals(Y, design, opts)
                a = acc[(alg, s)]
                a["nmse"].append(nmse(res.T_hat, C))
                if res.H_hat is not None:
                    fixed = resolve_scaling(res, ch)
                    a["h"].append(nmse(fixed.H_hat, ch.H))
                    a["g"].append(nmse(fixed.G_hat, ch.G))
                if alg == "BTALS":
                    a["iters"].append(res.iterations)
                    a["conv"].append(res.converged)

    elapsed = time.perf_counter() - started
    rows = []
    for alg in cfg.algorithms:
        cfg_k = designs[alg].config if alg in designs else None
        for s, snr in enumerate(cfg.snr_db):
            row = ResultRow(
                algorithm=alg, mt=p.M_T, mr=p.M_R, nbar=p.Nbar, q=p.Q, n=p.Nbar * p.Q,
                k=p.K,
                k1=cfg_k.K1 if cfg_k else (p.K1 or 0),
                k2=cfg_k.K2 if cfg_k else (p.K2 or 0),
                snr_db=snr, trials=cfg.trials if alg in designs else 0,
                status=status[alg], wall_time=elapsed,
            )
            if alg in designs:
                a = acc[(alg, s)]
                row.nmse = float(np.mean(a["nmse"]))
                row.nmse_db = to_db(row.nmse)
                if a["h"]:
                    row.nmse_h = float(np.mean(a["h"]))
                    row.nmse_g = float(np.mean(a["g"]))
                iters = 1.0
                if a["iters"]:
                    row.iters_mean = float(np.mean(a["iters"]))
                    row.iters_max = float(np.max(a["iters"]))
                    row.converged_frac = float(np.mean(a["conv"]))
                    iters = row.iters_mean
                row.flops = flop_estimate(alg, p.M_T, p.M_R, p.Nbar, p.Q, p.K, iters)
            rows.append(row)
    return rows


def default_threads() -> int:
    try:
        return max(1, int(os.environ.get(THREADS_ENV, "1")))
    except ValueError:
        return 1


def run_sweep(config: SweepConfig, threads: int | None = None) -> list[ResultRow]:
    """Run every grid point and return one row per (point, algorithm, SNR).

    Results depend only on ``config`` (the master seed included), never on the
    thread count: every trial draws from its own ``(seed, point, trial)``
    stream and rows come back in grid order.
    """
    threads = threads or default_threads()
    points = _grid(config)
    if threads == 1:
        chunks = [_run_point(config, p) for p in points]
    else:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            chunks = list(pool.map(lambda p: _run_point(config, p), points))
    return [row for chunk in chunks for row in chunk]


def _fmt(value) -> str:
    if isinstance(value, float):
        if math.isnan(value):
            return "nan"
        if math.isinf(value):
            return "inf" if value > 0 else "-inf"
        return format(value, ".12g")
    return str(value)


def rows_to_csv(rows: list[ResultRow], timing: bool = False) -> str:
    cols = CSV_COLUMNS + (["wall_time"] if timing else [])
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(cols)
    for row in rows:
        d = asdict(row)
        writer.writerow([_fmt(d[c]) for c in cols])
    return buf.getvalue()
