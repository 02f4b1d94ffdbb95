"""Desk-scale presets for the published figure grids.

Geometries follow the published experiments (``N = 64`` elements). Trial
counts are reduced. Antenna counts are not given for every published figure;
the values chosen here are listed in the README.
"""

from __future__ import annotations

from .experiments import SweepConfig, flop_estimate

SNR_0_30 = [0.0, 5.0, 10.0, 15.0, 20.0, 25.0, 30.0]
ALL_GROUPS_64 = [(64, 1), (32, 2), (16, 4), (8, 8), (4, 16), (2, 32), (1, 64)]

PRESETS: dict[str, dict] = {
    # BTKF vs LS at a fixed training length (the minimum for Nbar = 4)
    "fig4": dict(
        antennas=[(2, 2)], groups=[(1, 64), (2, 32), (4, 16)], k=[256],
        snr_db=SNR_0_30, algorithms=["LS", "BTKF"], trials=20,
    ),
    # BTKF vs LS at each configuration's minimum training length
    "fig5": dict(
        antennas=[(2, 2)], groups=[(1, 64), (2, 32), (4, 16), (8, 8)], k=["min"],
        snr_db=SNR_0_30, algorithms=["LS", "BTKF"], trials=20,
    ),
    # BTKF vs LS for several antenna counts, Nbar = 4, Q = 16
    "fig6": dict(
        antennas=[(2, 2), (4, 4), (8, 8)], groups=[(4, 16)], k=[256],
        snr_db=SNR_0_30, algorithms=["LS", "BTKF"], trials=20,
    ),
    # BTALS vs training length at 20 dB
    "fig7": dict(
        antennas=[(8, 8)], groups=[(1, 64), (4, 16), (8, 8), (16, 4), (32, 2), (64, 1)],
        k=[24, 32, 48, 64, 96, 128], snr_db=[20.0], algorithms=["BTALS"], trials=5,
    ),
    # BTALS vs number of groups, K = 64, 20 dB
    "fig8": dict(
        antennas=[(2, 2), (4, 4), (8, 8)], groups=ALL_GROUPS_64, k=[64],
        snr_db=[20.0], algorithms=["BTALS"], trials=5,
    ),
    # fig9 (complexity) is analytic, see complexity_rows()
    # BTALS vs SNR with K = N/2 = 32
    "fig10": dict(
        antennas=[(4, 4), (8, 8)], groups=[(1, 64), (4, 16), (8, 8), (16, 4), (64, 1)],
        k=[32], snr_db=SNR_0_30, algorithms=["BTALS"], trials=5,
    ),
    # BTALS iteration count vs training length
    "fig11": dict(
        antennas=[(8, 8)], groups=[(1, 64), (4, 16), (16, 4), (64, 1)],
        k=[16, 24, 32, 48, 64, 128], snr_db=[20.0], algorithms=["BTALS"], trials=5,
    ),
}

FIGURES = sorted([*PRESETS, "fig9"], key=lambda s: int(s[3:]))


def preset(name: str, **overrides) -> SweepConfig:
    if name not in PRESETS:
        raise KeyError(f"no sweep preset {name!r}; available: {', '.join(sorted(PRESETS))}")
    data = dict(PRESETS[name])
    data.update({k: v for k, v in overrides.items() if v is not None})
    return SweepConfig(**data)


COMPLEXITY_COLUMNS = ["algorithm", "mt", "mr", "nbar", "q", "k", "iterations", "flops"]


def complexity_rows(M_T: int = 4, M_R: int = 4, N: int = 64, btals_K: int = 32, iterations: int = 200):
    """Operation counts vs group size at fixed ``N`` (LS/BTKF at ``K = Nbar^2 Q``)."""
    rows = []
    nbar = 1
    while nbar <= N:
        Q = N // nbar
        for alg in ("LS", "BTKF", "BTALS"):
            K = btals_K if alg == "BTALS" else nbar * nbar * Q
            I = iterations if alg == "BTALS" else 1
            rows.append([alg, M_T, M_R, nbar, Q, K, I, flop_estimate(alg, M_T, M_R, nbar, Q, K, I)])
        nbar *= 2
    return rows
