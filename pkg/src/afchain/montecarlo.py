"""Reproducible trial engine: fading draws, per-trial SNRs, estimators.

Random numbers come from a counter-based keyed hash rather than a
sequential generator: every draw is a pure function of
(seed, trial, hop, role, attempt). That makes any trial recomputable
in isolation, lets conditioning redraws advance a per-hop attempt
counter without disturbing other streams, and makes the estimators
bit-identical for any worker count.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .model import SystemConfig, Topology
from .specfun import NumericalError
from .waterfill import HopLaw

__all__ = [
    "ChannelSample",
    "TrialResult",
    "Estimate",
    "EmpiricalCdf",
    "sample_hop",
    "draw_channel_pairs",
    "trial_channels",
    "run_trial",
    "estimate_outage",
    "estimate_rate",
    "e2e_snr_samples",
    "hop_snr_samples",
    "empirical_cdf",
]

ROLE_DESIRED = 0
ROLE_INTERFERENCE = 1

# SplitMix64 increment and the Stafford mix13 finalizer constants.
_PHI = np.uint64(0x9E3779B97F4A7C15)
_MIX1 = np.uint64(0xBF58476D1CE4E5B9)
_MIX2 = np.uint64(0x94D049BB133111EB)
_U64_MASK = 0xFFFFFFFFFFFFFFFF

_BLOCK = 1 << 16          # trials per reduction block; fixed, part of the contract
_MAX_ATTEMPTS = 64        # conditioning redraw ceiling; each retry hits with prob 1 - 1/a


def _mix(h: np.ndarray) -> np.ndarray:
    h = (h ^ (h >> np.uint64(30))) * _MIX1
    h = (h ^ (h >> np.uint64(27))) * _MIX2
    return h ^ (h >> np.uint64(31))


def _uniform(seed: int, trials: np.ndarray, hop: int, role: int, attempt: int) -> np.ndarray:
    """u in [0, 1) keyed by the full stream tuple; trials is a uint64 array."""
    with np.errstate(over="ignore"):
        h = _mix(trials * _PHI + np.uint64(seed & _U64_MASK))
        h = _mix(h + _PHI * np.uint64(hop & _U64_MASK))
        h = _mix(h + _PHI * np.uint64(role & _U64_MASK))
        h = _mix(h + _PHI * np.uint64(attempt & _U64_MASK))
    return (h >> np.uint64(11)) * 2.0 ** -53


def _exponential(seed, trials, hop, role, attempt) -> np.ndarray:
    # Unit-mean exponential by inversion; u = 0 maps to 0.
    return -np.log1p(-_uniform(seed, trials, hop, role, attempt))


def sample_hop(stream_key: tuple) -> float:
    """One unit-mean exponential gain draw for stream key (seed, trial, hop, role)."""
    seed, trial, hop, role = stream_key
    t = np.asarray([trial], dtype=np.uint64)
    return float(_exponential(seed, t, hop, role, 0)[0])


def draw_channel_pairs(seed: int, trials: int, hop: int) -> tuple[np.ndarray, np.ndarray]:
    """First-attempt (f2, h2) gain pairs for a hop, one row per trial."""
    t = np.arange(trials, dtype=np.uint64)
    f2 = _exponential(seed, t, hop, ROLE_DESIRED, 0)
    h2 = _exponential(seed, t, hop, ROLE_INTERFERENCE, 0)
    return f2, h2


@dataclass(frozen=True)
class ChannelSample:
    """Per-hop fading power pairs of one trial."""

    f2: tuple
    h2: tuple


def trial_channels(hop_count: int, key: tuple) -> ChannelSample:
    """First-attempt fading pairs of one trial across all hops."""
    seed, trial = key
    t = np.asarray([trial], dtype=np.uint64)
    hops = range(1, hop_count + 1)
    return ChannelSample(
        f2=tuple(float(_exponential(seed, t, k, ROLE_DESIRED, 0)[0]) for k in hops),
        h2=tuple(float(_exponential(seed, t, k, ROLE_INTERFERENCE, 0)[0]) for k in hops),
    )


@dataclass(frozen=True)
class TrialResult:
    """Per-hop SNRs with the end-to-end value and its min-based bounds."""

    per_hop_snr: tuple
    e2e_snr: float
    bound_lower: float
    bound_upper: float


@dataclass(frozen=True)
class Estimate:
    """Point estimate with its standard error and provenance."""

    value: float
    std_error: float
    trials: int
    seed: int


def _hop_snr_block(law: HopLaw, mode: str, seed: int, hop: int, t: np.ndarray) -> np.ndarray:
    a0 = law.shape_param_approx
    f2 = _exponential(seed, t, hop, ROLE_DESIRED, 0)
    h2 = _exponential(seed, t, hop, ROLE_INTERFERENCE, 0)
    g = a0 * f2 / h2 - 1.0
    if mode == "physical":
        return np.maximum(g, 0.0)
    # Conditioned mode: redraw silent hops on their own attempt layers.
    idx = np.nonzero(g <= 0.0)[0]
    attempt = 1
    while idx.size:
        if attempt > _MAX_ATTEMPTS:
            raise NumericalError(
                f"hop stayed silent for {_MAX_ATTEMPTS} redraws; zero_prob={law.zero_prob}"
            )
        f2r = _exponential(seed, t[idx], hop, ROLE_DESIRED, attempt)
        h2r = _exponential(seed, t[idx], hop, ROLE_INTERFERENCE, attempt)
        gr = a0 * f2r / h2r - 1.0
        ok = gr > 0.0
        g[idx[ok]] = gr[ok]
        idx = idx[~ok]
        attempt += 1
    return g


def _snr_matrix(laws, mode: str, seed: int, start: int, stop: int) -> np.ndarray:
    t = np.arange(start, stop, dtype=np.uint64)
    out = np.empty((stop - start, len(laws)))
    for k, law in enumerate(laws, start=1):
        out[:, k - 1] = _hop_snr_block(law, mode, seed, k, t)
    return out


def _combine(snrs: np.ndarray) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """(e2e, lower, upper) from a (n, K) per-hop SNR matrix.

    A silent hop (SNR 0) forces the end-to-end SNR to 0. The bounds
    come from the minimum: upper = min_k gamma_k, lower = upper / K.
    """
    k = snrs.shape[1]
    with np.errstate(divide="ignore"):
        e2e = 1.0 / np.sum(1.0 / snrs, axis=1)
    upper = snrs.min(axis=1)
    return e2e, upper / k, upper


def _validate_run_args(cfg: SystemConfig, topo, laws) -> None:
    if len(laws) != cfg.hop_count:
        raise ValueError(f"need {cfg.hop_count} hop laws, got {len(laws)}")
    if topo is not None and topo.hop_count != cfg.hop_count:
        raise ValueError(
            f"topology has {topo.hop_count} hops but config expects {cfg.hop_count}"
        )


def run_trial(cfg: SystemConfig, topo: Topology, laws, key: tuple) -> TrialResult:
    """Single trial for stream key (seed, trial); bit-identical to batch runs."""
    _validate_run_args(cfg, topo, laws)
    seed, trial = key
    snrs = _snr_matrix(laws, cfg.zero_atom_mode, seed, trial, trial + 1)
    e2e, lower, upper = _combine(snrs)
    return TrialResult(
        per_hop_snr=tuple(float(v) for v in snrs[0]),
        e2e_snr=float(e2e[0]),
        bound_lower=float(lower[0]),
        bound_upper=float(upper[0]),
    )


def _block_ranges(trials: int):
    return [(lo, min(lo + _BLOCK, trials)) for lo in range(0, trials, _BLOCK)]


def _map_blocks(work, trials: int, workers: int) -> list:
    """Run work(lo, hi) over fixed trial blocks; results in block order."""
    ranges = _block_ranges(trials)
    if workers <= 1 or len(ranges) == 1:
        return [work(lo, hi) for lo, hi in ranges]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(lambda r: work(*r), ranges))


def estimate_outage(
    cfg: SystemConfig,
    topo: Topology,
    laws,
    gamma_th: float,
    trials: int,
    seed: int,
    workers: int = 1,
) -> Estimate:
    """Fraction of trials with end-to-end SNR below gamma_th, binomial errors.

    Deterministic for fixed (seed, trials) at any worker count: each
    fixed 2^16-trial block is counted independently and the integer
    counts are summed.
    """
    _validate_run_args(cfg, topo, laws)
    if not gamma_th > 0.0:
        raise ValueError(f"gamma_th must be positive, got {gamma_th}")
    if trials < 1:
        raise ValueError(f"trials must be >= 1, got {trials}")

    def work(lo, hi):
        e2e, _, _ = _combine(_snr_matrix(laws, cfg.zero_atom_mode, seed, lo, hi))
        return int(np.count_nonzero(e2e < gamma_th))

    hits = sum(_map_blocks(work, trials, workers))
    p = hits / trials
    return Estimate(p, np.sqrt(p * (1.0 - p) / trials), trials, seed)


def estimate_rate(
    cfg: SystemConfig,
    topo: Topology,
    laws,
    trials: int,
    seed: int,
    workers: int = 1,
) -> Estimate:
    """Mean of (1/K) log2(1 + e2e SNR) with its standard error.

    Per-block partial sums are reduced in block order, which keeps the
    result bit-identical across worker counts.
    """
    _validate_run_args(cfg, topo, laws)
    if trials < 1:
        raise ValueError(f"trials must be >= 1, got {trials}")
    k = cfg.hop_count

    def work(lo, hi):
        e2e, _, _ = _combine(_snr_matrix(laws, cfg.zero_atom_mode, seed, lo, hi))
        r = np.log2(1.0 + e2e) / k
        return float(np.sum(r)), float(np.sum(r * r))

    s1 = 0.0
    s2 = 0.0
    for b1, b2 in _map_blocks(work, trials, workers):
        s1 += b1
        s2 += b2
    mean = s1 / trials
    var = max(s2 / trials - mean * mean, 0.0)
    return Estimate(mean, np.sqrt(var / trials), trials, seed)


def e2e_snr_samples(
    cfg: SystemConfig, topo: Topology, laws, trials: int, seed: int
) -> np.ndarray:
    """End-to-end SNR draws, one per trial, in trial order."""
    _validate_run_args(cfg, topo, laws)
    parts = [
        _combine(_snr_matrix(laws, cfg.zero_atom_mode, seed, lo, hi))[0]
        for lo, hi in _block_ranges(trials)
    ]
    return np.concatenate(parts)


def hop_snr_samples(
    law: HopLaw, trials: int, seed: int, mode: str = "conditioned", hop: int = 1
) -> np.ndarray:
    """Per-hop SNR draws under one law, for distribution checks."""
    parts = [
        _hop_snr_block(law, mode, seed, hop, np.arange(lo, hi, dtype=np.uint64))
        for lo, hi in _block_ranges(trials)
    ]
    return np.concatenate(parts)


class EmpiricalCdf:
    """Right-continuous step CDF of a sample."""

    def __init__(self, samples):
        values = np.sort(np.asarray(samples, dtype=float))
        if values.size == 0:
            raise ValueError("empirical_cdf needs a nonempty sample")
        self.values = values
        self.n = values.size

    def __call__(self, x):
        return np.searchsorted(self.values, x, side="right") / self.n

    def table(self) -> list[tuple[float, float]]:
        """Sorted (value, rank/n) pairs."""
        return [(float(v), (i + 1) / self.n) for i, v in enumerate(self.values)]


def empirical_cdf(samples) -> EmpiricalCdf:
    """Step-function CDF table of the sample, evaluable at any point."""
    return EmpiricalCdf(samples)
