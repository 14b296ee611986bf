"""Scenario configuration, unit helpers, and the linear-chain geometry.

The geometry places secondary nodes SU_0 .. SU_K on a straight line
with the primary receiver at unit perpendicular distance from the
middle node SU_{K/2}. Every hop then satisfies the same large-scale
path-loss ratio eta = (l_k / d_k)^epsilon, which is what makes the
per-hop SNR laws identically distributed.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass

__all__ = [
    "SystemConfig",
    "RunSettings",
    "Topology",
    "build_topology",
    "db_to_linear",
    "linear_to_db",
    "parse_config",
    "load_config",
    "DEFAULT_CONFIG_DOC",
]

ZERO_ATOM_MODES = ("conditioned", "physical")

# Flat JSON schema: key -> default. Strict parsing, unknown keys rejected.
DEFAULT_CONFIG_DOC = {
    "K": 4,
    "epsilon": 4.0,
    "eta": 10.0,
    "sigma2": 1.0,
    "W_dB": 10.0,
    "snr_dB": 0.0,
    "p": 2.0,
    "zero_atom_mode": "conditioned",
    "trials": 1_000_000,
    "seed": 12345,
    "gamma_th_dB": 0.0,
}


def db_to_linear(x_db: float) -> float:
    """10^(x/10); inverse of linear_to_db."""
    return 10.0 ** (x_db / 10.0)


def linear_to_db(x: float) -> float:
    if not x > 0.0:
        raise ValueError(f"linear_to_db needs x > 0, got {x}")
    return 10.0 * math.log10(x)


@dataclass(frozen=True)
class SystemConfig:
    """All scenario scalars for one relaying chain.

    avg_snr_scale is the linear symbol-energy scale applied before
    transmission; interference_cap_db is the tolerable average
    interference power in dB over the noise power.
    """

    hop_count: int
    path_loss_exponent: float = 4.0
    path_loss_ratio: float = 10.0
    noise_variance: float = 1.0
    interference_cap_db: float = 10.0
    avg_snr_scale: float = 1.0
    constellation_const: float = 2.0
    zero_atom_mode: str = "conditioned"

    def __post_init__(self):
        if not (isinstance(self.hop_count, int) and self.hop_count >= 1):
            raise ValueError(f"hop_count must be a positive integer, got {self.hop_count}")
        if not self.path_loss_exponent >= 2.0:
            raise ValueError(f"path_loss_exponent must be >= 2, got {self.path_loss_exponent}")
        for name in ("path_loss_ratio", "noise_variance", "avg_snr_scale", "constellation_const"):
            if not getattr(self, name) > 0.0:
                raise ValueError(f"{name} must be positive, got {getattr(self, name)}")
        if self.zero_atom_mode not in ZERO_ATOM_MODES:
            raise ValueError(
                f"zero_atom_mode must be one of {ZERO_ATOM_MODES}, got {self.zero_atom_mode!r}"
            )

    @property
    def interference_cap(self) -> float:
        """Tolerable average interference power in linear units."""
        return db_to_linear(self.interference_cap_db)


@dataclass(frozen=True)
class RunSettings:
    """Estimation settings that ride along with a config document."""

    trials: int
    seed: int
    gamma_th_db: float

    def __post_init__(self):
        if not (isinstance(self.trials, int) and self.trials >= 1):
            raise ValueError(f"trials must be a positive integer, got {self.trials}")
        if not isinstance(self.seed, int):
            raise ValueError(f"seed must be an integer, got {self.seed}")

    @property
    def gamma_th(self) -> float:
        return db_to_linear(self.gamma_th_db)


@dataclass(frozen=True)
class Topology:
    """Per-hop desired-link and interference-link distances, 1-based hops."""

    desired: tuple
    interference: tuple

    def __post_init__(self):
        if len(self.desired) != len(self.interference):
            raise ValueError("desired and interference must have equal length")
        if not self.desired:
            raise ValueError("topology needs at least one hop")
        if any(d <= 0 for d in self.desired) or any(l <= 0 for l in self.interference):
            raise ValueError("all distances must be positive")

    @property
    def hop_count(self) -> int:
        return len(self.desired)


def build_topology(hop_count: int, eta: float, epsilon: float) -> Topology:
    """Chain geometry with the primary receiver above the middle node.

    Node offsets along the line are chained so that every hop meets
    d_k = l_k * eta^(-1/epsilon) exactly, where l_k is the transmitter's
    distance to the primary receiver. Rightward of SU_{K/2} the recursion
    is explicit; leftward it needs the positive root of a quadratic, and
    the larger root is the one that keeps the nodes in line order.

    Raises
    ------
    ValueError
        If hop_count is odd (no middle node), epsilon < 2, or eta <= 1
        (the leftward recursion has no positive solution).
    """
    if not (isinstance(hop_count, int) and hop_count >= 2):
        raise ValueError(f"hop_count must be an integer >= 2, got {hop_count}")
    if hop_count % 2 != 0:
        raise ValueError(f"unsupported layout: hop_count must be even, got {hop_count}")
    if not epsilon >= 2.0:
        raise ValueError(f"epsilon must be >= 2, got {epsilon}")
    if not eta > 0.0:
        raise ValueError(f"eta must be positive, got {eta}")
    beta = eta ** (-1.0 / epsilon)
    if beta >= 1.0:
        raise ValueError(
            f"degenerate geometry: eta = {eta} <= 1 leaves the leftward recursion unsolvable"
        )
    k_mid = hop_count // 2
    desired = [0.0] * (hop_count + 1)        # index 1..K
    interference = [0.0] * (hop_count + 1)

    # Rightward hops k = K/2+1 .. K: transmitter offset x >= 0 known,
    # l = sqrt(1 + x^2) starting from l_{K/2+1} = 1 at x = 0.
    x = 0.0
    for k in range(k_mid + 1, hop_count + 1):
        l = math.sqrt(1.0 + x * x)
        d = beta * l
        desired[k] = d
        interference[k] = l
        x += d

    # Leftward hops k = K/2 .. 1: offsets grow leftward from x_{K/2} = 0;
    # x_prev - x = beta * sqrt(1 + x_prev^2), larger quadratic root.
    x = 0.0
    for k in range(k_mid, 0, -1):
        x_prev = (x + beta * math.sqrt(1.0 + x * x - beta * beta)) / (1.0 - beta * beta)
        desired[k] = x_prev - x
        interference[k] = math.sqrt(1.0 + x_prev * x_prev)
        x = x_prev

    topo = Topology(tuple(desired[1:]), tuple(interference[1:]))
    for d, l in zip(topo.desired, topo.interference):
        ratio = (l / d) ** epsilon
        if abs(ratio - eta) > 1e-9 * eta:
            raise AssertionError(f"geometry broke the path-loss ratio: {ratio} != {eta}")
    return topo


def parse_config(doc: dict) -> tuple[SystemConfig, RunSettings]:
    """Strict flat-JSON config: unknown keys are rejected, missing keys default."""
    if not isinstance(doc, dict):
        raise ValueError(f"config document must be an object, got {type(doc).__name__}")
    unknown = sorted(set(doc) - set(DEFAULT_CONFIG_DOC))
    if unknown:
        raise ValueError(f"unknown config keys: {', '.join(unknown)}")
    merged = {**DEFAULT_CONFIG_DOC, **doc}
    for key in ("K", "trials", "seed"):
        value = merged[key]
        if isinstance(value, bool) or not isinstance(value, int):
            raise ValueError(f"config key {key} must be an integer, got {value!r}")
    for key in ("epsilon", "eta", "sigma2", "W_dB", "snr_dB", "p", "gamma_th_dB"):
        value = merged[key]
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            raise ValueError(f"config key {key} must be a number, got {value!r}")
    cfg = SystemConfig(
        hop_count=merged["K"],
        path_loss_exponent=float(merged["epsilon"]),
        path_loss_ratio=float(merged["eta"]),
        noise_variance=float(merged["sigma2"]),
        interference_cap_db=float(merged["W_dB"]),
        avg_snr_scale=db_to_linear(float(merged["snr_dB"])),
        constellation_const=float(merged["p"]),
        zero_atom_mode=merged["zero_atom_mode"],
    )
    run = RunSettings(
        trials=merged["trials"],
        seed=merged["seed"],
        gamma_th_db=float(merged["gamma_th_dB"]),
    )
    return cfg, run


def load_config(path) -> tuple[SystemConfig, RunSettings]:
    """Read and parse a strict flat-JSON config file."""
    with open(path, "r", encoding="utf-8") as fh:
        try:
            doc = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ValueError(f"config file {path} is not valid JSON: {exc}") from exc
    return parse_config(doc)
