"""Per-hop water-filling: the water-level equation, transmit power, SNR.

The average interference constraint pins one scalar per hop, the water
level lambda. With the chain geometry every hop shares the same path-loss
ratio, so a single solve covers all hops and the law is cached in HopLaw.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .model import SystemConfig, db_to_linear

__all__ = [
    "HopLaw",
    "constraint_lhs",
    "water_level",
    "optimal_power",
    "hop_snr",
    "hop_law",
    "hop_laws",
]


@dataclass(frozen=True)
class HopLaw:
    """Derived per-hop constants for a solved water level.

    shape_param_exact is a = snr_scale*lambda*eta/sigma2 + 1; the
    conditional SNR law is F(g) = 1 - a/(g + a) and the hop stays
    silent with probability 1/a.
    """

    water_level: float
    shape_param_exact: float
    shape_param_approx: float
    zero_prob: float

    def __post_init__(self):
        if not self.water_level > 0.0:
            raise ValueError(f"water_level must be positive, got {self.water_level}")
        if abs(self.shape_param_exact - self.shape_param_approx - 1.0) > 1e-12:
            raise ValueError("shape_param_exact must equal shape_param_approx + 1")
        if abs(self.zero_prob * self.shape_param_exact - 1.0) > 1e-12:
            raise ValueError("zero_prob must equal 1/shape_param_exact")


def constraint_lhs(lam: float, eta: float, sigma2: float, snr_scale: float) -> float:
    """Average interference power produced by the water-filling rule at level lam.

    Equals lam*(eta*lam + sigma2)/(eta*lam + snr_scale*sigma2)
    - (sigma2/eta)*ln(1 + eta*lam/(snr_scale*sigma2)). Vanishes as
    lam -> 0 and grows without bound, so the cap equation has one root.
    """
    if min(lam, eta, sigma2, snr_scale) <= 0.0:
        raise ValueError("constraint_lhs needs all arguments positive")
    el = eta * lam
    return lam * (el + sigma2) / (el + snr_scale * sigma2) - (sigma2 / eta) * math.log1p(
        el / (snr_scale * sigma2)
    )


def _constraint_slope(lam: float, eta: float, sigma2: float, snr_scale: float) -> float:
    # d/dlam of constraint_lhs: eta*lam*(eta*lam + (2*snr_scale - 1)*sigma2) / D^2.
    den = eta * lam + snr_scale * sigma2
    return eta * lam * (eta * lam + (2.0 * snr_scale - 1.0) * sigma2) / (den * den)


def water_level(eta: float, sigma2: float, snr_scale: float, w_db: float) -> float:
    """Solve constraint_lhs(lam) = 10^(w_db/10) for the water level lam.

    Bisection confines the root, a few Newton steps polish it; the
    returned level has relative residual below 1e-12. The nominal
    bracket cap + (sigma2/eta)*(1 + ln(1 + 10*eta*cap/(snr_scale*sigma2)))
    can fall short when snr_scale is large, in which case it is expanded
    geometrically before refinement.
    """
    if min(eta, sigma2, snr_scale) <= 0.0:
        raise ValueError("water_level needs eta, sigma2, snr_scale positive")
    cap = db_to_linear(w_db)
    hi = cap + (sigma2 / eta) * (1.0 + math.log1p(eta * cap * 10.0 / (snr_scale * sigma2)))
    for _ in range(200):
        if constraint_lhs(hi, eta, sigma2, snr_scale) >= cap:
            break
        hi *= 2.0
    else:
        raise RuntimeError(
            "internal error: water_level bracket expansion failed although "
            "constraint_lhs is unbounded and increasing at scale"
        )
    lo = 0.0
    for _ in range(60):
        mid = 0.5 * (lo + hi)
        if mid <= lo or mid >= hi:
            break
        if constraint_lhs(mid, eta, sigma2, snr_scale) < cap:
            lo = mid
        else:
            hi = mid
        if hi - lo <= 1e-3 * hi:
            break
    lam = 0.5 * (lo + hi)
    for _ in range(40):
        resid = constraint_lhs(lam, eta, sigma2, snr_scale) - cap
        if abs(resid) <= 1e-13 * cap:
            break
        slope = _constraint_slope(lam, eta, sigma2, snr_scale)
        step = resid / slope if slope > 0.0 else 0.0
        nxt = lam - step
        if not lo < nxt < hi or step == 0.0:
            nxt = 0.5 * (lo + hi)    # Newton left the bracket, fall back
        if constraint_lhs(nxt, eta, sigma2, snr_scale) < cap:
            lo = nxt
        else:
            hi = nxt
        lam = nxt
    return lam


def optimal_power(
    lam: float,
    f2: float,
    h2: float,
    d: float,
    l: float,
    sigma2: float,
    snr_scale: float,
    epsilon: float,
) -> float:
    """Water-filling transmit power [lam/(l^-eps * h2) - sigma2/(snr * d^-eps * f2)]^+.

    Zero exactly when the desired-channel gain falls below
    sigma2*h2/(snr_scale*lam*eta) with eta = (l/d)^epsilon.
    """
    if min(lam, f2, h2, d, l, sigma2, snr_scale, epsilon) <= 0.0:
        raise ValueError("optimal_power needs all arguments positive")
    level = lam / (l ** (-epsilon) * h2)
    floor = sigma2 / (snr_scale * d ** (-epsilon) * f2)
    return max(level - floor, 0.0)


def hop_snr(law: HopLaw, f2: float, h2: float) -> float:
    """Received SNR [a0 * f2/h2 - 1]^+ for one hop under law."""
    if min(f2, h2) <= 0.0:
        raise ValueError("hop_snr needs positive channel gains")
    return max(law.shape_param_approx * f2 / h2 - 1.0, 0.0)


def hop_law(eta: float, sigma2: float, snr_scale: float, w_db: float) -> HopLaw:
    """Solve the water level and bundle the derived per-hop constants."""
    lam = water_level(eta, sigma2, snr_scale, w_db)
    a0 = snr_scale * lam * eta / sigma2
    return HopLaw(
        water_level=lam,
        shape_param_exact=a0 + 1.0,
        shape_param_approx=a0,
        zero_prob=1.0 / (a0 + 1.0),
    )


def hop_laws(cfg: SystemConfig) -> list[HopLaw]:
    """One HopLaw per hop. The chain geometry gives every hop the same
    path-loss ratio, so the laws coincide; the list form keeps call
    sites indifferent to that."""
    law = hop_law(
        cfg.path_loss_ratio,
        cfg.noise_variance,
        cfg.avg_snr_scale,
        cfg.interference_cap_db,
    )
    return [law] * cfg.hop_count
