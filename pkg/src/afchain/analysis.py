"""Distributions, bounds, limits, gains, and rate expressions for the chain.

Everything here is a pure function of the per-hop shape parameters (and
the system constants they derive from). Exact finite-hop formulas use
the exact shape parameter a = snr_scale*lam*eta/sigma2 + 1; the limiting
and gain expressions default to the same but can be asked for the
first-order variant that drops the +1.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np
from scipy import special as _sp

from . import specfun
from .specfun import NumericalError, hyp2f1_113, tricomi_psi_1_0

__all__ = [
    "GainExpansion",
    "LimitNormalization",
    "hop_cdf",
    "mgf_inv_hop",
    "e2e_cdf",
    "e2e_cdf_k2",
    "e2e_mgf",
    "bound_cdf",
    "limiting_cdf",
    "normalizer",
    "outage_bounds",
    "gains",
    "rate_bound",
    "rate_approx",
    "rate_k2",
]

_LN2 = math.log(2.0)

# Gauss-Legendre rule reused for every oscillation lobe.
_GL_X, _GL_W = np.polynomial.legendre.leggauss(24)
_j1_zeros_cache: list[float] = []


@dataclass(frozen=True)
class GainExpansion:
    """Small-SNR expansion of the end-to-end outage law.

    The density behaves like b*gamma**t as gamma -> 0; the diversity
    gain is t + 1 and the coding gain scales the outage curve along the
    interference-cap axis.
    """

    t: float
    b: float
    diversity_gain: float
    coding_gain: float

    def __post_init__(self):
        if self.t < 0.0 or not self.b > 0.0 or not self.coding_gain > 0.0:
            raise ValueError(f"invalid gain expansion {self}")
        if self.diversity_gain != self.t + 1.0:
            raise ValueError(
                f"diversity gain {self.diversity_gain} != t + 1 with t={self.t}"
            )


@dataclass(frozen=True)
class LimitNormalization:
    """Location c_k and scale d_k normalizing a bound toward its limit law."""

    c_k: float
    d_k: float

    def __post_init__(self):
        if not math.isfinite(self.c_k) or not self.d_k > 0.0:
            raise ValueError(f"invalid normalization {self}")


def _check_shape(a: float, name: str = "a") -> float:
    a = float(a)
    if not a > 1.0:
        raise ValueError(f"{name} must exceed 1, got {a}")
    return a


def _check_shapes(a) -> list[float]:
    out = [_check_shape(v, f"a[{i}]") for i, v in enumerate(a)]
    if not out:
        raise ValueError("need at least one hop shape parameter")
    return out


def hop_cdf(gamma: float, a: float) -> float:
    """Per-hop conditional SNR CDF, 1 - a/(gamma + a)."""
    _check_shape(a)
    if gamma < 0.0:
        raise ValueError(f"gamma must be nonnegative, got {gamma}")
    return gamma / (gamma + a)


def mgf_inv_hop(s: float, a: float) -> float:
    """Transform E[exp(-s/gamma_k)] of one hop's inverse SNR."""
    _check_shape(a)
    if not s > 0.0:
        raise ValueError(f"s must be positive, got {s}")
    return tricomi_psi_1_0(s / a)


def e2e_cdf(gamma: float, a, nodes: int = 32) -> float:
    """End-to-end SNR CDF by contour inversion of the inverse-SNR transform.

    The end-to-end SNR is the harmonic-style combination of the hop
    SNRs, so its CDF is one minus the CDF of sum(1/gamma_k) at 1/gamma.
    That sum's transform is the product of the per-hop factors, which
    the fixed-Talbot contour inverts.

    Tiny negative artifacts of the inversion (above -1e-7) are clamped
    to zero; anything worse raises NumericalError.
    """
    shapes = _check_shapes(a)
    if not gamma > 0.0:
        raise ValueError(f"gamma must be positive, got {gamma}")
    t = 1.0 / gamma
    if t == 0.0:
        return 1.0

    def transform(s: complex) -> complex:
        prod = complex(1.0)
        for ak in shapes:
            prod *= specfun._psi_1_0_complex(s / ak)
        return prod / s

    raw = specfun._talbot(transform, t, nodes)
    if not math.isfinite(raw):
        raise NumericalError(f"inversion produced {raw} at gamma={gamma}")
    if raw < -1e-6:
        raise NumericalError(f"inversion undershot to {raw} at gamma={gamma}")
    val = 1.0 - raw
    if val < -1e-7:
        raise NumericalError(f"inversion artifact {val} at gamma={gamma}")
    return min(max(val, 0.0), 1.0)


def _hyp_g_from_compl(u: float) -> float:
    # 2F1(1,1;3;x) evaluated from the complement u = 1 - x, which the
    # callers can form without cancellation; u -> 0 is the gamma -> 0 corner.
    if u < 0.0:
        raise ValueError(f"complement argument must be nonnegative, got {u}")
    if u == 0.0:
        return 2.0
    if u >= 0.95:
        return hyp2f1_113(1.0 - u)
    omu = 1.0 - u
    return 2.0 * (omu + u * math.log(u)) / (omu * omu)


def e2e_cdf_k2(gamma: float, a1: float, a2: float) -> float:
    """Closed-form end-to-end SNR CDF for a two-hop chain."""
    a1 = _check_shape(a1, "a1")
    a2 = _check_shape(a2, "a2")
    if gamma < 0.0:
        raise ValueError(f"gamma must be nonnegative, got {gamma}")
    s1 = a1 / (gamma + a1)
    s2 = a2 / (gamma + a2)
    u = (gamma / (gamma + a1)) * (gamma / (gamma + a2))
    survival = 0.5 * s1 * s2 * _hyp_g_from_compl(u)
    return min(max(1.0 - survival, 0.0), 1.0)


def _j1_zero(n: int) -> float:
    if len(_j1_zeros_cache) < n:
        _j1_zeros_cache[:] = _sp.jn_zeros(1, max(2 * n, 200)).tolist()
    return _j1_zeros_cache[n - 1]


def _accelerated(partials: list[float]) -> float:
    # Repeated averaging of the trailing partial sums; the lobe sums
    # alternate, so this is the classic alternating-series transform.
    row = partials[-40:]
    while len(row) > 1:
        row = [0.5 * (row[i] + row[i + 1]) for i in range(len(row) - 1)]
    return row[0]


def e2e_mgf(s: float, a, tol: float = 1e-9, max_lobes: int = 200) -> float:
    """Transform E[exp(-s gamma_e2e)] by oscillatory quadrature.

    Integrates the Bessel-weighted product kernel lobe by lobe between
    consecutive zeros of the weight and accelerates the alternating
    lobe sums. Raises NumericalError if the tail has not settled after
    max_lobes lobes.
    """
    shapes = _check_shapes(a)
    if not s > 0.0:
        raise ValueError(f"s must be positive, got {s}")

    def integrand(y: float) -> float:
        val = specfun.bessel_j1(y)
        scale = y * y / (4.0 * s)
        for ak in shapes:
            val *= tricomi_psi_1_0(scale / ak)
        return val

    def panel(lo: float, hi: float) -> float:
        mid = 0.5 * (lo + hi)
        half = 0.5 * (hi - lo)
        return half * math.fsum(
            w * integrand(mid + half * x) for x, w in zip(_GL_X, _GL_W)
        )

    # The product kernel dies on the scale of the fastest-decaying hop
    # factor; subdivide the first lobe when that scale is narrower.
    first = _j1_zero(1)
    width = math.sqrt(12.0 * s * min(shapes))
    panels = 1 if width >= first else min(64, math.ceil(first / width))
    total = math.fsum(
        panel(first * i / panels, first * (i + 1) / panels) for i in range(panels)
    )

    partials = [total]
    prev = None
    for n in range(2, max_lobes + 1):
        total += panel(_j1_zero(n - 1), _j1_zero(n))
        partials.append(total)
        if n < 4:
            continue
        est = _accelerated(partials)
        if prev is not None and abs(est - prev) <= tol:
            return min(max(1.0 - est, 0.0), 1.0)
        prev = est
    raise NumericalError(
        f"lobe sums did not settle within {max_lobes} lobes at s={s}"
    )


def bound_cdf(gamma: float, a, which: str) -> float:
    """CDF of the end-to-end SNR bound built from the hop minimum.

    which="upper" is the minimum itself (the SNR upper bound, whose CDF
    sits below the true end-to-end CDF); which="lower" is the minimum
    divided by the hop count, whose CDF sits above it.
    """
    shapes = _check_shapes(a)
    if gamma < 0.0:
        raise ValueError(f"gamma must be nonnegative, got {gamma}")
    if which not in ("upper", "lower"):
        raise ValueError(f"which must be 'upper' or 'lower', got {which!r}")
    mult = 1.0 if which == "upper" else float(len(shapes))
    acc = math.fsum(math.log1p(mult * gamma / ak) for ak in shapes)
    return -math.expm1(-acc)


def limiting_cdf(gamma_norm: float) -> float:
    """Limit law 1 - exp(-u) of the normalized SNR bounds."""
    if gamma_norm < 0.0:
        raise ValueError(f"normalized gamma must be nonnegative, got {gamma_norm}")
    return -math.expm1(-gamma_norm)


def normalizer(
    hop_count: int,
    lam: float,
    eta: float,
    sigma2: float,
    snr_scale: float,
    which: str = "upper",
    shape: str = "exact",
) -> LimitNormalization:
    """Location and scale carrying a bound CDF onto the limit law.

    shape="exact" uses a = snr_scale*lam*eta/sigma2 + 1; shape="approx"
    drops the +1 (a first-order simplification, sub-1% at the usual
    operating points).
    """
    if hop_count < 2:
        raise ValueError(f"hop count must be at least 2, got {hop_count}")
    if which not in ("upper", "lower"):
        raise ValueError(f"which must be 'upper' or 'lower', got {which!r}")
    if shape not in ("exact", "approx"):
        raise ValueError(f"shape must be 'exact' or 'approx', got {shape!r}")
    if not (lam > 0.0 and eta > 0.0 and sigma2 > 0.0 and snr_scale > 0.0):
        raise ValueError("lam, eta, sigma2, snr_scale must all be positive")
    a = snr_scale * lam * eta / sigma2
    if shape == "exact":
        a += 1.0
    d = a / (hop_count - 1) if which == "upper" else a / (hop_count * (hop_count - 1))
    return LimitNormalization(c_k=0.0, d_k=d)


def outage_bounds(gamma_th: float, hop_count: int, a: float) -> tuple[float, float]:
    """Bracket on the outage probability of an identically shaped chain."""
    if not gamma_th > 0.0:
        raise ValueError(f"gamma_th must be positive, got {gamma_th}")
    if hop_count < 1:
        raise ValueError(f"hop count must be positive, got {hop_count}")
    shapes = [a] * hop_count
    return (bound_cdf(gamma_th, shapes, "upper"), bound_cdf(gamma_th, shapes, "lower"))


def gains(hop_count: int, lam: float, eta: float, sigma2: float, p: float) -> GainExpansion:
    """Diversity and coding gain of the outage curve against the cap.

    The small-SNR density exponent t is zero for this chain, so the
    diversity gain is one regardless of hop count; the coding gain
    absorbs the accumulated relay noise through the K - 1 factor.
    """
    if hop_count < 2:
        raise ValueError(f"hop count must be at least 2, got {hop_count}")
    if not (lam > 0.0 and eta > 0.0 and sigma2 > 0.0 and p > 0.0):
        raise ValueError("lam, eta, sigma2, p must all be positive")
    b = (hop_count - 1) * sigma2 / (lam * eta)
    # Dividing 2p by b keeps the product identity G_c * b = 2p exact.
    return GainExpansion(t=0.0, b=b, diversity_gain=1.0, coding_gain=2.0 * p / b)


def _e1_scaled(x: float) -> float:
    # exp(x) * E1(x) without overflow for large x.
    if x < 1.0:
        return math.exp(x) * specfun.exp_integral_e1(x)
    return specfun._e1_cf_scaled(x)


def _rate_x(hop_count: int, lam: float, eta: float, sigma2: float, snr_scale: float) -> float:
    if hop_count < 2:
        raise ValueError(f"hop count must be at least 2, got {hop_count}")
    if not (lam > 0.0 and eta > 0.0 and sigma2 > 0.0 and snr_scale > 0.0):
        raise ValueError("lam, eta, sigma2, snr_scale must all be positive")
    return (hop_count - 1) * sigma2 / (snr_scale * lam * eta)


def rate_bound(
    hop_count: int, lam: float, eta: float, sigma2: float, snr_scale: float
) -> float:
    """Achievable-rate upper bound exp(x) E1(x) / (K ln 2), bit/s/Hz."""
    x = _rate_x(hop_count, lam, eta, sigma2, snr_scale)
    return _e1_scaled(x) / (hop_count * _LN2)


def rate_approx(
    hop_count: int, lam: float, eta: float, sigma2: float, snr_scale: float
) -> float:
    """Small-x logarithmic rate approximation (-EULER_GAMMA - ln x) / (K ln 2).

    Warns when x = (K-1) sigma2 / (snr_scale lam eta) is 0.01 or larger,
    where the expansion underlying the formula loses validity.
    """
    x = _rate_x(hop_count, lam, eta, sigma2, snr_scale)
    if x >= 0.01:
        warnings.warn(
            f"rate approximation evaluated at x={x:.4g} >= 0.01, outside its"
            " validity window",
            RuntimeWarning,
            stacklevel=2,
        )
    return (-specfun.EULER_GAMMA - math.log(x)) / (hop_count * _LN2)


def rate_k2(a1: float, a2: float) -> float:
    """Exact two-hop achievable rate by quadrature of the survival integral."""
    from scipy import integrate as _integrate

    a1 = _check_shape(a1, "a1")
    a2 = _check_shape(a2, "a2")

    def f(v: float) -> float:
        # gamma = v/(1 - v) maps [0, 1) onto the half line; the 1/(1+gamma)
        # factor cancels one power of 1 - v from the Jacobian.
        if v >= 1.0:
            return 0.0
        g = v / (1.0 - v)
        s1 = a1 / (g + a1)
        s2 = a2 / (g + a2)
        u = (g / (g + a1)) * (g / (g + a2))
        return s1 * s2 * _hyp_g_from_compl(u) / (1.0 - v)

    val, abserr = _integrate.quad(f, 0.0, 1.0, epsabs=1e-13, epsrel=1e-10, limit=200)
    val /= 4.0 * _LN2
    abserr /= 4.0 * _LN2
    if not math.isfinite(val) or abserr > max(1e-6 * abs(val), 1e-12):
        raise NumericalError(
            f"rate quadrature failed to converge (value {val}, error {abserr})"
        )
    return val
