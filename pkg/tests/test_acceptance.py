"""End-to-end acceptance gate.

Each test covers one release criterion, prints a single PASS/FAIL line
(replayed after the run by the conftest summary hook), and asserts it.
Tolerances and time limits are part of the criteria; a criterion fails
if it is out of tolerance or over budget.
"""

import math
import time

import numpy as np
from scipy import integrate

from afchain import analysis, montecarlo, specfun
from afchain.analysis import (
    bound_cdf,
    e2e_cdf,
    e2e_cdf_k2,
    gains,
    limiting_cdf,
    normalizer,
    rate_approx,
    rate_bound,
    rate_k2,
)
from afchain.model import SystemConfig, build_topology, db_to_linear
from afchain.montecarlo import draw_channel_pairs, estimate_outage, estimate_rate
from afchain.specfun import laplace_invert_cdf, tricomi_psi_1_0
from afchain.waterfill import constraint_lhs, hop_law, hop_laws, water_level

SEED = 12345
W_GRID = tuple(float(w) for w in range(0, 31, 2))

CRITERION_LINES = []


def _criterion(number, name, ok, details, elapsed, limit):
    status = "PASS" if ok and elapsed < limit else "FAIL"
    line = f"criterion {number} ({name}): {status} ({details}; {elapsed:.3f}s)"
    CRITERION_LINES.append(line)
    print(line)
    assert status == "PASS", line


def _two_hop_setup(w_db):
    cfg = SystemConfig(hop_count=2, interference_cap_db=w_db)
    topo = build_topology(2, cfg.path_loss_ratio, cfg.path_loss_exponent)
    return cfg, topo, hop_laws(cfg)


def test_c01_hop_geometry():
    build_topology(4, 10.0, 4.0)            # warm-up, outside the budget
    t0 = time.perf_counter()
    topo = build_topology(4, 10.0, 4.0)
    elapsed = time.perf_counter() - t0
    err_d = abs(topo.desired[2] - 0.5623)
    err_l = abs(topo.interference[3] - 1.1473)
    ok = err_d <= 5e-4 and err_l <= 5e-4
    _criterion(1, "hop geometry", ok,
               f"|d3 err|={err_d:.2g}, |l4 err|={err_l:.2g}", elapsed, 1e-3)


def test_c02_water_level_constraint():
    t0 = time.perf_counter()
    worst = 0.0
    for w in range(-10, 41):
        cap = db_to_linear(float(w))
        lam = water_level(10.0, 1.0, 1.0, float(w))
        worst = max(worst, abs(constraint_lhs(lam, 10.0, 1.0, 1.0) - cap) / cap)
    law = hop_law(10.0, 1.0, 1.0, 10.0)
    f2, h2 = draw_channel_pairs(SEED, 1_000_000, 1)
    # Interference seen by the protected receiver, at unit hop distances.
    interference = np.maximum(law.water_level - h2 / (10.0 * f2), 0.0)
    mc_err = abs(float(interference.mean()) - 10.0) / 10.0
    elapsed = time.perf_counter() - t0
    ok = worst <= 1e-9 and mc_err <= 0.01
    _criterion(2, "water level", ok,
               f"roundtrip={worst:.2g}, mc cap err={mc_err:.2%}", elapsed, 10.0)


def test_c03_per_hop_law():
    t0 = time.perf_counter()
    law = hop_law(10.0, 1.0, 1.0, 10.0)
    draws = montecarlo.hop_snr_samples(law, 1_000_000, SEED)
    xs = np.sort(draws)
    model = xs / (xs + law.shape_param_exact)
    ranks = np.arange(1, xs.size + 1, dtype=float)
    sup = max(
        float(np.max(ranks / xs.size - model)),
        float(np.max(model - (ranks - 1.0) / xs.size)),
    )
    elapsed = time.perf_counter() - t0
    _criterion(3, "per-hop law", sup <= 0.005, f"KS sup={sup:.4f}", elapsed, 30.0)


def test_c04_two_hop_closed_form():
    t0 = time.perf_counter()
    worst_z = 0.0
    for w in W_GRID:
        cfg, topo, laws = _two_hop_setup(w)
        est = estimate_outage(cfg, topo, laws, 1.0, 1_000_000, SEED)
        a = laws[0].shape_param_exact
        want = e2e_cdf_k2(1.0, a, a)
        worst_z = max(worst_z, abs(est.value - want) / est.std_error)
    elapsed = time.perf_counter() - t0
    _criterion(4, "two-hop closed form", worst_z <= 3.0,
               f"max |z|={worst_z:.2f}", elapsed, 300.0)


def test_c05_bound_sandwich():
    t0 = time.perf_counter()
    worst = -math.inf
    for k in (2, 4, 8):
        for w in W_GRID:
            cfg = SystemConfig(hop_count=k, interference_cap_db=w)
            topo = build_topology(k, cfg.path_loss_ratio, cfg.path_loss_exponent)
            laws = hop_laws(cfg)
            shapes = [law.shape_param_exact for law in laws]
            est = estimate_outage(cfg, topo, laws, 1.0, 1_000_000, SEED)
            lo = bound_cdf(1.0, shapes, "upper")
            hi = bound_cdf(1.0, shapes, "lower")
            sig = est.std_error
            worst = max(worst, (lo - est.value) / sig, (est.value - hi) / sig)
    elapsed = time.perf_counter() - t0
    _criterion(5, "bound sandwich", worst <= 3.0,
               f"worst excursion={worst:.2f} sigma", elapsed, 900.0)


def test_c06_transform_inversion():
    t0 = time.perf_counter()
    worst = 0.0
    for g in (0.5, 1.0, 5.0, 20.0):
        worst = max(worst, abs(e2e_cdf(g, [50.0, 80.0]) - e2e_cdf_k2(g, 50.0, 80.0)))
    elapsed = time.perf_counter() - t0
    _criterion(6, "transform inversion", worst <= 1e-4,
               f"max |err|={worst:.2g}", elapsed, 1.0)


def test_c07_limiting_distribution():
    t0 = time.perf_counter()
    lam = water_level(10.0, 1.0, 1.0, 10.0)
    a = hop_law(10.0, 1.0, 1.0, 10.0).shape_param_exact
    u = np.linspace(0.0, 5.0, 2001)
    sups = []
    for k in (4, 8, 16):
        d_k = normalizer(k, lam, 10.0, 1.0, 1.0, which="upper").d_k
        gap = max(
            abs(bound_cdf(float(v) * d_k, [a] * k, "upper") - limiting_cdf(float(v)))
            for v in u
        )
        sups.append(gap)
    elapsed = time.perf_counter() - t0
    ok = sups[0] > sups[1] > sups[2] and sups[1] <= 0.15
    _criterion(7, "limiting distribution", ok,
               "sup norms " + "/".join(f"{s:.4f}" for s in sups), elapsed, 1.0)


def test_c08_gain_expansion():
    t0 = time.perf_counter()
    logs_f, logs_d = [], []
    for w in range(30, 41, 2):
        lam = water_level(10.0, 1.0, 1.0, float(w))
        a = lam * 10.0 + 1.0
        d_k = normalizer(4, lam, 10.0, 1.0, 1.0, which="upper").d_k
        logs_f.append(math.log(bound_cdf(1.0, [a] * 4, "upper")))
        logs_d.append(math.log(1.0 / d_k))
    slope = float(np.polyfit(logs_d, logs_f, 1)[0])
    g = gains(4, water_level(10.0, 1.0, 1.0, 10.0), 10.0, 1.0, 2.0)
    product_exact = g.coding_gain * g.b == 2.0 * 2.0
    elapsed = time.perf_counter() - t0
    ok = abs(slope - 1.0) <= 0.05 and product_exact
    _criterion(8, "gain expansion", ok,
               f"slope={slope:.4f}, Gc*b exact={product_exact}", elapsed, 1.0)


def test_c09_achievable_rate():
    t0 = time.perf_counter()
    worst_excess = -math.inf
    worst_gap = 0.0
    for w in W_GRID:
        cfg = SystemConfig(hop_count=4, interference_cap_db=w)
        topo = build_topology(4, cfg.path_loss_ratio, cfg.path_loss_exponent)
        laws = hop_laws(cfg)
        lam = laws[0].water_level
        est = estimate_rate(cfg, topo, laws, 1_000_000, SEED)
        bound = rate_bound(4, lam, 10.0, 1.0, 1.0)
        worst_excess = max(worst_excess, est.value - bound - 3.0 * est.std_error)
        if 3.0 / (lam * 10.0) < 0.01:
            approx = rate_approx(4, lam, 10.0, 1.0, 1.0)
            worst_gap = max(worst_gap, abs(approx - bound) / bound)
    cfg2, topo2, laws2 = _two_hop_setup(10.0)
    a = laws2[0].shape_param_exact
    est2 = estimate_rate(cfg2, topo2, laws2, 1_000_000, SEED)
    z2 = abs(est2.value - rate_k2(a, a)) / est2.std_error
    elapsed = time.perf_counter() - t0
    ok = worst_excess <= 0.0 and worst_gap <= 0.02 and z2 <= 3.0
    _criterion(9, "achievable rate", ok,
               f"bound excess={worst_excess:.2g}, approx gap={worst_gap:.2%},"
               f" two-hop |z|={z2:.2f}", elapsed, 600.0)


def test_c10_special_functions():
    t0 = time.perf_counter()
    worst_psi = 0.0
    for k in range(-6, 3):
        z = 10.0 ** (k / 2.0)
        direct, _ = integrate.quad(
            lambda t, z=z: math.exp(-z * t) / (1.0 + t) ** 2, 0.0, math.inf,
            epsabs=1e-13, epsrel=1e-13,
        )
        worst_psi = max(worst_psi, abs(tricomi_psi_1_0(z) - direct))
    worst_branch = max(
        abs(specfun._hyp2f1_113_series(k / 100.0) - specfun._hyp2f1_113_elementary(k / 100.0))
        for k in range(1, 91)
    )
    pairs = (
        (lambda s: 1.0 / (1.0 + s), lambda t: 1.0 - math.exp(-t)),
        (lambda s: 1.0 / (1.0 + s) ** 2, lambda t: 1.0 - (1.0 + t) * math.exp(-t)),
    )
    worst_talbot = max(
        abs(laplace_invert_cdf(mgf, t) - cdf(t))
        for mgf, cdf in pairs
        for t in (0.1, 0.5, 1.0, 2.0, 5.0, 10.0)
    )
    elapsed = time.perf_counter() - t0
    ok = worst_psi <= 1e-8 and worst_branch <= 1e-10 and worst_talbot <= 1e-6
    _criterion(10, "special functions", ok,
               f"psi={worst_psi:.2g}, branch={worst_branch:.2g},"
               f" inversion={worst_talbot:.2g}", elapsed, 10.0)
