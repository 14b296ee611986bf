"""Outage and rate analysis of multi-hop amplify-and-forward relay chains
operating under an average interference-power constraint.

The package splits along the pipeline: geometry and configuration
(:mod:`afchain.model`), the water-filling power rule and per-hop SNR law
(:mod:`afchain.waterfill`), reproducible simulation
(:mod:`afchain.montecarlo`), closed-form and numerically evaluated
distributions, bounds, limits, and rates (:mod:`afchain.analysis`), the
scalar special-function kernel underneath them (:mod:`afchain.specfun`),
and sweep/figure orchestration with the CLI (:mod:`afchain.experiments`).
"""

from .analysis import (
    GainExpansion,
    LimitNormalization,
    bound_cdf,
    e2e_cdf,
    e2e_cdf_k2,
    e2e_mgf,
    gains,
    hop_cdf,
    limiting_cdf,
    mgf_inv_hop,
    normalizer,
    outage_bounds,
    rate_approx,
    rate_bound,
    rate_k2,
)
from .experiments import (
    CurvePoint,
    SweepSpec,
    curve_csv,
    run_figure,
    run_sweep,
    write_curve_csv,
)
from .model import (
    DEFAULT_CONFIG_DOC,
    RunSettings,
    SystemConfig,
    Topology,
    build_topology,
    db_to_linear,
    linear_to_db,
    load_config,
    parse_config,
)
from .montecarlo import (
    ChannelSample,
    Estimate,
    TrialResult,
    empirical_cdf,
    estimate_outage,
    estimate_rate,
    run_trial,
    sample_hop,
)
from .specfun import (
    NumericalError,
    bessel_j1,
    exp_integral_e1,
    hyp2f1_113,
    laplace_invert_cdf,
    tricomi_psi_1_0,
)
from .waterfill import (
    HopLaw,
    constraint_lhs,
    hop_law,
    hop_laws,
    hop_snr,
    optimal_power,
    water_level,
)

__version__ = "0.1.0"

__all__ = [
    "__version__",
    "NumericalError",
    "exp_integral_e1",
    "tricomi_psi_1_0",
    "hyp2f1_113",
    "bessel_j1",
    "laplace_invert_cdf",
    "SystemConfig",
    "RunSettings",
    "Topology",
    "DEFAULT_CONFIG_DOC",
    "build_topology",
    "db_to_linear",
    "linear_to_db",
    "parse_config",
    "load_config",
    "HopLaw",
    "constraint_lhs",
    "water_level",
    "optimal_power",
    "hop_snr",
    "hop_law",
    "hop_laws",
    "ChannelSample",
    "TrialResult",
    "Estimate",
    "sample_hop",
    "run_trial",
    "estimate_outage",
    "estimate_rate",
    "empirical_cdf",
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
    "SweepSpec",
    "CurvePoint",
    "run_sweep",
    "run_figure",
    "curve_csv",
    "write_curve_csv",
]
