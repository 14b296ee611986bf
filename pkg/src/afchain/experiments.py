"""Sweeps, figure datasets, delimited output, and the command-line front end.

A sweep walks one variable (interference cap, average SNR, or hop
count) across a grid, runs the Monte-Carlo estimator at every point,
and attaches the matching analytic columns. Figure ids 3 through 6
bundle the sweeps behind this package's standard report datasets:

    3  outage vs cap, chains of 2, 4, and 8 hops
    4  outage of the 4-hop chain vs SNR (two caps) and vs cap
    5  achievable rate of the 4-hop chain, same two sweeps
    6  rate vs cap, chains of 2, 4, and 8 hops

Every dataset is written as one CSV per series with a fixed header;
columns that do not apply stay empty rather than zero. The figure path
also renders a PNG next to the CSVs.
"""

from __future__ import annotations

import argparse
import math
import sys
import warnings
from dataclasses import dataclass, replace
from pathlib import Path

from . import analysis, montecarlo
from .model import (
    DEFAULT_CONFIG_DOC,
    SystemConfig,
    build_topology,
    db_to_linear,
    load_config,
    parse_config,
)
from .specfun import NumericalError
from .waterfill import hop_law, hop_laws

__all__ = [
    "SweepSpec",
    "CurvePoint",
    "CSV_HEADER",
    "W_GRID_DEFAULT",
    "SNR_GRID_DEFAULT",
    "run_sweep",
    "run_figure",
    "curve_csv",
    "write_curve_csv",
    "render_figure",
    "main",
]

CSV_HEADER = "x,mc_value,mc_stderr,analytic_exact,bound_lower,bound_upper,limit_approx,trials,seed"

W_GRID_DEFAULT = tuple(float(w) for w in range(0, 31, 2))
SNR_GRID_DEFAULT = tuple(float(s) for s in range(0, 31, 5))

_FIGURE_IDS = (3, 4, 5, 6)
_OVERRIDE_KEYS = ("fixed", "values", "trials", "seed", "gamma_th_db")
_SWEEP_VARIABLES = ("W_dB", "snr_dB", "K")


@dataclass(frozen=True)
class SweepSpec:
    """One sweep: the variable, its grid, and everything held fixed."""

    variable: str
    values: tuple
    fixed: SystemConfig
    gamma_th_db: float
    trials: int
    seed: int

    def __post_init__(self):
        if self.variable not in _SWEEP_VARIABLES:
            raise ValueError(
                f"variable must be one of {_SWEEP_VARIABLES}, got {self.variable!r}"
            )
        vals = tuple(self.values)
        if not vals:
            raise ValueError("sweep values must be nonempty")
        if self.variable == "K":
            if any(v != int(v) for v in vals):
                raise ValueError(f"hop-count sweep needs integers, got {vals}")
            vals = tuple(int(v) for v in vals)
        else:
            vals = tuple(float(v) for v in vals)
        if any(b <= a for a, b in zip(vals, vals[1:])):
            raise ValueError(f"sweep values must be strictly increasing, got {vals}")
        object.__setattr__(self, "values", vals)
        if not isinstance(self.fixed, SystemConfig):
            raise ValueError(f"fixed must be a SystemConfig, got {type(self.fixed)}")
        if isinstance(self.trials, bool) or not isinstance(self.trials, int) or self.trials < 1:
            raise ValueError(f"trials must be a positive integer, got {self.trials!r}")
        if isinstance(self.seed, bool) or not isinstance(self.seed, int):
            raise ValueError(f"seed must be an integer, got {self.seed!r}")
        object.__setattr__(self, "gamma_th_db", float(self.gamma_th_db))
        if not math.isfinite(self.gamma_th_db):
            raise ValueError(f"gamma_th_db must be finite, got {self.gamma_th_db}")


@dataclass(frozen=True)
class CurvePoint:
    """One sweep point: simulated value plus whichever analytics apply."""

    x: float
    mc_value: float
    mc_stderr: float
    analytic_exact: float | None = None
    bound_lower: float | None = None
    bound_upper: float | None = None
    limit_approx: float | None = None

    def __post_init__(self):
        if self.bound_lower is not None and self.bound_upper is not None:
            if self.bound_lower > self.bound_upper:
                raise ValueError(
                    f"bound columns out of order at x={self.x}:"
                    f" {self.bound_lower} > {self.bound_upper}"
                )


def _point_config(spec: SweepSpec, x) -> SystemConfig:
    if spec.variable == "W_dB":
        return replace(spec.fixed, interference_cap_db=float(x))
    if spec.variable == "snr_dB":
        return replace(spec.fixed, avg_snr_scale=db_to_linear(float(x)))
    return replace(spec.fixed, hop_count=int(x))


def _analytic_outage(mode: str, gamma_th: float, shapes: list) -> float | None:
    if mode == "none":
        return None
    if mode == "invert":
        return analysis.e2e_cdf(gamma_th, shapes)
    if len(shapes) != 2:
        if mode == "closed":
            raise ValueError("closed-form outage needs exactly two hops")
        return None
    return analysis.e2e_cdf_k2(gamma_th, shapes[0], shapes[1])


def _analytic_rate(mode: str, shapes: list) -> float | None:
    if mode == "none":
        return None
    if mode == "invert":
        raise ValueError("rate sweeps have no inversion-based exact column")
    if len(shapes) != 2:
        if mode == "closed":
            raise ValueError("closed-form rate needs exactly two hops")
        return None
    return analysis.rate_k2(shapes[0], shapes[1])


def run_sweep(spec: SweepSpec, metric: str, analytic: str = "auto") -> list[CurvePoint]:
    """Walk the sweep grid and attach analytics to each simulated point.

    metric selects outage probability or achievable rate. analytic
    picks the exact column: "auto" fills it for two-hop chains only,
    "closed" requires two hops, "invert" uses the contour-inversion
    CDF (outage only), "none" leaves it empty.

    Outage values below 10/trials are emitted as-is but flagged with a
    RuntimeWarning, since the estimator cannot resolve them.
    """
    if metric not in ("outage", "rate"):
        raise ValueError(f"metric must be 'outage' or 'rate', got {metric!r}")
    if analytic not in ("auto", "closed", "invert", "none"):
        raise ValueError(f"unknown analytic mode {analytic!r}")
    points = []
    unresolved = 0
    for x in spec.values:
        cfg = _point_config(spec, x)
        topo = build_topology(cfg.hop_count, cfg.path_loss_ratio, cfg.path_loss_exponent)
        laws = hop_laws(cfg)
        lam = laws[0].water_level
        shapes = [law.shape_param_exact for law in laws]
        if metric == "outage":
            gamma_th = db_to_linear(spec.gamma_th_db)
            est = montecarlo.estimate_outage(
                cfg, topo, laws, gamma_th, spec.trials, spec.seed
            )
            norm = analysis.normalizer(
                cfg.hop_count,
                lam,
                cfg.path_loss_ratio,
                cfg.noise_variance,
                cfg.avg_snr_scale,
                which="upper",
            )
            point = CurvePoint(
                x=float(x),
                mc_value=est.value,
                mc_stderr=est.std_error,
                analytic_exact=_analytic_outage(analytic, gamma_th, shapes),
                bound_lower=analysis.bound_cdf(gamma_th, shapes, "upper"),
                bound_upper=analysis.bound_cdf(gamma_th, shapes, "lower"),
                limit_approx=analysis.limiting_cdf(gamma_th / norm.d_k),
            )
            if est.value < 10.0 / spec.trials:
                unresolved += 1
        else:
            est = montecarlo.estimate_rate(cfg, topo, laws, spec.trials, spec.seed)
            args = (
                cfg.hop_count,
                lam,
                cfg.path_loss_ratio,
                cfg.noise_variance,
                cfg.avg_snr_scale,
            )
            with warnings.catch_warnings():
                # The sweep reports the approximation column everywhere;
                # its validity window is the reader's concern, not a flag
                # to raise once per grid point.
                warnings.simplefilter("ignore", RuntimeWarning)
                approx = analysis.rate_approx(*args)
            point = CurvePoint(
                x=float(x),
                mc_value=est.value,
                mc_stderr=est.std_error,
                analytic_exact=_analytic_rate(analytic, shapes),
                bound_upper=analysis.rate_bound(*args),
                limit_approx=approx,
            )
        points.append(point)
    if unresolved:
        warnings.warn(
            f"{unresolved} outage point(s) fell below the 10/trials resolution"
            f" floor at trials={spec.trials}; treat them as unresolved",
            RuntimeWarning,
            stacklevel=2,
        )
    return points


def run_figure(figure_id: int, overrides=None) -> dict[str, list[CurvePoint]]:
    """Compute the series of one report dataset, keyed by series label.

    overrides may carry any of: fixed (a SystemConfig template),
    values (replaces every series' grid), trials, seed, gamma_th_db.
    """
    if figure_id not in _FIGURE_IDS:
        raise ValueError(f"unknown figure id {figure_id!r}; choose one of {_FIGURE_IDS}")
    ov = dict(overrides or {})
    unknown = sorted(set(ov) - set(_OVERRIDE_KEYS))
    if unknown:
        raise ValueError(f"unknown override key(s) {unknown}; allowed: {_OVERRIDE_KEYS}")
    default_cfg, default_run = parse_config(DEFAULT_CONFIG_DOC)
    fixed = ov.get("fixed", default_cfg)
    if not isinstance(fixed, SystemConfig):
        raise ValueError(f"override 'fixed' must be a SystemConfig, got {type(fixed)}")
    trials = ov.get("trials", default_run.trials)
    seed = ov.get("seed", default_run.seed)
    gamma_th_db = ov.get("gamma_th_db", default_run.gamma_th_db)
    grid_override = ov.get("values")

    def spec(variable: str, values, cfg: SystemConfig) -> SweepSpec:
        if grid_override is not None:
            values = grid_override
        return SweepSpec(
            variable=variable,
            values=tuple(values),
            fixed=cfg,
            gamma_th_db=gamma_th_db,
            trials=trials,
            seed=seed,
        )

    curves: dict[str, list[CurvePoint]] = {}
    if figure_id in (3, 6):
        metric = "outage" if figure_id == 3 else "rate"
        for k in (2, 4, 8):
            s = spec("W_dB", W_GRID_DEFAULT, replace(fixed, hop_count=k))
            curves[f"K{k}"] = run_sweep(s, metric)
        return curves

    metric = "outage" if figure_id == 4 else "rate"
    analytic = "invert" if figure_id == 4 else "none"
    base = replace(fixed, hop_count=4)
    for cap in (10.0, 30.0):
        s = spec("snr_dB", SNR_GRID_DEFAULT, replace(base, interference_cap_db=cap))
        curves[f"snr_W{cap:.0f}dB"] = run_sweep(s, metric, analytic=analytic)
    s = spec("W_dB", W_GRID_DEFAULT, replace(base, avg_snr_scale=db_to_linear(15.0)))
    curves["w_snr15dB"] = run_sweep(s, metric, analytic=analytic)
    return curves


def _field(value) -> str:
    return "" if value is None else format(float(value), ".12g")


def curve_csv(points, trials: int, seed: int) -> str:
    """Render one series to CSV text; byte-identical for identical inputs."""
    rows = [CSV_HEADER]
    for p in points:
        rows.append(
            ",".join(
                (
                    _field(p.x),
                    _field(p.mc_value),
                    _field(p.mc_stderr),
                    _field(p.analytic_exact),
                    _field(p.bound_lower),
                    _field(p.bound_upper),
                    _field(p.limit_approx),
                    str(int(trials)),
                    str(int(seed)),
                )
            )
        )
    return "\n".join(rows) + "\n"


def write_curve_csv(path, points, trials: int, seed: int) -> None:
    with open(path, "w", encoding="ascii", newline="\n") as fh:
        fh.write(curve_csv(points, trials, seed))


_COMPONENT_STYLE = (
    ("analytic_exact", "-", "exact"),
    ("bound_lower", "--", "lower bound"),
    ("bound_upper", "--", "upper bound"),
    ("limit_approx", ":", "limit"),
)


def render_figure(figure_id: int, curves, path) -> None:
    """Draw the dataset to an image file without touching any GUI backend."""
    from matplotlib.figure import Figure

    if figure_id not in _FIGURE_IDS:
        raise ValueError(f"unknown figure id {figure_id!r}; choose one of {_FIGURE_IDS}")
    two_panel = figure_id in (4, 5)
    outage = figure_id in (3, 4)
    fig = Figure(figsize=(11.0, 4.4) if two_panel else (6.4, 4.8))
    if two_panel:
        ax_snr, ax_cap = fig.subplots(1, 2)
        ax_snr.set_xlabel("average SNR (dB)")
        ax_cap.set_xlabel("interference cap (dB)")
        axes = [ax_snr, ax_cap]
    else:
        ax_cap = fig.subplots()
        ax_cap.set_xlabel("interference cap (dB)")
        axes = [ax_cap]
        ax_snr = ax_cap
    for label, points in curves.items():
        ax = ax_cap if label.startswith(("w_", "K")) else ax_snr
        xs = [p.x for p in points]
        ax.errorbar(
            xs,
            [p.mc_value for p in points],
            yerr=[p.mc_stderr for p in points],
            marker="o",
            markersize=3,
            linestyle="none",
            capsize=2,
            label=f"{label} sim",
        )
        for attr, style, tag in _COMPONENT_STYLE:
            ys = [getattr(p, attr) for p in points]
            if all(y is None for y in ys):
                continue
            ax.plot(xs, ys, style, linewidth=1.0, label=f"{label} {tag}")
    for ax in axes:
        if outage:
            ax.set_yscale("log")
            ax.set_ylabel("outage probability")
        else:
            ax.set_ylabel("achievable rate (bit/s/Hz)")
        ax.grid(True, which="both", alpha=0.3)
        ax.legend(fontsize=7)
    fig.tight_layout()
    fig.savefig(path, dpi=150)


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="afchain",
        description=(
            "Simulate and analytically evaluate multi-hop amplify-and-forward"
            " relay chains under an average interference-power cap."
        ),
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, mc: bool = False) -> None:
        p.add_argument("--config", metavar="PATH", help="JSON configuration file")
        p.add_argument("--out", metavar="PATH", help="output file (default: stdout)")
        if mc:
            p.add_argument("--seed", type=int, help="override the configured seed")
            p.add_argument("--trials", type=int, help="override the configured trials")

    common(sub.add_parser("topology", help="hop geometry table"))
    common(sub.add_parser("waterlevel", help="water level and hop-law constants"))
    p = sub.add_parser("simulate", help="Monte-Carlo estimate at the configured point")
    common(p, mc=True)
    p.add_argument(
        "--metric", choices=("outage", "rate"), default="outage", help="what to estimate"
    )
    common(sub.add_parser("analyze", help="analytic quantities at the configured point"))
    p = sub.add_parser("figure", help="write a report dataset (CSVs and a PNG)")
    p.add_argument("--config", metavar="PATH", help="JSON configuration file")
    p.add_argument(
        "--out", metavar="DIR", default=".", help="output directory (default: .)"
    )
    p.add_argument(
        "--figure", type=int, choices=_FIGURE_IDS, required=True, help="dataset id"
    )
    p.add_argument("--seed", type=int, help="override the configured seed")
    p.add_argument("--trials", type=int, help="override the configured trials")
    p.add_argument("--no-plot", action="store_true", help="skip the PNG render")
    return parser


def _load_settings(args):
    if args.config is None:
        cfg, run = parse_config(DEFAULT_CONFIG_DOC)
    else:
        try:
            cfg, run = load_config(args.config)
        except OSError as exc:
            raise ValueError(f"cannot read config {args.config}: {exc}") from exc
    if getattr(args, "seed", None) is not None:
        run = replace(run, seed=args.seed)
    if getattr(args, "trials", None) is not None:
        run = replace(run, trials=args.trials)
    return cfg, run


def _emit(text: str, out) -> None:
    if out is None:
        sys.stdout.write(text)
    else:
        with open(out, "w", encoding="ascii", newline="\n") as fh:
            fh.write(text)


def _cmd_topology(args) -> int:
    cfg, _ = _load_settings(args)
    topo = build_topology(cfg.hop_count, cfg.path_loss_ratio, cfg.path_loss_exponent)
    rows = ["hop,desired_distance,interference_distance"]
    pairs = zip(topo.desired, topo.interference)
    for hop, (d, l) in enumerate(pairs, start=1):
        rows.append(f"{hop},{d:.12g},{l:.12g}")
    _emit("\n".join(rows) + "\n", args.out)
    return 0


def _hop_law_for(cfg: SystemConfig):
    return hop_law(
        cfg.path_loss_ratio,
        cfg.noise_variance,
        cfg.avg_snr_scale,
        cfg.interference_cap_db,
    )


def _cmd_waterlevel(args) -> int:
    cfg, _ = _load_settings(args)
    law = _hop_law_for(cfg)
    rows = [
        "water_level,shape_param_exact,shape_param_approx,zero_prob",
        ",".join(
            format(v, ".12g")
            for v in (
                law.water_level,
                law.shape_param_exact,
                law.shape_param_approx,
                law.zero_prob,
            )
        ),
    ]
    _emit("\n".join(rows) + "\n", args.out)
    return 0


def _cmd_simulate(args) -> int:
    cfg, run = _load_settings(args)
    spec = SweepSpec(
        variable="W_dB",
        values=(cfg.interference_cap_db,),
        fixed=cfg,
        gamma_th_db=run.gamma_th_db,
        trials=run.trials,
        seed=run.seed,
    )
    points = run_sweep(spec, args.metric)
    _emit(curve_csv(points, run.trials, run.seed), args.out)
    return 0


def _cmd_analyze(args) -> int:
    cfg, run = _load_settings(args)
    law = _hop_law_for(cfg)
    k = cfg.hop_count
    a = law.shape_param_exact
    gamma_th = run.gamma_th
    lam = law.water_level
    lo, hi = analysis.outage_bounds(gamma_th, k, a)
    norm = analysis.normalizer(
        k, lam, cfg.path_loss_ratio, cfg.noise_variance, cfg.avg_snr_scale
    )
    gain = analysis.gains(
        k, lam, cfg.path_loss_ratio, cfg.noise_variance, cfg.constellation_const
    )
    rate_args = (k, lam, cfg.path_loss_ratio, cfg.noise_variance, cfg.avg_snr_scale)
    if k == 2:
        outage_exact = analysis.e2e_cdf_k2(gamma_th, a, a)
    else:
        outage_exact = analysis.e2e_cdf(gamma_th, [a] * k)
    quantities = [
        ("water_level", lam),
        ("shape_param_exact", a),
        ("zero_prob", law.zero_prob),
        ("outage_exact", outage_exact),
        ("outage_bound_lower", lo),
        ("outage_bound_upper", hi),
        ("outage_limit", analysis.limiting_cdf(gamma_th / norm.d_k)),
        ("diversity_gain", gain.diversity_gain),
        ("coding_gain", gain.coding_gain),
        ("rate_bound", analysis.rate_bound(*rate_args)),
        ("rate_approx", analysis.rate_approx(*rate_args)),
    ]
    if k == 2:
        quantities.append(("rate_exact", analysis.rate_k2(a, a)))
    rows = ["quantity,value"]
    rows.extend(f"{name},{value:.12g}" for name, value in quantities)
    _emit("\n".join(rows) + "\n", args.out)
    return 0


def _cmd_figure(args) -> int:
    cfg, run = _load_settings(args)
    overrides = {
        "fixed": cfg,
        "trials": run.trials,
        "seed": run.seed,
        "gamma_th_db": run.gamma_th_db,
    }
    curves = run_figure(args.figure, overrides)
    outdir = Path(args.out)
    outdir.mkdir(parents=True, exist_ok=True)
    written = []
    for label, points in curves.items():
        path = outdir / f"figure{args.figure}_{label}.csv"
        write_curve_csv(path, points, run.trials, run.seed)
        written.append(path)
    if not args.no_plot:
        path = outdir / f"figure{args.figure}.png"
        render_figure(args.figure, curves, path)
        written.append(path)
    for path in written:
        print(path)
    return 0


_COMMANDS = {
    "topology": _cmd_topology,
    "waterlevel": _cmd_waterlevel,
    "simulate": _cmd_simulate,
    "analyze": _cmd_analyze,
    "figure": _cmd_figure,
}


def main(argv=None) -> int:
    """CLI entry point. Returns 0, or 2 on usage errors, or 1 on numerical failure."""
    args = _build_parser().parse_args(argv)
    try:
        return _COMMANDS[args.command](args)
    except ValueError as exc:
        print(f"afchain: error: {exc}", file=sys.stderr)
        return 2
    except NumericalError as exc:
        print(f"afchain: numerical failure: {exc}", file=sys.stderr)
        return 1
    except RuntimeError as exc:
        print(f"afchain: numerical failure: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"afchain: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
