import json
import math
import warnings

import pytest

from afchain import montecarlo
from afchain.experiments import (
    CSV_HEADER,
    CurvePoint,
    SNR_GRID_DEFAULT,
    SweepSpec,
    W_GRID_DEFAULT,
    curve_csv,
    main,
    render_figure,
    run_figure,
    run_sweep,
    write_curve_csv,
)
from afchain.model import DEFAULT_CONFIG_DOC, parse_config
from afchain.waterfill import hop_laws
from afchain.model import build_topology

CFG_DEFAULT, RUN_DEFAULT = parse_config(DEFAULT_CONFIG_DOC)

TINY = {"values": (5.0, 10.0), "trials": 2000, "seed": 7}


def _spec(**kw):
    base = dict(
        variable="W_dB",
        values=(0.0, 10.0),
        fixed=CFG_DEFAULT,
        gamma_th_db=0.0,
        trials=2000,
        seed=7,
    )
    base.update(kw)
    return SweepSpec(**base)


def test_default_grids():
    assert W_GRID_DEFAULT[0] == 0.0 and W_GRID_DEFAULT[-1] == 30.0
    assert len(W_GRID_DEFAULT) == 16
    assert SNR_GRID_DEFAULT == (0.0, 5.0, 10.0, 15.0, 20.0, 25.0, 30.0)


def test_sweep_spec_coercion():
    s = _spec(values=[1, 4, 9])
    assert s.values == (1.0, 4.0, 9.0)
    assert all(isinstance(v, float) for v in s.values)
    k = _spec(variable="K", values=(2.0, 4, 8.0))
    assert k.values == (2, 4, 8)
    assert all(isinstance(v, int) for v in k.values)


def test_sweep_spec_validation():
    with pytest.raises(ValueError):
        _spec(variable="bandwidth")
    with pytest.raises(ValueError):
        _spec(values=())
    with pytest.raises(ValueError):
        _spec(values=(3.0, 3.0))
    with pytest.raises(ValueError):
        _spec(values=(5.0, 1.0))
    with pytest.raises(ValueError):
        _spec(variable="K", values=(2, 2.5))
    with pytest.raises(ValueError):
        _spec(trials=0)
    with pytest.raises(ValueError):
        _spec(trials=True)
    with pytest.raises(ValueError):
        _spec(seed=True)
    with pytest.raises(ValueError):
        _spec(gamma_th_db=math.inf)
    with pytest.raises(ValueError):
        _spec(fixed={"hop_count": 4})


def test_curve_point_bound_order():
    CurvePoint(x=1.0, mc_value=0.1, mc_stderr=0.01)
    CurvePoint(x=1.0, mc_value=0.1, mc_stderr=0.01, bound_lower=0.05)
    with pytest.raises(ValueError):
        CurvePoint(x=1.0, mc_value=0.1, mc_stderr=0.01,
                   bound_lower=0.2, bound_upper=0.1)


def test_run_sweep_single_point_matches_estimator():
    spec = _spec(values=(CFG_DEFAULT.interference_cap_db,), trials=20_000, seed=5)
    (point,) = run_sweep(spec, "outage")
    topo = build_topology(
        CFG_DEFAULT.hop_count, CFG_DEFAULT.path_loss_ratio, CFG_DEFAULT.path_loss_exponent
    )
    laws = hop_laws(CFG_DEFAULT)
    est = montecarlo.estimate_outage(CFG_DEFAULT, topo, laws, 1.0, 20_000, 5)
    assert point.mc_value == est.value
    assert point.mc_stderr == est.std_error
    assert point.x == CFG_DEFAULT.interference_cap_db


def test_run_sweep_outage_columns():
    spec = _spec(variable="K", values=(2, 4, 8), trials=20_000)
    points = run_sweep(spec, "outage")
    assert [p.x for p in points] == [2.0, 4.0, 8.0]
    by_k = dict(zip((2, 4, 8), points))
    assert by_k[2].analytic_exact is not None
    assert by_k[4].analytic_exact is None
    assert by_k[8].analytic_exact is None
    for p in points:
        assert 0.0 < p.bound_lower < p.bound_upper < 1.0
        assert p.limit_approx is not None
        # 5-sigma slack: this is a column-wiring check, not a physics gate.
        slack = 5.0 * p.mc_stderr
        assert p.bound_lower - slack <= p.mc_value <= p.bound_upper + slack
    # Longer chains are worse at a fixed cap.
    assert by_k[2].mc_value < by_k[8].mc_value


def test_run_sweep_rate_columns():
    spec = _spec(values=(5.0, 15.0), trials=20_000)
    points = run_sweep(spec, "rate")
    for p in points:
        assert p.analytic_exact is None
        assert p.bound_lower is None
        assert p.mc_value <= p.bound_upper + 3.0 * p.mc_stderr
        assert p.limit_approx is not None
    assert points[0].mc_value < points[1].mc_value


def test_run_sweep_validation():
    with pytest.raises(ValueError):
        run_sweep(_spec(), "latency")
    with pytest.raises(ValueError):
        run_sweep(_spec(), "outage", analytic="guess")
    with pytest.raises(ValueError):
        run_sweep(_spec(values=(10.0,), trials=100), "outage", analytic="closed")
    with pytest.raises(ValueError):
        run_sweep(_spec(values=(10.0,), trials=100), "rate", analytic="invert")


def test_run_sweep_flags_unresolved_floor():
    spec = _spec(values=(40.0,), trials=2000)
    with pytest.warns(RuntimeWarning, match="resolution"):
        points = run_sweep(spec, "outage")
    assert points[0].mc_value < 10.0 / 2000


def test_csv_rendering():
    spec = _spec(values=(10.0,), trials=2000)
    points = run_sweep(spec, "outage")
    text = curve_csv(points, 2000, 7)
    again = curve_csv(run_sweep(spec, "outage"), 2000, 7)
    assert text == again
    lines = text.splitlines()
    assert lines[0] == CSV_HEADER
    assert len(lines) == 2
    fields = lines[1].split(",")
    assert len(fields) == 9
    assert fields[0] == "10"
    assert fields[3] == ""          # no exact column for the four-hop chain
    assert fields[7] == "2000"
    assert fields[8] == "7"
    assert float(fields[4]) <= float(fields[5])
    assert text.endswith("\n") and not text.endswith("\n\n")


def test_write_curve_csv_round_trip(tmp_path):
    spec = _spec(values=(10.0,), trials=2000)
    points = run_sweep(spec, "outage")
    path = tmp_path / "curve.csv"
    write_curve_csv(path, points, 2000, 7)
    assert path.read_bytes() == curve_csv(points, 2000, 7).encode("ascii")


def test_run_figure_outage_by_hop_count():
    curves = run_figure(3, TINY)
    assert set(curves) == {"K2", "K4", "K8"}
    for label, points in curves.items():
        assert [p.x for p in points] == [5.0, 10.0]
        for p in points:
            assert p.bound_lower is not None and p.bound_upper is not None
        exact = [p.analytic_exact for p in points]
        if label == "K2":
            assert all(v is not None for v in exact)
        else:
            assert all(v is None for v in exact)


def test_run_figure_outage_vs_snr():
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", RuntimeWarning)
        curves = run_figure(4, TINY)
    assert set(curves) == {"snr_W10dB", "snr_W30dB", "w_snr15dB"}
    for points in curves.values():
        for p in points:
            assert p.analytic_exact is not None     # inversion column
            assert p.bound_lower is not None


def test_run_figure_rate_vs_snr():
    curves = run_figure(5, TINY)
    assert set(curves) == {"snr_W10dB", "snr_W30dB", "w_snr15dB"}
    for points in curves.values():
        for p in points:
            assert p.analytic_exact is None
            assert p.bound_lower is None
            assert p.bound_upper is not None


def test_run_figure_rate_by_hop_count():
    curves = run_figure(6, TINY)
    assert set(curves) == {"K2", "K4", "K8"}
    assert all(p.analytic_exact is not None for p in curves["K2"])
    assert all(p.analytic_exact is None for p in curves["K4"])
    # More hops cost rate at a fixed cap.
    assert curves["K8"][0].mc_value < curves["K2"][0].mc_value


def test_run_figure_validation():
    with pytest.raises(ValueError):
        run_figure(7)
    with pytest.raises(ValueError):
        run_figure(3, {"palette": "dark"})
    with pytest.raises(ValueError):
        run_figure(3, {"fixed": {"hop_count": 4}})


def test_render_figure_writes_png(tmp_path):
    curves = run_figure(3, TINY)
    path = tmp_path / "figure3.png"
    render_figure(3, curves, path)
    blob = path.read_bytes()
    assert blob.startswith(b"\x89PNG\r\n")
    assert len(blob) > 1000


def test_render_figure_two_panel(tmp_path):
    curves = run_figure(5, TINY)
    path = tmp_path / "figure5.png"
    render_figure(5, curves, path)
    assert path.read_bytes().startswith(b"\x89PNG\r\n")


def test_render_figure_validation(tmp_path):
    with pytest.raises(ValueError):
        render_figure(9, {}, tmp_path / "x.png")


def test_cli_topology(capsys):
    assert main(["topology"]) == 0
    lines = capsys.readouterr().out.splitlines()
    assert lines[0] == "hop,desired_distance,interference_distance"
    assert len(lines) == 5
    hop, d, l = lines[3].split(",")
    assert hop == "3"
    assert math.isclose(float(d), 0.5623413251903491, rel_tol=1e-11)
    assert float(l) == 1.0


def test_cli_waterlevel(tmp_path, capsys):
    out = tmp_path / "law.csv"
    assert main(["waterlevel", "--out", str(out)]) == 0
    assert capsys.readouterr().out == ""
    lines = out.read_text(encoding="ascii").splitlines()
    assert lines[0] == "water_level,shape_param_exact,shape_param_approx,zero_prob"
    lam, a, a0, p0 = (float(v) for v in lines[1].split(","))
    assert math.isclose(lam, 10.466022855484995, rel_tol=1e-11)
    assert math.isclose(a, 105.66022855484995, rel_tol=1e-11)
    assert math.isclose(a - a0, 1.0, rel_tol=1e-9)
    assert math.isclose(p0 * a, 1.0, rel_tol=1e-9)


def test_cli_simulate(capsys):
    assert main(["simulate", "--trials", "2000", "--seed", "3"]) == 0
    lines = capsys.readouterr().out.splitlines()
    assert lines[0] == CSV_HEADER
    fields = lines[1].split(",")
    assert fields[0] == "10"
    assert fields[7] == "2000" and fields[8] == "3"
    assert 0.0 < float(fields[1]) < 1.0


def test_cli_simulate_rate(capsys):
    assert main(["simulate", "--metric", "rate", "--trials", "2000", "--seed", "3"]) == 0
    fields = capsys.readouterr().out.splitlines()[1].split(",")
    assert fields[3] == "" and fields[4] == ""
    assert float(fields[1]) <= float(fields[5]) + 3.0 * float(fields[2])


def test_cli_analyze_default(capsys):
    with pytest.warns(RuntimeWarning):
        code = main(["analyze"])
    assert code == 0
    lines = capsys.readouterr().out.splitlines()
    assert lines[0] == "quantity,value"
    names = [row.split(",")[0] for row in lines[1:]]
    assert "water_level" in names
    assert "outage_exact" in names
    assert "coding_gain" in names
    assert "rate_exact" not in names


def test_cli_analyze_two_hop_config(tmp_path, capsys):
    cfg_path = tmp_path / "cfg.json"
    cfg_path.write_text(json.dumps({"K": 2}), encoding="ascii")
    assert main(["analyze", "--config", str(cfg_path)]) == 0
    rows = dict(
        line.split(",") for line in capsys.readouterr().out.splitlines()[1:]
    )
    assert "rate_exact" in rows
    assert float(rows["outage_bound_lower"]) <= float(rows["outage_exact"])
    assert float(rows["outage_exact"]) <= float(rows["outage_bound_upper"])


def test_cli_figure(tmp_path, capsys):
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", RuntimeWarning)
        code = main([
            "figure", "--figure", "3", "--trials", "2000", "--seed", "7",
            "--out", str(tmp_path),
        ])
    assert code == 0
    printed = capsys.readouterr().out.splitlines()
    assert len(printed) == 4
    for name in ("figure3_K2.csv", "figure3_K4.csv", "figure3_K8.csv", "figure3.png"):
        assert str(tmp_path / name) in printed
        assert (tmp_path / name).exists()
    first = (tmp_path / "figure3_K2.csv").read_text(encoding="ascii").splitlines()
    assert first[0] == CSV_HEADER
    assert len(first) == 1 + len(W_GRID_DEFAULT)
    assert (tmp_path / "figure3.png").read_bytes().startswith(b"\x89PNG\r\n")


def test_cli_figure_no_plot(tmp_path, capsys):
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", RuntimeWarning)
        code = main([
            "figure", "--figure", "3", "--trials", "2000", "--seed", "7",
            "--out", str(tmp_path), "--no-plot",
        ])
    assert code == 0
    assert len(capsys.readouterr().out.splitlines()) == 3
    assert not (tmp_path / "figure3.png").exists()


def test_cli_usage_errors():
    for argv in ([], ["frobnicate"], ["figure"], ["figure", "--figure", "9"]):
        with pytest.raises(SystemExit) as exc:
            main(argv)
        assert exc.value.code == 2


def test_cli_config_errors(tmp_path, capsys):
    bad_key = tmp_path / "bad_key.json"
    bad_key.write_text(json.dumps({"K": 4, "palette": 3}), encoding="ascii")
    assert main(["analyze", "--config", str(bad_key)]) == 2
    bad_json = tmp_path / "bad.json"
    bad_json.write_text("{", encoding="ascii")
    assert main(["analyze", "--config", str(bad_json)]) == 2
    assert main(["analyze", "--config", str(tmp_path / "missing.json")]) == 2
    err = capsys.readouterr().err
    assert err.count("afchain: error:") == 3


def test_cli_unwritable_output(tmp_path, capsys):
    target = tmp_path / "no_such_dir" / "out.csv"
    assert main(["topology", "--out", str(target)]) == 1
    assert "afchain:" in capsys.readouterr().err
