import csv
import json
import math
import os

import numpy as np
import pytest

from bexrelay import cli, harness, protocol
from bexrelay.harness import (ConfigError, ExperimentConfig, emit_csv, load_config,
                              parse_config_text, read_csv, run_experiment, run_trial,
                              sweep_three_node)
from bexrelay.netmodel import direct_rate

SMALL = dict(n_nodes=10, trials=6, master_seed=3)


def cfg(**kw):
    return ExperimentConfig(**{**SMALL, **kw})


def strip_time(report):
    for m in report.modes.values():
        m.wall_time_ms = 0.0
    return report


def test_parse_config():
    text = "# comment\nexperiment = n_node_outage\nn_nodes=12  # trailing\nalpha=1\n" \
           "modes = direct, centralized\nr_min_mbps = auto\n\n"
    vals = parse_config_text(text)
    assert vals == {"experiment": "n_node_outage", "n_nodes": 12, "alpha": 1.0,
                    "modes": ("direct", "centralized"), "r_min_mbps": "auto"}
    assert parse_config_text("alpha = maxmin")["alpha"] == "maxmin"


@pytest.mark.parametrize("text", ["n_nodez = 3", "n_nodes", "n_nodes = x",
                                  "trials = 2\ntrials = 3"])
def test_parse_config_errors(text):
    with pytest.raises(ConfigError):
        parse_config_text(text)


@pytest.mark.parametrize("bad", [dict(experiment="nope"), dict(trials=0), dict(fading="ricean"),
                                 dict(modes=("direct", "psychic")), dict(alpha=-1.0),
                                 dict(alpha="maxmin"), dict(cell_radius_m=0.0),
                                 dict(initial_allocation_mode="arbitrary")])
def test_config_validation(bad):
    with pytest.raises(ConfigError):
        cfg(**bad)


def test_load_config(tmp_path):
    path = tmp_path / "c.cfg"
    path.write_text("experiment = three_node_sweep\ntrials = 4\n")
    c = load_config(str(path))
    assert c.experiment == "three_node_sweep" and c.trials == 4
    assert c.bandwidth_per_node_mhz == 10.0 and c.fading == "deterministic"
    c2 = load_config(str(path), experiment="n_node_spectral", trials=9)
    assert c2.experiment == "n_node_spectral" and c2.trials == 9


def test_direct_only_trial():
    c = cfg(modes=("direct",))
    rep = run_trial(c, 0)
    m = rep.modes["direct"]
    total = sum(direct_rate(n.w_in, n.p_max, n.rho_i0) for n in rep.nodes)
    assert m.spectral_efficiency == pytest.approx(total / 10.0, rel=1e-14)
    assert m.pair_count == 0 and m.message_count == 0


def test_trial_deterministic():
    c = cfg()
    assert strip_time(run_trial(c, 4)) == strip_time(run_trial(c, 4))
    assert strip_time(run_trial(c, 4)) != strip_time(run_trial(c, 5))


@pytest.mark.parametrize("alpha", [0.0, 1.0])
def test_cross_mode_dominance(alpha):
    c = cfg(alpha=alpha, trials=20)
    for t in range(c.trials):
        rep = run_trial(c, t)
        u = {k: m.sum_utility for k, m in rep.modes.items()}
        slack = c.n_nodes * c.solver_tol
        assert u["centralized"] >= u["distributed"] - slack
        assert u["distributed"] >= u["direct"] - slack


def test_outage_requires_threshold():
    with pytest.raises(ConfigError):
        run_trial(cfg(experiment="n_node_outage"), 0)
    with pytest.raises(ConfigError):
        run_trial(ExperimentConfig.for_experiment("three_node_sweep"), 0)


def test_single_trial_summary(tmp_path):
    res = run_experiment(cfg(trials=1), str(tmp_path))
    rep = res.reports[0]
    for n, mode, metric, mean, se, count in res.summary:
        if metric in harness.METRICS:
            assert mean == getattr(rep.modes[mode], metric)
            assert count == 1 and math.isnan(se)


def test_summary_matches_csv(tmp_path):
    res = run_experiment(cfg(), str(tmp_path), n_sweep=[4, 8])
    rows = read_csv(res.paths["trials"])
    assert list(rows[0].keys()) == harness.TRIAL_COLUMNS
    for s in read_csv(res.paths["summary"]):
        if s["metric"] not in harness.METRICS:
            continue
        vals = [float(r[s["metric"]]) for r in rows
                if r["mode"] == s["mode"] and r["n_nodes"] == s["n_nodes"] and r[s["metric"]]]
        assert abs(float(s["mean"]) - math.fsum(vals) / len(vals)) <= 1e-9
        assert int(s["count"]) == len(vals)


def test_se_gain_definition(tmp_path):
    res = run_experiment(cfg(), None)
    se_d = res.metric("direct", "spectral_efficiency")
    se_c = res.metric("centralized", "spectral_efficiency")
    assert res.metric("centralized", "se_gain_pct") == pytest.approx(100 * (se_c / se_d - 1))


def _files(d):
    return {f: open(os.path.join(d, f), "rb").read() for f in sorted(os.listdir(d))}


@pytest.mark.parametrize("experiment", ["n_node_spectral", "n_node_outage"])
def test_serial_parallel_identical(tmp_path, experiment):
    c = ExperimentConfig.for_experiment(experiment, **SMALL)
    run_experiment(c, str(tmp_path / "a"), workers=1)
    run_experiment(c, str(tmp_path / "b"), workers=3)
    run_experiment(c, str(tmp_path / "c"), workers=1)
    a, b, cc = (_files(tmp_path / x) for x in "abc")
    assert a == b == cc
    assert set(a) == {"trials.csv", "rates.csv", "summary.csv"}


def test_timing_column_optional(tmp_path):
    res = run_experiment(cfg(trials=2), str(tmp_path), timing=True)
    rows = read_csv(res.paths["trials"])
    assert list(rows[0])[-1] == "wall_time_ms" and float(rows[0]["wall_time_ms"]) >= 0


def test_outage_accounting(tmp_path):
    c = ExperimentConfig.for_experiment("n_node_outage", **{**SMALL, "n_nodes": 20})
    res = run_experiment(c, str(tmp_path))
    assert res.r_min is not None
    rates = read_csv(res.paths["rates"])
    for row in read_csv(res.paths["trials"]):
        mine = [float(r["r_be_mbps"]) for r in rates
                if r["trial"] == row["trial"] and r["mode"] == row["mode"]]
        assert len(mine) == 20
        assert float(row["outage_probability"]) == protocol.outage_probability(mine, res.r_min)


def test_calibration():
    c = ExperimentConfig.for_experiment("n_node_outage", n_nodes=20)
    r1 = harness.calibrate_r_min(c, pilot_trials=30)
    assert r1 == harness.calibrate_r_min(c, pilot_trials=30)
    rates = []
    for t in range(30):
        rng, _ = harness.trial_rng(c.replace(master_seed=c.master_seed + 0x5EED), t)
        rates += [n.r_in for n in harness.draw_network(c, rng)[2]]
    assert np.mean(np.array(rates) < r1) == pytest.approx(0.3, abs=0.01)


def test_emit_csv(tmp_path):
    p = tmp_path / "x.csv"
    emit_csv(str(p), ["a", "b"], [])
    assert p.read_text() == "a,b\n"
    vals = [[0.1, 1e-300, "m"], [2.0 / 3.0, None, "n"], [float("nan"), 7, "o"]]
    emit_csv(str(p), ["x", "y", "z"], vals)
    text = p.read_text()
    assert text.endswith("\n")
    back = list(csv.reader(text.splitlines()))
    assert float(back[1][0]) == 0.1 and float(back[1][1]) == 1e-300
    assert float(back[2][0]) == 2.0 / 3.0 and back[2][1] == ""
    with pytest.raises(OSError):
        emit_csv(str(tmp_path / "missing" / "x.csv"), ["a"], [])


def test_one_report_one_line_per_mode(tmp_path):
    rep = run_trial(cfg(modes=("centralized",)), 0)
    rows = harness.trial_rows([rep])
    assert len(rows) == 1 and len(rows[0]) == len(harness.TRIAL_COLUMNS)
    assert rows[0][:4] == [10, 0, rep.seed, "centralized"]


def sweep(ds):
    c = ExperimentConfig.for_experiment("three_node_sweep")
    rows = sweep_three_node(c, 150.0, ds)
    return {(r[0], r[1]): r for r in rows}


def test_sweep_near_degenerate():
    rows = sweep([151.0])
    direct = rows[(151.0, "direct")][4]
    assert rows[(151.0, "be_sum")][4] - direct < 1e-2
    assert rows[(151.0, "be_maxmin")][5] - rows[(151.0, "direct")][5] < 1e-2


def test_sweep_qualitative():
    ds = np.arange(200.0, 801.0, 50.0)
    rows = sweep(ds)
    for d in ds:
        dr, s, m = rows[(d, "direct")], rows[(d, "be_sum")], rows[(d, "be_maxmin")]
        assert s[4] >= dr[4] and s[2] >= dr[2] - 1e-9
        assert m[5] >= dr[5] and m[3] >= dr[3] - 1e-9
    with pytest.raises(ValueError):
        sweep([100.0])


def test_sweep_writes_csv(tmp_path):
    c = ExperimentConfig.for_experiment("three_node_sweep")
    sweep_three_node(c, 150.0, [300.0, 400.0], str(tmp_path))
    rows = read_csv(str(tmp_path / "three_node.csv"))
    assert len(rows) == 6 and list(rows[0]) == harness.SWEEP_COLUMNS


# ---------------------------------------------------------------------------
# CLI

def test_cli_solve_pair(capsys):
    rc = cli.main(["solve-pair", "--ws", "1", "--wf", "1", "--rho-s0", "0.01",
                   "--rho-f0", "0.15", "--rho-sf", "0.15"])
    out = json.loads(capsys.readouterr().out)
    assert rc == 0 and out["feasible"] and out["gain"] == pytest.approx(1.337, abs=1e-3)
    cli.main(["solve-pair", "--ws", "1", "--wf", "1", "--rho-s0", "0.01", "--rho-f0", "0.15",
              "--rho-sf", "0.15", "--objective", "sum_with_minrate", "--r-min", "100"])
    assert json.loads(capsys.readouterr().out)["feasible"] is False


def test_cli_solve_pair_precondition(capsys):
    rc = cli.main(["solve-pair", "--ws", "1", "--wf", "1", "--rho-s0", "0.5",
                   "--rho-f0", "0.15", "--rho-sf", "0.15"])
    assert rc == 2 and "error" in capsys.readouterr().err


def test_cli_match(tmp_path, capsys):
    f = tmp_path / "g.txt"
    f.write_text("1 2 2\n2 3 3\n3 4 2\n")
    assert cli.main(["match", str(f)]) == 0
    out = capsys.readouterr().out.splitlines()
    assert out[:2] == ["1 2 2.0", "3 4 2.0"] and out[-1] == "# total 4.0"
    trace = tmp_path / "t.txt"
    assert cli.main(["match", str(f), "--mode", "distributed", "--trace", str(trace)]) == 0
    assert "2 3 3.0" in capsys.readouterr().out
    assert trace.read_text().splitlines()[0] == "1 1 2 add"


def test_cli_spectral_and_outage(tmp_path, capsys):
    out = tmp_path / "s"
    assert cli.main(["spectral", "--trials", "3", "--seed", "5", "--n-nodes", "6",
                     "--out", str(out)]) == 0
    assert "se_gain_pct" in capsys.readouterr().out
    assert {"trials.csv", "summary.csv", "rates.csv"} <= set(os.listdir(out))
    cfgfile = tmp_path / "o.cfg"
    cfgfile.write_text("n_nodes = 8\ntrials = 2\nmodes = direct,centralized\n")
    assert cli.main(["outage", "--config", str(cfgfile), "--out", str(tmp_path / "o")]) == 0
    rows = read_csv(str(tmp_path / "o" / "trials.csv"))
    assert {r["n_nodes"] for r in rows} == {"8"} and {r["mode"] for r in rows} == \
        {"direct", "centralized"}


def test_cli_bad_config(tmp_path, capsys):
    f = tmp_path / "bad.cfg"
    f.write_text("power = 3\n")
    assert cli.main(["spectral", "--config", str(f)]) == 2
    assert "unknown key" in capsys.readouterr().err


def test_cli_three_node(capsys, tmp_path):
    assert cli.main(["three-node", "--d-step", "300", "--out", str(tmp_path)]) == 0
    lines = capsys.readouterr().out.splitlines()
    assert lines[0] == ",".join(harness.SWEEP_COLUMNS) and len(lines) == 1 + 3 * 3
