import json
import subprocess
import sys

import numpy as np
import pytest

from gcovsel.cli import EXIT_INPUT, EXIT_NUMERICAL, EXIT_OK, SCHEMA, main


@pytest.fixture()
def signal_csv(tmp_path):
    # y depends on x1 and x4 only
    rng = np.random.default_rng(0)
    n = 200
    X = rng.standard_normal((n, 6))
    y = 3.0 * X[:, 0] - 2.0 * X[:, 3] + 0.5 * rng.standard_normal(n)
    p = tmp_path / "sig.csv"
    header = ["y"] + [f"x{i}" for i in range(1, 7)]
    with open(p, "w") as fh:
        fh.write(",".join(header) + "\n")
        for i in range(n):
            fh.write(",".join([f"{y[i]:.10g}"] + [f"{v:.10g}" for v in X[i]]) + "\n")
    return p


def run(argv):
    return main([str(a) for a in argv])


def test_select_json_schema_and_chosen(signal_csv, capsys):
    assert run(["select", signal_csv, "--kmn", "0", "--format", "json"]) == EXIT_OK
    rep = json.loads(capsys.readouterr().out)
    assert rep["schema"] == SCHEMA
    assert rep["command"].startswith("gcovsel select")
    assert "timing_s" in rep and "config" in rep
    chosen = set(rep["results"]["traces"][0]["chosen"])
    assert chosen == {0, 3}
    names = {c["name"] for c in rep["results"]["traces"][0]["covariates"]}
    assert names == {"x1", "x4"}


def test_select_table_format(signal_csv, capsys):
    assert run(["select", signal_csv, "--kmn", "0"]) == EXIT_OK
    out = capsys.readouterr().out
    assert "x1" in out and "x4" in out and "rss" in out


def test_select_methods_run(signal_csv, capsys):
    for method in ("f2st", "f3st"):
        assert run(["select", signal_csv, "--kmn", "0", "--method", method,
                    "--format", "json"]) == EXIT_OK
        capsys.readouterr()


def test_select_huber_loss(signal_csv, capsys):
    assert run(["select", signal_csv, "--kmn", "0", "--loss", "huber",
                "--format", "json"]) == EXIT_OK
    rep = json.loads(capsys.readouterr().out)
    assert set(rep["results"]["traces"][0]["chosen"]) == {0, 3}
    assert rep["results"]["traces"][0]["asymptotic"] is True


def test_subsets_command(signal_csv, capsys):
    assert run(["subsets", signal_csv, "--format", "json"]) == EXIT_OK
    rep = json.loads(capsys.readouterr().out)
    subsets = rep["results"]["subsets"]
    assert subsets and set(subsets[0]["indices"]) >= {0, 3}


def test_region_command(signal_csv, capsys):
    assert run(["region", signal_csv, "--subset", "1,4",
                "--format", "json"]) == EXIT_OK
    rep = json.loads(capsys.readouterr().out)
    ivs = {iv["name"]: iv for iv in rep["results"]["intervals"]}
    assert ivs["x1"]["lo"] < 3.0 < ivs["x1"]["hi"]
    assert ivs["x4"]["lo"] < -2.0 < ivs["x4"]["hi"]
    assert rep["results"]["radius_rss"] > rep["results"]["rss_ls"]


def test_fnfp_simulation(capsys):
    assert run(["fnfp", "--n", "60", "--q", "15", "--nsim", "200",
                "--seed", "4", "--format", "json"]) == EXIT_OK
    rep = json.loads(capsys.readouterr().out)
    assert rep["seed"] == 4
    assert rep["results"]["source"] == "simulation"
    assert 0.0 <= rep["results"]["mean_false_positives"] < 2.0


def test_graph_dot_and_table(tmp_path, capsys):
    rng = np.random.default_rng(1)
    x1 = rng.standard_normal(300)
    x2 = x1 + 0.4 * rng.standard_normal(300)
    p = tmp_path / "g.csv"
    with open(p, "w") as fh:
        fh.write("a,b\n")
        for i in range(300):
            fh.write(f"{x1[i]:.8g},{x2[i]:.8g}\n")
    assert run(["graph", p, "--format", "dot"]) == EXIT_OK
    dot = capsys.readouterr().out
    assert dot.startswith("digraph") and '"a"' in dot
    assert run(["graph", p, "--format", "table"]) == EXIT_OK
    out = capsys.readouterr().out
    assert out.startswith("source\ttarget\tpvalue")


def test_simulate_null_scenario(capsys):
    assert run(["simulate", "null", "--n", "100", "--q", "50",
                "--reps", "400", "--seed", "1", "--format", "json"]) == EXIT_OK
    rep = json.loads(capsys.readouterr().out)
    rate = rep["results"]["rows"][0]["nonempty_rate"]
    assert abs(rate - 0.01) < 0.02


def test_exit_code_input_errors(tmp_path, capsys, signal_csv):
    assert run(["select", tmp_path / "missing.csv"]) == EXIT_INPUT
    assert "error:" in capsys.readouterr().err
    assert run(["region", signal_csv, "--subset", "1,99"]) == EXIT_INPUT
    capsys.readouterr()
    assert run(["region", signal_csv, "--subset", "a,b"]) == EXIT_INPUT
    capsys.readouterr()
    assert run(["fnfp", "--n", "10", "--q", "5", "--lookup"]) == EXIT_INPUT
    assert "simulate_fp" in capsys.readouterr().err


def test_exit_code_numerical_failure(tmp_path, capsys):
    # perfectly separated binary outcome: the logistic fit diverges
    p = tmp_path / "sep.csv"
    with open(p, "w") as fh:
        fh.write("y,x\n")
        for i in range(60):
            v = (i - 30) / 5.0
            fh.write(f"{1 if v > 0 else 0},{v:.6g}\n")
    assert run(["select", p, "--loss", "logistic", "--kmn", "0"]) == EXIT_NUMERICAL
    assert "numerical failure" in capsys.readouterr().err


def test_entry_point_and_version():
    out = subprocess.run([sys.executable, "-m", "gcovsel.cli", "--version"],
                         capture_output=True, text=True)
    assert out.returncode == 0
    from gcovsel import __version__

    assert out.stdout.strip() == __version__


def test_seed_echo_reproducible(capsys):
    outs = []
    for _ in range(2):
        assert run(["fnfp", "--n", "50", "--q", "10", "--nsim", "100",
                    "--seed", "9", "--format", "json"]) == EXIT_OK
        rep = json.loads(capsys.readouterr().out)
        rep.pop("timing_s")
        outs.append(rep)
    assert outs[0] == outs[1]


def test_threads_env_default(monkeypatch):
    monkeypatch.setenv("GCOVSEL_THREADS", "4")
    from gcovsel.cli import build_parser

    args = build_parser().parse_args(["fnfp", "--n", "50", "--q", "10"])
    assert args.threads == 4
    monkeypatch.setenv("GCOVSEL_THREADS", "junk")
    args = build_parser().parse_args(["fnfp", "--n", "50", "--q", "10"])
    assert args.threads == 1
