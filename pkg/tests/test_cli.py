import json
import math
import subprocess
import sys

import numpy as np
import pytest

from chpeakon import serialization as io
from chpeakon.cli import main


def run(tmp_path, *args):
    out = tmp_path / "out"
    code = main([*args, "--out", str(out)])
    return code, out


def test_simulate_ode_xia_qiao(tmp_path, capsys):
    code, out = run(tmp_path, "simulate-ode", "--preset", "xia-qiao", "--p", "1", "--q", "0", "--t-end", "2")
    assert code == 0
    header, data = io.read_csv(out / "trajectory.csv")
    assert header == ["t", "p_1", "q_1", "h1_norm"]
    assert data[-1, 1] == pytest.approx(1 / 3, rel=1e-9)
    assert data[-1, 2] == pytest.approx(math.log(3), rel=1e-9)
    assert json.loads((out / "events.json").read_text())["status"] == "reached_t_end"
    assert (out / "plots" / "trajectory.gp").exists()
    assert "p = 0.3333333333" in capsys.readouterr().out


def test_simulate_ode_two_peakon_conserves_h1(tmp_path):
    code, out = run(tmp_path, "simulate-ode", "--preset", "camassa-holm", "--p", "2,1", "--q", "-3,0",
                    "--t-end", "5", "--profile-times", "0,2.5,5")
    assert code == 0
    _, data = io.read_csv(out / "trajectory.csv")
    h = data[:, -1]
    assert np.max(np.abs(h - h[0])) / h[0] < 1e-8
    assert np.all(np.diff(data[:, 3]) > 0) and np.all(np.diff(data[:, 4]) > 0)
    for t in ("0", "2.5", "5"):
        assert (out / f"profile_t{t}.csv").exists()


def test_negative_values_and_halt(tmp_path):
    code, out = run(tmp_path, "simulate-ode", "--preset", "camassa-holm", "--p", "1,-1", "--q", "-1,1",
                    "--t-end", "10")
    assert code == 3
    ev = json.loads((out / "events.json").read_text())
    # the amplitudes of a peakon-antipeakon pair diverge as they meet
    assert ev["status"] == "blow_up_detected"
    assert ev["events"][-1]["t"] < 10


def test_inadmissible_lambda_rejected(tmp_path, capsys):
    code, _ = run(tmp_path, "simulate-ode", "--lambda", "1,1,0,0,0,0", "--p", "1", "--q", "0", "--t-end", "1")
    assert code == 2
    assert "lambda3 = lambda1" in capsys.readouterr().err


@pytest.mark.parametrize("args", [
    ["simulate-ode", "--p", "1", "--q", "0", "--t-end", "1"],
    ["simulate-ode", "--preset", "kdv", "--p", "1", "--q", "0", "--t-end", "1"],
    ["simulate-ode", "--preset", "camassa-holm", "--p", "1,2", "--q", "0", "--t-end", "1"],
    ["simulate-ode", "--preset", "camassa-holm", "--lambda", "0,1,0,0,1,0.5", "--p", "1", "--q", "0", "--t-end", "1"],
    ["simulate-ode", "--preset", "camassa-holm", "--p", "1", "--q", "0", "--t-end", "abc"],
    ["simulate-ode", "--preset", "camassa-holm", "--p", "1", "--q", "0"],
    ["simulate-pde", "--preset", "camassa-holm", "--n", "1000", "--t-end", "1", "--init", "zero"],
    ["simulate-pde", "--preset", "camassa-holm", "--t-end", "1", "--init", "square"],
    ["fit-two-peakon", "--xi1", "1", "--xi2", "0", "--eta1", "-1", "--eta2", "0"],
    ["verify", "--suite", "nonsense"],
    ["bound", "--lambda", "0,1,0,0,0,1", "--u0-h1", "1", "--slope-min", "-5", "--slope-max", "5"],
    ["no-such-command"],
])
def test_config_errors_exit_2(tmp_path, args):
    assert run(tmp_path, *args)[0] == 2


def test_simulate_pde_zero_field(tmp_path):
    code, out = run(tmp_path, "simulate-pde", "--preset", "camassa-holm", "--init", "zero", "--L", "10",
                    "--n", "64", "--t-end", "1", "--binary")
    assert code == 0
    _, data = io.read_csv(out / "final.csv")
    assert np.all(data[:, 1] == 0.0)
    assert io.read_field_binary(out / "snapshot_t1.bin").t == 1.0
    assert json.loads((out / "status.json").read_text())["status"] == "reached_t_end"
    header, mon = io.read_csv(out / "monitors.csv")
    assert header[0] == "t" and mon.shape[1] == 7


def test_simulate_pde_dp_peakon(tmp_path):
    code, out = run(tmp_path, "simulate-pde", "--preset", "degasperis-procesi", "--p", "1", "--q", "-5",
                    "--L", "20", "--n", "1024", "--t-end", "2", "--snapshot-times", "1,2")
    assert code == 0
    _, data = io.read_csv(out / "final.csv")
    assert data[np.argmax(data[:, 1]), 0] == pytest.approx(-3.0, abs=0.1)
    assert (out / "snapshot_t1.csv").exists() and (out / "snapshot_t2.csv").exists()


def test_simulate_pde_cfl_at_launch(tmp_path, capsys):
    code, _ = run(tmp_path, "simulate-pde", "--preset", "camassa-holm", "--init", "gaussian", "--L", "10",
                  "--n", "256", "--t-end", "1", "--dt", "0.5")
    assert code == 2
    assert "CFL" in capsys.readouterr().err


def test_simulate_pde_breaking_halts(tmp_path):
    code, out = run(tmp_path, "simulate-pde", "--preset", "camassa-holm", "--init", "neg_slope", "--a", "1",
                    "--w", "0.3", "--L", "10", "--n", "1024", "--t-end", "2")
    assert code == 3
    status = json.loads((out / "status.json").read_text())
    assert status["status"] == "blow_up" and status["t"] < 0.7883


@pytest.mark.slow
def test_simulate_pde_steep_gaussian(tmp_path):
    code, out = run(tmp_path, "simulate-pde", "--preset", "camassa-holm", "--init", "gaussian", "--a", "2",
                    "--w", "1", "--L", "5", "--n", "8192", "--t-end", "2", "--tail-tol", "1e-2")
    assert code == 3
    _, mon = io.read_csv(out / "monitors.csv")
    assert mon[-1, 3] > 10 * mon[0, 3]
    assert mon[:, 2].max() < 1.1 * mon[0, 2]


def test_fit_two_peakon(tmp_path):
    code, out = run(tmp_path, "fit-two-peakon", "--xi1", "2", "--xi2", "1", "--eta1", "-3", "--eta2", "0",
                    "--emit-trajectory")
    assert code == 0
    c = json.loads((out / "constants.json").read_text())
    assert c["C1"] == pytest.approx(2 - 1.9004, abs=1e-4)
    assert c["mu2"] == pytest.approx(-1.9004, abs=1e-4)
    header, data = io.read_csv(out / "two_peakon.csv")
    assert header == ["s", "t", "p1", "p2", "q1", "q2", "separation"]
    row = data[np.argmin(np.abs(data[:, 0] - 1.0))]
    np.testing.assert_allclose(row[2:6], [2, 1, -3, 0], atol=1e-12)


def test_verify_suite(tmp_path, capsys):
    code, out = run(tmp_path, "verify", "--suite", "convolution-quadrature")
    assert code == 0
    report = json.loads((out / "verify.json").read_text())
    assert all(c["passed"] for c in report["convolution-quadrature"])
    assert "[PASS]" in capsys.readouterr().out


def test_bound(tmp_path):
    code, out = run(tmp_path, "bound", "--preset", "camassa-holm", "--init", "neg_slope", "--a", "1", "--w", "0.3",
                    "--L", "10", "--n", "2048")
    assert code == 0
    d = json.loads((out / "bound.json").read_text())
    assert d["T1"] == pytest.approx(0.7883109, abs=1e-6)
    assert d["K0"] == pytest.approx(d["u0_h1"] ** 2)
    code, out = run(tmp_path, "bound", "--preset", "camassa-holm", "--init", "gaussian", "--L", "10", "--n", "256")
    assert json.loads((out / "bound.json").read_text())["certificate"] is None


def test_besov(tmp_path):
    code, out = run(tmp_path, "besov", "--p", "0.25", "--q", "0")
    assert code == 0
    d = json.loads((out / "besov.json").read_text())
    assert d["norm_squared"] == pytest.approx(8 * math.asinh(1) * 0.0625, rel=1e-9)
    code, out = run(tmp_path, "besov", "--illposed")
    d = json.loads((out / "besov.json").read_text())
    assert d["difference_norm_T"] >= d["final_separation_lower_bound"] == 2.0


def test_config_file_precedence(tmp_path):
    cfg = tmp_path / "run.ini"
    cfg.write_text("[model]\npreset = xia-qiao\n[ode]\np = 1\nq = 0\nt_end = 5\n")
    code, out = run(tmp_path, "simulate-ode", "--config", str(cfg), "--t-end", "1")
    assert code == 0
    _, data = io.read_csv(out / "trajectory.csv")
    assert data[-1, 0] == 1.0
    echo = (out / "config.echo").read_text()
    assert "t_end = 1.0" in echo and "preset = xia-qiao" in echo


@pytest.mark.parametrize("text", ["[ode]\nbogus = 1\n", "[weird]\np = 1\n", "[pde]\np = 1\n", "not ini"])
def test_config_file_rejects_unknown(tmp_path, text):
    cfg = tmp_path / "bad.ini"
    cfg.write_text(text)
    assert run(tmp_path, "simulate-ode", "--config", str(cfg), "--preset", "camassa-holm", "--p", "1",
               "--q", "0", "--t-end", "1")[0] == 2


def test_config_echo_reproduces_run(tmp_path):
    code, out = run(tmp_path, "simulate-ode", "--preset", "camassa-holm", "--p", "2,1", "--q", "-3,0",
                    "--t-end", "3")
    assert code == 0
    again = tmp_path / "again"
    assert main(["simulate-ode", "--config", str(out / "config.echo"), "--out", str(again)]) == 0
    assert (out / "trajectory.csv").read_bytes() == (again / "trajectory.csv").read_bytes()


def test_console_entry_point(tmp_path):
    res = subprocess.run([sys.executable, "-m", "chpeakon", "besov", "--p", "1", "--q", "0", "--out",
                          str(tmp_path)], capture_output=True, text=True)
    assert res.returncode == 0
    assert '"norm"' in res.stdout
