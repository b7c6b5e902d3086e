import csv
import io
import json
import math

import pytest

from sagames.cli import main


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def load(text):
    return json.loads(text)


def csv_rows(text):
    lines = [ln for ln in text.splitlines() if not ln.startswith("#")]
    return list(csv.DictReader(io.StringIO("\n".join(lines))))


def csv_header(text):
    meta = {}
    for ln in text.splitlines():
        if ln.startswith("# ") and " = " in ln:
            k, v = ln[2:].split(" = ", 1)
            meta[k] = v
    return meta


def as_float(v):
    if v == "infinite":
        return math.inf
    return float(v)


def test_sne_delay(capsys):
    code, out, _ = run(capsys, "sne", "--metric", "delay", "--lambda", "1", "--C", "3", "--rho", "18")
    assert code == 0
    doc = load(out)
    rows = doc["results"]["rows"]
    assert [r["branch"] for r in rows] == ["lambert_principal", "lambert_minus1"]
    assert rows[0]["p_star"] == pytest.approx(0.49598735516605905, abs=1e-14)
    assert rows[1]["stable"] is False
    derived = doc["params"]["derived"]
    assert derived["regime_label"] == "two_sne"
    assert derived["C_bar"] == 1.5 and derived["lambda_C"] == 3
    assert derived["rho_t"] == pytest.approx(16.625376222593963)


def test_sne_goodput_geometry(capsys):
    code, out, _ = run(capsys, "sne", "--lambda", "1", "--rho", "0.5")
    assert code == 0
    doc = load(out)
    assert doc["params"]["inputs"]["beta"] == 4
    assert doc["params"]["derived"]["C"] == pytest.approx(math.pi ** 2 / 2)
    assert doc["results"]["rows"][0]["p_star"] == pytest.approx(math.log(2) / (math.pi ** 2 / 2))


def test_price_opt(capsys):
    _, out, _ = run(capsys, "price-opt", "--metric", "delay", "--lambda", "1", "--C", "3")
    row = load(out)["results"]["rows"][0]
    assert row["rho_star"] == pytest.approx(9 * math.e)
    assert row["equilibrium_density"] == pytest.approx(3 * math.e, abs=1e-12)
    _, out, _ = run(capsys, "price-opt", "--lambda", "1", "--C", "0.5")
    row = load(out)["results"]["rows"][0]
    assert row["rho_star"] == pytest.approx(math.exp(-0.5))
    assert row["p_star"] == 1


def test_poa_sweep_detects_jump(capsys):
    code, out, _ = run(capsys, "poa-sweep", "--metric", "delay", "--lambda", "1", "--C", "3",
                       "--rho-min", "16.7", "--rho-max", "30", "--steps", "300")
    assert code == 0
    res = load(out)["results"]
    assert res["jump_left"] <= math.exp(3) <= res["jump_right"]
    assert res["bounds_hold_all"] is True
    assert all(r["cost_ratio"] >= 1 for r in res["rows"])


def test_poa_sweep_goodput_infinite(capsys):
    _, out, _ = run(capsys, "poa-sweep", "--lambda", "1", "--C", "3",
                    "--rho-min", "0", "--rho-max", "0.1", "--steps", "11")
    doc = load(out)
    rows = doc["results"]["rows"]
    for r in rows:
        assert (r["poa"] == "infinite") == (r["rho"] >= math.exp(-3))
    assert doc["results"]["infinite_from"] == pytest.approx(0.05)
    _, text, _ = run(capsys, "poa-sweep", "--lambda", "1", "--C", "3", "--output", "csv",
                     "--rho-min", "0", "--rho-max", "0.1", "--steps", "11")
    assert csv_rows(text)[-1]["poa"] == "inf"


def test_replicator(capsys):
    code, out, _ = run(capsys, "replicator", "--lambda", "1", "--C", "3",
                       "--rho", "0.5", "--p0", "0.05")
    res = load(out)["results"]
    assert code == 0 and res["converged"] is True
    assert res["final"] == pytest.approx(math.log(2) / 3, abs=1e-6)
    assert res["rows"][0] == {"t": 0, "p": 0.050000000000000003}
    assert res["rows"][-1]["t"] == 1000


def test_replicator_rejects_delay(capsys):
    code, _, err = run(capsys, "replicator", "--metric", "delay", "--lambda", "1", "--C", "3",
                       "--rho", "18", "--p0", "0.5")
    assert code == 2 and "goodput" in err


def test_simulate_pass_and_seed_env(capsys, monkeypatch):
    args = ["simulate", "--lambda", "0.2", "--p", "0.5", "--r", "1", "--beta", "4", "--T", "1",
            "--w", "0", "--n", "20000"]
    code, out, _ = run(capsys, *args, "--seed", "7")
    row = load(out)["results"]["rows"][0]
    assert code == 0 and row["pass"] is True and row["seed"] == 7
    assert row["closed_form"] == pytest.approx(0.61049802526579715)
    monkeypatch.setenv("SAG_SEED", "7")
    _, out_env, _ = run(capsys, *args)
    assert out_env == out
    _, other, _ = run(capsys, *args, "--seed", "8")
    assert load(other)["results"]["rows"][0]["estimate"] != row["estimate"]


def test_simulate_delay(capsys):
    code, out, _ = run(capsys, "simulate", "--lambda", "0.2", "--p", "0.5", "--quantity", "delay",
                       "--n", "4000", "--seed", "1")
    row = load(out)["results"]["rows"][0]
    assert code == 0
    assert row["closed_form"] == pytest.approx(3.2760138726562545)


def test_simulate_soft_failure(capsys, monkeypatch):
    from sagames import cli
    from sagames.montecarlo import SimEstimate

    def biased(params, p, sim):
        return SimEstimate(value=0.5, std_error=0.0016, n=sim.n_samples, seed=sim.seed)

    monkeypatch.setattr(cli, "estimate_coverage", biased)
    code, out, _ = run(capsys, "simulate", "--lambda", "0.2", "--p", "0.5", "--n", "100000")
    doc = load(out)
    assert code == 1
    assert doc["results"]["rows"][0]["pass"] is False
    assert doc["warnings"]


@pytest.mark.parametrize("argv", [
    ["simulate", "--lambda", "0.2", "--p", "0"],
    ["simulate", "--lambda", "1", "--C", "3", "--p", "0.5"],
    ["simulate", "--lambda", "0.2", "--p", "0.5", "--window", "wide"],
    ["sne", "--lambda", "1", "--C", "3"],
    ["sne", "--lambda", "1", "--C", "3", "--rho", "-1"],
    ["sne", "--metric", "delay", "--lambda", "1", "--C", "3", "--rho", "0"],
    ["sne", "--lambda", "1", "--C", "3", "--beta", "3", "--rho", "1"],
    ["sne", "--lambda", "1", "--beta", "2", "--rho", "1"],
    ["sne", "--lambda", "-1", "--C", "3", "--rho", "1"],
    ["poa-sweep", "--lambda", "1", "--C", "3", "--rho-min", "2", "--rho-max", "1"],
    ["poa-sweep", "--metric", "delay", "--lambda", "1", "--C", "1",
     "--rho-min", "2", "--rho-max", "3"],
    ["replicator", "--lambda", "1", "--C", "3", "--rho", "0.5", "--p0", "1"],
    ["price-opt"],
    ["bogus"],
    ["sne", "--metric", "neither", "--lambda", "1"],
])
def test_validation_exit_2(capsys, argv):
    assert main(argv) == 2


def test_params_file_and_override(tmp_path, capsys):
    path = tmp_path / "p.json"
    path.write_text(json.dumps({"lambda": 1, "C": 3, "metric": "delay", "rho": 18}))
    _, out, _ = run(capsys, "sne", "--params", str(path))
    assert len(load(out)["results"]["rows"]) == 2
    _, out, _ = run(capsys, "sne", "--params", str(path), "--rho", "25")
    assert len(load(out)["results"]["rows"]) == 1
    bad = tmp_path / "bad.json"
    bad.write_text("[1, 2]")
    assert main(["sne", "--params", str(bad)]) == 2


@pytest.mark.parametrize("argv", [
    ["sne", "--metric", "delay", "--lambda", "1", "--C", "3", "--rho", "18"],
    ["price-opt", "--lambda", "0.7", "--r", "1.2", "--beta", "3.5", "--T", "2"],
    ["poa-sweep", "--metric", "delay", "--lambda", "1", "--C", "3",
     "--rho-min", "16.7", "--rho-max", "30", "--steps", "40"],
    ["replicator", "--lambda", "1", "--C", "3", "--rho", "0.5", "--p0", "0.95", "--horizon", "50"],
    ["simulate", "--lambda", "0.2", "--p", "0.5", "--n", "3000", "--seed", "11"],
])
def test_rerun_from_echo_is_byte_identical(tmp_path, capsys, argv):
    code, first, _ = run(capsys, *argv)
    assert code == 0
    echo = tmp_path / "echo.json"
    echo.write_text(json.dumps(load(first)["params"]["inputs"]))
    _, second, _ = run(capsys, argv[0], "--params", str(echo))
    assert second == first
    # a whole report is accepted as well
    report = tmp_path / "report.json"
    report.write_text(first)
    _, third, _ = run(capsys, argv[0], "--params", str(report))
    assert third == first


@pytest.mark.parametrize("argv", [
    ["sne", "--metric", "delay", "--lambda", "1", "--C", "3", "--rho", "18"],
    ["poa-sweep", "--lambda", "1", "--C", "3", "--rho-min", "0", "--rho-max", "0.1", "--steps", "7"],
    ["poa-sweep", "--metric", "delay", "--lambda", "1", "--C", "3",
     "--rho-min", "16.7", "--rho-max", "30", "--steps", "25"],
    ["replicator", "--lambda", "1", "--C", "3", "--rho", "0.5", "--p0", "0.5", "--horizon", "20"],
    ["simulate", "--lambda", "0.2", "--p", "0.5", "--n", "2000", "--seed", "3"],
])
def test_csv_json_parity(capsys, argv):
    _, js, _ = run(capsys, *argv)
    _, cs, _ = run(capsys, *argv, "--output", "csv")
    doc = load(js)
    rows_j = doc["results"]["rows"]
    rows_c = csv_rows(cs)
    assert len(rows_j) == len(rows_c)
    for rj, rc in zip(rows_j, rows_c):
        assert list(rj) == list(rc)
        for k, vj in rj.items():
            vc = rc[k]
            if isinstance(vj, bool):
                assert vc == ("true" if vj else "false")
            elif vj is None:
                assert vc == ""
            elif isinstance(vj, (int, float)) or vj == "infinite":
                assert as_float(vj) == as_float(vc)
            else:
                assert vj == vc
    meta = csv_header(cs)
    for k, v in doc["params"]["inputs"].items():
        got = meta[f"inputs.{k}"]
        assert got == str(v) or float(got) == float(v)


def test_seventeen_digits(capsys):
    _, out, _ = run(capsys, "sne", "--lambda", "1", "--C", "3", "--rho", "0.5")
    assert '"p_star": 0.23104906018664842' in out


def test_out_file(tmp_path, capsys):
    dest = tmp_path / "r.csv"
    code, out, _ = run(capsys, "price-opt", "--lambda", "1", "--C", "3", "--output", "csv",
                       "--out", str(dest))
    assert code == 0 and out == ""
    assert dest.read_text().startswith("# command: price-opt")
