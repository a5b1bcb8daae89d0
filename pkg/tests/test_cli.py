import csv
import io
import json
from fractions import Fraction as F

import pytest

from parrondo_ensemble import checks
from parrondo_ensemble.cli import SWEEP_COLUMNS, main


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def values(text):
    out = {}
    for line in text.splitlines():
        if " = " in line:
            k, v = line.split(" = ", 1)
            out[k.strip()] = v.split()[0]
    return out


def test_analyze_exact_two_players(capsys):
    code, out, _ = run(capsys, "analyze", "--rho", "1/3", "--gamma", "1/2", "--N", "2", "--exact")
    assert code == 0
    v = values(out)
    assert v["mu"] == "48/1609"
    assert v["sigma2"] == "114315959583/258261590798"
    assert out.startswith("parameters: rho=1/3 eps=0 gamma=1/2 N=2 mode=exact")


def test_analyze_fair_and_biased(capsys):
    code, out, _ = run(capsys, "analyze", "--rho", "1", "--gamma", "1/2", "--N", "5")
    assert code == 0 and values(out)["mu"] == "0"
    code, out, _ = run(capsys, "analyze", "--rho", "1/3", "--eps", "1/1000", "--gamma", "1/2", "--N", "200")
    assert code == 0 and values(out)["mu"] == "193387599/6704101000"


def test_analyze_json_and_limit(capsys):
    code, out, _ = run(capsys, "analyze", "--rho", "1/3", "--N", "inf", "--json")
    d = json.loads(out)
    assert code == 0
    assert d["parameters"]["N"] == "inf" and d["parameters"]["rho"] == "1/3"
    assert d["sigma2"] == "5941525691817/13404609664322"
    code, out, _ = run(capsys, "analyze", "--rho", "0.3", "--N", "4", "--json")
    d = json.loads(out)
    assert d["parameters"]["mode"] == "float" and isinstance(d["mu"], float)
    assert len(d["pi_one"]) == 3 and len(d["pi_pair"]) == 9


def test_pattern_examples(capsys):
    code, out, _ = run(capsys, "pattern", "--rho", "1/3", "--r", "1", "--s", "1", "--N", "2", "--exact")
    v = values(out)
    assert code == 0 and v["sigma2"] == "74176355601/141627323986" and v["methods_agree"] == "True"
    code, out, _ = run(capsys, "pattern", "--rho", "1/3", "--r", "2", "--s", "1", "--limit")
    assert code == 0 and values(out)["sigma2_limit"] == "1891312136577/6060711605323"
    code, out, _ = run(capsys, "pattern", "--rho", "1", "--r", "4", "--s", "3", "--N", "7")
    assert code == 0 and values(out)["mu"] == "0"
    code, out, _ = run(capsys, "pattern", "--rho", "1/3", "--r", "1", "--s", "2", "--N", "3", "--limit", "--json")
    d = json.loads(out)
    assert d["sigma2_limit"] == "136286243910/252688187761" and d["mu"] == "2/45"


@pytest.mark.parametrize("argv", [
    ["analyze", "--rho", "abc", "--N", "2"],
    ["analyze", "--rho", "1/3", "--N", "1"],
    ["analyze", "--rho", "1/3", "--eps", "1", "--N", "3"],
    ["analyze", "--rho", "1/3", "--gamma", "3/2", "--N", "3"],
    ["analyze", "--rho", "0.3", "--N", "inf"],
    ["pattern", "--rho", "1/3", "--r", "0", "--s", "1", "--N", "2"],
    ["pattern", "--rho", "1/3", "--r", "1", "--s", "1"],
    ["simulate", "--rho", "1/3", "--N", "3"],
    ["simulate", "--rho", "1/3", "--N", "3", "--game", "B", "--gamma", "1/2"],
    ["sweep", "--var", "gamma", "--range", "0.1:0.9", "--N", "3"],
    ["sweep", "--var", "rho", "--range", "1/2,2", "--N", "3"],
    ["verify", "--case", "no.such.case"],
    ["bogus"],
    ["analyze", "--N", "2"],
])
def test_usage_errors_exit_2(capsys, argv):
    with pytest.raises(SystemExit) as exc:
        raise SystemExit(main(argv))
    assert exc.value.code == 2


def test_computation_error_exit_3(capsys, monkeypatch):
    import parrondo_ensemble.markov as mk

    def boom(*a, **k):
        raise mk.ReducibleChainError("forced")

    monkeypatch.setattr(mk, "mixture_ensemble_stats", boom)
    code, _, err = run(capsys, "analyze", "--rho", "1/3", "--N", "3")
    assert code == 3 and "forced" in err


def _sweep(capsys, tmp_path, *argv):
    path = tmp_path / "out.csv"
    code, _, err = run(capsys, "sweep", *argv, "--out", str(path))
    assert code == 0
    raw = path.read_bytes()
    assert b"\r" not in raw
    raw.decode("utf-8")
    rows = list(csv.DictReader(io.StringIO(raw.decode())))
    assert tuple(rows[0].keys()) == SWEEP_COLUMNS
    assert "parameters:" in err
    return rows


def test_sweep_gamma_has_interior_maximum(capsys, tmp_path):
    rows = _sweep(capsys, tmp_path, "--var", "gamma", "--range", "0:1:1/10", "--rho", "1/3", "--N", "4")
    mus = [F(r["mu"]) for r in rows]
    assert len(rows) == 11 and mus[0] == 0 and mus[-1] == 0
    k = mus.index(max(mus))
    assert 0 < k < 10


def test_sweep_rho_changes_sign(capsys, tmp_path):
    rows = _sweep(capsys, tmp_path, "--var", "rho", "--range", "1/2,3/4,1,4/3,2", "--gamma", "1/2", "--N", "3")
    signs = [(F(r["mu"]) > 0) - (F(r["mu"]) < 0) for r in rows]
    assert signs == [1, 1, 0, -1, -1]


def test_sweep_N_mean_constant(capsys, tmp_path):
    rows = _sweep(capsys, tmp_path, "--var", "N", "--range", "2,3,5,10,inf", "--gamma", "1/2")
    assert {r["mu"] for r in rows} == {"48/1609"}
    assert rows[-1]["method"] == "limit" and rows[-1]["N"] == "inf"


def test_sweep_rs_and_threads_deterministic(capsys, tmp_path):
    a = _sweep(capsys, tmp_path, "--var", "rs", "--range", "1:2", "--N", "3")
    b = _sweep(capsys, tmp_path, "--var", "rs", "--range", "1:2", "--N", "3", "--threads", "3")
    assert a == b
    assert [(r["r"], r["s"]) for r in a] == [("1", "1"), ("1", "2"), ("2", "1"), ("2", "2")]
    assert a[1]["gamma_equiv"] == "1/3" and a[1]["mode"] == "exact"


def test_sweep_unwritable(capsys, tmp_path):
    code, _, err = run(capsys, "sweep", "--var", "gamma", "--range", "1/2", "--N", "3",
                       "--out", str(tmp_path / "missing" / "x.csv"))
    assert code == 2 and "cannot write" in err


def test_simulate_json_and_trace(capsys, tmp_path):
    trace = tmp_path / "trace.csv"
    code, out, _ = run(capsys, "simulate", "--rho", "1/3", "--N", "4", "--gamma", "1/2", "--n", "2000",
                       "--R", "5", "--seed", "9", "--trace", "every:1000", "--trace-out", str(trace), "--json")
    assert code == 0
    d = json.loads(out)
    assert d["config"]["seed"] == 9 and d["rng"].startswith("numpy.random.Philox")
    assert trace.read_text().splitlines()[0] == "turn,S_n,sample_variance"
    code2, out2, _ = run(capsys, "simulate", "--rho", "1/3", "--N", "4", "--gamma", "1/2", "--n", "2000",
                         "--R", "5", "--seed", "9", "--json", "--threads", "2")
    d2 = json.loads(out2)
    assert d2["mean_slope"] == d["mean_slope"]


def test_simulate_text(capsys):
    code, out, _ = run(capsys, "simulate", "--rho", "1/3", "--N", "3", "--game", "A'", "--n", "100", "--R", "3")
    assert code == 0 and out.startswith("parameters: ")
    assert "mean_slope = 0 +/- 0" in out


def test_verify_single_case(capsys):
    code, out, _ = run(capsys, "verify", "--case", "sigma2.mixture.N2")
    assert code == 0
    assert "PASS sigma2.mixture.N2" in out
    assert out.count("114315959583/258261590798") == 2


def test_verify_failure_exit_1(capsys, monkeypatch):
    monkeypatch.setitem(checks.REGISTRY, "always.fails",
                        checks.Case("always.fails", lambda: checks.CheckResult("", False, 1, 2), "test"))
    code, out, _ = run(capsys, "verify", "--case", "always.fails", "--case", "sigma2.B")
    assert code == 1
    assert "FAIL always.fails" in out and "PASS sigma2.B" in out


def test_verify_list_and_formula(capsys):
    code, out, _ = run(capsys, "verify", "--list")
    assert code == 0 and "lazy.identity" in out and "[slow]" in out
    code, out, _ = run(capsys, "verify", "--formula", "mu.mixture", "--at", "gamma=1/2", "rho=1/3")
    assert code == 0 and values(out)["value"] == "48/1609"
    code, out, _ = run(capsys, "verify", "--formula", "mu.mixture", "--at", "rho=1/3")
    assert code == 2
