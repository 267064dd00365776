import csv
import io
import json
import math
import subprocess
import sys

import pytest
from hypothesis import given, strategies as st

from singular2d.cli import RunConfig, parse_config_text, run_command
from singular2d.errors import ConfigError


def run(argv):
    out, err = io.StringIO(), io.StringIO()
    code = run_command(argv, stdout=out, stderr=err)
    return code, out.getvalue(), err.getvalue()


def test_inspect_critical_exponential():
    code, out, _ = run(["inspect", "--spec", "s"])
    doc = json.loads(out)
    assert code == 0
    assert doc["critical_exponential"] is True
    assert doc["singular_admissible"] is False


def test_inspect_double_exp_q():
    code, out, _ = run(["inspect", "--spec", "double_exp"])
    assert code == 0
    assert json.loads(out)["report"]["q"] == pytest.approx(1.0, abs=1e-3)


def test_shoot_gelfand_fold():
    code, out, _ = run(["shoot", "--spec", "s", "--alpha", "1.386294", "--json", "-", "--out", "/dev/null"])
    assert code == 0
    assert json.loads(out)["lambda"] == pytest.approx(2.0, abs=1e-3)


def test_shoot_csv_columns(tmp_path):
    path = tmp_path / "v.csv"
    code, _, _ = run(["ode", "shoot", "--spec", "f2", "--alpha", "2", "--out", str(path)])
    rows = list(csv.reader(path.open()))
    assert code == 0
    assert rows[0] == ["r", "u", "du", "log_r", "r_du"]
    assert float(rows[1][1]) == pytest.approx(2.0, abs=1e-9)


def test_singular_outputs(tmp_path):
    path = tmp_path / "sing.csv"
    code, out, _ = run(["singular", "--spec", "f2", "--rho-max", "400", "--out", str(path)])
    assert code == 0
    assert list(csv.reader(path.open()))[0] == ["rho", "y", "dy", "eta"]
    err_rows = list(csv.reader((tmp_path / "sing.expansion.csv").open()))
    assert err_rows[0] == ["rho", "g_of_y", "expansion_g", "err"]
    assert json.loads(out)["rho_zero"] == pytest.approx(1.0, abs=1e-6)


def test_bifurc_trace_and_report(tmp_path):
    path = tmp_path / "curve.csv"
    code, out, _ = run(["bifurc", "trace", "--spec", "f2", "--alpha", "0.5:4:15", "--out", str(path)])
    rows = list(csv.reader(path.open()))
    assert code == 0
    assert rows[0] == ["alpha", "lambda", "r0", "is_turning", "lambda_minus_lambdainf"]
    assert len(rows) >= 16
    summary = json.loads(out)
    assert summary["lambda_inf"] == pytest.approx(math.exp(-1), abs=1e-3)
    code, out, _ = run(["bifurc", "report", "--spec", "f2", "--alpha", "0.5:4:15"])
    assert json.loads(out) == summary
    copy = tmp_path / "summary.json"
    code, out, _ = run(["bifurc", "report", "--spec", "f2", "--alpha", "0.5:4:15",
                        "--json", str(copy)])
    assert json.loads(out) == json.loads(copy.read_text()) == summary


def test_lyap_from_singular_csv(tmp_path):
    sing = tmp_path / "sing.csv"
    assert run(["singular", "--spec", "f2", "--out", str(sing)])[0] == 0
    code, out, _ = run(["lyap", "trace", "--spec", "f2", "--singular", str(sing)])
    rows = list(csv.reader(io.StringIO(out)))
    assert code == 0
    assert rows[0] == ["rho", "w", "t", "dWdt", "Hcal", "L"]
    assert float(rows[1][0]) >= 100.0


def test_intersect_count():
    code, out, _ = run(["intersect", "--spec", "exp_pow", "--alphas", "5,10"])
    rows = list(csv.reader(io.StringIO(out)))
    assert code == 0
    assert rows[0] == ["alpha", "Z", "r_min_used"]
    assert [int(r[1]) for r in rows[1:]] == [5, 19]


def test_asym_dump():
    code, out, _ = run(["asym", "dump", "--spec", "f2", "--rho-grid", "100:400:4"])
    rows = list(csv.reader(io.StringIO(out)))
    assert code == 0
    assert rows[0] == ["rho", "y1", "y2", "dy2", "G", "a", "b", "expansion_g"]
    assert len(rows) == 5


def test_verify_subset():
    code, out, err = run(["verify", "--only", "1,3"])
    doc = json.loads(out)
    assert code == 0 and doc["passed"]
    assert "[PASS]" in err


def test_verify_failure_exit_code():
    code, out, _ = run(["verify", "--only", "5"])
    assert code == (0 if json.loads(out)["passed"] else 1)


# -- exit codes ---------------------------------------------------------------

def test_config_errors_exit_2(tmp_path):
    assert run(["shoot", "--spec", "exp(s^", "--alpha", "1"])[0] == 2
    assert run(["singular", "--spec", "s"])[0] == 2
    assert run(["shoot", "--spec", "f2", "--alpha", "1:x:3"])[0] == 2
    bad = tmp_path / "bad.cfg"
    bad.write_text("spec = f2\nbogus = 1\n")
    code, _, err = run(["shoot", "--config", str(bad), "--alpha", "1"])
    assert code == 2 and "bogus" in err


def test_numeric_error_exit_3():
    code, _, err = run(["shoot", "--spec", "f1", "--param", "B=2", "--alpha", "1"])
    assert code == 3
    assert json.loads(err)["error"] == "DomainError"


def test_unknown_subcommand_exit_2():
    assert run(["frobnicate"])[0] == 2


# -- configuration ------------------------------------------------------------

finite = st.floats(allow_nan=False, allow_infinity=False, width=64)


@given(spec=st.sampled_from(["f1", "f2", "exp(s^2)", "s"]),
       params=st.dictionaries(st.sampled_from(["B", "p", "r", "i"]), finite, max_size=3),
       tol=st.floats(1e-14, 1e-3), rho_max=st.floats(10.0, 1e9),
       arith=st.sampled_from(["auto", "f64", "dd"]), threads=st.integers(1, 16),
       seed=st.one_of(st.none(), st.integers(0, 2**31)))
def test_config_round_trip(spec, params, tol, rho_max, arith, threads, seed):
    cfg = RunConfig(spec=spec, params=tuple(sorted(params.items())), tol=tol, rho_max=rho_max,
                    arith=arith, threads=threads, seed=seed)
    text = cfg.to_text()
    back = parse_config_text(text)
    assert back == cfg
    assert back.to_text() == text


def test_config_file_and_flags(tmp_path):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("# gelfand fold\nspec = s\nalpha = 1.3862943611198906\ntol = 1e-10\n")
    code, out, _ = run(["shoot", "--config", str(cfg), "--json", "-", "--out", "/dev/null"])
    assert code == 0
    assert json.loads(out)["lambda"] == pytest.approx(2.0, rel=1e-8)


def test_config_rejects_malformed_line():
    with pytest.raises(ConfigError):
        parse_config_text("spec f2\n")


def test_outputs_byte_identical(tmp_path):
    outs = []
    for k in range(2):
        path = tmp_path / ("c%d.csv" % k)
        run(["bifurc", "trace", "--spec", "exp_pow", "--alpha", "0.5:3:8", "--threads", str(1 + 2 * k),
             "--out", str(path)])
        outs.append(path.read_bytes())
    assert outs[0] == outs[1]


def test_module_entry_point():
    proc = subprocess.run([sys.executable, "-m", "singular2d", "inspect", "--spec", "s"],
                          capture_output=True, text=True, check=False)
    assert proc.returncode == 0
    assert json.loads(proc.stdout)["critical_exponential"] is True
