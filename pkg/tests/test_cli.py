import json
import subprocess
import sys

import pytest

from syscovar.cli import UsageError, main, parse_levels, parse_range, parse_values
from syscovar.measures import Levels, covar_geq, gaussian_model


def run(argv, capsys):
    code = main(argv)
    out, err = capsys.readouterr()
    return code, out, err


def test_measure_json_record(capsys):
    code, out, _ = run(["measure", "--family", "gaussian", "--rho", "0.5", "--alpha", "0.95", "--beta", "0.95",
                        "--measure", "covar_geq"], capsys)
    assert code == 0
    (rec,) = json.loads(out)
    assert rec["covar_geq"] == covar_geq(gaussian_model(0.5), Levels(0.95, 0.95))
    assert rec["rho"] == 0.5 and rec["family"] == "gaussian"


def test_measure_model_options(capsys):
    code, out, _ = run(["measure", "--family", "t3", "--rho", "0.3", "--nu", "5", "--mu-y", "1", "--sigma-y", "2",
                        "--alpha", "0.9", "--measure", "var_y,es_y"], capsys)
    assert code == 0
    (rec,) = json.loads(out)
    from scipy import stats

    assert rec["var_y"] == pytest.approx(1 + 2 * stats.t.ppf(0.9, 5), rel=1e-10)


def test_sweep_range_rows(capsys):
    code, out, _ = run(["sweep", "--family", "gumbel_t3", "--theta", "1:3:0.1", "--measure", "covar_eq,covar_geq",
                        "--alpha", "0.95"], capsys)
    assert code == 0
    rows = [ln for ln in out.splitlines() if not ln.startswith("#")]
    assert rows[0] == "family,theta,alpha,beta,covar_eq,covar_geq"
    assert len(rows) == 22
    thetas = [float(r.split(",")[1]) for r in rows[1:]]
    assert thetas[0] == 1.0 and thetas[-1] == 3.0 and thetas[5] == 1.5


def test_backtest_csv_file(tmp_path):
    out = tmp_path / "t2.csv"
    argv = ["backtest", "--family", "t3", "--rho", "0,0.9", "--levels", "0.95:0.95,0.99:0.99",
            "--n", "20000", "--seed", "42", "-o", str(out)]
    assert main(argv) == 0
    text = out.read_text()
    meta = [ln for ln in text.splitlines() if ln.startswith("#")]
    assert any("PCG64" in ln for ln in meta) and any("seed: 42" in ln for ln in meta)
    assert any(ln.startswith("# tool: syscovar") for ln in meta)
    body = [ln for ln in text.splitlines() if not ln.startswith("#")]
    assert body[0].startswith("family,param,alpha,beta,variant,n,seed,")
    assert len(body) == 1 + 2 * 2 * 2


def test_backtest_byte_identical(tmp_path):
    argv = ["backtest", "--family", "gumbel_t3", "--theta", "1,2", "--alpha", "0.95", "--n", "30000", "--seed", "3"]
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    assert main(argv + ["-o", str(a)]) == 0
    assert main(argv + ["-o", str(b)]) == 0
    assert a.read_bytes() == b.read_bytes()


def test_json_file_has_header_and_array(tmp_path):
    p = tmp_path / "m.json"
    assert main(["sweep", "--family", "gaussian", "--rho", "0.1,0.2", "--alpha", "0.9", "--measure", "mes",
                 "--format", "json", "-o", str(p)]) == 0
    lines = p.read_text().splitlines()
    body = "\n".join(ln for ln in lines if not ln.startswith("#"))
    recs = json.loads(body)
    assert [r["rho"] for r in recs] == [0.1, 0.2]
    assert lines[0].startswith("#")


def test_cloud(tmp_path, capsys):
    p = tmp_path / "c.csv"
    assert main(["cloud", "--family", "gaussian", "--rho", "0.5", "--alpha", "0.95", "--n", "50", "-o", str(p)]) == 0
    text = p.read_text()
    assert "# covar_geq:" in text and "# var_x:" in text
    assert len([ln for ln in text.splitlines() if not ln.startswith("#")]) == 51


@pytest.mark.parametrize("argv,token", [
    (["measure", "--family", "gaussian", "--rho", "1.5", "--alpha", "0.95", "--measure", "covar_geq"], "1.5"),
    (["measure", "--family", "gaussian", "--rho", "0.5", "--alpha", "0.9x", "--measure", "covar_geq"], "0.9x"),
    (["measure", "--family", "gaussian", "--rho", "0.5", "--alpha", "0.95", "--measure", "nope"], "nope"),
    (["measure", "--family", "gaussian", "--theta", "2", "--alpha", "0.95", "--measure", "mes"], "--theta"),
    (["measure", "--family", "gaussian", "--rho", "0.5", "--alpha", "0.5", "--measure", "ratio_eq"], "VaR"),
    (["measure", "--family", "gaussian", "--rho", "0.5", "--alpha", "1.0", "--measure", "mes"], "alpha"),
    (["backtest", "--family", "t3", "--rho", "0.5", "--levels", "0.95-0.9", "--n", "10"], "0.95-0.9"),
    (["backtest", "--family", "t3", "--rho", "0.5", "--alpha", "0.9", "--variant", "lt", "--n", "10"], "lt"),
    (["sweep", "--family", "t3", "--rho", "0.5:0.1:0.1", "--alpha", "0.9", "--measure", "mes"], "0.5:0.1:0.1"),
    (["measure", "--family", "t3", "--rho", "0.5", "--alpha", "0.9", "--measure", "mes", "--bogus"], "--bogus"),
    (["frobnicate"], "frobnicate"),
])
def test_input_errors_exit_1(argv, token, capsys):
    code, _, err = run(argv, capsys)
    assert code == 1
    assert token in err


def test_nonconvergence_exit_2(capsys, monkeypatch):
    from syscovar import measures
    from syscovar.errors import ConvergenceError

    def boom(*a, **k):
        raise ConvergenceError("forced")

    monkeypatch.setitem(measures.MEASURES, "covar_geq", boom)
    code, _, err = run(["measure", "--family", "gaussian", "--rho", "0.5", "--alpha", "0.9",
                        "--measure", "covar_geq"], capsys)
    assert code == 2 and "forced" in err


def test_verify_passes(capsys):
    code, out, _ = run(["verify", "--n", "100000"], capsys)
    assert code == 0
    assert "false" not in out


def test_range_parsing():
    assert parse_range("1:3:0.1")[-1] == 3.0
    assert len(parse_range("1:3:0.1")) == 21
    assert parse_range("0.05:0.95:0.0375")[-1] == 0.95
    assert parse_range("0:1:0.3") == [0.0, 0.3, 0.6, 0.9]
    assert parse_values("0,0.2:0.4:0.1,0.9") == [0.0, 0.2, 0.3, 0.4, 0.9]
    assert parse_levels("0.95:0.95,0.99:0.95") == [Levels(0.95, 0.95), Levels(0.99, 0.95)]
    for bad in ("1:2", "1:2:0", "a:2:1", "2:1:0.1"):
        with pytest.raises(UsageError):
            parse_range(bad)


def test_module_entry_point():
    proc = subprocess.run([sys.executable, "-m", "syscovar", "--version"], capture_output=True, text=True)
    assert proc.returncode == 0 and "syscovar" in proc.stdout
