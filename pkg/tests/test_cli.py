import io
import json
import subprocess
import sys

import pytest

from iterint import BasisSystem, TimeInterval, load_table, sample_draws
from iterint.cli import main


def run(*argv):
    out = io.StringIO()
    code = main(list(argv), out=out)
    return code, out.getvalue()


def test_coeff_table_single_entry():
    code, text = run("coeff", "--k", "2", "--p", "0", "--basis", "legendre", "--t", "0", "--T", "1")
    assert code == 0
    doc = json.loads(text)
    assert doc["entries"] == [0.5]
    assert doc["header"]["format_version"] == 1


def test_coeff_single_value():
    code, text = run("coeff", "--k", "1", "--j", "0", "--basis", "legendre", "--t", "0", "--T", "4")
    assert code == 0 and float(text) == 2.0


def test_coeff_k4_table(tmp_path):
    path = tmp_path / "t.json"
    code, _ = run("coeff", "--k", "4", "--p", "3", "-o", str(path))
    assert code == 0
    assert load_table(path).values.size == 256


@pytest.mark.parametrize("argv", [
    ["coeff", "--k", "5", "--p", "1"],
    ["coeff", "--k", "2", "--j", "1"],
    ["coeff", "--k", "2"],
    ["coeff", "--k", "2", "--p", "1", "--t", "1", "--T", "1"],
    ["coeff", "--k", "2", "--p", "1", "--q", "1"],
    ["coeff", "--k", "two"],
])
def test_coeff_usage_errors(argv, capsys):
    code, _ = run(*argv)
    assert code == 2


def test_expand_requires_seed():
    assert run("expand", "--k", "1", "--p", "5")[0] == 2


def test_expand_theorem_restriction(capsys):
    code, _ = run("expand", "--k", "3", "--comps", "0,1,2", "--seed", "1")
    assert code == 2
    assert "components" in capsys.readouterr().err


def test_expand_deterministic():
    a = run("expand", "--k", "1", "--p", "5", "--seed", "1")
    b = run("expand", "--k", "1", "--p", "5", "--seed", "1")
    assert a == b and a[0] == 0


def test_expand_k2_same_component_p0():
    code, text = run("expand", "--k", "2", "--comps", "1,1", "--p", "0", "--t", "0", "--T", "1", "--seed", "1")
    assert code == 0
    z0 = sample_draws(1, 0, 1, BasisSystem("legendre", TimeInterval(0, 1))).zeta[0, 1]
    assert json.loads(text)["values"] == [pytest.approx(0.5 * z0**2)]


def test_expand_many_samples_csv():
    code, text = run("expand", "--k", "2", "--comps", "1,2", "--p1", "1", "--p2", "3", "--seed", "2", "--M", "4",
                     "--integral", "ito", "--format", "csv")
    assert code == 0
    assert len(text.splitlines()) == 5


def test_verify_traces_pair_suite():
    code, text = run("verify", "traces", "--k", "2", "--p-grid", "1,4,16,64")
    assert code == 0 and text.startswith("PASS trace pair")


def test_verify_failure_exit_code(monkeypatch):
    from iterint import identities
    monkeypatch.setitem(identities.TOLERANCES, "pair", 0.0)
    code, text = run("verify", "traces", "--k", "2", "--q", "1,0", "--p-grid", "1,2,4")
    assert code == 1
    assert text.startswith("FAIL trace pair")


def test_verify_invalid_interval():
    assert run("verify", "all", "--t", "1", "--T", "0", "--seed", "1")[0] == 2
    assert run("verify", "all", "--t", "1", "--T", "1")[0] == 2


def test_verify_parseval_and_outputs(tmp_path):
    code, text = run("verify", "parseval", "--p-max", "10", "--output-dir", str(tmp_path))
    assert code == 0
    assert (tmp_path / "parseval.csv").read_text().startswith("k,p,residual\n")


def test_verify_mse_small(tmp_path):
    code, text = run("verify", "mse", "--k", "2", "--comps", "1,2", "--p", "1,7", "--N", "1024", "--M", "800",
                     "--seed", "7", "--output-dir", str(tmp_path))
    assert code == 0, text
    header = (tmp_path / "mse.csv").read_text().splitlines()[0]
    assert header == "p,N,M,seed,estimate,std_error,runtime_ms"


def test_console_script_entry_point():
    res = subprocess.run([sys.executable, "-m", "iterint.cli", "coeff", "--k", "1", "--j", "0", "--T", "9"],
                         capture_output=True, text=True)
    assert res.returncode == 0 and float(res.stdout) == 3.0
