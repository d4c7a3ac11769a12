import csv
import io

import pytest

from hankel_filon.cli import build_parser, fit_slope, main


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def rows(text):
    lines = [l for l in text.splitlines() if not l.startswith("#")]
    return list(csv.DictReader(io.StringIO("\n".join(lines))))


def test_eval1(capsys):
    code, out, _ = run(capsys, "eval1", "--omega", "100", "--beta", "1.5", "--s", "1", "--nu", "8", "--amp", "demo1")
    assert code == 0
    assert out.startswith("# hankel-filon ") and "omega=100.0" in out.splitlines()[0]
    (r,) = rows(out)
    assert float(r["abs_err"]) < 1e-7 and r["s_used"] == "1"


def test_moments1_schema(capsys, tmp_path):
    dest = tmp_path / "m.csv"
    code, out, _ = run(capsys, "moments1", "--omega", "500", "--beta", "1", "--N", "1000", "--out", str(dest))
    assert code == 0 and out == ""
    text = dest.read_text()
    assert text.splitlines()[1] == "n,re,im,method"
    table = rows(text)
    assert len(table) == 1001 and table[-1]["n"] == "1000"


def test_moments2(capsys):
    code, out, _ = run(capsys, "moments2", "--omega", "15", "--alpha", "0.5", "--beta", "0.3", "--N", "12",
                       "--gl-nodes", "30", "--gh-nodes", "30")
    assert code == 0 and len(rows(out)) == 13


def test_converge1_slopes(capsys):
    code, out, _ = run(capsys, "converge1", "--beta", "1.5", "--nu", "8", "--s", "0,1,2", "--omega-range", "50:300:20")
    assert code == 0
    slopes = [l for l in out.splitlines() if l.startswith("# slope")]
    assert len(slopes) == 3
    for s, line in enumerate(slopes):
        assert abs(float(line.split(":")[1].split()[0]) + s + 2) <= 0.3


def test_deterministic_output(capsys):
    argv = ("converge2", "--alpha", "0.2", "--beta", "0.5", "--s", "0", "--omega-range", "50:100:4")
    assert run(capsys, *argv)[1] == run(capsys, *argv)[1]


def test_stability(capsys):
    code, out, _ = run(capsys, "stability", "--omega", "200", "--beta", "0.5", "--N", "300")
    table = rows(out)
    assert code == 0 and table[0]["n"] == "0" and table[-1]["n"] == "300"
    assert float(table[-1]["bvp_rel_err"]) < 1e-6 and float(table[-1]["forward_rel_err"]) > 1


def test_errors_exit_nonzero(capsys):
    code, _, err = run(capsys, "eval1", "--omega", "5")
    assert code == 2 and "--beta" in err
    code, _, err = run(capsys, "moments2", "--omega", "10", "--alpha", "2", "--beta", "3", "--N", "5")
    assert code == 1 and "moments2" in err
    code, _, err = run(capsys, "converge1", "--beta", "0.5", "--omega-range", "100:900:3")
    assert code == 2 and "500" in err
    with pytest.raises(SystemExit):
        build_parser().parse_args(["eval1", "--omega-range", "1:2"])


def test_fit_slope():
    assert fit_slope([1, 10, 100], [1, 1e-2, 1e-4]) == pytest.approx(-2)
    assert fit_slope([1, 2], [0, 0]) != fit_slope([1, 2], [0, 0])       # nan


def test_module_entry_point():
    import subprocess
    import sys
    res = subprocess.run([sys.executable, "-m", "hankel_filon", "--version"], capture_output=True, text=True)
    assert res.returncode == 0 and res.stdout.strip()
