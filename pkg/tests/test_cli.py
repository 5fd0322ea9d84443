import json
import subprocess
import sys

import numpy as np
import pytest

from jsrholder import MatrixSet
from jsrholder.cli import main
from jsrholder.core import dumps

from conftest import LOWER_UNIT, NILPOTENT


def write_set(path, mats):
    path.write_text(dumps(MatrixSet([np.asarray(m, dtype=float) for m in mats])))
    return str(path)


@pytest.fixture
def pair(tmp_path):
    return write_set(tmp_path / "pair.json", [NILPOTENT, LOWER_UNIT])


@pytest.fixture
def nil(tmp_path):
    return write_set(tmp_path / "nilpotent.json", [NILPOTENT])


def run(capsys, *argv):
    code = main(list(argv))
    return code, capsys.readouterr()


def result(out):
    doc = json.loads(out.out)
    assert doc["tool"] == "jsrholder" and "config" in doc and "seed" in doc
    return doc["result"]


def test_bounds(capsys, pair):
    code, out = run(capsys, "bounds", "--input", pair, "--n", "6")
    assert code == 0
    r = result(out)
    assert r["lower"] == 1.0 and r["upper"] == pytest.approx(1.0)


def test_bounds_csv(capsys, pair):
    code, out = run(capsys, "bounds", "--input", pair, "--format", "csv")
    lines = out.out.splitlines()
    assert code == 0 and lines[0].startswith("# tool=jsrholder")
    assert [l for l in lines if not l.startswith("#")][0] == "lower,upper,depth_n,witness,norm_tag"


def test_refined_bounds(capsys, tmp_path):
    rng = np.random.default_rng(0)
    f = write_set(tmp_path / "r.json", rng.normal(size=(2, 2, 2)))
    _, plain = run(capsys, "bounds", "--input", f, "--n", "8")
    _, refined = run(capsys, "bounds", "--input", f, "--n", "8", "--refine")
    assert result(refined)["upper"] <= result(plain)["upper"]


def test_inflate_fit_and_plot(capsys, nil, tmp_path):
    svg = tmp_path / "curve.svg"
    code, out = run(capsys, "inflate", "--input", nil, "--grid", "geo:1e-4:1e-1:36", "--n", "6",
                    "--fit", "--plot", str(svg), "--format", "csv")
    assert code == 0
    assert "# fit alpha_hat=" in out.out
    alpha = float(out.out.split("alpha_hat=")[1].split()[0])
    assert 0.4 <= alpha <= 0.6
    text = svg.read_text()
    assert text.startswith("<svg") and "polyline" in text
    # the CSV feeds back into the fitter
    csv_path = tmp_path / "curve.csv"
    csv_path.write_text(out.out)
    code, out = run(capsys, "fit", "--curve", str(csv_path))
    assert code == 0 and result(out)["alpha_hat"] == pytest.approx(alpha)


def test_inflate_inequality(capsys, pair):
    code, out = run(capsys, "inflate", "--input", pair, "--grid", "geo:0.1:1:4", "--balanced",
                    "--eta", "1.0")
    assert code == 0 and result(out)["inequality"]["violations"] == []


def test_flag(capsys, tmp_path, pair):
    f = write_set(tmp_path / "j.json", [[[0.5, 1.0], [0.0, 0.5]]])
    code, out = run(capsys, "flag", "--input", f)
    assert code == 0 and result(out)["detected_index"] == 2
    _, out = run(capsys, "flag", "--input", pair)
    assert result(out)["detected_index"] == 1


def test_cert_and_verify(capsys, pair, tmp_path):
    cert = tmp_path / "cert.json"
    code, _ = run(capsys, "cert", "--input", pair, "--lambda", "1", "--r", "1", "--kmax", "12",
                  "--theta", "1", "--out", str(cert))
    assert code == 0
    r = json.loads(cert.read_text())["result"]
    assert r["tau"] == pytest.approx(0.125) and r["omega"] == 2.0 and r["n0"] == 4
    code, out = run(capsys, "verify", "--input", pair, "--cert", str(cert), "--trials", "5")
    assert code == 0 and result(out)["counts"]["FAIL"] == 0


def test_elsner_resolvent_dim2_lift(capsys, tmp_path, pair):
    code, out = run(capsys, "elsner", "--input", pair)
    assert code == 0 and not result(out)["violated"]
    d = write_set(tmp_path / "d.json", [np.diag([1.0, 0.0])])
    code, out = run(capsys, "resolvent", "--input", d, "--delta", "0.25")
    assert code == 0 and result(out)["r0"] == pytest.approx(0.25, rel=0.01)
    code, out = run(capsys, "dim2", "--input", pair, "--kmax", "20")
    assert code == 0 and result(out)["verdict"] == "PASS"
    s = write_set(tmp_path / "s.json", [np.diag([-1.0, -2.0])])
    export = tmp_path / "lift.json"
    code, out = run(capsys, "lift", "--input", s, "--export", str(export))
    assert code == 0 and result(out)["lower"] == pytest.approx(-1.0, abs=1e-8)
    assert json.loads(export.read_text())["d"] == 2


def test_exit_codes(capsys, tmp_path, pair, nil):
    bad = tmp_path / "bad.json"
    bad.write_text('{"d": 2, "matrices": [[[1, 2, 3]]]}')
    assert run(capsys, "bounds", "--input", str(bad))[0] == 2
    assert run(capsys, "bounds", "--input", str(tmp_path / "missing.json"))[0] == 2
    rnd = write_set(tmp_path / "rnd.json", np.random.default_rng(1).normal(size=(3, 2, 2)))
    assert run(capsys, "bounds", "--input", rnd, "--n", "20", "--budget", "5")[0] == 3
    # too few resolvable points for a fit
    assert run(capsys, "inflate", "--input", nil, "--grid", "geo:1e-4:1e-3:2", "--fit")[0] == 4
    assert run(capsys, "elsner", "--input", nil)[0] == 2
    with pytest.raises(SystemExit) as exc:
        main(["bounds"])
    assert exc.value.code == 2


def test_deterministic_output(capsys, pair, tmp_path):
    outs = []
    for _ in range(2):
        run(capsys, "inflate", "--input", pair, "--grid", "geo:1e-3:1e-1:5", "--seed", "3",
            "--out", str(tmp_path / "o.json"))
        outs.append((tmp_path / "o.json").read_bytes())
    assert outs[0] == outs[1]


def test_console_script(pair):
    proc = subprocess.run([sys.executable, "-m", "jsrholder.cli", "bounds", "--input", pair],
                          capture_output=True, text=True, check=False)
    assert proc.returncode == 0 and json.loads(proc.stdout)["result"]["lower"] == 1.0
