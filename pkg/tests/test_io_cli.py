import io
import json
import shutil
import subprocess
import sys

import numpy as np
import pytest

from magic_spectra import ValidationError, chi2_tensors, sre_report
from magic_spectra import io as mio
from magic_spectra.cli import main

from conftest import random_tensor


def test_mps_roundtrip(tmp_path):
    a = random_tensor(3, chi=3)
    path = tmp_path / "state.json"
    mio.write_mps(path, [a])
    back = mio.read_mps_tensors(path)
    np.testing.assert_array_equal(back[0], a)
    st = mio.read_mps(path)
    assert st.chi == 3 and st.d == 2


def test_mps_unit_cell(tmp_path):
    path = tmp_path / "cell.json"
    mio.write_mps(path, [random_tensor(1, chi=2), random_tensor(2, chi=2)])
    st = mio.read_mps(path)
    assert st.unit_cell == 2 and st.d == 4


def test_mps_format_errors():
    good = mio.mps_to_dict([random_tensor(0, chi=2)])
    bad = dict(good, format_version=99)
    with pytest.raises(ValidationError):
        mio.mps_from_dict(bad)
    bad = json.loads(json.dumps(good))
    bad["tensors"][0]["re"] = bad["tensors"][0]["re"][:-1]
    with pytest.raises(ValidationError):
        mio.mps_from_dict(bad)
    with pytest.raises(ValidationError):
        mio.mps_from_dict(dict(good, tensors=[]))


def test_csv_roundtrip_is_exact():
    buf = io.StringIO()
    rows = [{"a": 0.1 + 0.2, "b": 3, "c": True}]
    mio.write_csv(buf, ["a", "b", "c"], rows, {"tool": "x"})
    meta, cols, out = mio.read_csv(io.StringIO(buf.getvalue()))
    assert meta == {"tool": "x"}
    assert cols == ["a", "b", "c"]
    assert float(out[0][0]) == 0.1 + 0.2
    assert out[0][2] == "true"


def test_parse_grid():
    np.testing.assert_allclose(mio.parse_grid("-1:1:0.5"), [-1, -0.5, 0, 0.5, 1])
    assert mio.parse_grid("-2:2:0.01").size == 401
    np.testing.assert_allclose(mio.parse_grid("0.1, 0.3"), [0.1, 0.3])
    with pytest.raises(ValidationError):
        mio.parse_grid("0:1:0")
    with pytest.raises(ValidationError):
        mio.parse_grid("a,b")


def test_config_file_and_overrides(tmp_path):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("# sweep\ncommand = xi\nn = 3\nchi-t = 16\ngrid = 0.1,0.2\n")
    rc = mio.load_config(cfg, n=2)
    assert rc.command == "xi" and rc.n == 2 and rc.chi_t == 16
    assert rc.hash() == mio.load_config(cfg, n=2, out="elsewhere.csv").hash()
    assert rc.hash() != mio.load_config(cfg, n=4).hash()
    cfg.write_text("bogus = 1\n")
    with pytest.raises(ValidationError):
        mio.load_config(cfg)
    cfg.write_text("n = two\n")
    with pytest.raises(ValidationError):
        mio.load_config(cfg)


def test_cli_sre_density(tmp_path):
    out = tmp_path / "m.csv"
    assert main(["sre-density", "--g", "0.1,0.5", "--out", str(out)]) == 0
    meta, cols, rows = mio.read_csv(out)
    assert cols == ["param", "m_n", "mu1", "converged"]
    assert meta["command"] == "sre-density"
    assert float(rows[1][1]) == pytest.approx(sre_report(chi2_tensors(0.5)).m_n, abs=1e-12)


def test_cli_output_is_deterministic(tmp_path):
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    args = ["xi", "--g=-0.5,0.2,0.7", "--workers", "3"]
    assert main(args + ["--out", str(a)]) == 0
    assert main(args + ["--workers", "1", "--out", str(b)]) == 0
    assert a.read_bytes() == b.read_bytes()


@pytest.mark.parametrize(
    "args,first_col",
    [
        (["subsystem", "--g", "0.3", "--N", "3"], "param"),
        (["mutual", "--g", "0.3", "--N", "2"], "param"),
        (["perturb", "--g", "0.3", "--family", "Rz", "--r", "2"], "g"),
        (["oracle", "--L", "6,8", "--gc", "0.0"], "L"),
        (["fit", "--g=-0.9,-0.5,0.5,0.9"], "param"),
        (["sre-density", "--mu", "0.5"], "param"),
    ],
)
def test_cli_commands(tmp_path, args, first_col):
    out = tmp_path / "o.csv"
    assert main(args + ["--out", str(out)]) == 0
    _, cols, rows = mio.read_csv(out)
    assert cols[0] == first_col and rows


def test_cli_file_source(tmp_path):
    path = tmp_path / "s.json"
    mio.write_mps(path, chi2_tensors(0.4))
    out = tmp_path / "o.csv"
    assert main(["xi", "--source", "file", "--file", str(path), "--out", str(out)]) == 0
    _, _, rows = mio.read_csv(out)
    assert float(rows[0][3]) == pytest.approx(sre_report(chi2_tensors(0.4)).xi_sre, rel=1e-9)


def test_cli_exit_codes(tmp_path, capsys):
    assert main(["xi", "--source", "file"]) == 2
    assert main(["perturb", "--g", "0.2", "--gate", "Q"]) == 2
    assert "error" in capsys.readouterr().err
    with pytest.raises(SystemExit):
        main(["nonsense"])


def test_console_script_installed():
    exe = shutil.which("magic-spectra")
    cmd = [exe] if exe else [sys.executable, "-m", "magic_spectra.cli"]
    res = subprocess.run(cmd + ["--help"], capture_output=True, text=True)
    assert res.returncode == 0
    assert "sre-density" in res.stdout
