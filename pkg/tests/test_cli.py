import re
import subprocess
import sys

import numpy as np
import pytest

from chainchaos import __version__
from chainchaos.cli import main
from chainchaos.system import export_edge_list, make_finite_system


def run(tmp_path, *argv, name="report.txt"):
    out = tmp_path / name
    code = main([*argv, "--out", str(out)])
    return code, (out.read_text() if out.exists() else "")


def field(text, key, block="[result]"):
    body = text.split(block, 1)[-1]
    m = re.search(rf"^{re.escape(key)} = (.*)$", body, re.M)
    return m.group(1) if m else None


@pytest.fixture
def two_points(tmp_path):
    sysm = make_finite_system(range(2), np.array([[0.0, 1.0], [1.0, 0.0]]), [[0], [1]])
    path = tmp_path / "two.txt"
    path.write_text(export_edge_list(sysm))
    return path


class TestChains:
    def test_monotone_moduli(self, tmp_path):
        code, text = run(tmp_path, "chains", "--example", "ex45", "--window", "4", "--delta", "0.05", "--eps", "0.1")
        assert code == 0
        rows = [ln.split("\t") for ln in text.splitlines() if re.match(r"^\d+\t", ln)]
        zero = [r for r in rows if r[5] == "0,0,0,0"]
        assert zero and zero[0][1] == "1" and zero[0][3] == "1"

    def test_de_bruijn(self, tmp_path):
        code, text = run(tmp_path, "chains", "--example", "fullshift", "--window", "3", "--delta", "0")
        assert code == 0 and field(text, "components") == "1"
        assert re.search(r"^0\t8\t1\t1\t", text, re.M)

    def test_missing_delta(self, tmp_path, capsys):
        code, _ = run(tmp_path, "chains", "--example", "fullshift")
        assert code == 2 and "delta" in capsys.readouterr().err

    def test_scan(self, tmp_path):
        code, text = run(tmp_path, "chains", "--example", "fullshift", "--delta", "0,0.5", "--eps", "0.1,0.6")
        assert code == 0 and text.count("--- delta=") == 4

    def test_system_file(self, tmp_path, two_points):
        code, text = run(tmp_path, "chains", "--system", str(two_points), "--delta", "0.1", "--eps", "0.2")
        assert code == 0 and field(text, "components") == "2"

    def test_unknown_example(self, tmp_path, capsys):
        code, _ = run(tmp_path, "chains", "--example", "ex9", "--delta", "0")
        assert code == 2 and "example" in capsys.readouterr().err


class TestVerdict:
    def test_constant_sign(self, tmp_path):
        code, text = run(tmp_path, "verdict", "--example", "ex44")
        assert code == 0 and field(text, "thm12_class") == "'guDC1-predicted'"

    def test_monotone_moduli(self, tmp_path):
        code, text = run(tmp_path, "verdict", "--example", "ex45")
        assert code == 0 and field(text, "thm11_class") == "'gC-fails'"

    def test_two_fixed_points(self, tmp_path, two_points):
        code, text = run(tmp_path, "verdict", "--system", str(two_points), "--delta", "0.1", "--eps", "0.2")
        assert code == 0
        assert field(text, "thm11_class") == field(text, "thm12_class") == "'no-chaos'"

    def test_system_needs_scale(self, tmp_path, two_points):
        assert run(tmp_path, "verdict", "--system", str(two_points))[0] == 2


class TestOrbit:
    def test_letter_doubling(self, tmp_path):
        code, text = run(tmp_path, "orbit", "--example", "ex41", "--pairs", "100", "--N", "100000", "--seed", "1")
        assert code == 0 and float(field(text, "fraction_DC2")) <= 0.05

    def test_increasing_example(self, tmp_path):
        code, text = run(tmp_path, "orbit", "--example", "ex43", "--pairs", "200", "--N", "5000", "--seed", "1")
        assert code == 0 and float(field(text, "fraction_DC1")) > 0

    def test_zero_pairs(self, tmp_path):
        assert run(tmp_path, "orbit", "--example", "ex41", "--pairs", "0", "--seed", "1")[0] == 2

    def test_seed_required(self, tmp_path):
        assert run(tmp_path, "orbit", "--example", "ex41", "--pairs", "3")[0] == 2

    def test_bad_thresholds(self, tmp_path):
        code, _ = run(tmp_path, "orbit", "--example", "ex41", "--pairs", "2", "--seed", "1", "--thresholds", "0.5")
        assert code == 2


class TestShadow:
    def test_batch(self, tmp_path):
        code, text = run(tmp_path, "shadow", "--map", "fullshift", "--delta", "0.00390625", "--len", "500",
                         "--trials", "100", "--seed", "3")
        assert code == 0 and field(text, "shadowed") == "100/100"
        assert field(text, "eps") == "0.015625"

    def test_lemma41(self, tmp_path):
        code, text = run(tmp_path, "shadow", "--lemma41", "--gaps", "triangular", "--N", "100000", "--eps", "0.25")
        assert code == 0 and float(field(text, "density")) >= 0.95

    def test_invalid_map(self, tmp_path):
        assert run(tmp_path, "shadow", "--map", "tent", "--delta", "0.01", "--seed", "1")[0] == 2

    def test_delta_too_large(self, tmp_path):
        assert run(tmp_path, "shadow", "--delta", "0.5", "--seed", "1")[0] == 2


class TestHarness:
    def test_all_one_example(self, tmp_path):
        code, text = run(tmp_path, "all", "--example", "ex44")
        assert code == 0 and field(text, "status") == "ok"

    def test_all_reports_mismatch(self, tmp_path):
        code, text = run(tmp_path, "all", "--example", "ex44", "--k-max", "2")
        assert code == 1 and "FAIL" in text

    def test_catalog(self, tmp_path):
        code, text = run(tmp_path, "catalog")
        assert code == 0 and "[ex45]" in text and "thm11_class = 'gC-fails'" in text


class TestReports:
    def test_header(self, tmp_path):
        _, text = run(tmp_path, "chains", "--example", "fullshift", "--delta", "0")
        lines = text.splitlines()
        assert lines[0] == f"# chainchaos {__version__}" and lines[1] == "[config]"
        assert "[result]" in lines and field(text, "window", "[config]") == "None"

    def test_deterministic(self, tmp_path):
        argv = ("orbit", "--example", "ex45", "--pairs", "20", "--N", "2000", "--seed", "5")
        a = run(tmp_path, *argv, name="a.txt")[1]
        b = run(tmp_path, *argv, name="b.txt")[1]
        assert a == b and a

    def test_env_output_dir(self, tmp_path, monkeypatch):
        monkeypatch.setenv("CHAINCHAOS_OUTPUT_DIR", str(tmp_path / "reports"))
        assert main(["chains", "--example", "fullshift", "--delta", "0"]) == 0
        assert (tmp_path / "reports" / "chains-fullshift.txt").exists()

    def test_stdout_without_target(self, monkeypatch, capsys):
        monkeypatch.delenv("CHAINCHAOS_OUTPUT_DIR", raising=False)
        assert main(["catalog"]) == 0
        assert capsys.readouterr().out.startswith("# chainchaos")

    def test_config_file_and_override(self, tmp_path):
        cfg = tmp_path / "run.cfg"
        cfg.write_text("example = ex45\nwindow = 4\ndelta = 0.05\neps = 0.1  # comment\n")
        code, text = run(tmp_path, "chains", "--config", str(cfg))
        assert code == 0 and field(text, "eps", "[config]") == "0.1"
        code, text = run(tmp_path, "chains", "--config", str(cfg), "--eps", "0.2")
        assert code == 0 and field(text, "eps", "[config]") == "0.2"

    def test_config_unknown_key(self, tmp_path):
        cfg = tmp_path / "bad.cfg"
        cfg.write_text("colour = blue\n")
        assert run(tmp_path, "chains", "--config", str(cfg))[0] == 2

    def test_argparse_error(self):
        assert main(["nonsense"]) == 2

    def test_module_entry(self):
        r = subprocess.run([sys.executable, "-m", "chainchaos", "--version"], capture_output=True, text=True)
        assert r.returncode == 0 and __version__ in r.stdout
