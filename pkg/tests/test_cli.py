import os

import numpy as np
import pytest

from taildep.cli import EXIT_COMPUTE, EXIT_CONFIG, EXIT_OK, main
from taildep.ingest import rank_transform, read_table
from taildep.simulate import Gumbel, sample

FAST = ["--k-grid", "25:50:25", "--eta-k-grid", "20:40:20"]


@pytest.fixture
def simfile(tmp_path):
    assert main(["simulate", "--copula", "gumbel:2.5", "--n", "729", "--seed", "1", "--out", str(tmp_path)]) == 0
    return tmp_path / "sample.csv"


def test_simulate_writes_returns_file(simfile):
    s = read_table(simfile, returns=True)
    assert s.n == 729 and s.labels == ["u1", "u2"]
    np.testing.assert_array_equal(s.values, sample(Gumbel(2.5), 729, 1).values)
    np.testing.assert_array_equal(rank_transform(s).ranks, rank_transform(sample(Gumbel(2.5), 729, 1)).ranks)


@pytest.mark.parametrize("cmd,kinds", [
    ("spectral", {"polar", "spectral_weights", "spectral_density"}),
    ("stdf", {"levels_empirical", "levels_cf", "summary"}),
    ("coeffs", {"chi", "eta"}),
    ("test", {"eta_test"}),
])
def test_subcommands(simfile, tmp_path, cmd, kinds):
    out = tmp_path / cmd
    extra = {"coeffs": ["--eta-k-grid", "20:40:20"], "test": ["--k-grid", "25:50:25"]}.get(cmd, [])
    assert main([cmd, "--input", str(simfile), "--returns", "--out", str(out)] + extra) == EXIT_OK
    assert {f.split("__")[-1][:-4] for f in os.listdir(out)} == kinds


def test_test_independence_null(simfile, tmp_path):
    out = tmp_path / "t"
    assert main(["test", "--null", "independence", "--input", str(simfile), "--returns",
                 "--out", str(out), "--k-grid", "25:50:25"]) == EXIT_OK
    assert os.listdir(out) == ["u1__u2__indep_test.csv"]


def test_global_flags_before_subcommand(simfile, tmp_path):
    out = tmp_path / "g"
    assert main(["--input", str(simfile), "--out", str(out), "spectral", "--returns"]) == EXIT_OK
    assert len(os.listdir(out)) == 3


def test_report_determinism(simfile, tmp_path):
    out = tmp_path / "r"
    args = ["report", "--input", str(simfile), "--returns", "--out", str(out), "--cols", "u1,u2"] + FAST
    assert main(args) == EXIT_OK
    first = {f: (out / f).read_bytes() for f in os.listdir(out)}
    assert main(args) == EXIT_OK
    assert first == {f: (out / f).read_bytes() for f in os.listdir(out)}
    assert len(first) == 10


def test_exit_codes(simfile, tmp_path, capsys):
    assert main(["spectral", "--input", str(tmp_path / "none.csv")]) == EXIT_CONFIG
    assert main(["spectral", "--input", str(simfile), "--k", "5", "--quantile", "0.9"]) == EXIT_CONFIG
    assert main(["spectral", "--input", str(simfile), "--cols", "u1"]) == EXIT_CONFIG
    assert main(["bogus"]) == EXIT_CONFIG
    assert main(["simulate", "--copula", "clayton:1", "--out", str(tmp_path)]) == EXIT_CONFIG
    assert main(["stdf", "--input", str(simfile), "--returns", "--stdf-k", "9999",
                 "--out", str(tmp_path / "s")]) == EXIT_COMPUTE
    err = capsys.readouterr().err
    assert "pair u1/u2" in err


def test_nu_option(simfile, tmp_path):
    out = tmp_path / "nu"
    assert main(["spectral", "--input", str(simfile), "--returns", "--nu", "12.5", "--estimator", "mel",
                 "--out", str(out)]) == EXIT_OK
    text = (out / "u1__u2__spectral_weights.csv").read_text()
    assert "# nu: 12.5" in text and "# estimator: mel" in text
