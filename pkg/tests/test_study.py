import csv

import numpy as np
import pytest

from ppife.cli import main
from ppife.study import (CSV_COLUMNS, StudyConfig, StudyError, format_table, load_config,
                         run_study)


def _sine_config(**kw):
    base = dict(interface="none", problem="sine", beta_minus=1.0, beta_plus=1.0, k=1.0,
                N_list=(8, 16, 32))
    base.update(kw)
    return StudyConfig(**base)


def test_empty_n_list_rejected():
    with pytest.raises(ValueError):
        run_study(StudyConfig(N_list=()))


def test_non_doubling_rejected():
    with pytest.raises(ValueError):
        StudyConfig(N_list=(10, 30)).validate()


@pytest.mark.parametrize("etype", ["tri", "rect"])
def test_sine_problem_classic_rates(etype):
    rep = run_study(_sine_config(element_type=etype))
    last = rep.rates[-1]
    assert 1.8 <= last["L2"] <= 2.2
    assert 0.9 <= last["H1semi"] <= 1.1


def test_csv_columns_and_format(tmp_path):
    out = tmp_path / "study.csv"
    rep = run_study(_sine_config(N_list=(4, 8), out=str(out)))
    with open(out) as fh:
        rows = list(csv.reader(fh))
    assert tuple(rows[0]) == CSV_COLUMNS
    assert len(rows) == 3
    first, second = (dict(zip(rows[0], r)) for r in rows[1:])
    assert first["L2_rate"] == "NA"
    assert len(second["L2_rate"].split(".")[1]) == 4
    mantissa = second["L2_err"].split("e")[0]
    assert len(mantissa.replace(".", "")) == 5   # 4 decimals in scientific notation
    assert float(second["L2_err"]) == pytest.approx(rep.records[1].L2, rel=1e-4)
    assert "rate" in format_table(rep)


def test_rows_reproducible():
    a = run_study(_sine_config(N_list=(4, 8), threads=1))
    b = run_study(_sine_config(N_list=(4, 8), threads=1))
    strip = [{k: v for k, v in r.items() if k != "solve_seconds"} for r in a.rows]
    assert strip == [{k: v for k, v in r.items() if k != "solve_seconds"} for r in b.rows]


def test_stage_tagged_failure():
    # the circle reaches the boundary elements, which violates the mesh hypotheses
    with pytest.raises(StudyError) as info:
        run_study(StudyConfig(N_list=(10,), r0=0.95))
    assert info.value.stage == "classify" and info.value.N == 10
    assert "[classify] N=10" in str(info.value)


def test_config_file_and_overrides(tmp_path):
    cfg = tmp_path / "study.cfg"
    cfg.write_text("# comment\nN = 10, 20  # inline\nk = 4\nelement_type = rect\n"
                   "beta-plus = 5\nsigma0 = none\n")
    c = load_config(cfg, k=6.0)
    assert c.N_list == (10, 20) and c.k == 6.0 and c.beta_plus == 5.0
    assert c.element_type == "rectangular"
    assert c.sigma0 == 150.0
    bad = tmp_path / "bad.cfg"
    bad.write_text("colour = red\n")
    with pytest.raises(ValueError):
        load_config(bad)


def test_cli_success(tmp_path, capsys):
    out = tmp_path / "s.csv"
    mat = tmp_path / "A_{N}.txt"
    code = main(["--N", "8,16", "--k", "2", "--out", str(out), "--threads", "1",
                 "--dump-matrix", str(mat)])
    assert code == 0
    assert out.exists()
    assert (tmp_path / "A_8.txt").exists() and (tmp_path / "A_16.txt").exists()
    assert "L2 error" in capsys.readouterr().out


@pytest.mark.parametrize("argv", [["--N", "10,30"], ["--N", "4", "--k", "-1"],
                                  ["--config", "/nonexistent/file.cfg"]])
def test_cli_config_errors(argv):
    assert main(argv) == 2


def test_cli_stage_error():
    assert main(["--N", "10", "--r0", "0.95"]) == 1


def test_cli_bad_flag():
    with pytest.raises(SystemExit) as info:
        main(["--element-type", "hex"])
    assert info.value.code != 0


@pytest.mark.slow
def test_model_study_rates():
    rep = run_study(StudyConfig(N_list=(10, 20, 40, 80, 160)))
    l2 = [r["L2"] for r in rep.rates[-2:]]
    h1 = [r["H1semi"] for r in rep.rates[-2:]]
    assert np.mean(l2) >= 1.7
    assert min(h1) >= 0.9
    assert max(r.residual for r in rep.records) <= 1e-10
