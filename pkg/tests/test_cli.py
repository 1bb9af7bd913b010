import json
import math
import subprocess
import sys

import numpy as np
import pytest

from marginlab.cli import main
from marginlab.xlab.report import COLUMNS, aggregates_from_csv, read_csv_columns
from marginlab.xlab.scenarios import ScenarioConfig, run_scenario

LEMMA = ["--scenario", "lemma1", "--u", "60", "--d", "3", "--theta", "0.02", "--delta", "0.1",
         "--c-exp", "300", "--trials", "6", "--seed", "7"]


def run_cli(tmp_path, args, name="r.csv"):
    out = tmp_path / name
    code = main(args + ["--out", str(out)])
    return code, out


def test_lemma1_csv_shape_and_determinism(tmp_path):
    code, a = run_cli(tmp_path, LEMMA, "a.csv")
    assert code == 0
    code, b = run_cli(tmp_path, LEMMA, "b.csv")
    assert code == 0
    assert a.read_bytes() == b.read_bytes()
    text = a.read_text()
    assert "\r" not in text
    lines = text.splitlines()
    assert lines[0] == ",".join(COLUMNS)
    assert len(lines) == 7
    assert [ln.split(",")[0] for ln in lines[1:]] == [str(i) for i in range(6)]
    summary = json.loads(a.with_suffix(".json").read_text())
    assert summary["software"]["name"] == "marginlab" and summary["software"]["version"]
    assert summary["config"]["seed"] == 7 and summary["config"]["u"] == 60
    assert (tmp_path / "b.json").read_bytes() == a.with_suffix(".json").read_bytes()


def test_seed_changes_output(tmp_path):
    _, a = run_cli(tmp_path, LEMMA, "a.csv")
    _, b = run_cli(tmp_path, LEMMA[:-1] + ["8"], "b.csv")
    assert a.read_bytes() != b.read_bytes()


def test_floats_round_trip(tmp_path):
    code, out = run_cli(tmp_path, ["--scenario", "theorem1", "--u", "40", "--m", "400", "--tau", "0.1",
                                   "--trials", "2", "--learner-rounds", "20"])
    assert code == 0
    for line in out.read_text().splitlines()[1:]:
        for cell in line.split(",")[3:]:
            if cell != "nan":
                assert format(float(cell), ".17g") == cell


def test_aggregates_recomputable(tmp_path):
    code, out = run_cli(tmp_path, ["--scenario", "theorem2", "--m", "600", "--d", "4", "--tau", "0.1",
                                   "--trials", "4", "--seed", "3"])
    assert code == 0
    summary = json.loads(out.with_suffix(".json").read_text())
    recomputed = json.loads(json.dumps(aggregates_from_csv(out.read_text())).replace("NaN", "null"))
    assert summary["aggregates"] == recomputed
    cols = read_csv_columns(out.read_text())
    assert summary["aggregates"]["exact_risk"]["mean"] == math.fsum(cols["exact_risk"]) / 4


def test_summary_path_flag(tmp_path):
    s = tmp_path / "custom.json"
    code, _ = run_cli(tmp_path, LEMMA + ["--summary", str(s)])
    assert code == 0 and s.exists()


@pytest.mark.parametrize("args,needle", [
    (["--scenario", "theorem1", "--tau", "0.6", "--m", "1000"], "49/100"),
    (["--scenario", "lemma1", "--u", "10", "--d", "20"], "exceeds"),
    (["--scenario", "lemma1", "--u", "10", "--d", "2", "--theta", "0.03"], "1/40"),
    (["--scenario", "theorem1", "--u", "400", "--m", "1000"], "m must be large"),
    (["--scenario", "theorem2", "--m", "1000"], "9/10"),
    (["--scenario", "coupon"], "needs --m"),
])
def test_parameter_errors_exit_2(tmp_path, capsys, args, needle):
    code, _ = run_cli(tmp_path, args)
    assert code == 2
    assert needle in capsys.readouterr().err


def test_unknown_flag_exit_2(tmp_path, capsys):
    code = main(["--scenario", "lemma1", "--bogus", "--out", str(tmp_path / "x.csv")])
    assert code == 2
    assert "usage" in capsys.readouterr().err


def test_invariant_violation_exit_1(tmp_path, monkeypatch, capsys):
    from marginlab.errors import InvariantViolation
    from marginlab.xlab import scenarios

    def boom(cfg, ctx, t):
        raise InvariantViolation("synthetic")

    prep, _, summ = scenarios.RUNNERS["lemma1"]
    monkeypatch.setitem(scenarios.RUNNERS, "lemma1", (prep, boom, summ))
    code, _ = run_cli(tmp_path, LEMMA)
    assert code == 1
    assert "synthetic" in capsys.readouterr().err


def test_bad_thread_env(tmp_path, monkeypatch):
    monkeypatch.setenv("MARGINLAB_THREADS", "zero")
    code, _ = run_cli(tmp_path, LEMMA)
    assert code == 2


def test_worker_count_independence(tmp_path, monkeypatch):
    _, a = run_cli(tmp_path, LEMMA, "a.csv")
    monkeypatch.setenv("MARGINLAB_THREADS", "3")
    _, b = run_cli(tmp_path, LEMMA, "b.csv")
    assert a.read_bytes() == b.read_bytes()


def test_timing_flag(tmp_path):
    _, out = run_cli(tmp_path, LEMMA + ["--timing"])
    col = read_csv_columns(out.read_text())["runtime_ms"]
    assert np.all(col > 0)
    _, out = run_cli(tmp_path, LEMMA, "plain.csv")
    assert np.all(np.isnan(read_csv_columns(out.read_text())["runtime_ms"]))


def test_module_entry_point(tmp_path):
    out = tmp_path / "m.csv"
    proc = subprocess.run([sys.executable, "-m", "marginlab", *LEMMA, "--out", str(out)],
                          capture_output=True, text=True)
    assert proc.returncode == 0, proc.stderr
    assert out.exists()
    proc = subprocess.run([sys.executable, "-m", "marginlab", "--scenario", "theorem1", "--tau", "0.6",
                           "--m", "100", "--out", str(out)], capture_output=True, text=True)
    assert proc.returncode == 2 and "49/100" in proc.stderr
