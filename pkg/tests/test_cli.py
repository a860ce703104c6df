import csv
import io
import json

import pytest

from qkzkit.cli import main
from qkzkit.cli.config import SEED_ENV, SUITE_NAMES, ConfigError, RunConfig, load_config, parse_config_text
from qkzkit.cli.report import CSV_HEADER, build_report
from qkzkit.cli.suites import run_case


def run(argv):
    buf = io.StringIO()
    code = main(argv, out=buf)
    return code, buf.getvalue()


def strip_timing(text):
    d = json.loads(text)
    d.pop("timing")
    return d


def test_config_parsing():
    cfg = parse_config_text("""
        # comment
        coupling.alpha = 2.5
        system.N = 3
        system.N_L = 1
        qkz.u = 0.1+0.2j, 0.4-0.1j
        suites = ybe, pbc
        tol.pbc = 1e-8
    """)
    assert cfg.alpha == 2.5 and cfg.n_total == 3
    assert cfg.u_tilde == (0.1 + 0.2j, 0.4 - 0.1j)
    assert cfg.suites == ("ybe", "pbc")
    assert cfg.tolerances == {"pbc": 1e-8}
    for bad in ("nope = 1", "system.N = x", "suites = bogus", "system.N_L = 9", "just text"):
        with pytest.raises(ConfigError):
            parse_config_text(bad)


def test_seed_environment(monkeypatch, tmp_path):
    path = tmp_path / "c.cfg"
    path.write_text("kinematics.seed = 5\n")
    assert load_config(str(path)).seed == 5
    monkeypatch.setenv(SEED_ENV, "11")
    assert load_config(str(path)).seed == 11
    code, text = run(["verify", "coupling", "--config", str(path), "--samples", "2",
                      "--seed", "3"])
    assert code == 0 and json.loads(text)["sampler"]["seed"] == 3
    monkeypatch.setenv(SEED_ENV, "zz")
    with pytest.raises(ConfigError):
        load_config(None)


@pytest.mark.parametrize("suite", SUITE_NAMES)
def test_every_suite_passes_at_defaults(suite):
    code, text = run(["verify", suite, "--samples", "3"])
    rep = json.loads(text)
    assert code == 0, rep["summary"]
    assert rep["summary"]["total"] >= 1
    assert all(c["status"] != "fail" for c in rep["cases"])


def test_exit_codes(tmp_path):
    assert run(["verify", "ybe", "--samples", "5", "--break-f", "quadratic"])[0] == 1
    assert run(["verify", "no-such-suite"])[0] == 2
    bad = tmp_path / "bad.cfg"
    bad.write_text("mystery.key = 1\n")
    assert run(["verify", "ybe", "--config", str(bad)])[0] == 2
    assert run(["verify", "ybe", "--config", str(tmp_path / "missing.cfg")])[0] == 3
    assert run(["verify", "ybe", "--samples", "1", "--out", str(tmp_path / "no" / "dir.json")])[0] == 3


def test_csv_output(tmp_path):
    out = tmp_path / "r.csv"
    code, _ = run(["verify", "pbc", "--samples", "4", "--format", "csv", "--out", str(out)])
    assert code == 0
    rows = list(csv.reader(out.open()))
    assert tuple(rows[0]) == CSV_HEADER
    rep = build_report(RunConfig(samples=4), ["pbc"])
    assert len(rows) == len(rep["cases"]) + 1


def test_empty_suite_list(tmp_path):
    code, text = run(["report"])
    rep = json.loads(text)
    assert code == 0
    assert rep["cases"] == [] and rep["summary"]["total"] == 0


def test_deterministic_across_workers():
    base = ["verify", "transport", "--samples", "6", "--seed", "4"]
    one = strip_timing(run(base + ["--workers", "1"])[1])
    four = strip_timing(run(base + ["--workers", "4"])[1])
    assert one == four
    again = strip_timing(run(base)[1])
    assert again == one
    other = strip_timing(run(["verify", "transport", "--samples", "6", "--seed", "5"])[1])
    assert other["cases"] != one["cases"]


def test_case_replay():
    cfg = RunConfig(samples=3)
    rep = build_report(cfg, ["ybe", "qkz", "analytic-diff"])
    for c in rep["cases"]:
        if c["residual"] is None:
            continue
        again = run_case(c["suite"], cfg, c["inputs"])
        assert abs(again - c["residual"]) <= 1e-14 * max(1.0, abs(c["residual"]))


def test_report_is_json_serializable_without_complex():
    rep = build_report(RunConfig(samples=2), list(SUITE_NAMES))
    json.dumps(rep, allow_nan=False)
    assert list(rep)[-1] == "timing"


def test_qkz_solve_table():
    code, text = run(["qkz", "solve", "--m", "1", "--trunc", "5,10,20"])
    lines = text.strip().splitlines()
    assert lines[1] == "trunc,residual,tail"
    res = [float(l.split(",")[1]) for l in lines[2:]]
    assert len(res) == 3 and res[0] > res[1] > res[2]
    assert code == 0
