import json
from pathlib import Path

import pytest

from pointscatter import cli

FIXTURES = Path(__file__).parent / "fixtures"

# fixture config -> command words
RUNS = {
    "eigenvalues_standard.ini": ["eigenvalues"],
    "eigenvalues_irrational.ini": ["eigenvalues"],
    "decay_standard.ini": ["decay-scan"],
    "arith.ini": ["arith", "r3"],
    "strip.ini": ["strip"],
    "discrepancy.ini": ["discrepancy"],
    "density_irrational.ini": ["density"],
}


def run(tmp_path, name, *extra):
    out = tmp_path / (name + ".out")
    code = cli.main(["--config", str(FIXTURES / name), "--path", str(out), *RUNS[name], *extra])
    return code, out


def test_every_fixture_is_listed():
    assert sorted(p.name for p in FIXTURES.glob("*.ini")) == sorted(RUNS)


def test_r3_of_seven(capsys):
    assert cli.main(["arith", "r3", "--n", "7"]) == 0
    lines = capsys.readouterr().out.splitlines()
    assert lines[-2:] == ["n,r3", "7,0"]


def test_eigenvalue_table(tmp_path):
    code, out = run(tmp_path, "eigenvalues_standard.ini")
    assert code == 0
    rows = [l for l in out.read_text().splitlines() if not l.startswith("#")]
    assert rows[0].split(",")[:5] == ["k", "lambda", "bracket_lo", "bracket_hi", "residual"]
    body = [r.split(",") for r in rows[1:]]
    # one eigenvalue below zero plus one per gap between norms up to 50
    from pointscatter import arithmetic as ar
    assert len(body) == 1 + sum(1 for n in range(1, 51) if ar.r3(n))
    assert all(r[5] == "1" for r in body)


def test_eigenvalues_below_first_norm(capsys):
    assert cli.main(["eigenvalues", "--X", "0.5"]) == 0
    rows = [l for l in capsys.readouterr().out.splitlines() if not l.startswith("#")]
    assert len(rows) == 2 and rows[1].startswith("0,")


def test_flag_overrides_config(tmp_path):
    code, out = run(tmp_path, "arith.ini", "--n", "3")
    assert code == 0 and out.read_text().splitlines()[-1] == "3,8"


def test_excluded_phase_and_bad_input(capsys):
    assert cli.main(["eigenvalues", "--phi", "3.141592653589793"]) == 2
    assert "excluded phase" in capsys.readouterr().err
    assert cli.main(["decay-scan", "--zeta", "1,x,0"]) == 2
    assert cli.main(["nosuchcommand"]) == 2
    assert cli.main(["eigenvalues", "--torus", "nosuch"]) == 2
    assert cli.main(["--config", "/nonexistent.ini", "arith", "r3"]) == 2


def test_numerical_failure_exit(capsys):
    assert cli.main(["eigenvalues", "--inv-squares", "1,1,1.0000000000001", "--X", "10"]) == 3


def test_decay_scan_output(tmp_path):
    code, out = run(tmp_path, "decay_standard.ini")
    assert code == 0
    recs = [json.loads(l) for l in out.read_text().splitlines()]
    assert "config" in recs[0] and recs[0]["config"]["zeta"] == "1,0,0"
    assert recs[-1]["summary"] and recs[-1]["fitted_slope"] < 0
    assert cli.main(["decay-scan", "--zeta", "0,0,0", "--X-lo", "10", "--X-hi", "40", "--path",
                     str(tmp_path / "z.jsonl")]) == 0
    last = json.loads((tmp_path / "z.jsonl").read_text().splitlines()[-1])
    assert last["fitted_slope"] == 0


def test_discrepancy_columns(capsys):
    assert cli.main(["discrepancy", "--alpha", "sqrt2", "--N", "1000"]) == 0
    rows = [l for l in capsys.readouterr().out.splitlines() if not l.startswith("#")]
    assert rows[0].split(",")[:4] == ["N", "exact_D", "star_D", "et_bound"]


def test_seed_and_threads_echoed(tmp_path, monkeypatch):
    monkeypatch.setenv(cli.THREADS_ENV, "4")
    code, out = run(tmp_path, "arith.ini", "--seed", "17")
    text = out.read_text()
    assert "# seed=17" in text and "# threads=4" in text


def test_timestamp_header_is_optional(tmp_path):
    _, out = run(tmp_path, "arith.ini")
    assert "created" not in out.read_text()
    _, out = run(tmp_path, "arith.ini", "--timestamp")
    assert out.read_text().startswith("# created=")


def test_help_documents_config_keys(capsys):
    with pytest.raises(SystemExit):
        cli.build_parser().parse_args(["--help"])
    text = capsys.readouterr().out
    for sec, key, *_ in cli.OPTIONS.values():
        assert f"[{sec}] {key}" in text
