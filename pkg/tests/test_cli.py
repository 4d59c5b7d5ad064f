import io
import os
import subprocess
import sys
from pathlib import Path

import pytest

from room25.cli import RunConfig, build_parser, main

ROOT = Path(__file__).resolve().parent.parent
FIXTURES = ROOT / "fixtures"


def run(*argv):
    out, err = io.StringIO(), io.StringIO()
    code = main(list(argv), out=out, err=err)
    return code, out.getvalue(), err.getvalue()


def test_replay_fast_opening():
    code, out, _ = run("replay", "--board", str(FIXTURES / "fig5a.board"), "--script", str(FIXTURES / "veloce1.s"), "--characters", "1")
    assert code == 0
    assert out.splitlines()[-1] == "OUTCOME won turn=2 deaths=0"


def test_replay_reckless_opening_needs_the_variant():
    args = ["replay", "--board", str(FIXTURES / "fig6a.board"), "--script", str(FIXTURES / "temeraire.s"), "--characters", "6"]
    code, out, _ = run(*args)
    assert code == 1 and out.startswith("ERROR")
    code, out, _ = run(*args, "--variant", "push-from-start")
    assert code == 0 and "OUTCOME won turn=1" in out


def test_prob_exact():
    code, out, _ = run("prob", "exact", "--event", "v-lucky")
    assert code == 0 and out == "17/230 ≈ 0.073913\n"


def test_prob_exact_with_roster_and_oracle():
    code, out, _ = run("prob", "exact", "--event", "v-lucky-no-dark", "--roster", str(FIXTURES / "default.roster"), "--oracle", "--format", "lines")
    assert code == 0
    assert out.splitlines()[0] == "event=v-lucky-no-dark value=67/1012 decimal=0.066206"
    assert "agrees=True" in out


def test_prob_mc_uses_the_seed_environment(monkeypatch):
    monkeypatch.setenv("ROOM25_SEED", "99")
    code, a, _ = run("prob", "mc", "--trials", "300")
    assert code == 0 and "seed=99" in a
    code, b, _ = run("prob", "mc", "--trials", "300", "--seed", "99")
    assert a == b


def test_parse_reports_the_column():
    code, out, err = run("parse", "1Q[0;0]")
    assert code == 2
    assert "column 2" in err


def test_parse_echoes_canonical_text():
    assert run("parse", "5←[;1]")[1] == "5C<[;1]\n"
    assert run("parse", "1DC | 2RD")[1] == "1DC | 2RD\n"
    code, out, _ = run("parse", "--script", str(FIXTURES / "veloce6.s"))
    assert code == 0 and out.splitlines()[0].startswith("1: 1RD")


def test_openings_emit():
    code, out, _ = run("openings", "emit", "--opening", "veloce", "--n", "6", "--frame", "id")
    assert code == 0
    assert out.splitlines()[0] == "1: 1RD | 2RD | 3RD | 4RD | 5DC | 6DR"


def test_verify_one_turn_small():
    code, out, _ = run("verify", "one-turn", "--n", "1")
    assert code == 0 and "verdict=NoWin" in out


def test_verify_six_character_witness_from_a_deal():
    code, out, _ = run(
        "verify", "one-turn", "--n", "6", "--variant", "push-from-start",
        "--board", str(FIXTURES / "reckless_legal.board"), "--budget", "2000000",
    )
    assert code == 0
    assert "verdict=WinFound" in out and out.rstrip().endswith("claim=confirmed")


def test_verify_antagonistic_small():
    code, out, _ = run("verify", "antagonistic", "--horizon", "2", "--n", "1")
    assert code == 0 and "verdict=ForcedLoss" in out


def test_verify_budget_exhaustion_is_reported():
    code, _, err = run("verify", "one-turn", "--n", "2", "--budget", "10")
    assert code == 1 and "budget" in err


def test_verify_refuses_large_proofs():
    code, _, err = run("verify", "one-turn", "--n", "5")
    assert code == 2


def test_usage_errors():
    assert run()[0] == 2
    assert run("replay", "--board", "nope.board", "--script", str(FIXTURES / "veloce1.s"))[0] == 2
    assert run("prob", "mc", "--trials", "0")[0] == 2


def test_run_config_from_flags():
    ns = build_parser().parse_args(["verify", "partial", "--n", "3", "--variant", "push-from-start"])
    cfg = RunConfig.from_args(ns)
    assert cfg.n_characters == 3 and cfg.variant.push_from_start_allowed


def test_console_script_entry_point():
    env = dict(os.environ, PYTHONPATH=str(ROOT / "src"))
    proc = subprocess.run(
        [sys.executable, "-m", "room25.cli", "prob", "exact", "--event", "t-lucky"],
        capture_output=True,
        text=True,
        env=env,
    )
    assert proc.returncode == 0 and proc.stdout.startswith("1/276")
