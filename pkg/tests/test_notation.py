from pathlib import Path

import pytest
from hypothesis import HealthCheck, given, settings
from hypothesis import strategies as st

from room25.core import SHIFTABLE_LINES, Coord, Direction, Line
from room25.notation import (
    ActionStep,
    CoordOutOfRange,
    DirectionAxisMismatch,
    NonMonotoneTurnNumbers,
    NotationSyntaxError,
    ProgrammedTurn,
    Script,
    SelfPush,
    Shift,
    Turn,
    format,
    format_step,
    parse_program,
    parse_script,
    parse_step,
)

FIXTURES = Path(__file__).resolve().parent.parent / "fixtures"

actors = st.integers(1, 6)
coords = st.builds(Coord, st.integers(-2, 2), st.integers(-2, 2))


@st.composite
def shifts(draw):
    line = draw(st.sampled_from(SHIFTABLE_LINES))
    return Shift(line, draw(st.sampled_from(line.directions())))


@st.composite
def steps(draw):
    verb = draw(st.sampled_from("RDPC"))
    actor = draw(actors)
    if verb == "C":
        return ActionStep(actor, "C", shift=draw(shifts()), win_marker=draw(st.booleans()))
    rider = draw(st.none() | shifts()) if verb in "DP" else None
    target = draw(actors.filter(lambda t: t != actor)) if verb == "P" else None
    return ActionStep(actor, verb, draw(coords), target, rider=rider, win_marker=draw(st.booleans()))


@st.composite
def programs(draw, number=1):
    chars = draw(st.lists(actors, min_size=1, max_size=6, unique=True))
    entries = []
    for c in chars:
        letters = draw(st.lists(st.sampled_from("RDPC"), min_size=1, max_size=2, unique=True))
        entries.append((c, "".join(letters)))
    return ProgrammedTurn(number, tuple(entries))


@st.composite
def scripts(draw):
    count = draw(st.integers(1, 3))
    turns = []
    for t in range(1, count + 1):
        body = tuple(draw(st.lists(steps(), min_size=1, max_size=6)))
        prog = draw(st.none() | programs(t))
        turns.append(Turn(t, body, prog))
    return Script(tuple(turns))


@settings(max_examples=10_000, deadline=None, suppress_health_check=[HealthCheck.too_slow])
@given(steps())
def test_step_roundtrip_fuzz(s):
    assert parse_step(format_step(s)) == s


@settings(max_examples=500, deadline=None)
@given(scripts())
def test_script_roundtrip(script):
    assert parse_script(format(script)) == script


@settings(max_examples=300, deadline=None)
@given(programs())
def test_program_roundtrip(p):
    assert parse_program(format(p).split(":", 1)[1]) == p


def test_canonical_forms():
    assert format_step(parse_step("5←[;1]")) == "5C<[;1]"
    assert format_step(parse_step("1P3[1;0]←[;1]")) == "1P3[1;0]<[;1]"
    assert format_step(parse_step("2D[-1;2]")) == "2D[-1;2]"
    assert parse_step("4C>[;1]#").win_marker


@pytest.mark.parametrize(
    "text, error, column",
    [
        ("1Q[0;0]", NotationSyntaxError, 2),
        ("1P1[1;0]", SelfPush, 3),
        ("1D[3;0]", CoordOutOfRange, None),
        ("1C^[;1]", DirectionAxisMismatch, None),
        ("1D[0;0", NotationSyntaxError, None),
    ],
)
def test_malformed_steps(text, error, column):
    with pytest.raises(error) as exc:
        parse_step(text)
    if column is not None:
        assert exc.value.column == column
    assert "column" in str(exc.value)


def test_turn_numbers_must_increase():
    with pytest.raises(NonMonotoneTurnNumbers):
        parse_script("2: 1D[1;0]\n1: 1D[1;0]\n")


def test_fixture_scripts_parse_and_roundtrip():
    for name in ("veloce1.s", "veloce6.s", "temeraire.s", "fig2.s", "example1.s"):
        script = parse_script((FIXTURES / name).read_text())
        assert parse_script(format(script)) == script


def test_printed_temeraire_parses():
    script = parse_script((FIXTURES / "temeraire_printed.s").read_text())
    assert len(script.turns) == 1 and len(script.steps) == 12


def test_continuation_lines_join_the_previous_turn():
    text = "1: 1D[1;0] | 2D[1;0]\n | 1C^[1;]\n"
    assert [format_step(s) for s in parse_script(text).steps] == ["1D[1;0]", "2D[1;0]", "1C^[1;]"]


def test_bare_arrow_is_a_control_step():
    s = parse_step("5←[;1]")
    assert s.verb == "C" and s.shift == Shift(Line.row(1), Direction.LEFT)
