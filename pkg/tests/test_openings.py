import random
from pathlib import Path

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from room25.core import (
    CELLS,
    DEFAULT_ROSTER,
    EXIT_CELLS,
    FRAMES,
    IDENTITY,
    ORIGIN,
    VALID_X,
    BoardState,
    Coord,
    TileKind,
    parse_board,
    transform_board,
)
from room25.engine import DEFAULT_VARIANT, PUSH_FROM_START, run_script
from room25.openings import (
    EXIT_TARGET,
    TEMERAIRE,
    VELOCE,
    X_CELL,
    ArityFixed,
    BoardNotRevealed,
    LuckWitness,
    canned_script,
    choose_frame,
    emit,
    play_opening,
    t_lucky,
    temeraire_program,
    v_lucky,
    veloce_program,
)

FIXTURES = Path(__file__).resolve().parent.parent / "fixtures"


def filled(grid, fill=TileKind.EMPTY):
    full = {c: fill for c in CELLS if c != ORIGIN}
    full.update(grid)
    return BoardState.from_grid(full)


def deal(rng):
    tiles = DEFAULT_ROSTER.tiles()
    rng.shuffle(tiles)
    exit_at = rng.choice(sorted(EXIT_CELLS))
    it = iter(tiles)
    return BoardState.from_grid({c: TileKind.EXIT if c == exit_at else next(it) for c in CELLS if c != ORIGIN})


def test_fixture_boards_are_lucky():
    w = v_lucky(parse_board((FIXTURES / "fig5a.board").read_text()))
    assert w is not None and w.frame == IDENTITY
    assert t_lucky(parse_board((FIXTURES / "fig6a.board").read_text())) is not None


def test_mortal_at_x_is_not_lucky_in_that_frame():
    b = filled({EXIT_TARGET: TileKind.EXIT, X_CELL: TileKind.MORTAL})
    assert v_lucky(b) is None


def test_control_far_from_the_exit_is_not_reckless_luck():
    b = filled({Coord(2, 2): TileKind.EXIT, X_CELL: TileKind.CONTROL})
    assert t_lucky(b) is None


def test_luck_needs_a_revealed_board():
    with pytest.raises(BoardNotRevealed):
        t_lucky(BoardState.unknown())
    with pytest.raises(BoardNotRevealed):
        v_lucky(BoardState.unknown())


def test_programs():
    assert str(veloce_program(6)).startswith("1: 1RD | 2RD | 3RD | 4RD | 5DC | 6DR")
    with pytest.raises(ArityFixed):
        temeraire_program(5)
    with pytest.raises(ArityFixed):
        veloce_program(7)


def test_emit_text():
    text = emit(VELOCE, 6, IDENTITY)
    assert text.splitlines()[0] == "1: 1RD | 2RD | 3RD | 4RD | 5DC | 6DR"
    assert text.rstrip().endswith("2C>[;1]#")


@pytest.mark.parametrize("n", range(1, 7))
@pytest.mark.parametrize("f", FRAMES, ids=lambda f: f.name)
@pytest.mark.parametrize("x", [TileKind.EMPTY, TileKind.DARK, TileKind.MACHINE, TileKind.TUNNEL])
def test_fast_opening_wins_in_every_frame(n, f, x):
    ref = filled({EXIT_TARGET: TileKind.EXIT, X_CELL: x})
    board = transform_board(f.inverse(), ref)
    w = v_lucky(board)
    assert w is not None
    r = run_script(board, n, DEFAULT_VARIANT, canned_script(VELOCE, w, n))
    assert r.won and r.turns_played == 2


@pytest.mark.parametrize("f", FRAMES, ids=lambda f: f.name)
def test_reckless_opening_wins_in_every_frame(f):
    ref = filled({EXIT_TARGET: TileKind.EXIT, X_CELL: TileKind.CONTROL})
    board = transform_board(f.inverse(), ref)
    w = t_lucky(board)
    assert w is not None
    r = run_script(board, 6, PUSH_FROM_START, canned_script(TEMERAIRE, w, 6))
    assert r.won and r.turns_played == 1


def test_policy_wins_exactly_when_its_frame_is_lucky():
    rng = random.Random(7)
    for _ in range(3000):
        b = deal(rng)
        seen = {c: b.kind_at(c) for c in ORIGIN.neighbours()}
        inv = choose_frame(seen).inverse()
        predicted = b.kind_at(inv(X_CELL)) in VALID_X and b.kind_at(inv(EXIT_TARGET)) is TileKind.EXIT
        assert play_opening(VELOCE, 6, b).won == predicted


@pytest.mark.parametrize("n", [1, 2, 4, 6])
def test_outcome_cache_matches_direct_play(n):
    rng = random.Random(n)
    memo = {}
    for _ in range(400):
        b = deal(rng)
        assert play_opening(VELOCE, n, b, memo) == play_opening(VELOCE, n, b)


@settings(max_examples=300, deadline=None)
@given(st.randoms(use_true_random=False), st.sampled_from(FRAMES), st.booleans())
def test_luck_predicates_are_frame_equivariant(rng, g, plant):
    b = deal(rng)
    if plant:
        # Make luck likely: exit on the target orbit and a valid or control X.
        f = rng.choice(FRAMES).inverse()
        grid = {c: b.kind_at(c) for c in CELLS if c != ORIGIN}
        swap = grid[f(EXIT_TARGET)]
        old_exit = b.find(TileKind.EXIT)
        grid[old_exit], grid[f(EXIT_TARGET)] = swap, TileKind.EXIT
        grid[f(X_CELL)] = rng.choice([TileKind.EMPTY, TileKind.CONTROL, TileKind.MORTAL])
        b = BoardState.from_grid(grid)
    moved = transform_board(g, b)
    for pred in (v_lucky, t_lucky):
        w, wg = pred(b), pred(moved)
        assert (w is None) == (wg is None)
        if w is not None:
            assert wg.frame == w.frame.compose(g.inverse())
            assert wg.x_tile == w.x_tile


def test_witness_text():
    assert str(LuckWitness(IDENTITY, TileKind.EMPTY)) == "frame=id x=V"
