"""The fast (véloce) and reckless (téméraire) openings.

Both openings are written in a reference frame in which the exit sits at
``[2;1]`` and the room the party steps into first sits at ``[1;0]``.  A
:class:`LuckWitness` names the board symmetry that maps real coordinates to
that reference frame; :func:`canned_script` maps the scripts back.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

from .core import (
    FRAMES,
    START_NEIGHBOURS,
    VALID_X,
    BoardState,
    Coord,
    Frame,
    IDENTITY,
    Line,
    Direction,
    Room25Error,
    TileKind,
)
from .notation import ActionStep, ProgrammedTurn, Script, Shift, Turn

VELOCE = "veloce"
TEMERAIRE = "temeraire"
OPENINGS = (VELOCE, TEMERAIRE)

# Reference-frame landmarks.
EXIT_TARGET = Coord(2, 1)
X_CELL = Coord(1, 0)
X_RAISED = Coord(1, 1)  # where the X room sits after the column shift
# A line the fast opening never touches; used to absorb machine/control shifts.
IDLE_SHIFT = Shift(Line.row(-2), Direction.RIGHT)


class ArityFixed(Room25Error, ValueError):
    pass


class BoardNotRevealed(Room25Error, ValueError):
    pass


class UnknownOpening(Room25Error, ValueError):
    pass


@dataclass(frozen=True)
class LuckWitness:
    frame: Frame
    x_tile: Optional[TileKind] = None

    def __str__(self) -> str:
        x = f" x={self.x_tile.code}" if self.x_tile else ""
        return f"frame={self.frame.name}{x}"


def veloce_program(n: int) -> ProgrammedTurn:
    if not 1 <= n <= 6:
        raise ArityFixed("the fast opening is defined for 1 to 6 characters")
    if n == 1:
        return ProgrammedTurn(1, ((1, "DC"),))
    entries = [(c, "RD") for c in range(1, n - 1)]
    entries += [(n - 1, "DC"), (n, "DR")]
    return ProgrammedTurn(1, tuple(entries))


def temeraire_program(n: int = 6) -> ProgrammedTurn:
    if n != 6:
        raise ArityFixed("the reckless opening needs exactly six characters")
    return ProgrammedTurn(1, ((1, "PD"), (2, "PD"), (3, "CD"), (4, "DC"), (5, "DC"), (6, "DC")))


def _require_revealed(board: BoardState) -> None:
    if not board.fully_known:
        raise BoardNotRevealed("luck is defined on fully revealed boards")


def _witness(board: BoardState, wanted) -> Optional[LuckWitness]:
    _require_revealed(board)
    exit_at = board.find(TileKind.EXIT)
    if exit_at is None:
        return None
    for f in FRAMES:
        if f(exit_at) != EXIT_TARGET:
            continue
        x = board.kind_at(f.inverse()(X_CELL))
        if wanted(x):
            return LuckWitness(f, x)
    return None


def v_lucky(board: BoardState) -> Optional[LuckWitness]:
    """Witness frame for the fast opening, or None."""
    return _witness(board, lambda k: k in VALID_X)


def t_lucky(board: BoardState) -> Optional[LuckWitness]:
    """Witness frame for the reckless opening, or None."""
    w = _witness(board, lambda k: k is TileKind.CONTROL)
    return None if w is None else LuckWitness(w.frame)


# --------------------------------------------------------------------------
# Scripts in the reference frame


def _D(c, at, rider=None):
    return ActionStep(c, "D", at, rider=rider)


def _veloce_reference(n: int, x_kind: Optional[TileKind], looks=START_NEIGHBOURS) -> list[Turn]:
    rider = IDLE_SHIFT if (x_kind is not None and x_kind.grants_shift) else None
    prog1 = veloce_program(n)
    if n == 1:
        t1 = [_D(1, X_CELL, rider), ActionStep(1, "C", shift=Shift(Line.column(1), Direction.UP))]
    else:
        first = [ActionStep(c, "R", looks[c - 1]) for c in range(1, n - 1)]
        first += [_D(n - 1, X_CELL, rider), _D(n, X_CELL, rider)]
        second = [_D(c, X_CELL, rider) for c in range(1, n - 1)]
        second.append(ActionStep(n - 1, "C", shift=Shift(Line.column(1), Direction.UP)))
        if x_kind is not TileKind.DARK:
            second.append(ActionStep(n, "R", EXIT_TARGET))
        t1 = first + second
    order = [(1 + k) % n + 1 for k in range(n)]
    lead = order[0]
    prog2 = ProgrammedTurn(2, tuple((c, "DC" if c == lead else "D") for c in order))
    t2 = [_D(c, EXIT_TARGET) for c in order]
    t2.append(ActionStep(lead, "C", shift=Shift(Line.row(1), Direction.RIGHT), win_marker=True))
    return [Turn(1, tuple(t1), prog1), Turn(2, tuple(t2), prog2)]


def _temeraire_reference() -> list[Turn]:
    left = Shift(Line.row(1), Direction.LEFT)
    exit_cell = Coord(0, 1)
    steps = [
        ActionStep(1, "P", X_CELL, target=3, rider=left),
        ActionStep(2, "P", X_CELL, target=4, rider=left),
        ActionStep(3, "C", shift=Shift(Line.column(1), Direction.UP)),
        _D(4, exit_cell),
        _D(5, exit_cell),
        _D(6, exit_cell),
        _D(1, exit_cell),
        _D(2, exit_cell),
        _D(3, exit_cell),
        ActionStep(4, "C", shift=left),
        ActionStep(5, "C", shift=left),
        ActionStep(6, "C", shift=left, win_marker=True),
    ]
    return [Turn(1, tuple(steps), temeraire_program())]


def map_step(f: Frame, s: ActionStep) -> ActionStep:
    """The same step with every coordinate, line and direction sent through ``f``."""

    def sh(x: Optional[Shift]) -> Optional[Shift]:
        return None if x is None else Shift(f.line(x.line), f.direction(x.direction))

    return ActionStep(
        s.actor,
        s.verb,
        None if s.coord is None else f(s.coord),
        s.target,
        sh(s.shift),
        sh(s.rider),
        s.win_marker,
    )


def map_script(f: Frame, script: Script) -> Script:
    return Script(tuple(Turn(t.number, tuple(map_step(f, s) for s in t.steps), t.program) for t in script.turns))


def reference_script(opening: str, n: int, x_kind: Optional[TileKind] = None) -> Script:
    if opening == VELOCE:
        return Script(tuple(_veloce_reference(n, x_kind)))
    if opening == TEMERAIRE:
        if n != 6:
            raise ArityFixed("the reckless opening needs exactly six characters")
        return Script(tuple(_temeraire_reference()))
    raise UnknownOpening(opening)


def canned_script(opening: str, witness: LuckWitness, n: int) -> Script:
    """Concrete script in board coordinates for the frame named by ``witness``."""
    ref = reference_script(opening, n, witness.x_tile)
    if opening == VELOCE and n > 1:
        # Looks are issued before the frame matters, in board order.
        to_ref = witness.frame
        looks = tuple(to_ref(c) for c in START_NEIGHBOURS)
        ref = Script(tuple(_veloce_reference(n, witness.x_tile, looks)))
    return map_script(witness.frame.inverse(), ref)


def emit(opening: str, n: int, frame: Frame = IDENTITY, x_kind: Optional[TileKind] = TileKind.EMPTY) -> str:
    """Program and script text for ``openings emit``."""
    script = canned_script(opening, LuckWitness(frame, x_kind if opening == VELOCE else None), n)
    return str(script)


# --------------------------------------------------------------------------
# Playing an opening on a board the players do not know


# Preference among neighbours when no valid X was seen; lower is better.
_FALLBACK = {
    TileKind.CONTROL: 1,
    TileKind.YELLOW_OTHER: 2,
    None: 3,  # not looked at
    TileKind.FLOOD: 4,
    TileKind.VORTEX: 5,
    TileKind.TRAP: 6,
    TileKind.ACID: 7,
    TileKind.MORTAL: 8,
    TileKind.RED_OTHER: 8,
}


def choose_frame(seen: dict[Coord, Optional[TileKind]]) -> Frame:
    """First frame, in fixed order, whose [1;0] preimage is the best seen neighbour."""

    def score(k):
        return 0 if k in VALID_X else _FALLBACK.get(k, 3)

    best = min(score(seen.get(c)) for c in START_NEIGHBOURS)
    for f in FRAMES:
        if score(seen.get(f.inverse()(X_CELL))) == best:
            return f
    raise AssertionError("unreachable: some frame maps each neighbour to [1;0]")


def _attempt(g, s: ActionStep, idle: Optional[Shift] = None):
    """Apply ``s``, or the closest legal stand-in, or skip when nothing fits."""
    from .engine import apply_step, legal_steps, shift_options
    from .core import RuleViolation
    from dataclasses import replace

    if g.over or not g.char(s.actor).alive:
        return g, []
    candidates = [s]
    if s.verb in "DP":
        candidates.append(replace(s, rider=None))
        if idle is not None:
            candidates.append(replace(s, rider=idle))
        candidates += [replace(s, rider=r) for r in shift_options(g)][:1]
    for cand in candidates:
        try:
            return apply_step(g, cand)
        except RuleViolation:
            continue
    legal = legal_steps(g, s.actor, s.verb)
    if legal:
        return apply_step(g, legal[0])
    return g, []


def play_adaptively(g, steps, idle: Optional[Shift] = None):
    """Run ``steps`` in order, repairing the ones the board does not allow.

    ``idle`` is the shift used when an unexpected control room demands one.
    """
    events = []
    for s in steps:
        if g.over:
            break
        g, ev = _attempt(g, s, idle)
        events += ev
    return g, events


def play_opening(opening: str, n: int, board: BoardState, memo: Optional[dict] = None):
    """One Monte-Carlo trial; returns a single-trial :class:`~room25.prob.Tally`.

    The players only use what their looks reveal.  The fast opening carries on
    into turn 2 only when the X room proved valid and the exit target was
    either seen to be the exit or not seen at all.
    """
    from .engine import DEFAULT_VARIANT, PUSH_FROM_START, GameState, Status, end_turn
    from .prob import Tally

    if opening == TEMERAIRE:
        g = GameState.initial(board, 6, PUSH_FROM_START)
        g, _ = play_adaptively(g, canned_script(TEMERAIRE, LuckWitness(IDENTITY), 6).turns[0].steps)
        if g.outcome.status is Status.WON:
            return Tally(1, won=1)
        if g.outcome.status is Status.LOST:
            return Tally(1, instant_loss=1)
        return Tally(1, other=1)
    if opening != VELOCE:
        raise UnknownOpening(opening)

    looked = START_NEIGHBOURS[: max(0, min(4, n - 2))]
    seen = {c: board.kind_at(c) for c in looked}
    frame = choose_frame(seen)
    inv = frame.inverse()
    x_kind = board.kind_at(inv(X_CELL))
    target_kind = board.kind_at(inv(EXIT_TARGET))
    # Turn 1 depends on the X room only and turn 2 on the target as well.
    key = (n, x_kind, target_kind)
    if memo is not None and key in memo:
        return memo[key]

    script = canned_script(VELOCE, LuckWitness(frame, seen.get(inv(X_CELL))), n)
    idle = Shift(inv.line(IDLE_SHIFT.line), inv.direction(IDLE_SHIFT.direction))
    g = GameState.initial(board, n, DEFAULT_VARIANT)
    g, _ = play_adaptively(g, script.turns[0].steps, idle)
    if g.over:
        result = Tally(1, won=1) if g.outcome.status is Status.WON else Tally(1, instant_loss=1)
    else:
        g, _ = end_turn(g)
        target_seen = n >= 2 and x_kind is not TileKind.DARK
        on_track = (
            x_kind in VALID_X
            and all(ch.pos == inv(X_RAISED) for ch in g.living())
            and (not target_seen or target_kind is TileKind.EXIT)
        )
        if g.over:
            result = Tally(1, late_loss=1)
        elif not on_track:
            result = Tally(1, other=1)
        else:
            g, _ = play_adaptively(g, script.turns[1].steps, idle)
            if g.outcome.status is Status.WON:
                result = Tally(1, won=1)
            elif g.outcome.status is Status.LOST:
                result = Tally(1, late_loss=1)
            else:
                result = Tally(1, other=1)
    if memo is not None:
        memo[key] = result
    return result
