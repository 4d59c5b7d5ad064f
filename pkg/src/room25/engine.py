"""Turn-structured rules engine.

A :class:`GameState` is an immutable value; :func:`apply_step` and
:func:`end_turn` return successors together with the events they produced.
Turn-level bookkeeping (programming, the two passes in rotating seat order,
mandatory actions) lives in :func:`execute_turn` and :func:`run_script`.
"""
from __future__ import annotations

import enum
from dataclasses import dataclass, field, replace
from typing import Iterable, Iterator, NamedTuple, Optional, Sequence

from .core import (
    CELLS,
    ORIGIN,
    SHIFTABLE_LINES,
    BoardState,
    CentralLineForbidden,
    Coord,
    Direction,
    DirectionMismatch,
    Line,
    Room25Error,
    RuleViolation,
    TileKind,
    leaves_board,
    lines_through,
    shift_line,
    shifted,
)
from .notation import ActionStep, ProgrammedTurn, Script, Shift, Turn


@dataclass(frozen=True)
class RuleVariant:
    push_from_start_allowed: bool = False
    push_from_control_allowed: bool = False
    # 0 is the full-victory regime.  1 models a partial victory: the game goes
    # on after one death and a slide with every survivor aboard still wins.
    tolerated_deaths: int = 0

    @property
    def label(self) -> str:
        parts = []
        if self.push_from_start_allowed:
            parts.append("push-from-start")
        if self.push_from_control_allowed:
            parts.append("push-from-control")
        if self.tolerated_deaths:
            parts.append(f"tolerate-{self.tolerated_deaths}")
        return "+".join(parts) or "default"


DEFAULT_VARIANT = RuleVariant()
PUSH_FROM_START = RuleVariant(push_from_start_allowed=True)


# --------------------------------------------------------------------------
# Errors


class IllegalMove(RuleViolation):
    pass


class PushFromStartForbidden(RuleViolation):
    pass


class PushFromControlForbidden(RuleViolation):
    pass


class LineLockViolation(RuleViolation):
    pass


class LookFromDarkForbidden(RuleViolation):
    pass


class MissingRider(RuleViolation):
    pass


class UnexpectedRider(RuleViolation):
    pass


class UnresolvedTile(Room25Error):
    """The engine needs a tile identity that has not been fixed yet."""


class GameOver(RuleViolation):
    pass


class OrderViolation(RuleViolation):
    pass


class SkippedMandatoryAction(RuleViolation):
    pass


class ScriptError(Room25Error):
    """Wraps the first failure of a replay with its location."""

    def __init__(self, cause: Exception, turn: int, step_index: Optional[int]):
        self.cause = cause
        self.turn = turn
        self.step_index = step_index
        where = f"turn {turn}" + (f", step {step_index + 1}" if step_index is not None else "")
        super().__init__(f"{where}: {type(cause).__name__}: {cause}")


# --------------------------------------------------------------------------
# State


class Status(enum.Enum):
    IN_PROGRESS = "in-progress"
    WON = "won"
    LOST = "lost"


@dataclass(frozen=True)
class Outcome:
    status: Status = Status.IN_PROGRESS
    reason: str = ""

    def __str__(self) -> str:
        return self.status.value + (f" ({self.reason})" if self.reason else "")


IN_PROGRESS = Outcome()


class CharacterState(NamedTuple):
    id: int
    pos: Optional[Coord]  # None once dead
    alive: bool = True
    trap_tile: Optional[int] = None  # tile id of a trap the character must leave
    trap_clock: int = -1  # step clock at which the trap was entered
    flood_tile: Optional[int] = None
    flood_deadline: Optional[int] = None
    verbs: str = ""  # letters already used this turn
    entered: int = 0  # clock of the latest entry into a room, for acid ordering

    @property
    def actions_taken(self) -> int:
        return len(self.verbs)


class Event(NamedTuple):
    turn: int
    step: int  # 0-based index within the turn, -1 for end-of-turn events
    kind: str
    data: tuple

    def __str__(self) -> str:
        where = f"{self.turn}.{self.step + 1}" if self.step >= 0 else f"{self.turn}.end"
        return " ".join([where, self.kind, *map(str, self.data)])


@dataclass(frozen=True)
class GameState:
    board: BoardState
    chars: tuple[CharacterState, ...]
    turn: int = 1
    first_player_offset: int = 0
    locks: tuple[tuple[Line, Direction], ...] = ()
    outcome: Outcome = IN_PROGRESS
    deaths: int = 0
    clock: int = 1
    step_in_turn: int = 0
    variant: RuleVariant = DEFAULT_VARIANT

    @classmethod
    def initial(cls, board: BoardState, n: int, variant: RuleVariant = DEFAULT_VARIANT) -> "GameState":
        if not 1 <= n <= 6:
            raise ValueError("between 1 and 6 characters")
        chars = tuple(CharacterState(i, ORIGIN) for i in range(1, n + 1))
        return cls(board, chars, variant=variant)

    @property
    def n(self) -> int:
        return len(self.chars)

    @property
    def over(self) -> bool:
        return self.outcome.status is not Status.IN_PROGRESS

    def char(self, cid: int) -> CharacterState:
        if not 1 <= cid <= len(self.chars):
            raise IllegalMove(f"no character {cid}")
        return self.chars[cid - 1]

    def lock(self, line: Line) -> Optional[Direction]:
        for ln, d in self.locks:
            if ln == line:
                return d
        return None

    def occupants(self, c: Coord) -> list[CharacterState]:
        return [ch for ch in self.chars if ch.alive and ch.pos == c]

    def living(self) -> list[CharacterState]:
        return [ch for ch in self.chars if ch.alive]


def seat_order(g: GameState) -> list[int]:
    """Living characters in this turn's seat order (1, 2, ... then 2, 3, ..., 1)."""
    n = g.n
    start = (g.turn - 1 + g.first_player_offset) % n
    order = [(start + k) % n + 1 for k in range(n)]
    return [c for c in order if g.chars[c - 1].alive]


# --------------------------------------------------------------------------
# Mutable scratch used while resolving one step


class _Work:
    def __init__(self, g: GameState):
        self.g = g
        self.board = g.board
        self.chars = list(g.chars)
        self.locks = dict(g.locks)
        self.deaths = g.deaths
        self.outcome = g.outcome
        self.clock = g.clock
        self.events: list[Event] = []

    def emit(self, kind: str, *data) -> None:
        self.events.append(Event(self.g.turn, self.g.step_in_turn, kind, data))

    def kind_of(self, tile: int) -> TileKind:
        k = self.board.kinds[tile]
        if k is None:
            raise UnresolvedTile(f"tile dealt at {CELLS[tile]} has no identity yet")
        return k

    def kill(self, cid: int, cause: str) -> None:
        ch = self.chars[cid - 1]
        if not ch.alive:
            return
        self.chars[cid - 1] = ch._replace(alive=False, pos=None, trap_tile=None, flood_tile=None, flood_deadline=None)
        self.deaths += 1
        self.emit("DEATH", cid, cause)
        if self.deaths > self.g.variant.tolerated_deaths and self.outcome.status is Status.IN_PROGRESS:
            self.outcome = Outcome(Status.LOST, f"character {cid} died: {cause}")

    def shift(self, line: Line, d: Direction, by: int) -> None:
        if not line.shiftable:
            raise CentralLineForbidden(f"line {line} holds the start tile and never moves")
        if d.axis is not line.axis:
            raise DirectionMismatch(f"cannot shift {line} {d.value}")
        locked = self.locks.get(line)
        if locked is not None and locked is not d:
            raise LineLockViolation(f"{line} already shifted {locked.value} this turn")
        self.locks[line] = d
        exit_at = None
        for c in line.cells():
            if self.board.kinds[self.board.tile_at(c)] is TileKind.EXIT:
                exit_at = c
        living = [ch for ch in self.chars if ch.alive]
        sliding = (
            exit_at is not None
            and leaves_board(exit_at, d)
            and living
            and all(ch.pos == exit_at for ch in living)
        )
        self.board = shift_line(self.board, line, d)
        for i, ch in enumerate(self.chars):
            if ch.alive and line.contains(ch.pos):
                self.chars[i] = ch._replace(pos=shifted(ch.pos, d))
        self.emit("SHIFT", by, f"{d.value}{line}")
        if sliding and self.outcome.status is Status.IN_PROGRESS:
            self.emit("VICTORY", f"{d.value}{line}")
            self.outcome = Outcome(Status.WON, f"exit slid off via {d.value}{line}")

    def enter(self, cid: int, dest: Coord, how: str, rider: Optional[Shift]) -> None:
        """Place ``cid`` on ``dest`` and resolve the room's effect."""
        ch = self.chars[cid - 1]
        tile = self.board.tile_at(dest)
        kind = self.kind_of(tile)
        self.clock += 1
        src = ch.pos
        ch = ch._replace(pos=dest, entered=self.clock)
        if ch.trap_tile is not None and ch.trap_tile != tile:
            ch = ch._replace(trap_tile=None)
        self.chars[cid - 1] = ch
        self.emit(how, cid, src, dest)
        if not self.board.face_up[tile]:
            self.board = self.board.revealed(tile)
            self.emit("REVEAL", dest, kind.code)

        if kind.grants_shift:
            if rider is None:
                raise MissingRider(f"entering {kind.name.lower()} at {dest} requires a line shift")
        elif rider is not None:
            raise UnexpectedRider(f"{kind.name.lower()} at {dest} grants no shift")

        if kind in (TileKind.MORTAL, TileKind.RED_OTHER, TileKind.FREE_KILL):
            self.kill(cid, kind.name.lower())
        elif kind is TileKind.VORTEX:
            self.clock += 1
            self.chars[cid - 1] = self.chars[cid - 1]._replace(pos=ORIGIN, entered=self.clock)
            self.emit("VORTEX", cid, dest, ORIGIN)
        elif kind is TileKind.TRAP:
            self.chars[cid - 1] = self.chars[cid - 1]._replace(trap_tile=tile, trap_clock=self.clock)
        elif kind is TileKind.FLOOD:
            self.chars[cid - 1] = self.chars[cid - 1]._replace(flood_tile=tile, flood_deadline=self.g.turn + 1)
        elif kind is TileKind.ACID:
            prior = [o for o in self.chars if o.alive and o.id != cid and o.pos == dest]
            if prior:
                first = min(prior, key=lambda o: o.entered)
                self.kill(first.id, "acid")

        if kind.grants_shift and self.outcome.status is Status.IN_PROGRESS:
            self.shift(rider.line, rider.direction, cid)

    def freeze(self, step_done: bool = True) -> GameState:
        return replace(
            self.g,
            board=self.board,
            chars=tuple(self.chars),
            locks=tuple(sorted(self.locks.items(), key=lambda kv: (kv[0].axis.value, kv[0].index))),
            outcome=self.outcome,
            deaths=self.deaths,
            clock=self.clock + 1,
            step_in_turn=self.g.step_in_turn + (1 if step_done else 0),
        )


# --------------------------------------------------------------------------
# Steps


def _check_adjacent(src: Coord, dest: Coord) -> None:
    if not src.adjacent(dest):
        raise IllegalMove(f"{dest} is not adjacent to {src}")


def apply_step(g: GameState, s: ActionStep) -> tuple[GameState, list[Event]]:
    """Execute one action and resolve its consequences."""
    if g.over:
        raise GameOver(f"the game is already {g.outcome.status.value}")
    actor = g.char(s.actor)
    if not actor.alive:
        raise IllegalMove(f"character {s.actor} is dead")
    if s.verb in actor.verbs:
        raise IllegalMove(f"character {s.actor} already used {s.verb} this turn")
    if actor.actions_taken >= 2:
        raise IllegalMove(f"character {s.actor} has no action left this turn")
    w = _Work(g)
    here = actor.pos
    w.chars[s.actor - 1] = actor._replace(verbs=actor.verbs + s.verb)
    w.clock += 1
    step_clock = w.clock

    if s.verb == "R":
        _check_adjacent(here, s.coord)
        if w.kind_of(g.board.tile_at(here)) is TileKind.DARK:
            raise LookFromDarkForbidden(f"character {s.actor} stands in a dark room")
        tile = g.board.tile_at(s.coord)
        if g.board.face_up[tile]:
            raise IllegalMove(f"{s.coord} is already face up")
        # A look changes nothing on the board, so an unassigned room may stay so.
        k = g.board.kinds[tile]
        w.emit("LOOK", s.actor, s.coord, "?" if k is None else k.code)
    elif s.verb == "D":
        _check_adjacent(here, s.coord)
        w.enter(s.actor, s.coord, "MOVE", s.rider)
    elif s.verb == "P":
        _check_adjacent(here, s.coord)
        victim = g.char(s.target)
        if not victim.alive or victim.pos != here:
            raise IllegalMove(f"character {s.target} is not on {here}")
        src_kind = w.kind_of(g.board.tile_at(here))
        if src_kind is TileKind.START and not g.variant.push_from_start_allowed:
            raise PushFromStartForbidden("pushing from the start tile is forbidden")
        if src_kind is TileKind.CONTROL and not g.variant.push_from_control_allowed:
            raise PushFromControlForbidden("pushing from the control room is forbidden")
        # A victim pushed off a trap is spared: only actions it undertakes count.
        w.enter(s.target, s.coord, "PUSH", s.rider)
    elif s.verb == "C":
        if not s.line.contains(here):
            raise IllegalMove(f"character {s.actor} at {here} is not on {s.line}")
        w.shift(s.line, s.direction, s.actor)

    # Trap check: the first own action after entering ends in death if the
    # character is still on the trap.
    a = w.chars[s.actor - 1]
    if a.alive and a.trap_tile is not None and a.trap_clock < step_clock:
        if w.board.tile_at(a.pos) == a.trap_tile:
            w.kill(s.actor, "trap")
        else:
            w.chars[s.actor - 1] = a._replace(trap_tile=None)
    return w.freeze(), w.events


def end_turn(g: GameState) -> tuple[GameState, list[Event]]:
    """Flood deaths, then clear locks and per-turn counters and rotate seats."""
    w = _Work(g)
    w.g = replace(g, step_in_turn=-1)
    for ch in list(w.chars):
        if ch.alive and ch.flood_deadline is not None and ch.flood_deadline <= g.turn:
            if w.board.tile_at(ch.pos) == ch.flood_tile:
                w.kill(ch.id, "flood")
            else:
                w.chars[ch.id - 1] = ch._replace(flood_tile=None, flood_deadline=None)
    chars = tuple(c._replace(verbs="") for c in w.chars)
    nxt = replace(
        g,
        board=w.board,
        chars=chars,
        locks=(),
        outcome=w.outcome,
        deaths=w.deaths,
        turn=g.turn + 1,
        step_in_turn=0,
    )
    return nxt, w.events


# --------------------------------------------------------------------------
# Legal parameterizations


def shift_options(g: GameState, lines: Iterable[Line] = SHIFTABLE_LINES) -> Iterator[Shift]:
    for ln in lines:
        locked = g.lock(ln)
        for d in ln.directions():
            if locked is None or locked is d:
                yield Shift(ln, d)


def legal_steps(g: GameState, cid: int, verb: str) -> list[ActionStep]:
    """Every concrete step ``cid`` could take with ``verb`` right now.

    Unknown tiles are treated optimistically (any effect); riders are listed
    only when the destination is known to grant a shift.
    """
    if g.over:
        return []
    ch = g.char(cid)
    if not ch.alive or verb in ch.verbs or ch.actions_taken >= 2:
        return []
    here = ch.pos
    here_kind = g.board.kind_at(here)
    out: list[ActionStep] = []
    if verb == "R":
        if here_kind is TileKind.DARK:
            return []
        for c in here.neighbours():
            if not g.board.is_face_up(c):
                out.append(ActionStep(cid, "R", c))
    elif verb in "DP":
        if verb == "P":
            if here_kind is TileKind.START and not g.variant.push_from_start_allowed:
                return []
            if here_kind is TileKind.CONTROL and not g.variant.push_from_control_allowed:
                return []
            targets = [o.id for o in g.chars if o.alive and o.id != cid and o.pos == here]
        else:
            targets = [None]
        for t in targets:
            for c in here.neighbours():
                k = g.board.kind_at(c)
                riders = list(shift_options(g)) if (k is not None and k.grants_shift) else [None]
                for r in riders:
                    out.append(ActionStep(cid, verb, c, t, None, r))
    elif verb == "C":
        for sh in shift_options(g, lines_through(here)):
            out.append(ActionStep(cid, "C", shift=sh))
    return out


def has_legal(g: GameState, cid: int, verb: str) -> bool:
    return bool(legal_steps(g, cid, verb))


# --------------------------------------------------------------------------
# Programs and turns


@dataclass(frozen=True)
class Violation:
    kind: str
    character: int
    detail: str = ""

    def __str__(self) -> str:
        return f"{self.kind}: character {self.character}" + (f" ({self.detail})" if self.detail else "")


def validate_program(p: ProgrammedTurn, g: GameState) -> list[Violation]:
    """Structural problems with a programming; empty means ok."""
    out = []
    seen = set()
    for cid, letters in p.entries:
        if cid in seen:
            out.append(Violation("DuplicateCharacter", cid))
        seen.add(cid)
        if not 1 <= cid <= g.n:
            out.append(Violation("UnknownCharacter", cid))
            continue
        if not g.chars[cid - 1].alive:
            out.append(Violation("DeadActor", cid))
        if not 1 <= len(letters) <= 2:
            out.append(Violation("ActionCount", cid, letters))
        if len(set(letters)) != len(letters):
            out.append(Violation("DuplicateAction", cid, letters))
        for letter in letters:
            if letter not in "RDPC":
                out.append(Violation("UnknownAction", cid, letter))
    return out


def infer_program(turn: Turn, g: GameState) -> ProgrammedTurn:
    letters: dict[int, str] = {}
    for s in turn.steps:
        letters[s.actor] = letters.get(s.actor, "") + s.verb
    order = seat_order(g)
    entries = [(c, letters[c]) for c in order if c in letters]
    entries += [(c, v) for c, v in letters.items() if c not in order]
    return ProgrammedTurn(turn.number, tuple(entries))


class TurnResult(NamedTuple):
    state: GameState
    events: list[Event]


def _schedule(g: GameState, p: ProgrammedTurn) -> list[tuple[int, int, str, bool]]:
    """Slots ``(pass, character, letter, optional)`` in execution order.

    A single-action character gets one slot in each pass; the first is
    optional and the second only applies if the first was not used.
    """
    order = seat_order(g)
    slots = []
    for pss in (0, 1):
        for cid in order:
            letters = p.letters(cid)
            if len(letters) == 2:
                slots.append((pss, cid, letters[pss], False))
            elif len(letters) == 1:
                slots.append((pss, cid, letters, pss == 0))
    return slots


def execute_turn(
    g: GameState,
    steps: Sequence[ActionStep],
    program: Optional[ProgrammedTurn] = None,
    check_mandatory: bool = True,
    finish: bool = True,
) -> TurnResult:
    """Run one turn's steps against its programming.

    Steps must come as a first pass then a second pass in seat order; a
    programmed action may be left out only when it has no legal
    parameterization at its slot.  Errors carry ``step_index``.
    """
    turn = Turn(g.turn, tuple(steps), program)
    if program is None:
        program = infer_program(turn, g)
    problems = validate_program(program, g)
    if problems:
        raise OrderViolation("; ".join(map(str, problems)))
    events: list[Event] = []
    k = 0
    done_single: set[int] = set()
    for pss, cid, letter, optional in _schedule(g, program):
        if g.over:
            break
        if not g.chars[cid - 1].alive:
            continue
        if len(program.letters(cid)) == 1 and cid in done_single:
            continue
        nxt = steps[k] if k < len(steps) else None
        if nxt is not None and nxt.actor == cid and nxt.verb == letter:
            try:
                g, ev = apply_step(g, nxt)
            except Room25Error as e:
                e.step_index = k
                raise
            events += ev
            k += 1
            if len(program.letters(cid)) == 1:
                done_single.add(cid)
            continue
        if optional:
            continue
        if check_mandatory and has_legal(g, cid, letter):
            later = any(s.actor == cid and s.verb == letter for s in steps[k:])
            if later:
                err = OrderViolation(f"{cid}{letter} is out of seat order")
            else:
                err = SkippedMandatoryAction(f"programmed {cid}{letter} has a legal execution but was skipped")
            err.step_index = k
            raise err
    if k < len(steps):
        s = steps[k]
        err = GameOver(f"step after the game ended: {s}") if g.over else OrderViolation(f"step {s} does not fit the programming and seat order")
        err.step_index = k
        raise err
    if finish and not g.over:
        g, ev = end_turn(g)
        events += ev
    return TurnResult(g, events)


def validate_ordering(turn: Turn, program: ProgrammedTurn, g: GameState) -> Optional[RuleViolation]:
    """None when ``turn`` is a faithful execution of ``program`` from ``g``."""
    try:
        execute_turn(g, turn.steps, program, finish=False)
    except (OrderViolation, SkippedMandatoryAction) as e:
        return e
    return None


@dataclass(frozen=True)
class ReplayResult:
    state: GameState
    events: tuple[Event, ...]

    @property
    def outcome(self) -> Outcome:
        return self.state.outcome

    @property
    def won(self) -> bool:
        return self.state.outcome.status is Status.WON

    @property
    def turns_played(self) -> int:
        return self.state.turn if self.state.over else self.state.turn - 1

    def log(self) -> str:
        lines = [str(e) for e in self.events]
        lines.append(f"OUTCOME {self.outcome.status.value} turn={self.turns_played} deaths={self.state.deaths}")
        return "\n".join(lines) + "\n"


def run_script(
    board: BoardState,
    n_characters: int,
    variant: RuleVariant,
    script: Script,
    check_mandatory: bool = True,
) -> ReplayResult:
    g = GameState.initial(board, n_characters, variant)
    events: list[Event] = []
    for t in script.turns:
        if g.over:
            raise ScriptError(GameOver(f"turn {t.number} after the game ended"), t.number, None)
        if t.number != g.turn:
            raise ScriptError(OrderViolation(f"expected turn {g.turn}, script has turn {t.number}"), t.number, None)
        try:
            g, ev = execute_turn(g, t.steps, t.program, check_mandatory=check_mandatory)
        except Room25Error as e:
            raise ScriptError(e, t.number, getattr(e, "step_index", None)) from e
        events += ev
    return ReplayResult(g, tuple(events))
