"""Algebraic notation for programs, executed steps and whole scripts.

A script is a sequence of turn lines ``N: item | item | ...``.  A line whose
items are all bare letter groups (``1RD | 2DC``) is the programming of turn
``N``; any other line lists executed steps.  Lines that do not start with a
turn header continue the previous one, which lets long turns wrap.

Steps::

    1R[1;2]          look
    1D[1;2]^[2;]     move, with the control-room shift that followed
    1P2[1;2]         push character 2
    1C^[2;]          control action
    5<[;1]           bare shift, read as a control action
    ...#             trailing win marker (annotation only)

Both ASCII ``^ v < >`` and the arrows ``↑ ↓ ← →`` are accepted; output is
always ASCII.
"""
from __future__ import annotations

import re
from dataclasses import dataclass, field
from typing import Optional, Union

from .core import Axis, Coord, Direction, Line, Room25Error

VERBS = "RDPC"

ARROWS = {"↑": "^", "↓": "v", "←": "<", "→": ">", "^": "^", "v": "v", "<": "<", ">": ">"}

# Mathematical bold digits sometimes used for turn headers.
_BOLD_DIGITS = {chr(0x1D7CE + i): str(i) for i in range(10)}


class NotationError(Room25Error, ValueError):
    """Malformed notation.  ``column`` is 1-based within ``line``."""

    def __init__(self, message: str, column: int = 0, line: int = 1, text: str = ""):
        self.message = message
        self.column = column
        self.line = line
        self.text = text
        super().__init__(self.describe())

    def describe(self) -> str:
        where = f"line {self.line}, column {self.column}" if self.column else f"line {self.line}"
        return f"{where}: {self.message}"

    def relocate(self, line: int, offset: int, text: str) -> "NotationError":
        self.line = line
        self.column += offset
        self.text = text
        self.args = (self.describe(),)
        return self


class NotationSyntaxError(NotationError):
    pass


class CoordOutOfRange(NotationError):
    pass


class SelfPush(NotationError):
    pass


class DirectionAxisMismatch(NotationError):
    pass


class NonMonotoneTurnNumbers(NotationError):
    pass


@dataclass(frozen=True)
class Shift:
    line: Line
    direction: Direction

    def __str__(self) -> str:
        return f"{self.direction.value}{self.line}"


@dataclass(frozen=True)
class ActionStep:
    actor: int
    verb: str
    coord: Optional[Coord] = None
    target: Optional[int] = None
    shift: Optional[Shift] = None  # the control action's own line and direction
    rider: Optional[Shift] = None  # shift granted by a control room on entry
    win_marker: bool = False

    def __post_init__(self):
        if self.verb not in VERBS:
            raise ValueError(f"unknown verb {self.verb!r}")
        if self.verb == "C":
            if self.shift is None or self.coord is not None or self.rider is not None:
                raise ValueError("a control step carries exactly one line and direction")
        elif self.coord is None or self.shift is not None:
            raise ValueError(f"{self.verb} needs a coordinate and no line")
        if (self.target is not None) != (self.verb == "P"):
            raise ValueError("only pushes name a target character")
        if self.rider is not None and self.verb not in "DP":
            raise ValueError("riders follow moves and pushes only")
        if self.target is not None and self.target == self.actor:
            raise ValueError("a character cannot push itself")

    @property
    def line(self) -> Optional[Line]:
        return self.shift.line if self.shift else None

    @property
    def direction(self) -> Optional[Direction]:
        return self.shift.direction if self.shift else None

    def __str__(self) -> str:
        return format_step(self)


@dataclass(frozen=True)
class ProgrammedTurn:
    turn_number: int
    entries: tuple[tuple[int, str], ...]

    def letters(self, character: int) -> str:
        for c, letters in self.entries:
            if c == character:
                return letters
        return ""

    @property
    def characters(self) -> list[int]:
        return [c for c, _ in self.entries]

    def __str__(self) -> str:
        return format_program(self)


@dataclass(frozen=True)
class Turn:
    number: int
    steps: tuple[ActionStep, ...] = ()
    program: Optional[ProgrammedTurn] = None


@dataclass(frozen=True)
class Script:
    turns: tuple[Turn, ...] = ()

    def __str__(self) -> str:
        return format_script(self)

    @property
    def steps(self) -> list[ActionStep]:
        return [s for t in self.turns for s in t.steps]


# --------------------------------------------------------------------------
# Lexing helpers


class _Cursor:
    def __init__(self, text: str):
        self.text = text
        self.pos = 0

    def skip_ws(self) -> None:
        while self.pos < len(self.text) and self.text[self.pos].isspace():
            self.pos += 1

    def peek(self) -> str:
        self.skip_ws()
        return self.text[self.pos] if self.pos < len(self.text) else ""

    def at_end(self) -> bool:
        return self.peek() == ""

    def column(self) -> int:
        return self.pos + 1

    def fail(self, message: str, cls=NotationSyntaxError, at: Optional[int] = None) -> NotationError:
        return cls(message, (self.pos if at is None else at) + 1)

    def expect(self, ch: str) -> None:
        if self.peek() != ch:
            got = self.peek() or "end of input"
            raise self.fail(f"expected {ch!r}, found {got!r}")
        self.pos += 1

    def integer(self, what: str, signed: bool = False) -> int:
        self.skip_ws()
        start = self.pos
        if signed and self.pos < len(self.text) and self.text[self.pos] in "+-":
            self.pos += 1
            self.skip_ws()
        digits = self.pos
        while self.pos < len(self.text) and self.text[self.pos].isdigit():
            self.pos += 1
        if self.pos == digits:
            self.pos = start
            got = self.peek() or "end of input"
            raise self.fail(f"expected {what}, found {got!r}")
        raw = re.sub(r"\s", "", self.text[start:self.pos])
        return int(raw)

    def direction(self) -> Optional[Direction]:
        ch = self.peek()
        if ch in ARROWS:
            self.pos += 1
            return Direction(ARROWS[ch])
        return None


def _coord(cur: _Cursor) -> Coord:
    cur.skip_ws()
    start = cur.pos
    cur.expect("[")
    x = cur.integer("x coordinate", signed=True)
    cur.expect(";")
    y = cur.integer("y coordinate", signed=True)
    cur.expect("]")
    c = Coord(x, y)
    if not c.in_range:
        raise cur.fail(f"coordinate {c} lies outside the board", CoordOutOfRange, at=start)
    return c


def _line(cur: _Cursor) -> Line:
    cur.skip_ws()
    start = cur.pos
    cur.expect("[")
    if cur.peek() == ";":
        cur.pos += 1
        idx = cur.integer("row index", signed=True)
        cur.expect("]")
        ln = Line.row(idx)
    else:
        idx = cur.integer("column index", signed=True)
        cur.expect(";")
        cur.expect("]")
        ln = Line.column(idx)
    if not -2 <= idx <= 2:
        raise cur.fail(f"line {ln} lies outside the board", CoordOutOfRange, at=start)
    return ln


def _shift(cur: _Cursor, d: Direction, at: int) -> Shift:
    ln = _line(cur)
    if d.axis is not ln.axis:
        what = "row" if ln.axis is Axis.ROW else "column"
        raise cur.fail(f"cannot shift {what} {ln} {d.value}", DirectionAxisMismatch, at=at)
    return Shift(ln, d)


def _step(cur: _Cursor) -> ActionStep:
    cur.skip_ws()
    actor_at = cur.pos
    actor = cur.integer("character number")
    if actor < 1:
        raise cur.fail("characters are numbered from 1", at=actor_at)
    cur.skip_ws()
    at = cur.pos
    ch = cur.peek()
    coord = target = shift = rider = None
    if ch in ARROWS:
        verb = "C"
        d = cur.direction()
        shift = _shift(cur, d, at)
    elif ch in VERBS and ch:
        verb = ch
        cur.pos += 1
        if verb == "C":
            cur.skip_ws()
            dat = cur.pos
            d = cur.direction()
            if d is None:
                raise cur.fail("expected a direction after C")
            shift = _shift(cur, d, dat)
        else:
            if verb == "P":
                cur.skip_ws()
                tat = cur.pos
                target = cur.integer("pushed character")
                if target == actor:
                    raise cur.fail(f"character {actor} cannot push itself", SelfPush, at=tat)
            coord = _coord(cur)
            if verb in "DP":
                cur.skip_ws()
                rat = cur.pos
                d = cur.direction()
                if d is not None:
                    rider = _shift(cur, d, rat)
    else:
        raise cur.fail(f"expected one of R, D, P, C or a direction, found {ch or 'end of input'!r}")
    win = False
    if cur.peek() == "#":
        cur.pos += 1
        win = True
    return ActionStep(actor, verb, coord, target, shift, rider, win)


def parse_step(text: str) -> ActionStep:
    cur = _Cursor(text)
    step = _step(cur)
    if not cur.at_end():
        raise cur.fail(f"unexpected {cur.peek()!r} after step")
    return step


_PROGRAM_ITEM = re.compile(r"^\s*(\d+)\s*([A-Za-z]{1,2})\s*$")


def is_program(items: list[str]) -> bool:
    return bool(items) and all(_PROGRAM_ITEM.match(i) and not i.strip().endswith("#") for i in items)


def parse_program(text: str, turn_number: int = 1) -> ProgrammedTurn:
    """Parse ``1RD | 2DC`` (no header)."""
    entries = []
    offset = 0
    for item in text.split("|"):
        m = _PROGRAM_ITEM.match(item)
        if not m:
            col = offset + len(item) - len(item.lstrip()) + 1
            raise NotationSyntaxError(f"expected a character number and 1 or 2 action letters, found {item.strip()!r}", col)
        letters = m.group(2)
        for k, letter in enumerate(letters):
            if letter not in VERBS:
                raise NotationSyntaxError(f"unknown action letter {letter!r}", offset + m.start(2) + k + 1)
        entries.append((int(m.group(1)), letters))
        offset += len(item) + 1
    return ProgrammedTurn(turn_number, tuple(entries))


_HEADER = re.compile(r"^\s*(\d+)\s*:")


def _split_items(body: str) -> list[tuple[int, str]]:
    """Split on ``|`` keeping each item's offset; empty items are dropped."""
    out = []
    offset = 0
    for part in body.split("|"):
        if part.strip():
            out.append((offset, part))
        offset += len(part) + 1
    return out


def parse_script(text: str) -> Script:
    turns: list[dict] = []
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.translate(str.maketrans(_BOLD_DIGITS))
        if not line.strip() or line.lstrip().startswith("%"):
            continue
        m = _HEADER.match(line)
        if m:
            number = int(m.group(1))
            body_at = m.end()
            if number < 1:
                raise NotationSyntaxError("turn numbers start at 1", m.start(1) + 1, lineno, raw)
            if turns and number < turns[-1]["number"]:
                raise NonMonotoneTurnNumbers(
                    f"turn {number} follows turn {turns[-1]['number']}", m.start(1) + 1, lineno, raw
                )
            fresh = not turns or number > turns[-1]["number"]
        else:
            if not turns:
                raise NotationSyntaxError("expected a turn header 'N:'", 1, lineno, raw)
            number = turns[-1]["number"]
            body_at = 0
            fresh = False
        body = line[body_at:]
        items = _split_items(body)
        program_line = m is not None and is_program([i for _, i in items])
        if fresh:
            turns.append({"number": number, "steps": [], "program": None})
        cur_turn = turns[-1]
        if program_line:
            if cur_turn["program"] is not None or cur_turn["steps"]:
                raise NonMonotoneTurnNumbers(
                    f"turn {number} is already programmed", m.start(1) + 1, lineno, raw
                )
            try:
                cur_turn["program"] = parse_program(body, number)
            except NotationError as e:
                raise e.relocate(lineno, body_at, raw) from None
            continue
        if m is not None and not fresh and cur_turn["steps"]:
            raise NonMonotoneTurnNumbers(f"turn {number} already has steps", m.start(1) + 1, lineno, raw)
        for offset, item in items:
            try:
                cur_turn["steps"].append(parse_step(item))
            except NotationError as e:
                raise e.relocate(lineno, body_at + offset, raw) from None
    return Script(
        tuple(Turn(t["number"], tuple(t["steps"]), t["program"]) for t in turns)
    )


# --------------------------------------------------------------------------
# Formatting


def format_step(s: ActionStep) -> str:
    out = [str(s.actor), s.verb]
    if s.target is not None:
        out.append(str(s.target))
    if s.coord is not None:
        out.append(str(s.coord))
    if s.shift is not None:
        out.append(str(s.shift))
    if s.rider is not None:
        out.append(str(s.rider))
    if s.win_marker:
        out.append("#")
    return "".join(out)


def format_program(p: ProgrammedTurn, header: bool = True) -> str:
    body = " | ".join(f"{c}{letters}" for c, letters in p.entries)
    return f"{p.turn_number}: {body}" if header else body


def format_turn(t: Turn) -> str:
    lines = []
    if t.program is not None:
        lines.append(format_program(t.program))
    if t.steps:
        lines.append(f"{t.number}: " + " | ".join(format_step(s) for s in t.steps))
    if not lines:
        lines.append(f"{t.number}:")
    return "\n".join(lines)


def format_script(s: Script) -> str:
    return "".join(format_turn(t) + "\n" for t in s.turns)


def format(x: Union[Script, Turn, ProgrammedTurn, ActionStep]) -> str:  # noqa: A001
    if isinstance(x, Script):
        return format_script(x)
    if isinstance(x, Turn):
        return format_turn(x)
    if isinstance(x, ProgrammedTurn):
        return format_program(x)
    if isinstance(x, ActionStep):
        return format_step(x)
    raise TypeError(f"cannot format {type(x).__name__}")
