"""Board geometry, tile taxonomy and the symmetry group of the 5x5 board.

Coordinates are centred: the start tile always sits at ``[0;0]`` and both
components range over ``-2..2``.  Rows are written ``[;y]`` and columns
``[x;]``.  A :class:`BoardState` keeps tiles by identity (the index of the cell
each tile occupied at setup) so the engine can follow a tile while lines are
shifted around.
"""
from __future__ import annotations

import enum
from collections import Counter
from dataclasses import dataclass, field
from typing import Iterable, Iterator, Mapping, NamedTuple, Optional

SIZE = 5
LO, HI = -2, 2


class Room25Error(Exception):
    """Base class for every error raised by this package."""


class RuleViolation(Room25Error):
    """An action or state transition that the rules do not allow."""


class CentralLineForbidden(RuleViolation):
    pass


class DirectionMismatch(RuleViolation):
    pass


class BoardFormatError(Room25Error, ValueError):
    pass


class Coord(NamedTuple):
    x: int
    y: int

    def __str__(self) -> str:
        return f"[{self.x};{self.y}]"

    @property
    def in_range(self) -> bool:
        return LO <= self.x <= HI and LO <= self.y <= HI

    @property
    def index(self) -> int:
        return (self.y - LO) * SIZE + (self.x - LO)

    def neighbours(self) -> list["Coord"]:
        out = []
        for dx, dy in ((1, 0), (0, 1), (-1, 0), (0, -1)):
            c = Coord(self.x + dx, self.y + dy)
            if c.in_range:
                out.append(c)
        return out

    def adjacent(self, other: "Coord") -> bool:
        return abs(self.x - other.x) + abs(self.y - other.y) == 1


ORIGIN = Coord(0, 0)
CELLS: tuple[Coord, ...] = tuple(Coord(i % SIZE + LO, i // SIZE + LO) for i in range(SIZE * SIZE))
START_INDEX = ORIGIN.index

# Cells where the exit may be dealt at setup: each corner and its two
# orthogonal neighbours.
EXIT_CELLS: frozenset[Coord] = frozenset(
    Coord(sx * a, sy * b)
    for sx in (1, -1)
    for sy in (1, -1)
    for a, b in ((2, 2), (1, 2), (2, 1))
)
START_NEIGHBOURS: tuple[Coord, ...] = (Coord(1, 0), Coord(0, 1), Coord(-1, 0), Coord(0, -1))


def coord_from_index(i: int) -> Coord:
    return CELLS[i]


class Axis(enum.Enum):
    ROW = "row"
    COLUMN = "column"


class Direction(enum.Enum):
    UP = "^"
    DOWN = "v"
    LEFT = "<"
    RIGHT = ">"

    @property
    def vector(self) -> tuple[int, int]:
        return _VECTORS[self]

    @property
    def axis(self) -> Axis:
        return Axis.COLUMN if self in (Direction.UP, Direction.DOWN) else Axis.ROW

    @classmethod
    def from_vector(cls, v: tuple[int, int]) -> "Direction":
        for d, w in _VECTORS.items():
            if w == v:
                return d
        raise ValueError(f"not a unit direction: {v}")


_VECTORS = {
    Direction.UP: (0, 1),
    Direction.DOWN: (0, -1),
    Direction.LEFT: (-1, 0),
    Direction.RIGHT: (1, 0),
}


class Line(NamedTuple):
    """A row ``[;index]`` or a column ``[index;]``."""

    axis: Axis
    index: int

    def __str__(self) -> str:
        return f"[;{self.index}]" if self.axis is Axis.ROW else f"[{self.index};]"

    @classmethod
    def row(cls, y: int) -> "Line":
        return cls(Axis.ROW, y)

    @classmethod
    def column(cls, x: int) -> "Line":
        return cls(Axis.COLUMN, x)

    @property
    def shiftable(self) -> bool:
        return self.index != 0

    def cells(self) -> list[Coord]:
        if self.axis is Axis.ROW:
            return [Coord(x, self.index) for x in range(LO, HI + 1)]
        return [Coord(self.index, y) for y in range(LO, HI + 1)]

    def contains(self, c: Coord) -> bool:
        return (c.y if self.axis is Axis.ROW else c.x) == self.index

    def directions(self) -> tuple[Direction, Direction]:
        if self.axis is Axis.ROW:
            return (Direction.LEFT, Direction.RIGHT)
        return (Direction.UP, Direction.DOWN)


SHIFTABLE_LINES: tuple[Line, ...] = tuple(
    Line(axis, i) for axis in (Axis.ROW, Axis.COLUMN) for i in (-2, -1, 1, 2)
)


def lines_through(c: Coord) -> list[Line]:
    """Shiftable lines containing ``c``."""
    return [ln for ln in (Line.row(c.y), Line.column(c.x)) if ln.shiftable]


def shifted(c: Coord, d: Direction) -> Coord:
    """Where a tile at ``c`` lands after a one-step cyclic shift along ``d``."""
    dx, dy = d.vector
    x = (c.x + dx - LO) % SIZE + LO
    y = (c.y + dy - LO) % SIZE + LO
    return Coord(x, y)


def leaves_board(c: Coord, d: Direction) -> bool:
    """True when a shift along ``d`` pushes the tile at ``c`` past the edge."""
    dx, dy = d.vector
    return not Coord(c.x + dx, c.y + dy).in_range


class Color(enum.Enum):
    BLUE = "blue"
    GREEN = "green"
    YELLOW = "yellow"
    RED = "red"


class TileKind(enum.Enum):
    START = "D"
    EXIT = "S"
    EMPTY = "V"
    CONTROL = "C"
    MACHINE = "E"
    DARK = "N"
    TUNNEL = "T"
    MORTAL = "M"
    VORTEX = "O"
    TRAP = "P"
    ACID = "A"
    FLOOD = "F"
    RED_OTHER = "R"
    YELLOW_OTHER = "Y"
    # Fictitious room: kills whoever enters, yet the entry still grants a
    # line shift.  Never part of a real roster; used to mutation-test the search.
    FREE_KILL = "K"

    @property
    def code(self) -> str:
        return self.value

    @property
    def color(self) -> Color:
        return _COLORS[self]

    @property
    def grants_shift(self) -> bool:
        return self in (TileKind.CONTROL, TileKind.MACHINE, TileKind.FREE_KILL)

    @classmethod
    def from_code(cls, code: str) -> Optional["TileKind"]:
        if code == "?":
            return None
        try:
            return cls(code)
        except ValueError:
            raise BoardFormatError(f"unknown tile code {code!r}") from None


_COLORS = {
    TileKind.START: Color.BLUE,
    TileKind.EXIT: Color.BLUE,
    TileKind.EMPTY: Color.GREEN,
    TileKind.CONTROL: Color.GREEN,
    TileKind.MACHINE: Color.GREEN,
    TileKind.DARK: Color.GREEN,
    TileKind.TUNNEL: Color.GREEN,
    TileKind.MORTAL: Color.RED,
    TileKind.VORTEX: Color.RED,
    TileKind.TRAP: Color.RED,
    TileKind.ACID: Color.RED,
    TileKind.FLOOD: Color.RED,
    TileKind.RED_OTHER: Color.RED,
    TileKind.YELLOW_OTHER: Color.YELLOW,
    TileKind.FREE_KILL: Color.RED,
}

# Rooms the fast opening can step through on its way to the exit.
VALID_X: frozenset[TileKind] = frozenset(
    {TileKind.EMPTY, TileKind.MACHINE, TileKind.DARK, TileKind.TUNNEL}
)
FORBIDDEN: frozenset[TileKind] = frozenset({TileKind.MORTAL, TileKind.TRAP})


def kind_code(kind: Optional[TileKind]) -> str:
    return "?" if kind is None else kind.code


# --------------------------------------------------------------------------
# Roster


@dataclass(frozen=True)
class Roster:
    """Multiset of the 23 non-blue rooms dealt at setup."""

    counts: Mapping[TileKind, int]

    def __post_init__(self):
        clean = {k: int(v) for k, v in self.counts.items() if v}
        for k, v in clean.items():
            if k.color is Color.BLUE:
                raise BoardFormatError(f"{k.name} is implied and cannot appear in a roster")
            if v < 0:
                raise BoardFormatError(f"negative count for {k.name}")
        object.__setattr__(self, "counts", dict(sorted(clean.items(), key=lambda kv: list(TileKind).index(kv[0]))))

    @property
    def total(self) -> int:
        return sum(self.counts.values())

    def count(self, kind: TileKind) -> int:
        return self.counts.get(kind, 0)

    def count_where(self, pred) -> int:
        return sum(v for k, v in self.counts.items() if pred(k))

    def tiles(self) -> list[TileKind]:
        return [k for k, v in self.counts.items() for _ in range(v)]

    def check(self, total: int = 23) -> "Roster":
        if self.total != total:
            raise BoardFormatError(f"roster holds {self.total} rooms, expected {total}")
        return self

    def replace(self, **changes: int) -> "Roster":
        counts = dict(self.counts)
        for name, v in changes.items():
            counts[TileKind[name.upper()]] = v
        return Roster(counts)

    def to_text(self) -> str:
        return "".join(f"{k.code} {v}\n" for k, v in self.counts.items())

    def __hash__(self):
        return hash(tuple(self.counts.items()))


DEFAULT_ROSTER = Roster(
    {
        TileKind.EMPTY: 4,
        TileKind.MACHINE: 1,
        TileKind.DARK: 2,
        TileKind.TUNNEL: 2,
        TileKind.CONTROL: 1,
        TileKind.MORTAL: 2,
        TileKind.TRAP: 2,
        TileKind.VORTEX: 1,
        TileKind.ACID: 1,
        TileKind.FLOOD: 1,
        TileKind.RED_OTHER: 2,
        TileKind.YELLOW_OTHER: 4,
    }
)


def parse_roster(text: str) -> Roster:
    counts: Counter = Counter()
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        if len(parts) != 2 or not parts[1].isdigit():
            raise BoardFormatError(f"line {lineno}: expected 'CODE COUNT', got {raw!r}")
        kind = TileKind.from_code(parts[0])
        if kind is None:
            raise BoardFormatError(f"line {lineno}: '?' is not a room")
        counts[kind] += int(parts[1])
    return Roster(dict(counts))


# --------------------------------------------------------------------------
# Symmetries


class Frame(NamedTuple):
    """Linear map ``(x, y) -> (a*x + b*y, c*x + d*y)`` from the dihedral group."""

    a: int
    b: int
    c: int
    d: int

    def __call__(self, p: Coord) -> Coord:
        return Coord(self.a * p.x + self.b * p.y, self.c * p.x + self.d * p.y)

    def compose(self, other: "Frame") -> "Frame":
        """``self ∘ other``: apply ``other`` first."""
        a, b, c, d = self
        e, f, g, h = other
        return Frame(a * e + b * g, a * f + b * h, c * e + d * g, c * f + d * h)

    def inverse(self) -> "Frame":
        # Orthogonal matrix: inverse is the transpose.
        return Frame(self.a, self.c, self.b, self.d)

    @property
    def name(self) -> str:
        return FRAME_NAMES[self]

    def direction(self, d: Direction) -> Direction:
        dx, dy = d.vector
        return Direction.from_vector((self.a * dx + self.b * dy, self.c * dx + self.d * dy))

    def line(self, ln: Line) -> Line:
        p = ln.cells()[0]
        q = ln.cells()[1]
        fp, fq = self(p), self(q)
        if fp.x == fq.x:
            return Line.column(fp.x)
        return Line.row(fp.y)


IDENTITY = Frame(1, 0, 0, 1)
ROT90 = Frame(0, -1, 1, 0)
MIRROR = Frame(-1, 0, 0, 1)  # reflection across the vertical axis


def _frames() -> tuple[Frame, ...]:
    rots = [IDENTITY]
    for _ in range(3):
        rots.append(ROT90.compose(rots[-1]))
    return tuple(rots + [r.compose(MIRROR) for r in rots])


FRAMES: tuple[Frame, ...] = _frames()
FRAME_NAMES: dict[Frame, str] = dict(
    zip(FRAMES, ("id", "r90", "r180", "r270", "m", "r90m", "r180m", "r270m"))
)
FRAME_BY_NAME: dict[str, Frame] = {v: k for k, v in FRAME_NAMES.items()}


def apply_frame(f: Frame, c: Coord) -> Coord:
    return f(c)


# --------------------------------------------------------------------------
# Board


class Slot(NamedTuple):
    kind: Optional[TileKind]
    face_up: bool


@dataclass(frozen=True, eq=False)
class BoardState:
    """5x5 board.

    ``cells[i]`` is the id of the tile on cell ``i``; ``kinds`` and ``face_up``
    are indexed by tile id.  A tile's id is the index of the cell it was dealt
    on, so ``cells`` starts out as the identity permutation.  ``None`` in
    ``kinds`` means the room's identity has not been fixed yet.
    """

    cells: tuple[int, ...]
    kinds: tuple[Optional[TileKind], ...]
    face_up: tuple[bool, ...]

    # -- construction -------------------------------------------------------

    @classmethod
    def from_grid(cls, grid: Mapping[Coord, Optional[TileKind]], face_up: Iterable[Coord] = ()) -> "BoardState":
        up = set(face_up) | {ORIGIN}
        kinds = tuple(grid.get(c) for c in CELLS)
        kinds = kinds[:START_INDEX] + (TileKind.START,) + kinds[START_INDEX + 1:]
        return cls(tuple(range(25)), kinds, tuple(c in up for c in CELLS))

    @classmethod
    def unknown(cls) -> "BoardState":
        return cls.from_grid({})

    @classmethod
    def from_slots(cls, slots: Mapping[Coord, Slot]) -> "BoardState":
        return cls(
            tuple(range(25)),
            tuple(slots[c].kind for c in CELLS),
            tuple(slots[c].face_up for c in CELLS),
        )

    # -- queries ------------------------------------------------------------

    def tile_at(self, c: Coord) -> int:
        return self.cells[c.index]

    def kind_at(self, c: Coord) -> Optional[TileKind]:
        return self.kinds[self.cells[c.index]]

    def is_face_up(self, c: Coord) -> bool:
        return self.face_up[self.cells[c.index]]

    def slot(self, c: Coord) -> Slot:
        t = self.cells[c.index]
        return Slot(self.kinds[t], self.face_up[t])

    def position_of(self, tile: int) -> Coord:
        return CELLS[self.cells.index(tile)]

    def find(self, kind: TileKind) -> Optional[Coord]:
        for i, t in enumerate(self.cells):
            if self.kinds[t] is kind:
                return CELLS[i]
        return None

    @property
    def fully_known(self) -> bool:
        return all(k is not None for k in self.kinds)

    def grid(self) -> tuple[Slot, ...]:
        return tuple(Slot(self.kinds[t], self.face_up[t]) for t in self.cells)

    def multiset(self) -> Counter:
        return Counter(self.kinds)

    def __eq__(self, other):
        if not isinstance(other, BoardState):
            return NotImplemented
        return self.grid() == other.grid()

    def __hash__(self):
        return hash(self.grid())

    # -- updates ------------------------------------------------------------

    def with_kind(self, tile: int, kind: Optional[TileKind]) -> "BoardState":
        kinds = list(self.kinds)
        kinds[tile] = kind
        return BoardState(self.cells, tuple(kinds), self.face_up)

    def revealed(self, tile: int) -> "BoardState":
        if self.face_up[tile]:
            return self
        up = list(self.face_up)
        up[tile] = True
        return BoardState(self.cells, self.kinds, tuple(up))

    # -- validation / io ----------------------------------------------------

    def check_setup(self) -> "BoardState":
        """Validate an initial layout: start at the origin, one exit dealt near a corner."""
        if self.kind_at(ORIGIN) is not TileKind.START:
            raise BoardFormatError("the start tile must sit at [0;0]")
        starts = [c for c in CELLS if self.kind_at(c) is TileKind.START]
        if len(starts) != 1:
            raise BoardFormatError("exactly one start tile expected")
        exits = [c for c in CELLS if self.kind_at(c) is TileKind.EXIT]
        if len(exits) > 1:
            raise BoardFormatError("more than one exit")
        if self.fully_known and not exits:
            raise BoardFormatError("fully revealed board without an exit")
        if exits and exits[0] not in EXIT_CELLS:
            raise BoardFormatError(f"exit dealt at {exits[0]}, which is not a near-corner cell")
        return self

    def to_text(self) -> str:
        rows = []
        for y in range(HI, LO - 1, -1):
            rows.append(" ".join(kind_code(self.kind_at(Coord(x, y))) for x in range(LO, HI + 1)))
        return "\n".join(rows) + "\n"

    def __str__(self) -> str:
        return self.to_text()


def parse_board(text: str) -> BoardState:
    rows = [ln.split() for ln in text.splitlines() if ln.strip() and not ln.lstrip().startswith("#")]
    if len(rows) != SIZE or any(len(r) != SIZE for r in rows):
        raise BoardFormatError("board file must hold 5 lines of 5 tile codes")
    grid = {}
    for r, row in enumerate(rows):
        y = HI - r
        for i, code in enumerate(row):
            grid[Coord(LO + i, y)] = TileKind.from_code(code)
    if grid[ORIGIN] is not TileKind.START:
        raise BoardFormatError("the start tile 'D' must be at the centre")
    return BoardState.from_grid(grid).check_setup()


def board_from_rows(rows: list[str]) -> BoardState:
    return parse_board("\n".join(rows))


def shift_line(b: BoardState, line: Line, d: Direction) -> BoardState:
    """Cyclically shift every tile of ``line`` one step along ``d``."""
    if not line.shiftable:
        raise CentralLineForbidden(f"line {line} holds the start tile and never moves")
    if d.axis is not line.axis:
        raise DirectionMismatch(f"cannot shift {line} {d.value}")
    cells = list(b.cells)
    for c in line.cells():
        cells[shifted(c, d).index] = b.cells[c.index]
    return BoardState(tuple(cells), b.kinds, b.face_up)


def transform_board(f: Frame, b: BoardState) -> BoardState:
    """The board seen through ``f``: the slot at ``c`` moves to ``f(c)``."""
    slots = {f(c): b.slot(c) for c in CELLS}
    return BoardState.from_slots(slots)


def frame_orbit(b: BoardState) -> set[BoardState]:
    return {transform_board(f, b) for f in FRAMES}


def iter_cells() -> Iterator[Coord]:
    return iter(CELLS)
