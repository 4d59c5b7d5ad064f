"""Bounded exhaustive searches over play lines.

Three quantifiers over unknown rooms share one move generator:

* angelic: each room gets, at the moment someone enters it, whichever
  identity suits the players best (used to show that no win exists);
* demonic: a fixed adversary picks identities at first reveal (used to show
  that the players cannot get away from the start without a death);
* randomized: one identity is drawn uniformly among a set of cells, and the
  players minimise their chance of losing.

Player moves are relaxed: at each slot of the two passes a character may act
with any verb it has not used this turn, or do nothing.  This is a superset of
every legal programming and execution order, so "no win" and "forced loss"
verdicts carry over to the real rules, and any win found is replayed through
:func:`~room25.engine.run_script` before it is reported.
"""
from __future__ import annotations

import enum
from collections import Counter
from dataclasses import dataclass, field, replace
from fractions import Fraction
from typing import Callable, Optional

from .core import (
    CELLS,
    EXIT_CELLS,
    FRAMES,
    ORIGIN,
    START_INDEX,
    START_NEIGHBOURS,
    BoardState,
    Coord,
    DEFAULT_ROSTER,
    Room25Error,
    Roster,
    TileKind,
    lines_through,
)
from .engine import (
    DEFAULT_VARIANT,
    GameState,
    RuleVariant,
    Status,
    apply_step,
    end_turn,
    run_script,
    seat_order,
    shift_options,
)
from .notation import ActionStep, ProgrammedTurn, Script, Turn

EXIT_TILES = frozenset(c.index for c in EXIT_CELLS)


class HorizonTooLarge(Room25Error):
    """The node budget ran out before the search finished."""


class Verdict(enum.Enum):
    NO_WIN = "NoWin"
    WIN_FOUND = "WinFound"
    FORCED_LOSS = "ForcedLoss"
    ESCAPE_FOUND = "EscapeFound"


@dataclass
class SearchReport:
    horizon: int
    n_characters: int
    variant: RuleVariant
    verdict: Verdict
    certificate: Optional[Script] = None
    board: Optional[BoardState] = None  # completed layout the certificate replays on
    nodes: int = 0
    pi_trace: Optional[frozenset[int]] = None
    lines: int = 0
    value: Optional[Fraction] = None
    detail: str = ""

    def summary(self) -> str:
        out = [
            f"verdict={self.verdict.value} horizon={self.horizon} n={self.n_characters} "
            f"variant={self.variant.label} nodes={self.nodes}"
        ]
        if self.lines:
            out.append(f"lines={self.lines}")
        if self.value is not None:
            out.append(f"min_loss={self.value} ~ {float(self.value):.6f}")
        if self.pi_trace is not None:
            out.append("pi=" + ",".join(map(str, sorted(self.pi_trace))))
        if self.detail:
            out.append(self.detail)
        text = "\n".join(out) + "\n"
        if self.certificate is not None:
            text += str(self.certificate)
        if self.board is not None:
            text += "board:\n" + self.board.to_text()
        return text


# --------------------------------------------------------------------------
# Effect classes for angelic assignment.  Rooms inside a class behave the
# same under the engine, so one representative per class is enough.

EFFECT_CLASSES: tuple[tuple[TileKind, ...], ...] = (
    (TileKind.EXIT,),
    (TileKind.EMPTY, TileKind.TUNNEL, TileKind.YELLOW_OTHER),
    (TileKind.DARK,),
    (TileKind.CONTROL,),
    (TileKind.MACHINE,),
    (TileKind.TRAP,),
    (TileKind.FREE_KILL,),
    (TileKind.VORTEX,),
    (TileKind.ACID,),
    (TileKind.FLOOD,),
    (TileKind.MORTAL, TileKind.RED_OTHER),
)
# Classes that can matter for a win without deaths inside one turn.  Searching
# only these is a witness heuristic: any win found is still replayed in full.
HELPFUL_CLASSES = (
    (TileKind.EXIT,),
    (TileKind.CONTROL,),
    (TileKind.MACHINE,),
    (TileKind.EMPTY, TileKind.TUNNEL, TileKind.YELLOW_OTHER),
    (TileKind.DARK,),
)
# One exit cell per symmetry orbit of the twelve exit cells.
EXIT_ORBIT_REPRESENTATIVES = (Coord(2, 1), Coord(2, 2))


def remaining_pool(board: BoardState, roster: Roster) -> Counter:
    pool = Counter(roster.counts)
    pool[TileKind.EXIT] += 1
    for k in board.kinds:
        if k is not None and k is not TileKind.START:
            pool[k] -= 1
    return pool


def exit_placed(board: BoardState) -> bool:
    return TileKind.EXIT in board.kinds


def assignable(board: BoardState, roster: Roster, tile: int, classes=EFFECT_CLASSES) -> list[TileKind]:
    """Identities ``tile`` may still take, one per effect class."""
    pool = remaining_pool(board, roster)
    eligible = tile in EXIT_TILES
    placed = exit_placed(board)
    spare_eligible = sum(1 for t in EXIT_TILES if t != tile and board.kinds[t] is None)
    out = []
    for cls in classes:
        if cls[0] is TileKind.EXIT:
            if eligible and not placed:
                out.append(TileKind.EXIT)
            continue
        if not placed and eligible and spare_eligible == 0:
            continue  # the exit must still fit somewhere
        best = max(cls, key=lambda k: pool[k])
        if pool[best] > 0:
            out.append(best)
    return out


def complete_board(board: BoardState, roster: Roster) -> BoardState:
    """Fill unassigned rooms so the layout is a legal setup."""
    pool = remaining_pool(board, roster)
    kinds = list(board.kinds)
    if pool[TileKind.EXIT]:
        for t in sorted(EXIT_TILES):
            if kinds[t] is None:
                kinds[t] = TileKind.EXIT
                break
        pool[TileKind.EXIT] -= 1
    rest = [k for k, v in pool.items() for _ in range(v) if v > 0]
    for t in range(25):
        if kinds[t] is None:
            kinds[t] = rest.pop()
    return BoardState(tuple(range(25)), tuple(kinds), tuple(t == START_INDEX for t in range(25)))


# --------------------------------------------------------------------------
# State keys


def _entry_ranks(g: GameState) -> tuple:
    order = sorted((ch.entered, ch.id) for ch in g.chars if ch.alive)
    rank = {cid: i for i, (_, cid) in enumerate(order)}
    return tuple(rank.get(ch.id, -1) for ch in g.chars)


def state_key(g: GameState, slot: int, extra=(), canonical: bool = True) -> tuple:
    """Hashable summary of everything that matters for the rest of the search.

    With ``canonical`` the key is the least image over the eight symmetries.
    """
    b = g.board
    cells = []
    for i in range(25):
        t = b.cells[i]
        k = b.kinds[t]
        cells.append((k.code if k else ("?e" if t in EXIT_TILES else "?"), b.face_up[t]))
    ranks = _entry_ranks(g)
    flood_pos = [None if ch.flood_tile is None else b.position_of(ch.flood_tile) for ch in g.chars]
    base = (g.turn, slot, g.deaths, g.outcome.status.value, extra)
    frames = FRAMES if canonical else FRAMES[:1]
    best = None
    for f in frames:
        grid = [None] * 25
        for i, c in enumerate(CELLS):
            grid[f(c).index] = cells[i]
        chars = tuple(
            (
                None if ch.pos is None else f(ch.pos),
                ch.alive,
                ch.trap_tile is not None,
                ch.flood_deadline,
                None if flood_pos[j] is None else f(flood_pos[j]),
                ch.verbs,
                ranks[j],
            )
            for j, ch in enumerate(g.chars)
        )
        locks = tuple(sorted((str(f.line(ln)), f.direction(d).value) for ln, d in g.locks))
        key = (tuple(grid), chars, locks)
        if best is None or key < best:
            best = key
    return base + best


# --------------------------------------------------------------------------
# Move generation


def slot_character(g: GameState, slot: int) -> Optional[int]:
    """Character acting at ``slot`` (pass = slot // n) or None if it is dead."""
    n = g.n
    start = (g.turn - 1 + g.first_player_offset) % n
    cid = (start + slot % n) % n + 1
    return cid if g.chars[cid - 1].alive else None


Assign = Callable[[GameState, int, str], list[tuple[GameState, Fraction]]]


def _with_riders(g: GameState, step: ActionStep, kind: TileKind) -> list[ActionStep]:
    if not kind.grants_shift:
        return [step]
    return [replace(step, rider=r) for r in shift_options(g)]


def player_moves(g: GameState, cid: int, assign: Assign, all_looks: bool) -> list[tuple[GameState, ActionStep, Fraction]]:
    """``(state with any new identities fixed, step, probability)`` for ``cid``.

    ``assign(g, tile, how)`` returns the identity choices for an unknown tile
    as ``(state, weight)`` pairs.
    """
    ch = g.chars[cid - 1]
    here = ch.pos
    b = g.board
    here_kind = b.kind_at(here)
    out = []
    if ch.actions_taken >= 2:
        return out
    # With angelic identities a look only turns a room face up, which no later
    # rule reads; what remains is its side effect as an own action, springing
    # a pending trap.  One representative look covers that.
    if "R" not in ch.verbs and here_kind is not TileKind.DARK and (all_looks or ch.trap_tile is not None):
        targets = [c for c in here.neighbours() if not b.is_face_up(c)]
        if not all_looks:
            targets = targets[:1]
        for c in targets:
            t = b.tile_at(c)
            step = ActionStep(cid, "R", c)
            if b.kinds[t] is None and all_looks:
                for g2, p in assign(g, t, "look"):
                    out.append((g2, step, p))
            else:
                out.append((g, step, Fraction(1)))
    entries = []
    if "P" not in ch.verbs:
        push_ok = not (
            (here_kind is TileKind.START and not g.variant.push_from_start_allowed)
            or (here_kind is TileKind.CONTROL and not g.variant.push_from_control_allowed)
        )
        if push_ok:
            for o in g.chars:
                if o.alive and o.id != cid and o.pos == here:
                    entries += [(o.id, c) for c in here.neighbours()]
    if "D" not in ch.verbs:
        entries += [(None, c) for c in here.neighbours()]
    for target, c in entries:
        t = b.tile_at(c)
        verb = "D" if target is None else "P"
        base = ActionStep(cid, verb, c, target)
        if b.kinds[t] is None:
            options = assign(g, t, "enter")
        else:
            options = [(g, Fraction(1))]
        for g2, p in options:
            for step in _with_riders(g2, base, g2.board.kinds[t]):
                out.append((g2, step, p))
    if "C" not in ch.verbs:
        for sh in shift_options(g, lines_through(here)):
            out.append((g, ActionStep(cid, "C", shift=sh), Fraction(1)))
    return out


# --------------------------------------------------------------------------
# Angelic search


@dataclass
class _Budget:
    limit: Optional[int]
    nodes: int = 0

    def tick(self) -> None:
        self.nodes += 1
        if self.limit is not None and self.nodes > self.limit:
            raise HorizonTooLarge(f"node budget of {self.limit} exhausted")


def _slots_left(g: GameState, slot: int, cid: int) -> int:
    """Slots at or after ``slot`` in this turn where ``cid`` may still act."""
    n = g.n
    start = (g.turn - 1 + g.first_player_offset) % n
    seat = (cid - 1 - start) % n
    return sum(1 for p in (0, 1) if p * n + seat >= slot)


def torus_distance(a: Coord, b: Coord) -> int:
    """Manhattan distance with wrap-around; one step or one line shift changes it by at most 1."""
    dx, dy = abs(a.x - b.x), abs(a.y - b.y)
    return min(dx, 5 - dx) + min(dy, 5 - dy)


def _exit_candidates(g: GameState) -> list[Coord]:
    b = g.board
    for t, k in enumerate(b.kinds):
        if k is TileKind.EXIT:
            return [b.position_of(t)]
    return [b.position_of(t) for t in EXIT_TILES if b.kinds[t] is None]


def _gap(pos: Coord, exit_at: Coord) -> int:
    # A vortex sends its entrant to the start for the price of one entry.
    return min(torus_distance(pos, exit_at), 1 + torus_distance(ORIGIN, exit_at))


def progress_score(g: GameState) -> int:
    """Total distance still to cover to the best exit candidate (lower is closer)."""
    cands = _exit_candidates(g)
    if not cands:
        return 0
    living = g.living()
    return min(sum(_gap(ch.pos, e) for ch in living) for e in cands)


def _can_still_win(g: GameState, slot: int, horizon: int) -> bool:
    """Cheap necessary condition for a win before the horizon.

    Every survivor must arrive on the exit, each arrival costing a D or a P,
    and one more shift (a C, or a rider on an entry) must follow.  In the last
    turn each action closes the wrap-around distance between a character and
    the exit by at most one, or two for the character's own entry with a rider.
    """
    exit_tile = None
    for t, k in enumerate(g.board.kinds):
        if k is TileKind.EXIT:
            exit_tile = t
    future = horizon - g.turn
    spare = g.variant.tolerated_deaths - g.deaths
    need = 0
    cap = entry_cap = 0
    shift_possible = future > 0
    actions = 0
    own_entry: dict[int, int] = {}
    pushers = 0
    for ch in g.chars:
        if not ch.alive:
            continue
        if exit_tile is None or g.board.tile_at(ch.pos) != exit_tile:
            need += 1
        left = min(_slots_left(g, slot, ch.id), 2 - ch.actions_taken)
        usable = set("DPC") - set(ch.verbs)
        cap += left + 2 * future
        entry_cap += min(left, len({"D", "P"} & usable)) + 2 * future
        if left and usable:
            shift_possible = True
        actions += min(left, len(usable))
        own_entry[ch.id] = 1 if left and "D" in usable else 0
        if left and "P" in usable:
            pushers += 1
    need -= spare
    if not (shift_possible and entry_cap >= need and cap >= need + 1):
        return False
    if future > 0:
        return True
    cands = _exit_candidates(g)
    if not cands:
        return False
    for e in cands:
        shortfall = sorted(
            (_gap(ch.pos, e) - actions - own_entry[ch.id] - pushers for ch in g.living()),
            reverse=True,
        )
        if all(x <= 0 for x in shortfall[max(spare, 0):]):
            return True
    return False


class AngelicSearch:
    def __init__(
        self,
        n: int,
        horizon: int = 1,
        variant: RuleVariant = DEFAULT_VARIANT,
        roster: Roster = DEFAULT_ROSTER,
        budget: Optional[int] = None,
        memo: bool = True,
        canonical: bool = True,
        prune: bool = True,
        board: Optional[BoardState] = None,
        ordered: bool = False,
        classes=EFFECT_CLASSES,
        split_exit: bool = False,
    ):
        self.n = n
        self.split_exit = split_exit
        self.ordered = ordered
        self.classes = classes
        self.horizon = horizon
        self.variant = variant
        self.roster = roster
        self.budget = _Budget(budget)
        self.memo: Optional[set] = set() if memo else None
        self.canonical = canonical
        self.prune = prune
        self.board = board or BoardState.unknown()

    def assign(self, g: GameState, tile: int, how: str):
        if how == "look":
            return [(g, Fraction(1))]
        kinds = assignable(g.board, self.roster, tile, self.classes)
        return [(replace(g, board=g.board.with_kind(tile, k)), Fraction(1)) for k in kinds]

    def _starts(self) -> list[BoardState]:
        """Case split on where the exit was dealt when nothing is known yet.

        The search is symmetric, so one exit cell per orbit covers all twelve.
        """
        b = self.board
        if not self.split_exit or b != BoardState.unknown():
            return [b]
        return [b.with_kind(b.tile_at(e), TileKind.EXIT) for e in EXIT_ORBIT_REPRESENTATIVES]

    def run(self) -> SearchReport:
        line: list[tuple[int, ActionStep]] = []
        found = None
        for board in self._starts():
            found = self._dfs(GameState.initial(board, self.n, self.variant), 0, line)
            if found is not None:
                break
        report = SearchReport(self.horizon, self.n, self.variant, Verdict.NO_WIN, nodes=self.budget.nodes)
        if found is not None:
            final, steps = found
            report.verdict = Verdict.WIN_FOUND
            report.board = complete_board(final.board, self.roster)
            report.certificate = certificate_script(steps)
            replay = run_script(report.board, self.n, self.variant, report.certificate)
            if not replay.won:
                raise AssertionError(f"certificate does not replay: {replay.outcome}")
            report.pi_trace = pi_set(report.board, self.n, report.certificate)
        return report

    def _dfs(self, g: GameState, slot: int, line: list):
        self.budget.tick()
        if g.outcome.status is Status.WON:
            return g, list(line)
        if g.over:
            return None
        if slot == 2 * g.n:
            if g.turn >= self.horizon:
                return None
            g2, _ = end_turn(g)
            return self._dfs(g2, 0, line)
        if self.prune and not _can_still_win(g, slot, self.horizon):
            return None
        key = None
        if self.memo is not None:
            key = state_key(g, slot, canonical=self.canonical)
            if key in self.memo:
                return None
        cid = slot_character(g, slot)
        children = []
        if cid is not None:
            children = [(step, apply_step(g2, step)[0]) for g2, step, _ in player_moves(g, cid, self.assign, all_looks=False)]
        children.append((None, g))
        if self.ordered:
            # Closest to the exit first; only changes which win is found.
            children.sort(key=lambda c: (c[1].outcome.status is not Status.WON, progress_score(c[1])))
        for step, g3 in children:
            if step is not None:
                line.append((g.turn, step))
            found = self._dfs(g3, slot + 1, line)
            if step is not None:
                line.pop()
            if found is not None:
                return found
        if key is not None:
            self.memo.add(key)
        return None


def certificate_script(steps: list[tuple[int, ActionStep]]) -> Script:
    turns: dict[int, list[ActionStep]] = {}
    for t, s in steps:
        turns.setdefault(t, []).append(s)
    if steps:
        t, last = steps[-1]
        turns[t][-1] = replace(last, win_marker=True)
    out = []
    for t in sorted(turns):
        letters: dict[int, str] = {}
        for s in turns[t]:
            letters[s.actor] = letters.get(s.actor, "") + s.verb
        prog = ProgrammedTurn(t, tuple(sorted(letters.items())))
        out.append(Turn(t, tuple(turns[t]), prog))
    return Script(tuple(out))


def pi_set(board: BoardState, n: int, script: Script, variant: RuleVariant = None) -> frozenset[int]:
    """Characters that stood on a non-blue room at some point of the replay."""
    from .core import Color

    variant = variant or RuleVariant(push_from_start_allowed=True, push_from_control_allowed=True, tolerated_deaths=n)
    g = GameState.initial(board, n, variant)
    pi = set()
    for t in script.turns:
        for s in t.steps:
            g, _ = apply_step(g, s)
            for ch in g.chars:
                if ch.alive and g.board.kind_at(ch.pos).color is not Color.BLUE:
                    pi.add(ch.id)
        if not g.over:
            g, _ = end_turn(g)
    return frozenset(pi)


def _entries_into_exit(board: BoardState, n: int, script: Script, variant: RuleVariant):
    """``(character, verb)`` for each arrival on the exit room, in order."""
    g = GameState.initial(board, n, variant)
    arrivals = []
    for t in script.turns:
        for s in t.steps:
            before = {ch.id: ch.pos for ch in g.chars}
            g, events = apply_step(g, s)
            for e in events:
                if e.kind in ("MOVE", "PUSH") and g.board.kind_at(e.data[2]) is TileKind.EXIT:
                    arrivals.append((e.data[0], s.verb))
        if not g.over:
            g, _ = end_turn(g)
    return arrivals


def last_arrival_walks(board: BoardState, n: int, script: Script, variant: RuleVariant) -> bool:
    """The last member of the non-blue set to reach the exit walked in (D)."""
    pi = pi_set(board, n, script, variant)
    if not pi:
        return True
    arrivals = [(c, v) for c, v in _entries_into_exit(board, n, script, variant) if c in pi]
    return bool(arrivals) and arrivals[-1][1] == "D"


def someone_walks_twice(board: BoardState, n: int, script: Script, variant: RuleVariant) -> bool:
    """Some member of the non-blue set used D at least twice."""
    pi = pi_set(board, n, script, variant)
    if not pi:
        return True
    moves = Counter(s.actor for s in script.steps if s.verb == "D")
    return any(moves[c] >= 2 for c in pi)


def verify_no_one_turn_win(n: int, variant: RuleVariant = DEFAULT_VARIANT, roster: Roster = DEFAULT_ROSTER, budget: Optional[int] = None, **kw) -> SearchReport:
    return AngelicSearch(n, 1, variant, roster, budget, **kw).run()


def verify_no_partial_one_turn_win(n: int, roster: Roster = DEFAULT_ROSTER, budget: Optional[int] = None, **kw) -> SearchReport:
    variant = RuleVariant(tolerated_deaths=1)
    return AngelicSearch(n, 1, variant, roster, budget, **kw).run()


def find_win(n: int, horizon: int, variant: RuleVariant = DEFAULT_VARIANT, roster: Roster = DEFAULT_ROSTER, budget: Optional[int] = None, **kw) -> SearchReport:
    return AngelicSearch(n, horizon, variant, roster, budget, **kw).run()


def free_kill_roster(roster: Roster = DEFAULT_ROSTER) -> Roster:
    """``roster`` with one empty room swapped for the fictitious free-kill room."""
    counts = dict(roster.counts)
    counts[TileKind.EMPTY] -= 1
    counts[TileKind.FREE_KILL] = counts.get(TileKind.FREE_KILL, 0) + 1
    return Roster(counts)


# --------------------------------------------------------------------------
# Antagonistic context

# Identities handed out for the first four reveals next to the start.
ADVERSARY_RING = (TileKind.MORTAL, TileKind.VORTEX, TileKind.TRAP, TileKind.TRAP)
# Harmless identities for anything else, most benign first.
_BENIGN = (
    TileKind.YELLOW_OTHER,
    TileKind.DARK,
    TileKind.EMPTY,
    TileKind.TUNNEL,
    TileKind.MACHINE,
    TileKind.CONTROL,
    TileKind.FLOOD,
    TileKind.ACID,
    TileKind.RED_OTHER,
    TileKind.VORTEX,
    TileKind.TRAP,
    TileKind.MORTAL,
    TileKind.EXIT,
)


class Adversary:
    """The online strategy: the rooms dealt next to the start become Mortal,
    Vortex, Trap, Trap in order of first reveal, and the first room entered
    blind beyond them is the second Mortal."""

    def __init__(self, roster: Roster = DEFAULT_ROSTER):
        self.roster = roster
        self.ring = _ring_tiles()

    def choose(self, g: GameState, tile: int, how: str) -> TileKind:
        b = g.board
        pool = remaining_pool(b, self.roster)
        if tile in self.ring:
            used = sum(1 for t in self.ring if b.kinds[t] is not None)
            return ADVERSARY_RING[used]
        if how == "enter" and pool[TileKind.MORTAL] > 0:
            return TileKind.MORTAL
        must_exit = (
            not exit_placed(b)
            and tile in EXIT_TILES
            and not any(b.kinds[t] is None for t in EXIT_TILES if t != tile)
        )
        if must_exit:
            return TileKind.EXIT
        for k in _BENIGN:
            if k is not TileKind.EXIT and pool[k] > 0:
                return k
        return TileKind.EXIT


def _ring_tiles() -> frozenset[int]:
    return frozenset(c.index for c in START_NEIGHBOURS)


class DemonicSearch:
    """Looks for a line that escapes the ring without a death (or wins)."""

    def __init__(
        self,
        n: int,
        horizon: int,
        variant: RuleVariant = DEFAULT_VARIANT,
        roster: Roster = DEFAULT_ROSTER,
        budget: Optional[int] = None,
        memo: bool = True,
    ):
        self.n = n
        self.horizon = horizon
        self.variant = variant
        self.adversary = Adversary(roster)
        self.budget = _Budget(budget)
        self.memo: Optional[set] = set() if memo else None
        self.lines = 0
        self.inner = frozenset({START_INDEX}) | _ring_tiles()

    def assign(self, g: GameState, tile: int, how: str):
        k = self.adversary.choose(g, tile, how)
        return [(replace(g, board=g.board.with_kind(tile, k)), Fraction(1))]

    def _escaped(self, g: GameState) -> bool:
        return any(ch.alive and g.board.tile_at(ch.pos) not in self.inner for ch in g.chars)

    def run(self) -> SearchReport:
        g = GameState.initial(BoardState.unknown(), self.n, self.variant)
        line: list = []
        found = self._dfs(g, 0, False, line)
        report = SearchReport(self.horizon, self.n, self.variant, Verdict.FORCED_LOSS, nodes=self.budget.nodes, lines=self.lines)
        if found is not None:
            report.verdict = Verdict.ESCAPE_FOUND
            report.certificate = certificate_script(found)
        return report

    def _dfs(self, g: GameState, slot: int, escaped: bool, line: list):
        self.budget.tick()
        escaped = escaped or self._escaped(g)
        if g.outcome.status is Status.WON:
            return list(line)
        if g.over:
            self.lines += 1
            return None
        if slot == 2 * g.n:
            g, _ = end_turn(g)
            if g.over:
                self.lines += 1
                return None
            if g.turn > self.horizon:
                self.lines += 1
                return list(line) if escaped else None
            slot = 0
        key = None
        if self.memo is not None:
            key = state_key(g, slot, extra=(escaped,), canonical=False)
            if key in self.memo:
                return None
        cid = slot_character(g, slot)
        if cid is not None:
            for g2, step, _ in player_moves(g, cid, self.assign, all_looks=True):
                g3, _ = apply_step(g2, step)
                line.append((g.turn, step))
                found = self._dfs(g3, slot + 1, escaped, line)
                line.pop()
                if found is not None:
                    return found
        found = self._dfs(g, slot + 1, escaped, line)
        if found is None and key is not None:
            self.memo.add(key)
        return found


def antagonistic_defense(horizon: int, n: int, variant: RuleVariant = DEFAULT_VARIANT, budget: Optional[int] = None, **kw) -> SearchReport:
    return DemonicSearch(n, horizon, variant, budget=budget, **kw).run()


# --------------------------------------------------------------------------
# Randomized second Mortal

RING_LAYOUT = {
    Coord(1, 0): TileKind.MORTAL,
    Coord(0, 1): TileKind.VORTEX,
    Coord(-1, 0): TileKind.TRAP,
    Coord(0, -1): TileKind.TRAP,
}
# Cells one blind step beyond a trap: where the second Mortal may be hidden.
GRAY_CELLS = (Coord(-2, 0), Coord(-1, -1), Coord(0, -2), Coord(-1, 1), Coord(1, -1))


def ring_board() -> BoardState:
    return BoardState.from_grid(dict(RING_LAYOUT))


class RandomizedSearch:
    """Minimum, over player strategies, of the probability of losing.

    A loss is a death, or still having nobody beyond the ring at the horizon.
    The second Mortal lies under one of the gray cells, uniformly; revealing a
    gray cell (look or entry) is a chance node.  Every other unknown room is
    empty.
    """

    def __init__(self, n: int, horizon: int, variant: RuleVariant = DEFAULT_VARIANT, budget: Optional[int] = None):
        self.n = n
        self.horizon = horizon
        self.variant = variant
        self.budget = _Budget(budget)
        self.memo: dict = {}
        self.gray = frozenset(c.index for c in GRAY_CELLS)
        self.inner = frozenset({START_INDEX}) | _ring_tiles()

    def assign(self, g: GameState, tile: int, how: str):
        b = g.board
        if tile not in self.gray:
            return [(replace(g, board=b.with_kind(tile, TileKind.EMPTY)), Fraction(1))]
        placed = any(b.kinds[t] is TileKind.MORTAL for t in self.gray)
        hidden = [t for t in self.gray if b.kinds[t] is None]
        if placed:
            return [(replace(g, board=b.with_kind(tile, TileKind.EMPTY)), Fraction(1))]
        p = Fraction(1, len(hidden))
        out = [(replace(g, board=b.with_kind(tile, TileKind.MORTAL)), p)]
        if len(hidden) > 1:
            out.append((replace(g, board=b.with_kind(tile, TileKind.EMPTY)), 1 - p))
        return out

    def _escaped(self, g: GameState) -> bool:
        return any(ch.alive and g.board.tile_at(ch.pos) not in self.inner for ch in g.chars)

    def run(self) -> SearchReport:
        g = GameState.initial(ring_board(), self.n, self.variant)
        value = self._value(g, 0, False)
        return SearchReport(self.horizon, self.n, self.variant, Verdict.FORCED_LOSS if value > 0 else Verdict.ESCAPE_FOUND, nodes=self.budget.nodes, value=value)

    def _value(self, g: GameState, slot: int, escaped: bool) -> Fraction:
        self.budget.tick()
        escaped = escaped or self._escaped(g)
        if g.over:
            return Fraction(1) if g.outcome.status is Status.LOST else Fraction(0)
        if slot == 2 * g.n:
            g, _ = end_turn(g)
            if g.over:
                return Fraction(1)
            if g.turn > self.horizon:
                return Fraction(0) if escaped else Fraction(1)
            slot = 0
        key = state_key(g, slot, extra=(escaped,), canonical=False)
        if key in self.memo:
            return self.memo[key]
        best = self._value(g, slot + 1, escaped)
        cid = slot_character(g, slot)
        if cid is not None and best > 0:
            # Group the chance outcomes of each player choice.
            groups: dict = {}
            for g2, step, p in player_moves(g, cid, self.assign, all_looks=True):
                groups.setdefault(step, []).append((g2, p))
            for step, outcomes in groups.items():
                v = Fraction(0)
                for g2, p in outcomes:
                    g3, _ = apply_step(g2, step)
                    v += p * self._value(g3, slot + 1, escaped)
                best = min(best, v)
        self.memo[key] = best
        return best


def randomized_second_mortal(horizon: int = 2, n: int = 1, budget: Optional[int] = None) -> SearchReport:
    return RandomizedSearch(n, horizon, budget=budget).run()
