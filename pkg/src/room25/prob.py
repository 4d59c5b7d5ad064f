"""Exact opening probabilities, an enumeration oracle and a Monte-Carlo estimator.

Closed forms work on :class:`CategoryCounts`, the handful of roster numbers
the formulas depend on.  :func:`enumerate_oracle` recomputes the same events
by walking every placement of tiles on the cells that matter and applying the
opening's policy cell by cell, so the two routes share no formula.
"""
from __future__ import annotations

import itertools
import os
from collections import Counter
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, replace
from fractions import Fraction
from math import perm, sqrt
from typing import Optional

import numpy as np

from .core import (
    CELLS,
    EXIT_CELLS,
    FORBIDDEN,
    FRAMES,
    START_NEIGHBOURS,
    VALID_X,
    BoardState,
    Color,
    Coord,
    DEFAULT_ROSTER,
    Room25Error,
    Roster,
    TileKind,
)

DEFAULT_SEED = 20210913
SEED_ENV = "ROOM25_SEED"


class ImpossibleCounts(Room25Error, ValueError):
    pass


@dataclass(frozen=True)
class CategoryCounts:
    valid_x: int = 9
    red: int = 9
    forbidden: int = 4
    total_nonblue: int = 23
    exit_positions: int = 12
    dark: int = 2
    control: int = 1

    def __post_init__(self):
        values = (self.valid_x, self.red, self.forbidden, self.total_nonblue, self.dark, self.control)
        if any(v < 0 for v in values):
            raise ImpossibleCounts("negative count")
        if self.total_nonblue <= 0:
            raise ImpossibleCounts("no non-blue rooms")
        if self.exit_positions < 1:
            raise ImpossibleCounts("the exit needs at least one cell")
        if self.forbidden > self.red:
            raise ImpossibleCounts("forbidden rooms are red rooms")
        if self.dark > self.valid_x:
            raise ImpossibleCounts("dark rooms are valid X rooms")
        if self.valid_x + self.red + self.control > self.total_nonblue:
            raise ImpossibleCounts("categories exceed the roster size")

    @classmethod
    def from_roster(cls, roster: Roster, exit_positions: int = 12) -> "CategoryCounts":
        return cls(
            valid_x=roster.count_where(lambda k: k in VALID_X),
            red=roster.count_where(lambda k: k.color is Color.RED),
            forbidden=roster.count_where(lambda k: k in FORBIDDEN),
            total_nonblue=roster.total,
            exit_positions=exit_positions,
            dark=roster.count(TileKind.DARK),
            control=roster.count(TileKind.CONTROL),
        )


DEFAULT_COUNTS = CategoryCounts.from_roster(DEFAULT_ROSTER)


def _draw_all(good: int, total: int, k: int) -> Fraction:
    """Chance that ``k`` draws without replacement all land in ``good``."""
    if k > total:
        raise ImpossibleCounts(f"cannot draw {k} rooms from {total}")
    return Fraction(perm(good, k), perm(total, k))


def p_v_no_valid_x(c: CategoryCounts = DEFAULT_COUNTS) -> Fraction:
    return _draw_all(c.total_nonblue - c.valid_x, c.total_nonblue, 4)


def p_v_lucky(c: CategoryCounts = DEFAULT_COUNTS) -> Fraction:
    return (1 - p_v_no_valid_x(c)) / c.exit_positions


def p_v_lucky_no_dark(c: CategoryCounts = DEFAULT_COUNTS) -> Fraction:
    return p_v_lucky(replace(c, valid_x=c.valid_x - c.dark, dark=0))


def p_v_instant_loss_bound(c: CategoryCounts = DEFAULT_COUNTS) -> Fraction:
    return _draw_all(c.red, c.total_nonblue, 4)


def p_t_lucky(c: CategoryCounts = DEFAULT_COUNTS) -> Fraction:
    return Fraction(c.control, c.total_nonblue) / c.exit_positions


def p_t_survival(c: CategoryCounts = DEFAULT_COUNTS) -> Fraction:
    t, f, e = c.total_nonblue, c.forbidden, c.exit_positions
    safe_first = Fraction(t - f, t)
    exit_there = Fraction(1, e) * safe_first
    if t == 1:
        return exit_there
    return exit_there + Fraction(e - 1, e) * safe_first * Fraction(t - 1 - f, t - 1)


def p_t_instant_loss_bound(c: CategoryCounts = DEFAULT_COUNTS) -> Fraction:
    return 1 - p_t_survival(c)


CLOSED_FORMS = {
    "v-lucky": p_v_lucky,
    "v-no-valid-x": p_v_no_valid_x,
    "v-lucky-no-dark": p_v_lucky_no_dark,
    "v-loss": p_v_instant_loss_bound,
    "t-lucky": p_t_lucky,
    "t-survival": p_t_survival,
    "t-loss": p_t_instant_loss_bound,
}


# --------------------------------------------------------------------------
# Enumeration oracle
#
# Rooms are grouped into labels that are exhaustive and disjoint; a placement
# of labels on distinct cells has weight prod(falling counts) / falling(total).

_LABELS = ("dark", "valid", "forbidden", "red", "control", "other")


def _label_counts(c: CategoryCounts) -> dict[str, int]:
    return {
        "dark": c.dark,
        "valid": c.valid_x - c.dark,
        "forbidden": c.forbidden,
        "red": c.red - c.forbidden,
        "control": c.control,
        "other": c.total_nonblue - c.valid_x - c.red - c.control,
    }


def _placements(counts: dict[str, int], k: int):
    """Yield ``(labels, weight numerator)`` over every labelled draw of ``k`` rooms."""
    for labels in itertools.product(_LABELS, repeat=k):
        left = dict(counts)
        w = 1
        for lab in labels:
            w *= left[lab]
            left[lab] -= 1
            if w == 0:
                break
        if w:
            yield labels, w


def _veloce_target(neighbour_ok) -> Optional[Coord]:
    """Board cell the fast opening walks to on turn 2, or None.

    ``neighbour_ok`` maps each start neighbour to True when it is a usable X.
    The first frame (fixed order) sending a usable neighbour to [1;0] wins.
    """
    for f in FRAMES:
        inv = f.inverse()
        if neighbour_ok[inv(Coord(1, 0))]:
            return inv(Coord(2, 1))
    return None


def enumerate_oracle(c: CategoryCounts = DEFAULT_COUNTS, event: str = "v_lucky") -> Fraction:
    """Exact probability of ``event`` by exhaustive enumeration.

    Events: ``v_lucky`` (fast opening wins on turn 2), ``v_lucky_no_dark``,
    ``v_loss`` (the X finally chosen is red: every neighbour is red),
    ``v_no_valid_x`` (no neighbour of the start is a valid X),
    ``t_lucky`` and ``t_loss_core`` (a forbidden room at [1;0] or [2;1]).
    """
    counts = _label_counts(c)
    total = c.total_nonblue
    exits = sorted(EXIT_CELLS)
    if c.exit_positions != len(exits):
        raise ImpossibleCounts("the oracle places the exit on the 12 near-corner cells")
    event = event.replace("-", "_")
    hits = Fraction(0)
    if event in ("v_lucky", "v_lucky_no_dark", "v_loss", "v_no_valid_x"):
        usable = {"valid"} if event == "v_lucky_no_dark" else {"valid", "dark"}
        denom = perm(total, 4) * len(exits)
        num = 0
        for labels, w in _placements(counts, 4):
            cell = dict(zip(START_NEIGHBOURS, labels))
            if event == "v_loss":
                if all(lab in ("forbidden", "red") for lab in labels):
                    num += w * len(exits)
                continue
            if event == "v_no_valid_x":
                if not any(lab in usable for lab in labels):
                    num += w * len(exits)
                continue
            target = _veloce_target({k: v in usable for k, v in cell.items()})
            if target is not None:
                num += w * sum(1 for e in exits if e == target)
        return Fraction(num, denom)
    if event in ("t_lucky", "t_loss_core"):
        x_cell, exit_target = Coord(1, 0), Coord(2, 1)
        for e in exits:
            slots = [x_cell] if e == exit_target else [x_cell, exit_target]
            for labels, w in _placements(counts, len(slots)):
                cell = dict(zip(slots, labels))
                if event == "t_lucky":
                    ok = e == exit_target and cell[x_cell] == "control"
                else:
                    ok = "forbidden" in labels
                if ok:
                    hits += Fraction(w, perm(total, len(slots))) / len(exits)
        return hits
    raise ValueError(f"unknown event {event!r}")


def tile_level_v_lucky(roster: Roster = DEFAULT_ROSTER) -> Fraction:
    """Slow cross-check: every ordered 4-draw of actual tiles, every exit cell."""
    tiles = roster.tiles()
    exits = sorted(EXIT_CELLS)
    decided: dict[tuple, Optional[Coord]] = {}
    num = 0
    denom = 0
    for draw in itertools.permutations(range(len(tiles)), 4):
        kinds = tuple(tiles[i] for i in draw)
        if kinds not in decided:
            decided[kinds] = _veloce_target({c: k in VALID_X for c, k in zip(START_NEIGHBOURS, kinds)})
        target = decided[kinds]
        for e in exits:
            denom += 1
            num += e == target
    return Fraction(num, denom)


# --------------------------------------------------------------------------
# Monte-Carlo


@dataclass
class Tally:
    trials: int = 0
    won: int = 0
    instant_loss: int = 0
    late_loss: int = 0
    other: int = 0

    def add(self, other: "Tally") -> "Tally":
        return Tally(*(a + b for a, b in zip(self.astuple(), other.astuple())))

    def astuple(self) -> tuple[int, ...]:
        return (self.trials, self.won, self.instant_loss, self.late_loss, self.other)

    def rate(self, name: str) -> float:
        return getattr(self, name) / self.trials if self.trials else 0.0

    def stderr(self, name: str) -> float:
        p = self.rate(name)
        return sqrt(p * (1 - p) / self.trials) if self.trials else 0.0


@dataclass(frozen=True)
class MonteCarloResult:
    opening: str
    n: int
    seed: int
    tally: Tally

    @property
    def estimate(self) -> float:
        return self.tally.rate("won")

    @property
    def standard_error(self) -> float:
        return self.tally.stderr("won")

    def summary(self) -> str:
        t = self.tally
        lines = [f"opening={self.opening} n={self.n} trials={t.trials} seed={self.seed}"]
        for name in ("won", "instant_loss", "late_loss", "other"):
            lines.append(f"{name}={getattr(t, name)} rate={t.rate(name):.6f} se={t.stderr(name):.6f}")
        return "\n".join(lines) + "\n"


BLOCK = 4096


def default_seed() -> int:
    raw = os.environ.get(SEED_ENV)
    return int(raw) if raw else DEFAULT_SEED


def sample_boards(rng: np.random.Generator, count: int, roster: Roster = DEFAULT_ROSTER) -> tuple[np.ndarray, np.ndarray]:
    """``count`` uniform setups: exit cell indices and a 25-long kind index grid each."""
    kinds = np.array([list(TileKind).index(k) for k in roster.tiles()], dtype=np.int8)
    exits = np.array([e.index for e in sorted(EXIT_CELLS)], dtype=np.int8)
    exit_pick = exits[rng.integers(0, len(exits), size=count)]
    order = np.argsort(rng.random((count, len(kinds))), axis=1)
    return exit_pick, kinds[order]


def build_board(exit_index: int, dealt: np.ndarray) -> BoardState:
    all_kinds = list(TileKind)
    grid = {}
    it = iter(dealt.tolist())
    for c in CELLS:
        if c.index == 12:
            continue
        grid[c] = TileKind.EXIT if c.index == exit_index else all_kinds[next(it)]
    return BoardState.from_grid(grid, face_up=())


def _run_block(args) -> Tally:
    from .openings import play_opening

    opening, n, seed, block, count, cache = args
    rng = np.random.default_rng(np.random.SeedSequence(entropy=seed, spawn_key=(block,)))
    exit_pick, dealt = sample_boards(rng, count)
    tally = Tally()
    memo: Optional[dict] = {} if cache else None
    for i in range(count):
        board = build_board(int(exit_pick[i]), dealt[i])
        tally = tally.add(play_opening(opening, n, board, memo))
    return tally



def monte_carlo(
    opening: str = "veloce",
    trials: int = 10_000,
    seed: Optional[int] = None,
    n: int = 6,
    jobs: int = 1,
    cache: bool = True,
) -> MonteCarloResult:
    """Play the opening on ``trials`` random setups through the engine.

    Trials are cut into fixed blocks, each with its own child seed, so results
    do not depend on ``jobs``.
    """
    if trials < 1:
        raise ValueError("trials must be positive")
    seed = default_seed() if seed is None else seed
    blocks = [(opening, n, seed, b, min(BLOCK, trials - b * BLOCK), cache) for b in range((trials + BLOCK - 1) // BLOCK)]
    total = Tally()
    if jobs > 1 and len(blocks) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            for t in pool.map(_run_block, blocks):
                total = total.add(t)
    else:
        for b in blocks:
            total = total.add(_run_block(b))
    return MonteCarloResult(opening, n, seed, total)
