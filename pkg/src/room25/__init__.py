"""Rules engine, move notation, opening probabilities and bounded searches for
cooperative Room 25."""

from .core import DEFAULT_ROSTER, BoardState, Coord, Frame, FRAMES, TileKind, parse_board, parse_roster
from .engine import DEFAULT_VARIANT, PUSH_FROM_START, GameState, RuleVariant, apply_step, run_script
from .notation import format, parse_script, parse_step

__all__ = [
    "BoardState",
    "Coord",
    "DEFAULT_ROSTER",
    "DEFAULT_VARIANT",
    "FRAMES",
    "Frame",
    "GameState",
    "PUSH_FROM_START",
    "RuleVariant",
    "TileKind",
    "apply_step",
    "format",
    "parse_board",
    "parse_roster",
    "parse_script",
    "parse_step",
    "run_script",
]
__version__ = "0.1.0"
