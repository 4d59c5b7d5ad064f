"""Run every bounded verification and print one report per check.

    python scripts/verify_all.py --budget 5000000
"""

import argparse
import time

from room25.adversary import (
    antagonistic_defense,
    find_win,
    free_kill_roster,
    randomized_second_mortal,
    verify_no_one_turn_win,
    verify_no_partial_one_turn_win,
)
from room25.core import parse_board
from room25.engine import PUSH_FROM_START


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--budget", type=int, default=5_000_000)
    ap.add_argument("--max-n", type=int, default=3, help="largest party for the exhaustive proofs")
    ap.add_argument("--reckless-board", default="fixtures/reckless_legal.board", help="layout seeding the six-character witness")
    args = ap.parse_args()
    b = args.budget

    checks = [(f"one-turn n={n}", lambda n=n: verify_no_one_turn_win(n, budget=b)) for n in range(1, args.max_n + 1)]
    checks += [(f"partial n={n}", lambda n=n: verify_no_partial_one_turn_win(n, budget=b)) for n in range(2, args.max_n + 1)]
    checks += [
        ("partial n=2 with a free-kill room", lambda: verify_no_partial_one_turn_win(2, roster=free_kill_roster(), budget=b)),
        ("two-turn win n=2", lambda: find_win(2, 2, budget=b)),
        (
            "one-turn win n=6 with push-from-start",
            lambda: find_win(6, 1, PUSH_FROM_START, board=parse_board(open(args.reckless_board).read()), ordered=True, budget=b),
        ),
        ("antagonistic T=3 n=1", lambda: antagonistic_defense(3, 1, budget=b)),
        ("antagonistic T=2 n=2", lambda: antagonistic_defense(2, 2, budget=b)),
        ("randomized second mortal T=2", lambda: randomized_second_mortal(2, budget=b)),
    ]
    for label, run in checks:
        start = time.perf_counter()
        report = run()
        print(f"== {label} ({time.perf_counter() - start:.1f}s)")
        print(report.summary(), flush=True)


if __name__ == "__main__":
    main()
