"""Estimate the opening win rates and compare them with the exact fractions.

    python scripts/run_monte_carlo.py --trials 1000000 --seed 20210913
"""

import argparse
import time
from fractions import Fraction

from room25.prob import DEFAULT_SEED, monte_carlo, p_t_lucky, p_v_instant_loss_bound, p_v_lucky


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--trials", type=int, default=1_000_000)
    ap.add_argument("--seed", type=int, default=DEFAULT_SEED)
    ap.add_argument("--jobs", type=int, default=1)
    args = ap.parse_args()

    for opening, n, exact in (("veloce", 6, p_v_lucky()), ("temeraire", 6, p_t_lucky())):
        start = time.perf_counter()
        res = monte_carlo(opening, args.trials, seed=args.seed, n=n, jobs=args.jobs)
        took = time.perf_counter() - start
        z = (res.estimate - float(exact)) / (float(exact) * (1 - float(exact)) / res.tally.trials) ** 0.5
        print(res.summary(), end="")
        print(f"exact={exact} ~ {float(exact):.6f} z={z:+.2f} time={took:.1f}s")
        if opening == "temeraire":
            # The fraction counts a control room at [1;0]; a machine there wins too.
            print("note: the engine rate is higher because a machine room also grants the shift")
        print()
    bound: Fraction = p_v_instant_loss_bound()
    print(f"fast opening instant-loss bound={bound} ~ {float(bound):.6f}")


if __name__ == "__main__":
    main()
