"""Run the law suite over several seeds and print one table per seed."""

import argparse
import time

from refstore.laws import format_table, run_laws


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--cases", type=int, default=100)
    ap.add_argument("--seeds", type=int, nargs="+", default=[0, 1, 2])
    ap.add_argument("--rule", action="append")
    args = ap.parse_args()
    for seed in args.seeds:
        t0 = time.perf_counter()
        results = run_laws(args.cases, seed, args.rule)
        print(f"seed {seed} ({time.perf_counter() - t0:.1f}s)")
        print(format_table(results))
        print()


if __name__ == "__main__":
    main()
