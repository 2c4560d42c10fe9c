"""Stress canonicalization against brute-force bijection search.

Pairs are a config and a renamed copy, a renamed mutant, or an independent
config.  Any disagreement is printed with both heaps.
"""

import argparse
import random
from collections import Counter

from refstore.gen import gen_config, mutate_config, permute_config
from refstore.store import bijection_equiv, canonicalize, dump_config


def main() -> int:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--cases", type=int, default=5000)
    ap.add_argument("--max-locations", type=int, default=6)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()
    rng = random.Random(args.seed)
    tally: Counter = Counter()
    for i in range(args.cases):
        c1 = gen_config(rng, args.max_locations)
        kind = ("renamed", "mutant", "independent")[i % 3]
        c2 = {"renamed": lambda: permute_config(rng, c1),
              "mutant": lambda: permute_config(rng, mutate_config(rng, c1)),
              "independent": lambda: gen_config(rng, args.max_locations)}[kind]()
        fast = canonicalize(c1).key() == canonicalize(c2).key()
        slow = bijection_equiv(c1, c2)
        tally[kind, slow, fast] += 1
        if fast != slow:
            print(f"disagreement on case {i} ({kind}): canonical={fast} bijection={slow}")
            print(dump_config(c1), dump_config(c2), sep="\n---\n")
    for (kind, slow, fast), n in sorted(tally.items()):
        print(f"{kind:<12} isomorphic={slow!s:<5} canonical-equal={fast!s:<5} {n}")
    return int(any(s != f for (_, s, f) in tally))


if __name__ == "__main__":
    raise SystemExit(main())
