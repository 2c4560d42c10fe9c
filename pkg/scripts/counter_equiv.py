"""Counter equivalence across script lengths and fuels, with and without
heap-pair deduplication, including timing."""

import time
from pathlib import Path

from refstore.equiv import probe_equiv
from refstore.syntax import parse_program

defs = parse_program((Path(__file__).resolve().parent.parent / "corpus" / "counter.ref").read_text())

for other in ("negCounter", "zeroCounter"):
    for length in (2, 4, 6, 8):
        for dedup in (False, True):
            t0 = time.perf_counter()
            v = probe_equiv(defs["posCounter"], defs[other], length, dedup=dedup)
            print(f"posCounter vs {other:<11} len<={length} dedup={dedup!s:<5} "
                  f"{time.perf_counter() - t0:6.3f}s  {v.describe()}")
