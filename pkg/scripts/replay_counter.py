"""Replay the counter derivation, printing the term after every step."""

import sys
from pathlib import Path

from refstore.rewrite import check_trace, parse_trace
from refstore.syntax import show

TRACE = Path(__file__).resolve().parent.parent / "corpus" / "counter.trace"


def main() -> int:
    tr = parse_trace(TRACE.read_text())
    report = check_trace(tr)
    print(f"  {show(tr.start)}")
    for st, sr in zip(tr.steps, report.steps):
        print(f"= {{ {st.rule} at {list(st.path)}{': ' + st.note if st.note else ''} }}")
        print(f"  {show(sr.term) if sr.ok else 'FAILED: ' + sr.message}")
    print(report.message)
    return 0 if report.valid else 1


if __name__ == "__main__":
    sys.exit(main())
