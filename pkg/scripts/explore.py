"""Report-only tables for the open problems (harmonic means, conj1, conj4)."""

import argparse
from pathlib import Path

from robinspec import harness


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("which", nargs="*", default=["harmonic", "conj1", "conj4"])
    ap.add_argument("--out", default="results")
    args = ap.parse_args()
    for which in args.which:
        rows = harness.explore_open_problems(which)
        harness.write_jsonl(rows, Path(args.out) / f"explore_{which}.jsonl")
        harness.write_csv(rows, Path(args.out) / f"explore_{which}.csv")
        for r in rows:
            print(f"{which:8s} {r.domain.get('name', ''):10s} alpha={r.alpha!s:6s} lhs={r.lhs:.6f} rhs={r.rhs:.6f}")


if __name__ == "__main__":
    main()
