"""Run one verification suite and write JSON lines plus a CSV summary.

    python3 scripts/run_suite.py B --out results/
"""

import argparse
from pathlib import Path
import time

from robinspec import harness


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("suite", choices=["A", "B", "C", "D", "E", "threshold", "annulus"])
    ap.add_argument("--config")
    ap.add_argument("--out", default="results")
    args = ap.parse_args()

    cfg = harness.ScanConfig.load(args.config) if args.config else harness.ScanConfig()
    cfg.suite = args.suite
    t0 = time.perf_counter()
    rows = harness.run_suite(cfg)
    out = Path(args.out)
    harness.write_jsonl(rows, out / f"suite_{args.suite}.jsonl")
    harness.write_csv(rows, out / f"suite_{args.suite}.csv")
    n_fail = sum(r.passed is False for r in rows)
    print(f"{args.suite}: {len(rows)} rows, {n_fail} failing, {time.perf_counter() - t0:.1f} s")


if __name__ == "__main__":
    main()
