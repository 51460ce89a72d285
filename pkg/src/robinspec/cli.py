"""Command line entry point: ``python3 -m robinspec <command> ...``."""

from __future__ import annotations

import argparse
import json
import math
from pathlib import Path
import sys

from robinspec import disk, fem, harness, rectangle
from robinspec.geometry import Annulus, Disk, Rectangle, domain_from_json, polygonize


def _spectrum(args) -> int:
    dom = domain_from_json(json.loads(Path(args.domain).read_text()))
    if isinstance(dom, Annulus):
        raise SystemExit("annulus spectra: only Steklov via `verify annulus`")
    alpha = args.alpha_scaled
    beta = alpha / dom.perimeter
    out = {"domain": dom.to_json(), "bc": args.bc, "alpha_scaled": alpha, "area": dom.area, "perimeter": dom.perimeter}
    if isinstance(dom, Disk) and args.bc in ("robin", "neumann", "dirichlet"):
        # unit-disk problem at alpha / 2 pi, rescaled to radius R
        R = dom.radius
        a = 0.0 if args.bc == "neumann" else alpha / (2.0 * math.pi)
        spec = disk.disk_spectrum(a, args.k, args.bc)
        out["solver"] = "bessel"
        out["eigenvalues"] = [v / R**2 for v in spec.values]
        out["records"] = spec.to_json()["eigenvalues"]
    elif isinstance(dom, Rectangle) and args.bc in ("robin", "neumann"):
        b = 0.0 if args.bc == "neumann" else beta
        out["solver"] = "tensor"
        out["eigenvalues"] = rectangle.rectangle_spectrum(dom.a, dom.b, b, args.k).values.tolist()
    else:
        poly = polygonize(dom, args.m)
        levels = (args.levels - 1, args.levels)
        if args.bc == "steklov":
            study = fem.steklov_level_study(poly, args.k, levels)
        elif args.bc in ("robin", "neumann"):
            b = 0.0 if args.bc == "neumann" else alpha / poly.perimeter
            study = fem.robin_level_study(poly, b, args.k, levels)
        else:
            raise SystemExit(f"bc {args.bc!r} is not available for this domain")
        out["solver"] = "fem"
        out["eigenvalues"] = study.extrapolated.tolist()
        out["error"] = study.error.tolist()
        out["study"] = study.to_json()
    if args.bc == "steklov":
        out["scaled"] = [v * dom.perimeter for v in out["eigenvalues"]]
    else:
        out["scaled"] = [v * dom.area for v in out["eigenvalues"]]
    json.dump(out, sys.stdout, indent=None)
    sys.stdout.write("\n")
    return 0


def _emit(rows, args) -> int:
    if args.out:
        harness.write_jsonl(rows, args.out)
    else:
        harness.write_jsonl(rows, sys.stdout)
    if args.csv:
        harness.write_csv(rows, args.csv)
    return 0 if harness.all_pass(rows) else 1


def _verify(args) -> int:
    cfg = harness.ScanConfig.load(args.config) if args.config else harness.ScanConfig()
    cfg.suite = args.suite
    rows = harness.run_suite(cfg)
    args.out = args.out or cfg.jsonl
    args.csv = args.csv or cfg.csv
    return _emit(rows, args)


def _explore(args) -> int:
    return _emit(harness.explore_open_problems(args.which), args)


def _figures(args) -> int:
    for p in harness.emit_figures(args.out):
        print(p)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="robinspec", description="Robin eigenvalue bounds: solvers and verification suites")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("spectrum", help="eigenvalues of one domain")
    p.add_argument("domain", help="domain JSON file")
    p.add_argument("--bc", default="robin", choices=["robin", "neumann", "dirichlet", "steklov"])
    p.add_argument("--alpha-scaled", type=float, default=0.0, help="alpha; the Robin coefficient is alpha / L")
    p.add_argument("--levels", type=int, default=4, help="finest mesh level; the previous one is used for extrapolation")
    p.add_argument("--k", type=int, default=4, help="number of eigenvalues")
    p.add_argument("--m", type=int, default=64, help="polygon vertices for curved domains")
    p.set_defaults(func=_spectrum)

    p = sub.add_parser("verify", help="run a verification suite")
    p.add_argument("suite", choices=["A", "B", "C", "D", "E", "threshold", "annulus"])
    p.add_argument("--config", help="ScanConfig JSON")
    p.add_argument("--out", help="JSON lines output (default stdout)")
    p.add_argument("--csv", help="CSV summary path")
    p.set_defaults(func=_verify)

    p = sub.add_parser("explore", help="report-only scans of open problems")
    p.add_argument("which", choices=["conj1", "conj4", "harmonic"])
    p.add_argument("--out")
    p.add_argument("--csv")
    p.set_defaults(func=_explore)

    p = sub.add_parser("figures", help="write radial profile CSVs")
    p.add_argument("--out", required=True)
    p.set_defaults(func=_figures)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)
