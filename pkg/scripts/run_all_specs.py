"""Run every sweep spec in specs/ through the CLI and time it.

Usage: python scripts/run_all_specs.py [--out results] [--jobs N] [--budget 300]

Writes one CSV per spec and exits nonzero if any spec fails or runs over
the per-spec time budget.
"""

from __future__ import annotations

import argparse
import sys
import time
from pathlib import Path

from odtd.cli import main as odtd_main

ROOT = Path(__file__).resolve().parents[1]


def run(spec: Path, out: Path, jobs: int) -> tuple[int, float]:
    t0 = time.perf_counter()
    code = odtd_main(["sweep", "--config", str(spec), "--jobs", str(jobs), "-o", str(out / f"{spec.stem}.csv")])
    return code, time.perf_counter() - t0


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--specs", type=Path, default=ROOT / "specs")
    ap.add_argument("--out", type=Path, default=ROOT / "results")
    ap.add_argument("--jobs", type=int, default=1)
    ap.add_argument("--budget", type=float, default=300.0, help="seconds allowed per spec")
    ap.add_argument("pattern", nargs="?", default="*.json")
    args = ap.parse_args(argv)

    args.out.mkdir(parents=True, exist_ok=True)
    bad = 0
    for spec in sorted(args.specs.glob(args.pattern)):
        code, dt = run(spec, args.out, args.jobs)
        ok = code == 0 and dt < args.budget
        bad += not ok
        print(f"{'ok  ' if ok else 'FAIL'} {dt:8.2f}s  {spec.stem}", flush=True)
    return 1 if bad else 0


if __name__ == "__main__":
    sys.exit(main())
