"""Run every acceptance experiment at full size and print a verdict table."""

import argparse
import json
import sys
import time
from pathlib import Path

from rrtperc.experiments import preset, run_replicated

ORDER = [
    "splitting",
    "generator-equivalence",
    "root-cluster",
    "largest-clusters",
    "coupling",
    "components",
    "rank-vs-generation",
    "limit-selfchecks",
    "martingale",
    "joint-marginal",
]


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--only", nargs="*", choices=ORDER)
    parser.add_argument("--out-dir", type=Path, help="save one JSON report per experiment")
    args = parser.parse_args(argv)
    failures = 0
    for k, name in enumerate(ORDER, start=1):
        if args.only and name not in args.only:
            continue
        start = time.perf_counter()
        report = run_replicated(preset(name))
        elapsed = time.perf_counter() - start
        print(f"{'PASS' if report.passed else 'FAIL'} criterion {k} ({name}, {elapsed:.0f}s)")
        for line in report.summary_lines():
            print(f"    {line}")
        sys.stdout.flush()
        failures += not report.passed
        if args.out_dir:
            args.out_dir.mkdir(parents=True, exist_ok=True)
            (args.out_dir / f"{name}.json").write_text(report.to_json())
    print(json.dumps({"failed": failures}))
    return 1 if failures else 0


if __name__ == "__main__":
    sys.exit(main())
