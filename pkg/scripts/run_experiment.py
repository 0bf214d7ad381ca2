"""Run one experiment from a preset or a JSON config and save the report.

    python scripts/run_experiment.py root-cluster --out results/root.json
    python scripts/run_experiment.py --config configs/smoke-components.json
"""

import argparse
import sys
from pathlib import Path

from rrtperc.experiments import EXPERIMENTS, ExperimentConfig, preset, run_replicated


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("name", nargs="?", choices=sorted(EXPERIMENTS))
    parser.add_argument("--config", type=Path)
    parser.add_argument("--seed", type=int)
    parser.add_argument("--out", type=Path, help="write JSON here (CSV rows go next to it)")
    args = parser.parse_args(argv)
    if args.config:
        config = ExperimentConfig.from_json(args.config.read_text())
    elif args.name:
        config = preset(args.name)
    else:
        parser.error("give a name or --config")
    if args.seed is not None:
        config = ExperimentConfig.from_dict({**config.to_dict(), "seed": args.seed})
    report = run_replicated(config)
    if args.out:
        args.out.parent.mkdir(parents=True, exist_ok=True)
        args.out.write_text(report.to_json())
        args.out.with_suffix(".csv").write_text(report.to_csv())
    else:
        sys.stdout.write(report.to_json())
    print("\n".join(report.summary_lines()), file=sys.stderr)
    return 0 if report.passed else 3


if __name__ == "__main__":
    sys.exit(main())
