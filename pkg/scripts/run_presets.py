#!/usr/bin/env python3
"""Run every built-in verification preset and write the results under the
given directory (one subdirectory per preset).  Exit status is nonzero if
any verdict fails."""

import argparse
import sys
import time
from pathlib import Path

from corrwig.experiments import PRESET_NAMES, preset_plan, run_experiment
from corrwig.output import write_json
from corrwig.streams import DEFAULT_SEED


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--out", type=Path, default=Path("out/presets"))
    parser.add_argument("--seed", type=int, default=DEFAULT_SEED)
    parser.add_argument("--only", nargs="*", default=None,
                        help="subset of presets to run")
    args = parser.parse_args()

    names = args.only if args.only else list(PRESET_NAMES)
    all_passed = True
    for name in names:
        out_dir = args.out / name
        plan = preset_plan(name, seed=args.seed, out_dir=str(out_dir))
        t0 = time.perf_counter()
        result = run_experiment(plan)
        write_json(out_dir / "result.json", result.to_dict())
        status = "ok" if result.passed else "FAILED"
        print(f"{name}: {status} ({time.perf_counter() - t0:.1f}s)")
        for verdict, passed in sorted(result.verdicts.items()):
            if not passed:
                print(f"  FAIL {verdict}")
        all_passed &= result.passed
    return 0 if all_passed else 1


if __name__ == "__main__":
    sys.exit(main())
