import sys
from pathlib import Path
sys.path.append(str(Path(__file__).resolve().parent.parent))  # project root

import argparse
import json

from src.config.logging import configure_logging
from src.evaluation.studies import StudyConfig, correlation_study, coverage_study, is_non_increasing, noise_sweep
from src.models.forest import ForestConfig

SCENARIOS = ["cond-dep-1", "cond-dep-2", "correlation", "cond-indep"]


def print_row(label, summary):
    if summary["mean"] is None:
        print(f"  {label:<18} undefined")
        return
    print(f"  {label:<18} {summary['min']:.2f}/{summary['mean']:.2f}/{summary['max']:.2f}")


def main():
    parser = argparse.ArgumentParser(description="Coverage, correlation and noise-sweep tables on synthetic data")
    parser.add_argument("--seeds", type=int, default=50)
    parser.add_argument("--trees", type=int, default=500)
    parser.add_argument("--iter", type=int, default=1000)
    parser.add_argument("--out", type=Path, help="write all results as JSON")
    args = parser.parse_args()
    configure_logging("WARNING")

    config = StudyConfig(n_iter=args.iter, forest=ForestConfig(n_trees=args.trees))
    seeds = range(args.seeds)
    results = {}

    print("Spearman correlation with Gini importance (min/mean/max)")
    results["correlation"] = {}
    for scenario in SCENARIOS:
        result = correlation_study(scenario, seeds, config=config)
        results["correlation"][scenario] = result
        print(scenario)
        for method, summary in result.items():
            print_row(method, summary)

    print("\nMean coverage of the signal features, 2 signal / 2 noise")
    results["coverage"] = {}
    for scenario in SCENARIOS:
        result = coverage_study(scenario, 2, seeds, config)
        results["coverage"][scenario] = result
        print(f"  {scenario:<12} " + "  ".join(f"{m}={s['mean']:.3f}" for m, s in result.items()))

    print("\nCoverage across signal/noise ratios (cond-dep-1)")
    sweep = noise_sweep("cond-dep-1", [2, 4, 6, 8, 10], seeds, config)
    results["noise_sweep"] = sweep
    for n_noise, result in sweep.items():
        print(f"  2/{n_noise:<3} " + "  ".join(f"{m}={s['mean']:.3f}" for m, s in result.items()))
    means = [sweep[n]["cpath-fraction"]["mean"] for n in sorted(sweep)]
    print(f"  cpath coverage non-increasing: {is_non_increasing(means)}")

    if args.out:
        args.out.write_text(json.dumps(results, indent=2), encoding="utf-8")
        print(f"\nResults written to {args.out}")


if __name__ == "__main__":
    main()
