import sys
from pathlib import Path
sys.path.append(str(Path(__file__).resolve().parent.parent))  # project root

import argparse

from src.config.logging import configure_logging
from src.evaluation.studies import StudyConfig, knowledge_study
from src.models.forest import ForestConfig


def main():
    parser = argparse.ArgumentParser(description="Unguided versus knowledge-guided path sampling on Barabasi-masked data")
    parser.add_argument("--seeds", type=int, default=100)
    parser.add_argument("--vertices", type=int, default=20)
    parser.add_argument("--m", type=int, default=1)
    parser.add_argument("--trees", type=int, default=500)
    args = parser.parse_args()
    configure_logging("WARNING")

    config = StudyConfig(forest=ForestConfig(n_trees=args.trees))
    seeds = range(args.seeds)

    print("Small budget: k=4")
    for n_paths in (10, 25, 50, 100):
        result = knowledge_study(seeds, args.vertices, args.m, k=4, n_paths=n_paths, config=config)
        print(f"  {n_paths:>4} paths  cpath={result['cpath']['mean']:.3f}  cpath-know={result['cpath-know']['mean']:.3f}")

    print("\nLong paths: k = 3 x diameter")
    for n_paths in (25, 100):
        result = knowledge_study(seeds, args.vertices, args.m, n_paths=n_paths, k_diameter_factor=3, config=config)
        print(f"  {n_paths:>4} paths  cpath={result['cpath']['mean']:.3f}  cpath-know={result['cpath-know']['mean']:.3f}")


if __name__ == "__main__":
    main()
