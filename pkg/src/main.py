"""
Command-line entry point: `cpath explain | simulate | evaluate | pipeline | replay`.

Exit codes: 0 success, 2 configuration or data error, 3 model or protocol error,
4 no counterfactual paths found.
"""
import argparse
import asyncio
import json
import sys
from typing import Any, Dict, List, Optional

from loguru import logger
from pydantic import ValidationError

from .agents.evaluation_agent import EvaluationAgent
from .agents.explain_agent import ExplainAgent, replay
from .agents.pipeline_agent import PipelineAgent
from .agents.simulation_agent import SimulationAgent
from .config.logging import configure_logging
from .config.run_config import RunConfig
from .config.settings import get_settings
from .exceptions import CPathError
from .simulation.simgen import SCENARIOS

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_EMPTY = 4


def _add_data_args(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--data", help="dataset CSV")
    parser.add_argument("--labels", help="label column name")
    parser.add_argument("--no-header", dest="has_header", action="store_false", default=None,
                        help="CSV has no header row; columns are named X1..Xp")


def _add_model_args(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--model", help="forest JSON written by --model-out")
    parser.add_argument("--model-command", help="external model command speaking the cpath/1 line protocol")
    parser.add_argument("--model-out", help="write the trained forest here")
    parser.add_argument("--trees", type=int, help="forest size (default 500)")
    parser.add_argument("--mtry", type=int, help="features tried per split (default ceil(sqrt(p)))")
    parser.add_argument("--min-leaf", type=int, help="minimum rows per leaf (default 1)")
    parser.add_argument("--max-depth", type=int, help="maximum tree depth (default unbounded)")
    parser.add_argument("--forest-seed", type=int, help="forest seed (default --seed)")


def _add_path_args(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--graph", help="knowledge-graph edge list (source,target); complete graph when omitted")
    parser.add_argument("--policy", help="stochastic (default) or threshold:<kappa>")
    parser.add_argument("--iter", dest="n_iter", type=int, help="random walks (default 1000)")
    parser.add_argument("--k", type=int, help="maximal path length (default 4)")
    parser.add_argument("--threads", type=int, help="worker threads (default CPATH_THREADS)")


def _add_sim_args(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--scenario", choices=SCENARIOS)
    parser.add_argument("--noise", dest="n_noise", type=int, help="noise features (default 2)")
    parser.add_argument("--rows", dest="n_rows", type=int, help="rows (default 100)")
    parser.add_argument("--m", type=int, help="edges per new vertex, barabasi only (default 1)")


def _add_eval_args(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--explainer", choices=("cpath", "pfi", "gini"))
    parser.add_argument("--metric", help="correlation | coverage | sensitivity:<n> | infidelity")
    parser.add_argument("--repeats", type=int, help="seeds seed..seed+R-1 (default 1)")
    parser.add_argument("--signal", help="comma-separated signal feature names (default: sidecar JSON)")
    parser.add_argument("--pfi-repeats", type=int)
    parser.add_argument("--samples", type=int, help="Monte Carlo samples for sensitivity-n and infidelity")
    parser.add_argument("--sigma", type=float, help="infidelity gaussian noise scale")
    parser.add_argument("--infidelity-form", choices=("squared", "raw"))


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="cpath", description="Global feature importance from counterfactual paths")
    parser.add_argument("-v", "--verbose", action="store_true", help="debug logging")
    subparsers = parser.add_subparsers(dest="subcommand", required=True)

    explain = subparsers.add_parser("explain", help="sample counterfactual paths and report feature importance")
    _add_data_args(explain)
    _add_model_args(explain)
    _add_path_args(explain)
    explain.add_argument("--seed", type=int)
    explain.add_argument("--importance", choices=("fraction", "stationary", "both"))
    explain.add_argument("--adjacent", action="store_true", default=None, help="also report in+out edge weight shares")
    explain.add_argument("--damping", type=float, help="stationary teleport weight (default 0.01)")
    explain.add_argument("--tol", type=float, help="power-iteration tolerance (default 1e-10)")
    explain.add_argument("--max-iters", type=int, help="power-iteration cap (default 10000)")
    explain.add_argument("--out", help="report JSON (stdout when omitted)")
    explain.add_argument("--dot", dest="dot_out", help="DOT rendering of the transition matrix")
    explain.add_argument("--paths-out", help="counterfactual paths JSON")
    explain.add_argument("--presence-out", help="0/1 feature presence CSV, one row per path")

    simulate = subparsers.add_parser("simulate", help="write a synthetic benchmark dataset")
    _add_sim_args(simulate)
    simulate.add_argument("--seed", type=int)
    simulate.add_argument("--out", required=True, help="dataset CSV; the signal sidecar is written next to it")
    simulate.add_argument("--graph-out", help="edge list of the barabasi feature graph")

    evaluate = subparsers.add_parser("evaluate", help="score an explainer over repeated seeds")
    _add_data_args(evaluate)
    _add_model_args(evaluate)
    _add_path_args(evaluate)
    _add_sim_args(evaluate)
    _add_eval_args(evaluate)
    evaluate.add_argument("--seed", type=int)
    evaluate.add_argument("--out", help="evaluation JSON (stdout when omitted)")

    pipeline = subparsers.add_parser("pipeline", help="simulate, train, explain and evaluate in one run")
    _add_sim_args(pipeline)
    _add_model_args(pipeline)
    _add_path_args(pipeline)
    _add_eval_args(pipeline)
    pipeline.add_argument("--seed", type=int)
    pipeline.add_argument("--out-dir", help="directory for every artifact (default cpath-run)")
    pipeline.add_argument("--runs", type=int, help="repeat on consecutive seeds, one sub-directory each")

    replay_parser = subparsers.add_parser("replay", help="re-run explain from a report's provenance block")
    replay_parser.add_argument("report", help="report JSON written by explain")
    replay_parser.add_argument("--out", help="write the replayed report here")
    return parser


def config_from_args(args: argparse.Namespace) -> RunConfig:
    """Only flags given on the command line override RunConfig defaults."""
    values: Dict[str, Any] = {
        key: value for key, value in vars(args).items()
        if value is not None and key not in ("verbose", "trees", "mtry", "min_leaf", "max_depth", "forest_seed",
                                              "damping", "tol", "max_iters", "signal")
    }
    seed = values.setdefault("seed", get_settings().CPATH_DEFAULT_SEED)

    forest: Dict[str, Any] = {"seed": args.forest_seed if getattr(args, "forest_seed", None) is not None else seed}
    for flag, field in (("trees", "n_trees"), ("mtry", "mtry"), ("min_leaf", "min_leaf"), ("max_depth", "max_depth")):
        if getattr(args, flag, None) is not None:
            forest[field] = getattr(args, flag)
    values["forest"] = forest

    stationary = {
        field: getattr(args, field) for field in ("damping", "tol", "max_iters")
        if getattr(args, field, None) is not None
    }
    if stationary:
        values["stationary"] = stationary
    if getattr(args, "signal", None):
        values["signal"] = [name.strip() for name in args.signal.split(",") if name.strip()]
    return RunConfig.model_validate(values)


def _emit(document: Dict[str, Any], out: Optional[str]) -> None:
    if out is None:
        print(json.dumps(document, indent=2, sort_keys=True, default=str))


async def dispatch(config: RunConfig) -> int:
    if config.subcommand == "simulate":
        result = await SimulationAgent().process(config)
        print(json.dumps(result, indent=2))
        return EXIT_OK
    if config.subcommand == "explain":
        result = await ExplainAgent().process(config)
        report = result["report"]
        if config.out is None:
            print(report.to_json())
        return EXIT_EMPTY if report.status != "ok" else EXIT_OK
    if config.subcommand == "evaluate":
        _emit(await EvaluationAgent().process(config), config.out)
        return EXIT_OK
    result = await PipelineAgent().run_seeds(config)
    runs = [{key: run[key] for key in ("simulation", "explain")} for run in result["runs"]]
    print(json.dumps({"runs": runs, "history": result["history"]}, indent=2, default=str))
    return EXIT_EMPTY if any(run["explain"]["status"] != "ok" for run in runs) else EXIT_OK


def main(argv: Optional[List[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    configure_logging("DEBUG" if args.verbose else get_settings().CPATH_LOG_LEVEL)
    try:
        if args.subcommand == "replay":
            report = replay(args.report, out=args.out)
            if args.out is None:
                print(report.to_json())
            return EXIT_EMPTY if report.status != "ok" else EXIT_OK
        return asyncio.run(dispatch(config_from_args(args)))
    except ValidationError as e:
        logger.error(f"[config] invalid configuration: {e}")
        return EXIT_CONFIG
    except CPathError as e:
        logger.error(str(e))
        return e.exit_code


if __name__ == "__main__":
    sys.exit(main())
