import json
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence, Tuple

from loguru import logger

from ..config.run_config import RunConfig
from ..data.tabular import Dataset, LabelVector, load_csv
from ..exceptions import ConfigError, NoCounterfactualsError, UndefinedCorrelationError
from ..evaluation.metrics import (
    ExplanationScores,
    InfidelityConfig,
    coverage,
    infidelity,
    pfi,
    rank_correlation,
    sensitivity_n,
    summarize
)
from ..explain.importance import build_transition_matrix, importance_fraction
from ..explain.pathgen import generate_paths
from ..export.artifacts import config_hash
from ..graph.featgraph import FeatureGraph, complete_graph
from ..models.blackbox import BlackBoxModel
from ..models.forest import gini_importance, train_random_forest
from ..simulation.simgen import simulate
from .base_agent import BaseAgent
from .explain_agent import load_graph, load_model
from .simulation_agent import sidecar_for, sim_config

EVALUATION_SCHEMA = "cpath-evaluation/1"


def _signal_indices(config: RunConfig, dataset: Dataset) -> List[int]:
    names = config.signal
    if names is None:
        sidecar = sidecar_for(config.data)
        if not sidecar.is_file():
            raise ConfigError(f"no --signal given and no sidecar {sidecar}", stage="evaluate")
        names = json.loads(sidecar.read_text(encoding="utf-8"))["signal_features"]
    return [dataset.column_index(name) for name in names]


def _instance(config: RunConfig, seed: int) -> Tuple[Dataset, LabelVector, List[int], Optional[FeatureGraph]]:
    """Dataset, labels, signal indices and sampling graph for one repeat."""
    if config.data:
        dataset, labels = load_csv(config.data, config.has_header, config.labels)
        needs_signal = config.metric == "coverage"
        signal = _signal_indices(config, dataset) if needs_signal else []
        graph = load_graph(config, dataset) if config.graph else None
        return dataset, labels, signal, graph
    sim = simulate(sim_config(config, seed))
    return sim.dataset, sim.labels, list(sim.signal_features), None


def _model(config: RunConfig, dataset: Dataset, labels: LabelVector, seed: int) -> BlackBoxModel:
    if config.model or config.model_command:
        return load_model(config, dataset, labels)
    return train_random_forest(dataset, labels, config.forest.model_copy(update={"seed": seed}))


def explain_scores(
    config: RunConfig,
    model: BlackBoxModel,
    dataset: Dataset,
    labels: LabelVector,
    graph: Optional[FeatureGraph],
    seed: int
) -> Optional[ExplanationScores]:
    """Scores of the configured explainer; None when CPATH finds no path."""
    if config.explainer == "gini":
        return ExplanationScores.of(gini_importance(model), "gini")
    if config.explainer == "pfi":
        return pfi(model, dataset, labels, config.pfi_repeats, seed)
    paths = generate_paths(
        model,
        dataset,
        config.counterfactual_policy(),
        graph or complete_graph(dataset.p),
        config.n_iter,
        config.k,
        seed,
        threads=config.threads
    )
    try:
        return ExplanationScores.of(importance_fraction(build_transition_matrix(paths)).scores, "cpath-fraction")
    except NoCounterfactualsError:
        return None


def score_metric(
    config: RunConfig,
    model: BlackBoxModel,
    dataset: Dataset,
    scores: Optional[ExplanationScores],
    signal: Sequence[int],
    seed: int
) -> Optional[float]:
    if config.metric == "coverage":
        return 0.0 if scores is None else coverage(scores, signal)
    if scores is None:
        return None
    if config.metric == "correlation":
        return rank_correlation(scores, ExplanationScores.of(gini_importance(model), "gini"))
    n_subset = config.sensitivity_n()
    if n_subset is not None:
        return sensitivity_n(model, dataset, scores, n_subset, config.samples, seed)
    result = infidelity(model, dataset, scores, InfidelityConfig(
        sigma=config.sigma, n_samples=config.samples, seed=seed, form=config.infidelity_form
    ))
    return result.value


def run_evaluate(config: RunConfig) -> Dict[str, Any]:
    """
    Score one explainer with one metric over `repeats` seeds (seed, seed + 1, ...).

    With --data the dataset is fixed and the seed drives training and explanation;
    otherwise every repeat simulates a fresh dataset from its seed.
    """
    seeds = [config.seed + r for r in range(config.repeats)]
    values: List[Optional[float]] = []
    for seed in seeds:
        dataset, labels, signal, graph = _instance(config, seed)
        model = _model(config, dataset, labels, seed)
        try:
            scores = explain_scores(config, model, dataset, labels, graph, seed)
            try:
                value = score_metric(config, model, dataset, scores, signal, seed)
            except UndefinedCorrelationError as e:
                logger.warning(f"seed {seed}: {config.metric} undefined ({e.message})")
                value = None
        finally:
            model.close()
        if scores is None:
            logger.warning(f"seed {seed}: no counterfactual paths")
        values.append(value)
        logger.debug(f"seed {seed}: {config.metric} = {value}")

    defined = [v for v in values if v is not None]
    report = {
        "schema": EVALUATION_SCHEMA,
        "explainer": config.explainer,
        "metric": config.metric,
        "seeds": seeds,
        "values": values,
        "undefined": len(values) - len(defined),
        "summary": summarize(defined),
        "provenance": {"config_hash": config_hash(config), "config": config.model_dump(mode="json")}
    }
    if config.out:
        Path(config.out).write_text(json.dumps(report, indent=2, sort_keys=True) + "\n", encoding="utf-8")
        logger.info(f"Evaluation written to {config.out}")
    return report


class EvaluationAgent(BaseAgent):
    def __init__(self):
        super().__init__(
            name="Evaluation Agent",
            role_description="Scores an explainer over repeated seeds with coverage, correlation, sensitivity-n or infidelity"
        )

    async def process(self, config: RunConfig) -> Dict[str, Any]:
        """
        Evaluate one explainer.

        Args:
            config (RunConfig): evaluate configuration

        Returns:
            Dict[str, Any]: per-seed values with a min/mean/max/std summary
        """
        report = await self.run_stage("evaluate", run_evaluate, config)
        summary = report["summary"]
        if summary["mean"] is not None:
            self.logger.info(
                f"{config.explainer} {config.metric} over {len(report['seeds'])} seeds: "
                f"{summary['min']:.3f}/{summary['mean']:.3f}/{summary['max']:.3f}"
            )
        return report
