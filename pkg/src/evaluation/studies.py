"""
Multi-seed studies: explainer coverage and agreement with Gini importance on synthetic
benchmarks, signal/noise sweeps, and knowledge-guided versus unguided sampling.
"""
from typing import Dict, List, Optional, Sequence

from loguru import logger
from pydantic import BaseModel, Field

from ..data.tabular import Dataset, LabelVector
from ..exceptions import NoCounterfactualsError, UndefinedCorrelationError
from ..explain.importance import StationaryConfig, build_transition_matrix, importance_fraction, importance_stationary
from ..explain.pathgen import generate_paths
from ..explain.policy import CounterfactualPolicy
from ..graph.featgraph import FeatureGraph, complete_graph
from ..models.blackbox import BlackBoxModel
from ..models.forest import ForestConfig, gini_importance, train_random_forest
from ..simulation.simgen import SimConfig, simulate, simulate_barabasi
from .metrics import ExplanationScores, coverage, pfi, rank_correlation, summarize


class StudyConfig(BaseModel):
    n_rows: int = Field(100, ge=1)
    n_iter: int = Field(1000, ge=1)
    k: int = Field(4, ge=1)
    policy: CounterfactualPolicy = CounterfactualPolicy()
    forest: ForestConfig = ForestConfig()
    stationary: StationaryConfig = StationaryConfig()
    pfi_repeats: int = Field(10, ge=1)
    threads: Optional[int] = None


def cpath_scores(
    model: BlackBoxModel,
    dataset: Dataset,
    config: StudyConfig,
    seed: int,
    graph: Optional[FeatureGraph] = None,
    n_iter: Optional[int] = None,
    k: Optional[int] = None
) -> Dict[str, Optional[ExplanationScores]]:
    """Fraction and stationary importance from one path-generation run; None when no path was found."""
    paths = generate_paths(
        model,
        dataset,
        config.policy,
        graph or complete_graph(dataset.p),
        n_iter or config.n_iter,
        k or config.k,
        seed,
        threads=config.threads
    )
    T = build_transition_matrix(paths)
    try:
        return {
            "cpath-fraction": ExplanationScores.of(importance_fraction(T).scores, "cpath-fraction"),
            "cpath-stationary": ExplanationScores.of(importance_stationary(T, config.stationary).scores, "cpath-stationary")
        }
    except NoCounterfactualsError:
        logger.warning(f"seed {seed}: no counterfactual paths; coverage counts as 0")
        return {"cpath-fraction": None, "cpath-stationary": None}


def _train(dataset: Dataset, labels: LabelVector, config: StudyConfig, seed: int):
    return train_random_forest(dataset, labels, config.forest.model_copy(update={"seed": seed}))


def _explain_all(dataset: Dataset, labels: LabelVector, config: StudyConfig, seed: int) -> Dict[str, Optional[ExplanationScores]]:
    forest = _train(dataset, labels, config, seed)
    scores = {
        "gini": ExplanationScores.of(gini_importance(forest), "gini"),
        "pfi": pfi(forest, dataset, labels, config.pfi_repeats, seed)
    }
    scores.update(cpath_scores(forest, dataset, config, seed))
    return scores


def _coverage_or_zero(scores: Optional[ExplanationScores], signal: Sequence[int]) -> float:
    return 0.0 if scores is None else coverage(scores, signal)


def coverage_study(
    scenario: str,
    n_noise: int,
    seeds: Sequence[int],
    config: Optional[StudyConfig] = None
) -> Dict[str, Dict[str, object]]:
    """Per-seed coverage of the planted signal features for every explainer."""
    config = config or StudyConfig()
    values: Dict[str, List[float]] = {"gini": [], "pfi": [], "cpath-fraction": [], "cpath-stationary": []}
    for seed in seeds:
        sim = simulate(SimConfig(scenario=scenario, n=config.n_rows, n_noise=n_noise, seed=seed))
        scores = _explain_all(sim.dataset, sim.labels, config, seed)
        for method in values:
            values[method].append(_coverage_or_zero(scores[method], sim.signal_features))
        logger.info(f"{scenario} 2/{n_noise} seed {seed}: " + ", ".join(f"{m}={v[-1]:.2f}" for m, v in values.items()))
    return {method: {"values": v, **summarize(v)} for method, v in values.items()}


def correlation_study(
    scenario: str,
    seeds: Sequence[int],
    n_noise: int = 2,
    config: Optional[StudyConfig] = None
) -> Dict[str, Dict[str, object]]:
    """Per-seed Spearman correlation of each explainer with the forest's Gini importance."""
    config = config or StudyConfig()
    values: Dict[str, List[float]] = {"pfi": [], "cpath-fraction": [], "cpath-stationary": []}
    for seed in seeds:
        sim = simulate(SimConfig(scenario=scenario, n=config.n_rows, n_noise=n_noise, seed=seed))
        scores = _explain_all(sim.dataset, sim.labels, config, seed)
        for method in values:
            if scores[method] is None:
                continue
            try:
                values[method].append(rank_correlation(scores[method], scores["gini"]))
            except UndefinedCorrelationError as e:
                logger.warning(f"seed {seed}: {method} correlation undefined ({e.message})")
    return {method: {"values": v, **summarize(v)} for method, v in values.items()}


def noise_sweep(
    scenario: str,
    noise_levels: Sequence[int],
    seeds: Sequence[int],
    config: Optional[StudyConfig] = None
) -> Dict[int, Dict[str, Dict[str, object]]]:
    """Coverage study repeated across signal/noise ratios 2/n."""
    return {n_noise: coverage_study(scenario, n_noise, seeds, config) for n_noise in noise_levels}


def knowledge_study(
    seeds: Sequence[int],
    n_vertices: int = 20,
    m: int = 1,
    k: Optional[int] = 4,
    n_paths: int = 25,
    k_diameter_factor: Optional[int] = None,
    config: Optional[StudyConfig] = None
) -> Dict[str, Dict[str, object]]:
    """
    Coverage of unguided (complete graph) and knowledge-guided path sampling on
    Barabasi-masked simulations.

    With `k_diameter_factor`, each seed uses k = factor x graph diameter instead of `k`.
    """
    config = config or StudyConfig()
    values: Dict[str, List[float]] = {"cpath": [], "cpath-know": []}
    for seed in seeds:
        sim = simulate_barabasi(n_vertices, m, config.n_rows, seed)
        forest = _train(sim.dataset, sim.labels, config, seed)
        walk_k = k_diameter_factor * sim.graph.diameter() if k_diameter_factor else k
        plain = cpath_scores(forest, sim.dataset, config, seed, n_iter=n_paths, k=walk_k)
        guided = cpath_scores(forest, sim.dataset, config, seed, graph=sim.graph, n_iter=n_paths, k=walk_k)
        values["cpath"].append(_coverage_or_zero(plain["cpath-fraction"], sim.signal_features))
        values["cpath-know"].append(_coverage_or_zero(guided["cpath-fraction"], sim.signal_features))
    return {method: {"values": v, **summarize(v)} for method, v in values.items()}


def is_non_increasing(means: Sequence[float], allowance: float = 0.05) -> bool:
    """True when no step rises by more than `allowance`."""
    return all(b <= a + allowance for a, b in zip(means[:-1], means[1:]))


__all__ = [
    "StudyConfig",
    "cpath_scores",
    "coverage_study",
    "correlation_study",
    "noise_sweep",
    "knowledge_study",
    "is_non_increasing"
]
