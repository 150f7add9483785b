"""
Counterfactual path generation.

Each iteration walks the feature graph from a pristine copy of the dataset, permuting the
column of every vertex it appends on top of the permutations already applied, and stops
as soon as the policy fires. Only walks on which the policy fired are stored.
"""
from collections import Counter
from concurrent.futures import ThreadPoolExecutor
from typing import Dict, List, Optional, Tuple

import numpy as np
from loguru import logger
from pydantic import BaseModel, ConfigDict, Field

from ..config.settings import get_settings
from ..data.streams import make_rng
from ..data.tabular import Dataset, LabelVector, permute_column
from ..exceptions import ConfigError, CPathError, GraphError, ModelError
from ..graph.featgraph import FeatureGraph, sample_next_vertex, sample_start_vertex
from ..models.blackbox import BlackBoxModel
from .policy import CounterfactualPolicy, changed_fraction, evaluate_policy


class CounterfactualPath(BaseModel):
    model_config = ConfigDict(frozen=True)

    vertices: Tuple[int, ...]
    swap_trace: Tuple[float, ...]
    triggered: bool = True

    @property
    def length(self) -> int:
        return len(self.vertices)


class PathSet(BaseModel):
    """Multiset of stored counterfactual paths, in iteration order."""

    model_config = ConfigDict(frozen=True)

    paths: Tuple[CounterfactualPath, ...] = ()
    n_iter: int = Field(..., ge=0)
    k: int = Field(..., ge=1)
    p: int = Field(..., ge=1)
    attempts_log: int = Field(0, ge=0, description="walks that ended without the policy firing")

    def __len__(self) -> int:
        return len(self.paths)

    def is_empty(self) -> bool:
        return not self.paths

    def length_histogram(self) -> Dict[int, int]:
        counts = Counter(path.length for path in self.paths)
        return {length: counts.get(length, 0) for length in range(1, self.k + 1)}

    def summary(self) -> Dict[str, object]:
        finals = [path.swap_trace[-1] for path in self.paths]
        return {
            "n_paths": len(self.paths),
            "n_iter": self.n_iter,
            "k": self.k,
            "non_triggered_walks": self.attempts_log,
            "length_histogram": self.length_histogram(),
            "mean_final_swap_fraction": float(np.mean(finals)) if finals else None
        }

    def first_vertex_swaps(self) -> List[Optional[float]]:
        """Mean swap fraction after the first permutation, per feature used as a path's first vertex."""
        sums = np.zeros(self.p)
        counts = np.zeros(self.p)
        for path in self.paths:
            sums[path.vertices[0]] += path.swap_trace[0]
            counts[path.vertices[0]] += 1
        return [float(s / c) if c else None for s, c in zip(sums, counts)]


def _walk(
    model: BlackBoxModel,
    dataset: Dataset,
    baseline: LabelVector,
    policy: CounterfactualPolicy,
    graph: FeatureGraph,
    k: int,
    rng: np.random.Generator
) -> Optional[CounterfactualPath]:
    vertices: List[int] = []
    trace: List[float] = []
    visited = set()
    perturbed = dataset
    vertex: Optional[int] = sample_start_vertex(graph, rng)
    while vertex is not None:
        vertices.append(vertex)
        visited.add(vertex)
        perturbed = permute_column(perturbed, vertex, rng)
        fraction = changed_fraction(baseline, model.predict(perturbed))
        trace.append(fraction)
        if evaluate_policy(policy, fraction, rng):
            return CounterfactualPath(vertices=tuple(vertices), swap_trace=tuple(trace))
        if len(vertices) == k:
            break
        vertex = sample_next_vertex(graph, vertex, visited, rng)
    return None


def generate_paths(
    model: BlackBoxModel,
    dataset: Dataset,
    policy: CounterfactualPolicy,
    graph: FeatureGraph,
    n_iter: int,
    k: int,
    seed: int,
    threads: Optional[int] = None
) -> PathSet:
    """
    Sample counterfactual paths.

    Args:
        model: prediction oracle
        dataset: the dataset X whose predictions M(X) are the baseline
        policy: counterfactual policy deciding when a walk is stored
        graph: sampling graph over the dataset's features
        n_iter: number of walks
        k: maximal path length
        seed: base seed; iteration i draws from substream (seed, i)
        threads: worker threads, defaults to CPATH_THREADS

    Returns:
        PathSet: the stored paths in iteration order
    """
    if k < 1:
        raise ConfigError(f"k must be >= 1, got {k}", stage="pathgen")
    if n_iter < 1:
        raise ConfigError(f"n_iter must be >= 1, got {n_iter}", stage="pathgen")
    if graph.p != dataset.p:
        raise GraphError(f"graph has {graph.p} vertices but dataset has {dataset.p} features", stage="pathgen")

    baseline = model.predict(dataset)

    def run(iteration: int) -> Optional[CounterfactualPath]:
        try:
            return _walk(model, dataset, baseline, policy, graph, k, make_rng(seed, iteration))
        except CPathError as e:
            raise ModelError(f"iteration {iteration}: {e.message}", stage="pathgen") from e
        except Exception as e:
            raise ModelError(f"iteration {iteration}: {type(e).__name__}: {e}", stage="pathgen") from e

    threads = threads or get_settings().worker_count()
    if threads > 1 and n_iter > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            outcomes = list(pool.map(run, range(n_iter)))
    else:
        outcomes = [run(i) for i in range(n_iter)]

    stored = tuple(path for path in outcomes if path is not None)
    path_set = PathSet(paths=stored, n_iter=n_iter, k=k, p=dataset.p, attempts_log=n_iter - len(stored))
    logger.info(f"Generated {len(stored)} counterfactual paths from {n_iter} walks (k={k}, policy={policy})")
    return path_set
