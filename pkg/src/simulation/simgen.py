"""
Synthetic benchmarks with planted signal features.

Scenarios cond-dep-1, cond-dep-2, correlation and cond-indep draw features from
Normal(0, sd=2) and overwrite a Bernoulli(0.5) label from the first two columns; the
remaining columns are pure noise. The barabasi scenario plants a logistic outcome on two
adjacent vertices of a preferential-attachment graph.
"""
import json
from pathlib import Path
from typing import List, Literal, Optional, Tuple, Union

import numpy as np
from loguru import logger
from pydantic import BaseModel, ConfigDict, Field
from scipy.special import expit

from ..data.streams import make_rng
from ..data.tabular import Dataset, LabelVector, write_csv
from ..exceptions import GraphError
from ..graph.featgraph import FeatureGraph, barabasi_graph, write_edge_list

Scenario = Literal["cond-dep-1", "cond-dep-2", "correlation", "cond-indep", "barabasi"]
SCENARIOS: Tuple[str, ...] = ("cond-dep-1", "cond-dep-2", "correlation", "cond-indep", "barabasi")
FEATURE_SD = 2.0


class SimConfig(BaseModel):
    scenario: Scenario = "cond-dep-1"
    n: int = Field(100, ge=1, description="Rows")
    n_noise: int = Field(2, ge=0, description="Noise features added to the two signal features")
    seed: int = Field(0, ge=0)
    m: int = Field(1, ge=1, description="Edges per new vertex (barabasi only)")


class SimOutput(BaseModel):
    model_config = ConfigDict(frozen=True)

    dataset: Dataset
    labels: LabelVector
    signal_features: Tuple[int, ...]
    graph: Optional[FeatureGraph] = None
    scenario: str = ""
    seed: int = 0

    def signal_names(self) -> List[str]:
        return [self.dataset.columns[j] for j in self.signal_features]


def _feature_names(p: int) -> Tuple[str, ...]:
    return tuple(f"X{j + 1}" for j in range(p))


def _apply_rule(scenario: str, D: np.ndarray, y: np.ndarray) -> np.ndarray:
    a = D[:, 0] >= 0
    b = D[:, 1] >= 0
    y = y.copy()
    if scenario == "cond-dep-1":
        y[a & b] = 1
        y[~a & b] = 0
    elif scenario == "cond-dep-2":
        y[a & ~(D[:, 1] > 0)] = 1
        y[a & (D[:, 1] > 0)] = 0
    elif scenario == "correlation":
        y[a & b] = 1
    elif scenario == "cond-indep":
        # rows with both >= 0 keep their prior draw
        y[a & ~b] = 1
        y[~a & b] = 0
    else:
        raise ValueError(f"unknown scenario {scenario!r}")
    return y


def _to_labels(y: np.ndarray) -> LabelVector:
    # {0,1} coding becomes {1,2}
    return LabelVector(labels=y.astype(np.int64) + 1, g=2)


def simulate(config: SimConfig) -> SimOutput:
    """Draw a dataset for one scenario; columns 0 and 1 carry the signal."""
    if config.scenario == "barabasi":
        return simulate_barabasi(config.n_noise + 2, config.m, config.n, config.seed)
    rng = make_rng(config.seed)
    p = 2 + config.n_noise
    D = rng.normal(0.0, FEATURE_SD, size=(config.n, p))
    prior = rng.binomial(1, 0.5, size=config.n)
    y = _apply_rule(config.scenario, D, prior)
    return SimOutput(
        dataset=Dataset(columns=_feature_names(p), values=D),
        labels=_to_labels(y),
        signal_features=(0, 1),
        scenario=config.scenario,
        seed=config.seed
    )


def simulate_barabasi(n_vertices: int, m: int, n_rows: int, seed: int) -> SimOutput:
    """
    Features are vertices of a Barabasi-Albert graph with Normal(0, 1) values; the label is
    Bernoulli(sigmoid(5 x_v1 + 3 x_v2)) for a uniformly drawn edge (v1, v2).
    """
    if n_vertices < 2:
        raise GraphError(f"barabasi simulation needs at least 2 vertices, got {n_vertices}", stage="simgen")
    rng = make_rng(seed)
    graph = barabasi_graph(n_vertices, min(m, n_vertices - 1), rng)
    undirected = [(u, v) for u, v in graph.edges() if u < v]
    if not undirected:
        raise GraphError("barabasi graph has no edges", stage="simgen")
    X = rng.normal(0.0, 1.0, size=(n_rows, n_vertices))
    u, v = undirected[int(rng.integers(len(undirected)))]
    v1, v2 = (u, v) if rng.random() < 0.5 else (v, u)
    y = rng.binomial(1, expit(5.0 * X[:, v1] + 3.0 * X[:, v2]))
    logger.debug(f"Barabasi simulation: {n_vertices} vertices, {len(undirected)} edges, signal ({v1}, {v2})")
    return SimOutput(
        dataset=Dataset(columns=_feature_names(n_vertices), values=X),
        labels=_to_labels(y),
        signal_features=(v1, v2),
        graph=graph,
        scenario="barabasi",
        seed=seed
    )


def write_simulation(
    output: SimOutput,
    csv_path: Union[str, Path],
    sidecar_path: Optional[Union[str, Path]] = None,
    graph_path: Optional[Union[str, Path]] = None
) -> Path:
    """Write the dataset CSV (label column `y`), the signal sidecar JSON and optionally the graph."""
    csv_path = Path(csv_path)
    write_csv(output.dataset, csv_path, labels=output.labels, label_column="y")
    sidecar_path = Path(sidecar_path) if sidecar_path else csv_path.with_suffix(".signal.json")
    sidecar_path.write_text(json.dumps({
        "scenario": output.scenario,
        "seed": output.seed,
        "signal_indices": list(output.signal_features),
        "signal_features": output.signal_names()
    }, indent=2), encoding="utf-8")
    if graph_path is not None:
        if output.graph is None:
            raise GraphError(f"scenario {output.scenario!r} produces no graph", stage="simgen")
        write_edge_list(output.graph, output.dataset.columns, graph_path)
    return sidecar_path
