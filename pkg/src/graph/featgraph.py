"""
Unweighted feature digraphs that mask and guide path sampling.

A complete graph lets a walk reach any feature it has not visited yet. A knowledge graph
restricts each step to the declared neighbours of the current feature, and walks on it
may revisit features.
"""
from pathlib import Path
from typing import AbstractSet, List, Literal, Optional, Sequence, Tuple, Union

import networkx as nx
import numpy as np
import pandas as pd
from pydantic import BaseModel, ConfigDict, model_validator

from ..exceptions import GraphError


class FeatureGraph(BaseModel):
    """Digraph over feature indices 0..p-1 with sorted out-neighbour lists."""

    model_config = ConfigDict(frozen=True)

    p: int
    adjacency: Tuple[Tuple[int, ...], ...]
    mode: Literal["complete", "knowledge"]

    @model_validator(mode="after")
    def _check(self) -> "FeatureGraph":
        if self.p < 1:
            raise ValueError("a feature graph needs at least one vertex")
        if len(self.adjacency) != self.p:
            raise ValueError(f"adjacency has {len(self.adjacency)} rows for p={self.p}")
        for v, neighbours in enumerate(self.adjacency):
            for u in neighbours:
                if not 0 <= u < self.p:
                    raise ValueError(f"vertex {u} out of range")
                if u == v:
                    raise ValueError(f"self-loop at vertex {v}")
        return self

    def out_degree(self, v: int) -> int:
        return len(self.adjacency[v])

    def has_edge(self, u: int, v: int) -> bool:
        return v in self.adjacency[u]

    def edges(self) -> List[Tuple[int, int]]:
        """All arcs (u, v) in lexicographic order."""
        return [(u, v) for u, neighbours in enumerate(self.adjacency) for v in neighbours]

    def to_networkx(self) -> nx.DiGraph:
        graph = nx.DiGraph()
        graph.add_nodes_from(range(self.p))
        graph.add_edges_from(self.edges())
        return graph

    def is_connected(self) -> bool:
        return nx.is_weakly_connected(self.to_networkx())

    def diameter(self) -> int:
        """Longest shortest path; the graph must be connected."""
        if self.p == 1:
            return 0
        undirected = self.to_networkx().to_undirected()
        if not nx.is_connected(undirected):
            raise GraphError("diameter is undefined for a disconnected graph")
        return int(nx.diameter(undirected))


def _from_undirected(p: int, edges: Sequence[Tuple[int, int]]) -> FeatureGraph:
    neighbours: List[set] = [set() for _ in range(p)]
    for u, v in edges:
        neighbours[u].add(v)
        neighbours[v].add(u)
    return FeatureGraph(p=p, adjacency=tuple(tuple(sorted(ns)) for ns in neighbours), mode="knowledge")


def complete_graph(p: int) -> FeatureGraph:
    if p < 1:
        raise GraphError(f"complete graph needs p >= 1, got {p}")
    adjacency = tuple(tuple(u for u in range(p) if u != v) for v in range(p))
    return FeatureGraph(p=p, adjacency=adjacency, mode="complete")


def load_knowledge_graph(path: Union[str, Path], columns: Sequence[str]) -> FeatureGraph:
    """
    Load a `source,target` edge list naming features and align it to `columns`.

    Edges are read as undirected and stored as symmetric arc pairs.
    """
    path = Path(path)
    if not path.is_file():
        raise GraphError(f"missing knowledge graph file: {path}")
    try:
        frame = pd.read_csv(path, dtype=str, keep_default_na=False, skipinitialspace=True, encoding="utf-8")
    except (pd.errors.ParserError, pd.errors.EmptyDataError) as e:
        raise GraphError(f"unreadable edge list {path}: {e}")
    if frame.shape[1] != 2:
        raise GraphError(f"edge list must have two columns (source,target), got {frame.shape[1]}")
    frame.columns = ["source", "target"]
    if frame.empty:
        raise GraphError(f"knowledge graph {path} has no edges")

    index = {name: j for j, name in enumerate(columns)}
    edges_by_name = nx.from_pandas_edgelist(frame, source="source", target="target")
    unknown = sorted(str(name) for name in edges_by_name.nodes if name not in index)
    if unknown:
        raise GraphError(f"edge list names unknown features: {', '.join(unknown)}")
    loops = sorted(str(u) for u, v in edges_by_name.edges if u == v)
    if loops:
        raise GraphError(f"self-loop in knowledge graph at: {', '.join(loops)}")
    return _from_undirected(len(columns), [(index[u], index[v]) for u, v in edges_by_name.edges])


def write_edge_list(graph: FeatureGraph, names: Sequence[str], path: Union[str, Path]) -> None:
    """Write one `source,target` line per undirected edge (u < v)."""
    rows = [(names[u], names[v]) for u, v in graph.edges() if u < v]
    pd.DataFrame(rows, columns=["source", "target"]).to_csv(path, index=False, encoding="utf-8")


def sample_start_vertex(graph: FeatureGraph, rng: np.random.Generator) -> int:
    """Uniform over all vertices."""
    return int(rng.integers(graph.p))


def sample_next_vertex(
    graph: FeatureGraph,
    current: int,
    visited: AbstractSet[int],
    rng: np.random.Generator
) -> Optional[int]:
    """
    Next vertex of a walk, or None when the walk cannot continue.

    Complete mode draws uniformly from unvisited vertices. Knowledge mode draws uniformly
    from the out-neighbours of `current`, visited or not.
    """
    if not 0 <= current < graph.p:
        raise GraphError(f"vertex {current} out of range")
    if graph.mode == "complete":
        candidates = [v for v in range(graph.p) if v not in visited]
    else:
        candidates = list(graph.adjacency[current])
    if not candidates:
        return None
    return candidates[int(rng.integers(len(candidates)))]


def barabasi_graph(n_vertices: int, m: int, rng: np.random.Generator) -> FeatureGraph:
    """
    Barabasi-Albert preferential attachment seeded with a clique on m+1 vertices.

    The result has m(m+1)/2 + (n_vertices - m - 1) * m undirected edges.
    """
    if not n_vertices > m >= 1:
        raise GraphError(f"barabasi graph needs n_vertices > m >= 1, got n_vertices={n_vertices}, m={m}")
    graph = nx.barabasi_albert_graph(
        n_vertices,
        m,
        seed=int(rng.integers(2**32)),
        initial_graph=nx.complete_graph(m + 1)
    )
    return _from_undirected(n_vertices, list(graph.edges))
