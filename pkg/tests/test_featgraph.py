import numpy as np
import pytest

from src.data.streams import make_rng
from src.exceptions import GraphError
from src.graph.featgraph import (
    FeatureGraph,
    barabasi_graph,
    complete_graph,
    load_knowledge_graph,
    sample_next_vertex,
    sample_start_vertex,
    write_edge_list
)

COLUMNS = ("A", "B", "C", "D")


@pytest.fixture
def edge_file(tmp_path):
    def _write(text):
        path = tmp_path / "graph.csv"
        path.write_text(text, encoding="utf-8")
        return path
    return _write


def test_complete_graph_has_all_arcs():
    graph = complete_graph(4)
    assert len(graph.edges()) == 12
    assert all(graph.out_degree(v) == 3 for v in range(4))
    assert not graph.has_edge(2, 2)


def test_complete_graph_single_vertex():
    graph = complete_graph(1)
    assert graph.edges() == []
    assert sample_next_vertex(graph, 0, {0}, make_rng(0)) is None


def test_knowledge_graph_is_symmetric(edge_file):
    graph = load_knowledge_graph(edge_file("source,target\nA,B\nB,C\n"), COLUMNS)
    assert graph.mode == "knowledge"
    assert graph.edges() == [(0, 1), (1, 0), (1, 2), (2, 1)]
    assert graph.out_degree(3) == 0


def test_knowledge_graph_rejects_unknown_feature(edge_file):
    with pytest.raises(GraphError, match="unknown features: Z"):
        load_knowledge_graph(edge_file("source,target\nA,Z\n"), COLUMNS)


def test_knowledge_graph_rejects_self_loop(edge_file):
    with pytest.raises(GraphError, match="self-loop"):
        load_knowledge_graph(edge_file("source,target\nA,A\n"), COLUMNS)


def test_knowledge_graph_rejects_empty(edge_file):
    with pytest.raises(GraphError):
        load_knowledge_graph(edge_file("source,target\n"), COLUMNS)


def test_write_edge_list_round_trip(tmp_path):
    graph = barabasi_graph(6, 2, make_rng(3))
    names = tuple(f"X{j + 1}" for j in range(6))
    path = tmp_path / "edges.csv"
    write_edge_list(graph, names, path)
    assert load_knowledge_graph(path, names) == graph


def test_feature_graph_validation():
    with pytest.raises(ValueError):
        FeatureGraph(p=2, adjacency=((0,), ()), mode="knowledge")
    with pytest.raises(ValueError):
        FeatureGraph(p=2, adjacency=((5,), ()), mode="knowledge")


def test_complete_walk_never_revisits():
    graph = complete_graph(5)
    rng = make_rng(7)
    visited = {sample_start_vertex(graph, rng)}
    current = next(iter(visited))
    while True:
        nxt = sample_next_vertex(graph, current, visited, rng)
        if nxt is None:
            break
        assert nxt not in visited
        visited.add(nxt)
        current = nxt
    assert visited == set(range(5))


def test_knowledge_walk_follows_edges_and_may_revisit(edge_file):
    graph = load_knowledge_graph(edge_file("source,target\nA,B\n"), COLUMNS)
    rng = make_rng(0)
    assert sample_next_vertex(graph, 0, {0, 1}, rng) == 1
    assert sample_next_vertex(graph, 1, {0, 1}, rng) == 0
    assert sample_next_vertex(graph, 3, {3}, rng) is None


def test_start_vertex_is_uniform():
    graph = complete_graph(4)
    rng = make_rng(1)
    counts = np.bincount([sample_start_vertex(graph, rng) for _ in range(4000)], minlength=4)
    assert np.all(np.abs(counts / 4000 - 0.25) < 0.03)


@pytest.mark.parametrize("n,m", [(5, 1), (10, 2), (20, 3), (4, 3)])
def test_barabasi_edge_count_and_connectivity(n, m):
    graph = barabasi_graph(n, m, make_rng(n * m))
    undirected = [(u, v) for u, v in graph.edges() if u < v]
    assert len(undirected) == m * (m + 1) // 2 + (n - m - 1) * m
    assert graph.is_connected()


def test_barabasi_n5_m1_is_a_tree():
    graph = barabasi_graph(5, 1, make_rng(0))
    assert len(graph.edges()) == 8
    assert graph.diameter() >= 2


def test_barabasi_rejects_bad_parameters():
    with pytest.raises(GraphError):
        barabasi_graph(3, 3, make_rng(0))
    with pytest.raises(GraphError):
        barabasi_graph(3, 0, make_rng(0))


def test_knowledge_graph_accepts_na_like_feature_names(edge_file):
    columns = ("NA", "null", "c")
    graph = load_knowledge_graph(edge_file("source,target\nNA,null\n"), columns)
    assert graph.edges() == [(0, 1), (1, 0)]


def test_barabasi_is_seeded():
    assert barabasi_graph(30, 2, make_rng(5)) == barabasi_graph(30, 2, make_rng(5))


def test_barabasi_seed_clique_is_complete():
    graph = barabasi_graph(3, 2, make_rng(0))
    assert len(graph.edges()) == 6


@pytest.mark.slow
def test_barabasi_degrees_are_heavy_tailed():
    heavy = 0
    for seed in range(100):
        graph = barabasi_graph(100, 2, make_rng(seed))
        degrees = [graph.out_degree(v) for v in range(100)]
        heavy += max(degrees) > np.median(degrees)
    assert heavy >= 99
