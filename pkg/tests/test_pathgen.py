import numpy as np
import pytest

from src.data.streams import make_rng
from src.data.tabular import Dataset
from src.exceptions import ConfigError, GraphError, ModelError
from src.explain.pathgen import PathSet, CounterfactualPath, generate_paths
from src.explain.policy import CounterfactualPolicy
from src.graph.featgraph import FeatureGraph, barabasi_graph, complete_graph
from tests.fixtures.models import ConstantModel, FailingModel, SignModel

STOCHASTIC = CounterfactualPolicy()


@pytest.fixture
def dataset():
    return Dataset(columns=("a", "b", "c", "d"), values=make_rng(0).normal(size=(60, 4)))


def test_constant_model_yields_no_paths(dataset):
    paths = generate_paths(ConstantModel(p=4), dataset, STOCHASTIC, complete_graph(4), 50, 4, seed=1)
    assert paths.is_empty()
    assert paths.n_iter == 50
    assert paths.attempts_log == 50


def test_kappa_one_yields_no_paths(dataset):
    policy = CounterfactualPolicy(variant="threshold", kappa=1.0)
    paths = generate_paths(SignModel(p=4), dataset, policy, complete_graph(4), 50, 4, seed=1)
    assert len(paths) == 0


def test_paths_end_at_the_signal_feature(dataset):
    policy = CounterfactualPolicy(variant="threshold", kappa=0.1)
    paths = generate_paths(SignModel(p=4), dataset, policy, complete_graph(4), 40, 4, seed=2)
    assert len(paths) == 40
    for path in paths.paths:
        # only permuting column 0 changes predictions, and it fires immediately
        assert path.vertices[-1] == 0
        assert len(set(path.vertices)) == len(path.vertices)
        assert path.swap_trace[-1] > 0.1
        assert all(s == 0.0 for s in path.swap_trace[:-1])


def test_paths_respect_length_and_graph(dataset):
    graph = FeatureGraph(p=4, adjacency=((1,), (0, 2), (1,), ()), mode="knowledge")
    paths = generate_paths(SignModel(p=4), dataset, STOCHASTIC, graph, 200, 3, seed=4)
    for path in paths.paths:
        assert 1 <= path.length <= 3
        for u, v in zip(path.vertices[:-1], path.vertices[1:]):
            assert graph.has_edge(u, v)


def test_knowledge_walks_stop_at_dead_ends(dataset):
    # vertex 3 has no neighbours, so walks starting there have length 1
    graph = FeatureGraph(p=4, adjacency=((1,), (0,), (), ()), mode="knowledge")
    paths = generate_paths(SignModel(p=4), dataset, STOCHASTIC, graph, 100, 4, seed=0)
    assert all(path.vertices[0] in (0, 1) for path in paths.paths)


def test_same_seed_same_paths(dataset):
    a = generate_paths(SignModel(p=4), dataset, STOCHASTIC, complete_graph(4), 80, 4, seed=11, threads=1)
    b = generate_paths(SignModel(p=4), dataset, STOCHASTIC, complete_graph(4), 80, 4, seed=11, threads=1)
    assert a == b


def test_serial_and_parallel_runs_agree(dataset):
    serial = generate_paths(SignModel(p=4), dataset, STOCHASTIC, complete_graph(4), 120, 4, seed=5, threads=1)
    parallel = generate_paths(SignModel(p=4), dataset, STOCHASTIC, complete_graph(4), 120, 4, seed=5, threads=4)
    assert serial == parallel


def test_dataset_is_not_mutated(dataset):
    before = dataset.values.copy()
    generate_paths(SignModel(p=4), dataset, STOCHASTIC, complete_graph(4), 30, 4, seed=0)
    assert np.array_equal(dataset.values, before)


def test_k_one_paths_are_single_vertices(dataset):
    paths = generate_paths(SignModel(p=4), dataset, STOCHASTIC, complete_graph(4), 60, 1, seed=3)
    assert all(path.vertices == (0,) for path in paths.paths)


def test_single_row_dataset_never_swaps():
    single = Dataset(columns=("a", "b"), values=[[1.0, -1.0]])
    paths = generate_paths(SignModel(p=2), single, STOCHASTIC, complete_graph(2), 20, 2, seed=0)
    assert paths.is_empty()


def test_invalid_parameters(dataset):
    with pytest.raises(ConfigError):
        generate_paths(SignModel(p=4), dataset, STOCHASTIC, complete_graph(4), 10, 0, seed=0)
    with pytest.raises(ConfigError):
        generate_paths(SignModel(p=4), dataset, STOCHASTIC, complete_graph(4), 0, 4, seed=0)
    with pytest.raises(GraphError):
        generate_paths(SignModel(p=4), dataset, STOCHASTIC, complete_graph(3), 10, 4, seed=0)


def test_model_failure_names_iteration(dataset):
    with pytest.raises(ModelError, match="iteration 0"):
        generate_paths(FailingModel(p=4, budget=1), dataset, STOCHASTIC, complete_graph(4), 5, 4, seed=0, threads=1)


def test_path_set_summary_and_first_vertex_swaps():
    paths = PathSet(
        paths=(
            CounterfactualPath(vertices=(0,), swap_trace=(0.4,)),
            CounterfactualPath(vertices=(0, 1), swap_trace=(0.2, 0.6)),
            CounterfactualPath(vertices=(2, 1, 0), swap_trace=(0.0, 0.1, 0.5)),
        ),
        n_iter=5,
        k=3,
        p=3,
        attempts_log=2
    )
    summary = paths.summary()
    assert summary["n_paths"] == 3
    assert summary["length_histogram"] == {1: 1, 2: 1, 3: 1}
    assert summary["mean_final_swap_fraction"] == pytest.approx(0.5)
    assert paths.first_vertex_swaps() == [pytest.approx(0.3), None, 0.0]


def test_barabasi_knowledge_paths_stay_on_graph(dataset):
    graph = barabasi_graph(4, 1, make_rng(8))
    paths = generate_paths(SignModel(p=4), dataset, STOCHASTIC, graph, 100, 4, seed=8)
    for path in paths.paths:
        assert all(graph.has_edge(u, v) for u, v in zip(path.vertices[:-1], path.vertices[1:]))
