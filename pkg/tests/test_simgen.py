import json

import numpy as np
import pytest
from pydantic import ValidationError
from scipy.special import expit

from src.data.tabular import load_csv
from src.exceptions import GraphError
from src.graph.featgraph import load_knowledge_graph
from src.simulation.simgen import SimConfig, simulate, simulate_barabasi, write_simulation


def test_shapes_and_signal_features():
    output = simulate(SimConfig(scenario="cond-dep-1", n=100, n_noise=8, seed=0))
    assert output.dataset.n == 100 and output.dataset.p == 10
    assert output.signal_features == (0, 1)
    assert output.dataset.columns[:2] == ("X1", "X2")
    assert set(np.unique(output.labels.labels)) <= {1, 2}


def test_same_seed_same_data():
    a = simulate(SimConfig(scenario="correlation", seed=4))
    b = simulate(SimConfig(scenario="correlation", seed=4))
    assert a.dataset == b.dataset and a.labels == b.labels


def test_feature_scale_is_sd_two():
    output = simulate(SimConfig(scenario="cond-indep", n=20000, n_noise=0, seed=1))
    assert np.std(output.dataset.values, axis=0) == pytest.approx([2.0, 2.0], rel=0.05)


def test_cond_dep_1_rule():
    output = simulate(SimConfig(scenario="cond-dep-1", n=500, seed=2))
    X, y = output.dataset.values, output.labels.labels
    b = X[:, 1] >= 0
    assert np.all(y[(X[:, 0] >= 0) & b] == 2)
    assert np.all(y[(X[:, 0] < 0) & b] == 1)


def test_cond_dep_2_rule():
    output = simulate(SimConfig(scenario="cond-dep-2", n=500, seed=3))
    X, y = output.dataset.values, output.labels.labels
    a = X[:, 0] >= 0
    assert np.all(y[a & (X[:, 1] <= 0)] == 2)
    assert np.all(y[a & (X[:, 1] > 0)] == 1)


def test_correlation_rule():
    output = simulate(SimConfig(scenario="correlation", n=500, seed=5))
    X, y = output.dataset.values, output.labels.labels
    assert np.all(y[(X[:, 0] >= 0) & (X[:, 1] >= 0)] == 2)


def test_cond_indep_rule():
    output = simulate(SimConfig(scenario="cond-indep", n=500, seed=6))
    X, y = output.dataset.values, output.labels.labels
    a, b = X[:, 0] >= 0, X[:, 1] >= 0
    assert np.all(y[a & ~b] == 2)
    assert np.all(y[~a & b] == 1)


def test_unknown_scenario_is_rejected():
    with pytest.raises(ValidationError):
        SimConfig(scenario="cond-dep-9")


def test_barabasi_simulation():
    output = simulate_barabasi(n_vertices=12, m=2, n_rows=150, seed=3)
    v1, v2 = output.signal_features
    assert output.graph.has_edge(v1, v2)
    assert output.dataset.p == 12
    assert output.graph.p == 12
    assert output.scenario == "barabasi"


def test_barabasi_scenario_via_sim_config():
    output = simulate(SimConfig(scenario="barabasi", n=50, n_noise=6, seed=1))
    assert output.dataset.p == 8
    assert output.graph is not None


def test_barabasi_needs_two_vertices():
    with pytest.raises(GraphError):
        simulate_barabasi(n_vertices=1, m=1, n_rows=10, seed=0)


def test_write_simulation(tmp_path):
    output = simulate_barabasi(n_vertices=6, m=1, n_rows=30, seed=2)
    csv_path = tmp_path / "data.csv"
    graph_path = tmp_path / "graph.csv"
    sidecar = write_simulation(output, csv_path, graph_path=graph_path)

    dataset, labels = load_csv(csv_path, label_column="y")
    assert dataset == output.dataset
    assert labels == output.labels
    meta = json.loads(sidecar.read_text(encoding="utf-8"))
    assert meta["signal_features"] == output.signal_names()
    assert meta["signal_indices"] == list(output.signal_features)
    assert load_knowledge_graph(graph_path, dataset.columns) == output.graph


def test_write_simulation_without_graph(tmp_path):
    output = simulate(SimConfig(seed=0))
    with pytest.raises(GraphError):
        write_simulation(output, tmp_path / "data.csv", graph_path=tmp_path / "graph.csv")


@pytest.mark.slow
def test_barabasi_labels_follow_sigmoid():
    output = simulate_barabasi(n_vertices=20, m=2, n_rows=10_000, seed=7)
    v1, v2 = output.signal_features
    X = output.dataset.values
    z = 5.0 * X[:, v1] + 3.0 * X[:, v2]
    y = output.labels.labels == 2
    assert y.mean() == pytest.approx(expit(z).mean(), abs=0.02)
    edges = np.quantile(z, [0.0, 0.2, 0.4, 0.6, 0.8, 1.0])
    bins = np.clip(np.searchsorted(edges, z, side="right") - 1, 0, 4)
    for b in range(5):
        rows = bins == b
        assert y[rows].mean() == pytest.approx(expit(z[rows]).mean(), abs=0.04)
