import pytest

from src.evaluation.studies import (
    StudyConfig,
    correlation_study,
    coverage_study,
    is_non_increasing,
    knowledge_study,
    noise_sweep
)
from src.explain.importance import StationaryConfig
from src.models.forest import ForestConfig

QUICK = StudyConfig(n_rows=80, n_iter=200, forest=ForestConfig(n_trees=25), pfi_repeats=3)
FULL = StudyConfig()


def test_is_non_increasing():
    assert is_non_increasing([1.0, 0.9, 0.92, 0.7])
    assert not is_non_increasing([0.7, 0.9])


def test_coverage_study_layout():
    result = coverage_study("cond-indep", 2, seeds=[0, 1], config=QUICK)
    assert set(result) == {"gini", "pfi", "cpath-fraction", "cpath-stationary"}
    for method in result.values():
        assert len(method["values"]) == 2
        assert 0.0 <= method["mean"] <= 1.0


def test_cond_indep_is_mostly_covered_at_small_scale():
    result = coverage_study("cond-indep", 2, seeds=range(3), config=QUICK)
    assert result["gini"]["mean"] >= 0.8
    assert result["cpath-fraction"]["mean"] >= 2 / 3


def test_correlation_study_layout():
    result = correlation_study("cond-dep-1", seeds=[0, 1], config=QUICK)
    assert set(result) == {"pfi", "cpath-fraction", "cpath-stationary"}
    for method in result.values():
        assert all(-1.0 <= v <= 1.0 for v in method["values"])


def test_knowledge_study_layout():
    result = knowledge_study(seeds=[0, 1], n_vertices=10, n_paths=10, config=QUICK)
    assert set(result) == {"cpath", "cpath-know"}
    assert len(result["cpath"]["values"]) == 2


@pytest.mark.slow
def test_signal_coverage_over_fifty_seeds():
    seeds = range(50)
    indep = coverage_study("cond-indep", 2, seeds, FULL)
    assert indep["gini"]["mean"] == 1.0
    assert indep["cpath-fraction"]["mean"] == 1.0
    assert coverage_study("cond-dep-1", 2, seeds, FULL)["cpath-fraction"]["mean"] == pytest.approx(0.96, abs=0.10)
    assert coverage_study("correlation", 2, seeds, FULL)["cpath-fraction"]["mean"] == pytest.approx(0.96, abs=0.10)


@pytest.mark.slow
def test_fraction_importance_tracks_gini():
    result = correlation_study("cond-dep-1", range(50), config=FULL)
    assert result["cpath-fraction"]["mean"] >= 0.85
    assert result["cpath-fraction"]["min"] >= 0.4
    assert result["pfi"]["mean"] >= 0.85


@pytest.mark.slow
def test_coverage_degrades_with_noise():
    sweep = noise_sweep("cond-dep-1", [2, 4, 6, 8, 10], range(50), FULL)
    means = [sweep[n]["cpath-fraction"]["mean"] for n in (2, 4, 6, 8, 10)]
    assert is_non_increasing(means)
    assert means[-1] >= 0.60


@pytest.mark.slow
def test_knowledge_graph_helps_small_budgets():
    seeds = range(100)
    small = knowledge_study(seeds, n_vertices=20, k=4, n_paths=25, config=FULL)
    assert small["cpath-know"]["mean"] > small["cpath"]["mean"]
    large = knowledge_study(seeds, n_vertices=20, n_paths=100, k_diameter_factor=3, config=FULL)
    assert large["cpath"]["mean"] > large["cpath-know"]["mean"]


def test_study_config_defaults():
    assert FULL.n_iter == 1000 and FULL.k == 4
    assert FULL.stationary == StationaryConfig()
