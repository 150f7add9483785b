import json
import sys
from pathlib import Path

import pytest

from src.agents.base_agent import BaseAgent
from src.agents.evaluation_agent import EvaluationAgent
from src.agents.explain_agent import ExplainAgent, replay, run_explain
from src.agents.pipeline_agent import PipelineAgent
from src.agents.simulation_agent import SimulationAgent
from src.config.run_config import RunConfig
from src.exceptions import CPathError, DataError
from src.explain.pathgen import PathSet
from src.export.artifacts import ExplainReport, parse_paths_json
from src.simulation.simgen import SimConfig, simulate, simulate_barabasi, write_simulation

ECHO_MODEL = str(Path(__file__).parent / "fixtures" / "echo_model.py")
SMALL_FOREST = {"n_trees": 20, "seed": 0}


@pytest.fixture
def sim_csv(tmp_path):
    """Conditional in-dependency data with two noise features, written with its sidecar."""
    path = tmp_path / "data.csv"
    write_simulation(simulate(SimConfig(scenario="cond-indep", n=100, n_noise=2, seed=7)), path)
    return path


@pytest.fixture
def explain_config(sim_csv, tmp_path):
    def _config(**updates):
        values = {
            "subcommand": "explain",
            "data": str(sim_csv),
            "labels": "y",
            "n_iter": 200,
            "k": 4,
            "seed": 7,
            "forest": SMALL_FOREST,
            "out": str(tmp_path / "report.json")
        }
        values.update(updates)
        return RunConfig.model_validate(values)
    return _config


class EchoStage(BaseAgent):
    def __init__(self):
        super().__init__(name="Echo Agent", role_description="Runs one stage for tests")

    async def process(self, config):
        return await self.run_stage("echo", lambda: {"seed": config.seed})


def test_agent_string_representation():
    agent = ExplainAgent()
    assert str(agent).startswith("Explain Agent - ")
    assert agent.settings is not None


@pytest.mark.asyncio
async def test_run_stage_returns_result():
    result = await EchoStage().process(RunConfig(subcommand="simulate", out="x.csv", seed=5))
    assert result == {"seed": 5}


@pytest.mark.asyncio
async def test_run_stage_wraps_foreign_errors():
    agent = EchoStage()

    def crash():
        raise KeyError("boom")

    with pytest.raises(CPathError) as info:
        await agent.run_stage("crash", crash)
    assert info.value.stage == "crash"
    assert "Error processing crash" in info.value.message


@pytest.mark.asyncio
async def test_run_stage_keeps_typed_errors():
    def fail():
        raise DataError("bad cell")

    with pytest.raises(DataError) as info:
        await EchoStage().run_stage("load", fail)
    assert info.value.stage == "load"
    assert info.value.exit_code == 2


@pytest.mark.asyncio
async def test_simulation_agent_writes_dataset_and_sidecar(tmp_path):
    config = RunConfig(subcommand="simulate", scenario="barabasi", n_noise=4, n_rows=40, seed=2,
                       out=str(tmp_path / "sim.csv"), graph_out=str(tmp_path / "graph.csv"))
    result = await SimulationAgent().process(config)
    assert result["shape"] == [40, 6]
    assert Path(result["sidecar"]).is_file()
    assert (tmp_path / "graph.csv").is_file()
    assert len(result["signal_features"]) == 2


@pytest.mark.asyncio
async def test_explain_agent_ranks_signal_features(explain_config):
    result = await ExplainAgent().process(explain_config())
    assert result["status"] == "ok"
    assert set(result["ranking"][:2]) == {"X1", "X2"}
    report = result["report"]
    assert sum(report.importance["fraction"]) == pytest.approx(1.0)
    assert sum(report.importance["stationary"]) == pytest.approx(1.0)
    assert report.paths["n_paths"] > 0


def test_report_is_written_and_readable(explain_config, tmp_path):
    report = run_explain(explain_config(
        dot_out=str(tmp_path / "t.dot"),
        paths_out=str(tmp_path / "paths.json"),
        presence_out=str(tmp_path / "presence.csv"),
        model_out=str(tmp_path / "forest.json"),
        adjacent=True
    ))
    restored = ExplainReport.read(tmp_path / "report.json")
    assert restored.importance == report.importance
    assert restored.provenance.seed == 7
    assert len(restored.provenance.model_fingerprint) == 64
    assert "adjacent" in restored.importance
    assert (tmp_path / "t.dot").read_text(encoding="utf-8").startswith("digraph")
    paths = parse_paths_json((tmp_path / "paths.json").read_text(encoding="utf-8"))
    assert isinstance(paths, PathSet) and len(paths) == report.paths["n_paths"]
    assert (tmp_path / "forest.json").is_file()


def test_same_config_same_report(explain_config):
    first = run_explain(explain_config(out=None)).model_dump()
    second = run_explain(explain_config(out=None)).model_dump()
    first["provenance"].pop("timestamp")
    second["provenance"].pop("timestamp")
    assert first == second


def test_threshold_one_writes_empty_report(explain_config, tmp_path):
    report = run_explain(explain_config(policy="threshold:1"))
    assert report.status == "no-counterfactuals"
    assert report.diagnostics
    assert report.importance["fraction"] is None
    written = json.loads((tmp_path / "report.json").read_text(encoding="utf-8"))
    assert written["status"] == "no-counterfactuals"


def test_replay_reproduces_report(explain_config, tmp_path):
    original = run_explain(explain_config())
    replayed = replay(tmp_path / "report.json")
    assert replayed.importance == original.importance
    assert replayed.transition_matrix == original.transition_matrix


def test_saved_forest_is_reused(explain_config, tmp_path):
    forest_path = str(tmp_path / "forest.json")
    trained = run_explain(explain_config(model_out=forest_path, out=None))
    reused = run_explain(explain_config(model=forest_path, out=None))
    assert reused.importance == trained.importance


def test_external_constant_model_finds_nothing(explain_config):
    command = f'"{sys.executable}" "{ECHO_MODEL}"'
    report = run_explain(explain_config(model_command=command, n_iter=20, out=None))
    assert report.status == "no-counterfactuals"


def test_knowledge_graph_explain(tmp_path):
    output = simulate_barabasi(n_vertices=8, m=1, n_rows=80, seed=4)
    data, graph = tmp_path / "data.csv", tmp_path / "graph.csv"
    write_simulation(output, data, graph_path=graph)
    report = run_explain(RunConfig(data=str(data), labels="y", graph=str(graph), n_iter=100,
                                   forest=SMALL_FOREST, seed=4))
    T = report.transition_matrix
    for u in range(8):
        for v in range(8):
            if T[u][v] and u != v:
                assert output.graph.has_edge(u, v)


@pytest.mark.asyncio
async def test_evaluation_agent_on_simulated_seeds(tmp_path):
    config = RunConfig(subcommand="evaluate", scenario="cond-indep", n_rows=80, explainer="gini",
                       metric="coverage", repeats=3, seed=1, forest=SMALL_FOREST,
                       out=str(tmp_path / "evaluation.json"))
    report = await EvaluationAgent().process(config)
    assert report["seeds"] == [1, 2, 3]
    assert len(report["values"]) == 3
    assert set(report["summary"]) == {"min", "mean", "max", "std"}
    assert json.loads((tmp_path / "evaluation.json").read_text(encoding="utf-8"))["metric"] == "coverage"


@pytest.mark.asyncio
async def test_evaluation_agent_reads_signal_sidecar(sim_csv):
    config = RunConfig(subcommand="evaluate", data=str(sim_csv), labels="y", explainer="cpath",
                       metric="coverage", n_iter=100, forest=SMALL_FOREST)
    report = await EvaluationAgent().process(config)
    assert 0.0 <= report["values"][0] <= 1.0


@pytest.mark.asyncio
async def test_evaluation_agent_sensitivity_and_infidelity(sim_csv):
    for metric in ("sensitivity:1", "infidelity", "correlation"):
        config = RunConfig(subcommand="evaluate", data=str(sim_csv), labels="y", explainer="pfi",
                           metric=metric, samples=20, pfi_repeats=2, forest=SMALL_FOREST)
        report = await EvaluationAgent().process(config)
        assert len(report["values"]) == 1


@pytest.mark.asyncio
async def test_pipeline_agent_full_process(tmp_path):
    agent = PipelineAgent()
    config = RunConfig(subcommand="pipeline", scenario="cond-indep", n_rows=80, n_iter=100,
                       forest=SMALL_FOREST, seed=7, out_dir=str(tmp_path / "run"))
    result = await agent.process(config)
    assert "simulation" in result
    assert "explain" in result
    assert "evaluation" in result
    for name in ("data.csv", "forest.json", "report.json", "transitions.dot", "paths.json", "evaluation.json"):
        assert (tmp_path / "run" / name).is_file()
    assert len(agent.run_history) == 1

    await agent.process(config)
    assert len(agent.run_history) == 2


@pytest.mark.asyncio
async def test_pipeline_agent_records_every_seed(tmp_path):
    agent = PipelineAgent()
    config = RunConfig(subcommand="pipeline", scenario="cond-indep", n_rows=60, n_iter=50,
                       forest=SMALL_FOREST, seed=3, runs=2, out_dir=str(tmp_path / "runs"))
    result = await agent.run_seeds(config)
    assert len(result["runs"]) == 2
    assert (tmp_path / "runs" / "seed-3" / "report.json").is_file()
    assert (tmp_path / "runs" / "seed-4" / "report.json").is_file()
    history = json.loads((tmp_path / "runs" / "history.json").read_text(encoding="utf-8"))
    assert [entry["config"]["seed"] for entry in history] == [3, 4]
