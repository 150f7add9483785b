import json
from pathlib import Path
from typing import Any, Dict, List

from ..config.run_config import RunConfig
from .base_agent import BaseAgent
from .evaluation_agent import EvaluationAgent
from .explain_agent import ExplainAgent
from .simulation_agent import SimulationAgent

DEFAULT_OUT_DIR = "cpath-run"


class PipelineAgent(BaseAgent):
    def __init__(self):
        super().__init__(
            name="Pipeline Agent",
            role_description="Coordinator agent that runs simulate, train, explain and evaluate in sequence and keeps the run history."
        )
        self.simulation_agent = SimulationAgent()
        self.explain_agent = ExplainAgent()
        self.evaluation_agent = EvaluationAgent()
        self.run_history: List[Dict[str, Any]] = []

    def add_to_history(self, config: RunConfig, agent_outputs: Dict[str, Any]):
        self.run_history.append({
            "config": config.model_dump(mode="json"),
            "status": agent_outputs["explain"]["status"],
            "ranking": agent_outputs["explain"]["ranking"],
            "evaluation": agent_outputs["evaluation"]["summary"]
        })

    @staticmethod
    def stage_config(config: RunConfig, **updates: Any) -> RunConfig:
        """Revalidated copy of the pipeline config for one stage."""
        return RunConfig.model_validate({**config.model_dump(), **updates})

    async def process(self, config: RunConfig) -> Dict[str, Any]:
        """
        Run the whole workflow in `out_dir`:
        1. Simulate a dataset with its signal sidecar
        2. Train a forest and explain it
        3. Evaluate the configured explainer on the same data and forest
        """
        out_dir = Path(config.out_dir or DEFAULT_OUT_DIR)
        out_dir.mkdir(parents=True, exist_ok=True)
        data_path = str(out_dir / "data.csv")
        model_path = str(out_dir / "forest.json")
        with_graph = config.scenario == "barabasi"
        graph_path = str(out_dir / "graph.csv") if with_graph else None

        simulation = await self.simulation_agent.process(self.stage_config(
            config, subcommand="simulate", out=data_path, graph_out=graph_path
        ))

        explanation = await self.explain_agent.process(self.stage_config(
            config,
            subcommand="explain",
            data=data_path,
            labels="y",
            model=None,
            model_command=None,
            graph=config.graph or graph_path,
            model_out=model_path,
            out=str(out_dir / "report.json"),
            dot_out=str(out_dir / "transitions.dot"),
            paths_out=str(out_dir / "paths.json"),
            presence_out=str(out_dir / "presence.csv")
        ))

        evaluation = await self.evaluation_agent.process(self.stage_config(
            config,
            subcommand="evaluate",
            data=data_path,
            labels="y",
            model=model_path,
            model_command=None,
            graph=config.graph or graph_path,
            signal=simulation["signal_features"],
            out=str(out_dir / "evaluation.json")
        ))

        final_response = {
            "simulation": simulation,
            "explain": {
                "status": explanation["status"],
                "ranking": explanation["ranking"],
                "report": str(out_dir / "report.json")
            },
            "evaluation": evaluation,
            "run_history": self.run_history
        }
        self.add_to_history(config, final_response)
        return final_response

    async def run_seeds(self, config: RunConfig) -> Dict[str, Any]:
        """
        Run the pipeline `config.runs` times on seeds seed, seed+1, ... and write the
        accumulated run history to `out_dir/history.json`.
        """
        out_dir = Path(config.out_dir or DEFAULT_OUT_DIR)
        results = []
        for r in range(config.runs):
            seed = config.seed + r
            run_dir = out_dir / f"seed-{seed}" if config.runs > 1 else out_dir
            results.append(await self.process(config.model_copy(update={
                "seed": seed,
                "forest": config.forest.model_copy(update={"seed": config.forest.seed + r}),
                "out_dir": str(run_dir)
            })))
        out_dir.mkdir(parents=True, exist_ok=True)
        history_path = out_dir / "history.json"
        history_path.write_text(json.dumps(self.run_history, indent=2, sort_keys=True) + "\n", encoding="utf-8")
        self.logger.info(f"{len(self.run_history)} pipeline runs recorded in {history_path}")
        return {"runs": results, "history": str(history_path)}
