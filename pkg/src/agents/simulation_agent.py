from pathlib import Path
from typing import Any, Dict

from ..config.run_config import RunConfig
from ..simulation.simgen import SimConfig, simulate, write_simulation
from .base_agent import BaseAgent


def sim_config(config: RunConfig, seed: int) -> SimConfig:
    return SimConfig(scenario=config.scenario, n=config.n_rows, n_noise=config.n_noise, seed=seed, m=config.m)


class SimulationAgent(BaseAgent):
    def __init__(self):
        super().__init__(
            name="Simulation Agent",
            role_description="Draws synthetic benchmark datasets with planted signal features and writes them with their signal sidecar"
        )

    async def process(self, config: RunConfig) -> Dict[str, Any]:
        """
        Simulate one dataset and write it to disk.

        Args:
            config (RunConfig): needs scenario, n_noise, n_rows, seed and out

        Returns:
            Dict[str, Any]: file locations and the planted signal features
        """
        output = await self.run_stage("simgen", simulate, sim_config(config, config.seed))
        sidecar = await self.run_stage("simgen", write_simulation, output, config.out, None, config.graph_out)
        self.logger.info(
            f"Simulated {config.scenario} ({output.dataset.n}x{output.dataset.p}) to {config.out}; "
            f"signal {', '.join(output.signal_names())}"
        )
        return {
            "data": str(config.out),
            "sidecar": str(sidecar),
            "graph": str(config.graph_out) if config.graph_out else None,
            "signal_features": output.signal_names(),
            "shape": [output.dataset.n, output.dataset.p]
        }


def sidecar_for(csv_path: str) -> Path:
    return Path(csv_path).with_suffix(".signal.json")
