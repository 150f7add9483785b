import asyncio
from abc import ABC, abstractmethod
from typing import Any, Callable, Dict, TypeVar

from loguru import logger
from pydantic import ValidationError

from ..config.run_config import RunConfig
from ..config.settings import get_settings
from ..exceptions import ConfigError, CPathError

T = TypeVar("T")


class BaseAgent(ABC):
    def __init__(self, name: str, role_description: str):
        """
        Initialize the base agent.

        Args:
            name (str): Name of the agent
            role_description (str): Description of the agent's role
        """
        self.name = name
        self.role_description = role_description
        self.settings = get_settings()
        self.logger = logger.bind(agent=name)

    @abstractmethod
    async def process(self, config: RunConfig) -> Dict[str, Any]:
        """
        Run the agent's stage for one configuration.

        Args:
            config (RunConfig): Validated run configuration

        Returns:
            Dict[str, Any]: Stage results
        """
        pass

    async def run_stage(self, stage: str, fn: Callable[..., T], *args: Any, **kwargs: Any) -> T:
        """
        Run a blocking stage in a worker thread.

        Toolkit errors keep their type and take the stage label when they carry none
        of their own; anything else becomes a CPathError naming the stage.
        """
        self.logger.debug(f"Starting {stage}")
        try:
            return await asyncio.to_thread(fn, *args, **kwargs)
        except CPathError as e:
            if e.stage == e.default_stage:
                e.with_stage(stage)
            self.logger.error(f"Error processing {stage}: {e.message}")
            raise
        except ValidationError as e:
            raise ConfigError(f"Error processing {stage}: {e}", stage=stage) from e
        except Exception as e:
            raise CPathError(f"Error processing {stage}: {str(e)}", stage=stage) from e

    def __str__(self) -> str:
        """String representation of the agent."""
        return f"{self.name} - {self.role_description}"
