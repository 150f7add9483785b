import os
from functools import lru_cache

from dotenv import load_dotenv
from pydantic import ConfigDict
from pydantic_settings import BaseSettings

load_dotenv()


class Settings(BaseSettings):
    # Runtime
    CPATH_THREADS: int = 0  # 0 = one worker per CPU
    CPATH_LOG_LEVEL: str = "INFO"
    CPATH_DEFAULT_SEED: int = 0

    # External model bridge
    CPATH_HANDSHAKE_TIMEOUT: float = 10.0
    CPATH_REQUEST_TIMEOUT: float = 120.0

    model_config = ConfigDict(
        case_sensitive=True,
        env_file=".env",
        extra="ignore"
    )

    def worker_count(self) -> int:
        """Resolve CPATH_THREADS to a concrete worker count."""
        if self.CPATH_THREADS > 0:
            return self.CPATH_THREADS
        return os.cpu_count() or 1


@lru_cache()
def get_settings() -> Settings:
    """
    Get cached settings instance.
    Returns:
        Settings: Application settings
    """
    return Settings()
