import os
import logging
from functools import lru_cache
from dotenv import load_dotenv
from pydantic import BaseModel, Field, field_validator

logger = logging.getLogger(__name__)

# Only fall back to a .env file when nothing toolkit-specific is set already
if not os.getenv("LOG_LEVEL") and not os.getenv("MLE_MAX_ITERATIONS"):
    try:
        load_dotenv()
    except Exception as e:
        logger.warning(f"Could not load .env file, using environment variables only: {e}")


class Settings(BaseModel):
    """Runtime configuration for the toolkit, read from the environment"""
    log_level: str = "INFO"
    environment: str = "development"
    log_dir: str = "logs"

    mle_max_iterations: int = Field(5000, ge=1)
    mle_tolerance: float = Field(1e-10, gt=0)
    mle_gradient_tolerance: float = Field(1e-8, gt=0)

    local_opt_starts: int = Field(32, ge=0)
    local_opt_max_iterations: int = Field(500, ge=1)
    local_opt_tolerance: float = Field(1e-10, gt=0)

    monte_carlo_trials: int = Field(100, ge=2)
    worker_threads: int = Field(1, ge=1)

    @field_validator("log_level")
    @classmethod
    def log_level_must_exist(cls, v):
        if not isinstance(logging.getLevelName(v.upper()), int):
            raise ValueError(f"Unknown log level: {v}")
        return v.upper()

    @field_validator("environment")
    @classmethod
    def environment_must_be_known(cls, v):
        if v not in ("development", "production"):
            raise ValueError("ENVIRONMENT must be 'development' or 'production'")
        return v

    @property
    def is_production(self) -> bool:
        return self.environment == "production"


# Environment variable -> Settings field
_ENV_FIELDS = {
    "LOG_LEVEL": "log_level",
    "ENVIRONMENT": "environment",
    "LOG_DIR": "log_dir",
    "MLE_MAX_ITERATIONS": "mle_max_iterations",
    "MLE_TOLERANCE": "mle_tolerance",
    "MLE_GRADIENT_TOLERANCE": "mle_gradient_tolerance",
    "LOCAL_OPT_STARTS": "local_opt_starts",
    "LOCAL_OPT_MAX_ITERATIONS": "local_opt_max_iterations",
    "LOCAL_OPT_TOLERANCE": "local_opt_tolerance",
    "MONTE_CARLO_TRIALS": "monte_carlo_trials",
    "WORKER_THREADS": "worker_threads",
}


@lru_cache
def get_settings() -> Settings:
    """
    Build the settings object from environment variables.

    Returns:
        Settings: validated configuration (cached)
    """
    values = {}
    for env_name, field_name in _ENV_FIELDS.items():
        raw = os.getenv(env_name)
        if raw is not None and raw != "":
            values[field_name] = raw
    return Settings(**values)


settings = get_settings()
