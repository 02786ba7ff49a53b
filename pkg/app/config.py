"""
Configuration settings for attsync
"""
import logging
from functools import lru_cache

from pydantic_settings import BaseSettings


class Settings(BaseSettings):
    """Application settings"""

    # Application
    APP_NAME: str = "Attitude Synchronization Lab"
    APP_VERSION: str = "1.0.0"
    DEBUG: bool = False

    # Server
    HOST: str = "0.0.0.0"
    PORT: int = 8001

    # Logging
    LOG_LEVEL: str = "INFO"
    LOG_FORMAT: str = "%(asctime)s - %(name)s - %(levelname)s - %(message)s"

    # CORS
    ALLOWED_ORIGINS: list = [
        "http://localhost:3000",
        "http://localhost:8000",
    ]

    # Numerical tolerances
    ZERO_TOL: float = 1e-12  # "zero" for scalar parts and strict inequalities
    UNITY_TOL: float = 1e-9  # unity invariant of a stored quaternion
    UNITY_RENORM_TOL: float = 1e-6  # library ceiling for renormalize-with-warning
    CONFIG_UNITY_TOL: float = 1e-3  # ceiling for quaternions read from config files

    # Integrator defaults
    DEFAULT_DT: float = 0.01
    DEFAULT_T_FINAL: float = 60.0
    DEFAULT_RECORD_EVERY: int = 1
    MAX_DT: float = 0.1

    # Diagnostics
    MONOTONE_TOL: float = 1e-9
    CONVERGENCE_TOL: float = 1e-3
    CONVERGENCE_WINDOW: int = 10

    # Output
    OUTPUT_DIR: str = "runs"
    CSV_FLOAT_FORMAT: str = "%.17g"

    # Concurrency
    GOLDENS_WORKERS: int = 3
    SWEEP_WORKERS: int = 4

    class Config:
        env_file = ".env"
        case_sensitive = True
        extra = "ignore"  # Allow extra fields in .env file


@lru_cache()
def get_settings():
    """Get cached settings instance"""
    return Settings()


def setup_logging(level: str | None = None) -> logging.Logger:
    """
    Configure the package logger once.
    Calling again only adjusts the level.
    """
    settings = get_settings()
    logger = logging.getLogger("app")
    if not logger.handlers:
        handler = logging.StreamHandler()
        handler.setFormatter(logging.Formatter(settings.LOG_FORMAT))
        logger.addHandler(handler)
    logger.setLevel((level or settings.LOG_LEVEL).upper())
    return logger
