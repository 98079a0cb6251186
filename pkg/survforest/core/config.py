"""
Configuration settings for the survival forest toolkit.

Loads process-wide tunables from environment variables (prefix ``SBRSF_``)
and an optional ``.env`` file, with defaults suited to desk-scale runs.
Experiment and simulation files are handled separately by
``survforest.core.flatconfig`` and validated by the models in ``schemas/``.
"""

from typing import List

from pydantic_settings import BaseSettings, SettingsConfigDict


class Settings(BaseSettings):
    model_config = SettingsConfigDict(
        env_prefix="SBRSF_",
        env_file=".env",
        case_sensitive=True,
        extra="ignore",
    )

    # Application Settings
    APP_NAME: str = "survforest"
    APP_VERSION: str = "1.0.0"
    LOG_LEVEL: str = "INFO"

    # Execution Settings
    WORKERS: int = 1  # joblib worker count; results never depend on it

    # Forest Defaults
    DEFAULT_N_TREES: int = 200
    DEFAULT_D0: int = 3  # minimum unique deaths per terminal node
    BOOTSTRAP_RETRY_CAP: int = 100  # redraws per tree before giving up

    # Experiment Defaults
    DEFAULT_SPLIT_FRACTION: float = 0.7
    DEFAULT_GRID: str = "1:20:1"  # integer days 1..20

    # Simulation Settings
    DEFAULT_TARGET_CENSORING: float = 0.2
    CALIBRATION_PILOT_SIZE: int = 20000
    CALIBRATION_TOLERANCE: float = 1e-3
    CALIBRATION_MAX_ITER: int = 200

    # Output Settings
    CSV_FLOAT_FORMAT: str = "%.17g"  # bitwise decimal round-trip
    QUARANTINE_DIRNAME: str = "quarantine"
    STAGING_DIRNAME: str = ".staging"
    MANIFEST_FILENAME: str = "manifest.json"
    PLOT_HASH_SALT: str = "survforest"

    # Packages whose versions are recorded in run manifests
    MANIFEST_PACKAGES: List[str] = [
        "numpy",
        "scipy",
        "pandas",
        "joblib",
        "matplotlib",
        "pydantic",
        "pydantic-settings",
        "typer",
    ]


# Create global settings instance
settings = Settings()
