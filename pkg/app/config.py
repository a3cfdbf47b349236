"""Application configuration using Pydantic Settings."""
from pydantic_settings import BaseSettings, SettingsConfigDict


class Settings(BaseSettings):
    """Engine settings loaded from environment variables."""

    # Application
    APP_NAME: str = "Support Accessibility Engine"
    APP_VERSION: str = "1.0.0"
    LOG_LEVEL: str = "INFO"

    # Parallelism (0 = available parallelism)
    WORKERS: int = 0

    # Support generation
    DEFAULT_ALPHA_DEG: float = 90.0

    # Accessibility analysis
    DEFAULT_LAMBDA: float = 0.001
    DEFAULT_N_SHARP_POINTS: int = 10

    # Build orientation search
    DEFAULT_W_ACC: float = 0.5
    DEFAULT_N_B: int = 100
    DEFAULT_N_B_STAR: int = 5

    # Support removal planning
    DEFAULT_HALT_FRACTION: float = 0.005  # 0.5% of the initial support volume

    # Platform slab under the near-net shape, in cells
    PLATFORM_THICKNESS: int = 2
    PLATFORM_MARGIN: int = 4

    # Brute-force oracle check
    ORACLE_MAX_CELLS: int = 32 ** 3
    ORACLE_QUERY_COUNT: int = 100
    ORACLE_TOLERANCE: float = 1e-9
    ORACLE_SEED: int = 0

    model_config = SettingsConfigDict(
        env_file=".env",
        env_file_encoding="utf-8",
        case_sensitive=True,
    )


# Global settings instance
settings = Settings()
