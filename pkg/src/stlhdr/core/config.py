from pydantic_settings import BaseSettings


class Settings(BaseSettings):
    APP_NAME: str = "stlhdr"
    LOG_LEVEL: str = "INFO"

    # Estimator defaults
    K_CAP: int = 40
    CI_LEVEL: float = 0.95
    THINNING: int = 4
    MIN_SAMPLES_PER_NESTING: int = 8
    MAX_SAMPLES_PER_NESTING: int = 4096
    DEFAULT_SAMPLES_PER_NESTING: int = 128
    DEFAULT_P_GUESS: float = 1e-3
    THREADS: int = 1

    # Geometry / numerics
    ENUMERATION_CAP: int = 100_000
    RIDGE_SCALE: float = 1e-12

    model_config = {"env_file": ".env", "env_prefix": "STLHDR_", "extra": "ignore"}


settings = Settings()
