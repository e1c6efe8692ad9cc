from pydantic_settings import BaseSettings, SettingsConfigDict


class Settings(BaseSettings):
    NODE_LIMIT: int = 200_000
    BRUTE_FORCE_LIMIT: int = 50_000
    SIMULATION_TRIALS: int = 10_000
    DEFAULT_SEED: int = 0
    LOG_LEVEL: str = "WARNING"
    SVG_WIDTH: float = 8.0
    SVG_HEIGHT: float = 4.5
    API_TITLE: str = "anytime-sched"

    model_config = SettingsConfigDict(env_file=".env", env_prefix="ANYTIME_", extra="ignore")


settings = Settings()
