from pydantic_settings import BaseSettings, SettingsConfigDict
from typing import Optional
from pathlib import Path


class Settings(BaseSettings):
    # Base
    PROJECT_NAME: str = "Relative Entropy Second Law Toolkit"
    VERSION: str = "0.1.0"
    API_V1_STR: str = "/api/v1"

    # Server
    HOST: str = "127.0.0.1"
    PORT: int = 8000
    RELOAD: bool = False

    # Operators and states
    HERMITICITY_TOL: float = 1e-12  # max absolute element deviation
    TRACE_TOL: float = 1e-10
    EIGENVALUE_CLAMP_TOL: float = 1e-10
    EIGENVALUE_CUTOFF: float = 1e-14  # 0 ln 0 := 0 below this
    SUPPORT_TOL: float = 1e-10
    DEGENERACY_TOL: float = 1e-9

    # Channels
    CHANNEL_TOL: float = 1e-10
    FIXED_POINT_TOL: float = 1e-10
    VERIFY_TOL: float = 1e-8

    # Second law ledgers
    LEDGER_TOL: float = 1e-8
    COMPARISON_TOL: float = 1e-9

    # Lattice simulator
    MAX_CHAIN_SITES: int = 12
    LATTICE_FIXED_POINT_TOL: float = 1e-9
    MAX_WORKERS: int = 1

    # Output
    OUTPUT_DIR: Optional[Path] = None

    # Logging
    LOG_LEVEL: str = "INFO"
    LOG_FORMAT: str = "%(asctime)s - %(name)s - %(levelname)s - %(message)s"
    LOG_FILE: Optional[Path] = None

    model_config = SettingsConfigDict(
        case_sensitive=True,
        env_file=".env",
        env_prefix="RELENTROPY_",
        extra="ignore",
    )


settings = Settings()
