from pydantic import Field
from pydantic_settings import BaseSettings, SettingsConfigDict
from typing import Literal


class Settings(BaseSettings):
    # Solver settings
    PRECISION: float = Field(1e-10, gt=0)
    SERIES_TARGET: float = Field(1e-13, gt=0)
    MAX_TERMS: int = Field(400, ge=8)
    MIN_IM_FOR_SERIES: float = Field(0.3, gt=0)

    # Zero counting
    CONTOUR_HEIGHT: float = Field(12.0, gt=0)
    CUSP_RADIUS: float = Field(0.02, gt=0)

    # Curve tracing
    TRACE_MAX_STEP: float = Field(0.02, gt=0)
    TRACE_IM_CUTOFF: float = Field(30.0, gt=0)
    TRACE_CUSP_CUTOFF: float = Field(1e-3, gt=0)

    # Monodromy
    ODE_RTOL: float = Field(1e-10, gt=0)

    # Output / runtime
    OUTPUT_FORMAT: Literal["json", "csv", "svg"] = "json"
    LOG_LEVEL: str = "INFO"
    WORKERS: int = Field(1, ge=1)

    # HTTP surface
    API_HOST: str = "0.0.0.0"
    API_PORT: int = 8000

    model_config = SettingsConfigDict(
        env_prefix="E6_",
        env_file=".env",
        extra="allow",
    )


settings = Settings()
