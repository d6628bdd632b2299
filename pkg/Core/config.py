from functools import lru_cache

from pydantic import BaseSettings, Field, validator


class SettingsCls(BaseSettings):
    MAX_TOTAL_DIM: int = Field(256, gt=0)
    MAX_FACTOR_DIM: int = Field(16, gt=0)
    TOL_HERMITIAN: float = Field(1e-10, gt=0)
    TOL_TRACE: float = Field(1e-10, gt=0)
    TOL_PSD: float = Field(1e-10, gt=0)
    TOL_UNITARY: float = Field(1e-10, gt=0)
    TOL_NORM: float = Field(1e-10, gt=0)
    EPS_DEG: float = Field(1e-7, gt=0)
    CMIN_RESTARTS: int = Field(16, ge=1)
    CMIN_MAX_ITERS: int = Field(2000, ge=1)
    CMIN_TOL: float = Field(1e-9, gt=0)
    CMIN_WORKERS: int = Field(1, ge=1)
    MAX_ANCILLA_DIM: int = Field(4, ge=1)
    SEARCH_RESTARTS: int = Field(4, ge=1)
    SEARCH_MAX_ITERS: int = Field(4000, ge=1)
    CLASSIFY_TOL: float = Field(1e-8, gt=0)
    SEED: int = 42
    SUITE_TRIALS: int = Field(40, ge=1)
    SUITE_TOL: float = Field(1e-6, gt=0)
    LOG_LEVEL: str = "WARNING"

    class Config:
        env_prefix = "CORRCOH__"
        env_file = ".env"

    # noinspection PyMethodParameters
    @validator("MAX_FACTOR_DIM")
    def check__factor_dim(cls, v, values):
        total = values.get("MAX_TOTAL_DIM")
        if total is not None and v > total:
            raise ValueError(
                f"MAX_FACTOR_DIM={v} exceeds MAX_TOTAL_DIM={total}"
            )
        return v

    # noinspection PyMethodParameters
    @validator("LOG_LEVEL")
    def process__log_level(cls, v):
        return v.upper()


@lru_cache
def configure():
    return SettingsCls()


Settings = configure()
