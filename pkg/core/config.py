import os
from pathlib import Path

from dotenv import load_dotenv
from pydantic_settings import BaseSettings, SettingsConfigDict

path = os.path.abspath(os.environ.get("DOTENV_PATH", ".env"))
if os.path.exists(path):
    load_dotenv(dotenv_path=Path(__file__).parent / path)


class ExponentConfig(BaseSettings):
    RHO_MAX: float = 1e4
    REL_TOL: float = 1e-12
    ABS_TOL: float = 1e-10
    Q_GRID: int = 200
    Q_GRID_COARSE: int = 30  # per dimension, input alphabets larger than 2

    model_config = SettingsConfigDict(env_prefix="EXPONENT_")


class DecodingConfig(BaseSettings):
    ENUMERATION_BUDGET: int = 10**7
    CHUNK_SIZE: int = 32768
    TIE_TOL: float = 1e-10
    MC_SAMPLES: int = 100_000
    SEED: int = 0
    CONFIDENCE_Z: float = 1.96

    model_config = SettingsConfigDict(env_prefix="DECODING_")


class AppendixConfig(BaseSettings):
    GRID_DENSITY: int = 30
    Q_MIN: float = 0.01
    Q_MAX: float = 0.99
    Q_POINTS: int = 49
    CONSTRAINT_TOL: float = 1e-12

    model_config = SettingsConfigDict(env_prefix="APPENDIX_")


class FigureConfig(BaseSettings):
    FIG1_POINTS: int = 300
    FIG2_POINTS: int = 411
    FIG2_EPS: float = 0.001
    FIG2_RATE_MAX_BITS: float = 0.205
    OUTPUT_DIR: str = "figures"

    model_config = SettingsConfigDict(env_prefix="FIGURE_")


class LoggingConfig(BaseSettings):
    LEVEL: str = "WARNING"
    FORMAT: str = "%(asctime)s %(levelname)s %(name)s: %(message)s"

    model_config = SettingsConfigDict(env_prefix="LOG_")


class CONFIG:
    EXPONENT = ExponentConfig()
    DECODING = DecodingConfig()
    APPENDIX = AppendixConfig()
    FIGURES = FigureConfig()
    LOGGING = LoggingConfig()
