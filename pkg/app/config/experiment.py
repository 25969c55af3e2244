import json
from enum import Enum
from pathlib import Path

from pydantic import ValidationError, model_validator
from pydantic_settings import BaseSettings, SettingsConfigDict

from app.config.main import settings
from app.exceptions.base import ValidationFailure
from app.schemas.maps import MapFamily, MapSpec


class ExperimentConfig(BaseSettings):
    """Параметры одного запуска: файл KEY=VALUE плюс флаги командной строки (флаги важнее)."""

    model_config = SettingsConfigDict(env_file_encoding="utf-8", extra="ignore", env_parse_none_str="None")

    EXPERIMENT: str = "tails"
    FAMILY: MapFamily = MapFamily.LSV
    ALPHA: float | None = 2.0
    GRID: int = 256
    NTRUNC: int = 2000
    NMAX: int = 1000
    GAMMA: float = 0.25
    BETA: float = 0.5
    P: int = 2
    OUT: str = settings.OUTPUT_DIR

    CHECK: str = "all"
    RHO: float = 0.5
    U: float = 1.0
    THETA: float = 1.0
    R: float = 1000.0
    EPSILONS: list[float] = [0.5, 0.2, 0.1]
    DEGREES: list[int] = [4, 8, 16, 32]
    SEQUENCE: str = "ones"
    N_VALUES: list[int] = [50, 100, 500]
    LADDER_DEPTH: int = 0

    @classmethod
    def settings_customise_sources(
        cls, settings_cls, init_settings, env_settings, dotenv_settings, file_secret_settings
    ):
        return init_settings, dotenv_settings

    @model_validator(mode="after")
    def check_ranges(self):
        if self.FAMILY is MapFamily.LSV and (self.ALPHA is None or self.ALPHA < 1):
            raise ValueError("ALPHA должен быть >= 1 для семейства lsv")
        if self.FAMILY is not MapFamily.LSV:
            self.ALPHA = None
        if self.GRID < 8:
            raise ValueError("GRID должен быть не меньше 8")
        if self.NTRUNC < 1:
            raise ValueError("NTRUNC должен быть положительным")
        if not 1 <= self.NMAX <= settings.RENEWAL_NMAX_LIMIT:
            raise ValueError(f"NMAX должен лежать в [1, {settings.RENEWAL_NMAX_LIMIT}]")
        if not 0 < self.GAMMA < 0.5:
            raise ValueError("GAMMA должен лежать в (0, 1/2)")
        if not 0 < self.BETA <= 1:
            raise ValueError("BETA должен лежать в (0, 1]")
        return self

    @property
    def map_spec(self) -> MapSpec:
        return MapSpec(family=self.FAMILY, alpha=self.ALPHA)

    @classmethod
    def load(cls, path: str | Path | None = None, **overrides):
        if path is not None and not Path(path).is_file():
            raise ValidationFailure("Config file not found", path=str(path))
        values = {key.upper(): value for key, value in overrides.items() if value is not None}
        try:
            return cls(_env_file=path, **values)
        except ValidationError as e:
            raise ValidationFailure(f"Invalid experiment config: {e.errors()[0]['msg']}")

    def dump(self, path: str | Path) -> Path:
        path = Path(path)
        lines = []
        for key, value in self.model_dump().items():
            if isinstance(value, Enum):
                value = value.value
            elif isinstance(value, list):
                value = f"'{json.dumps(value)}'"
            elif isinstance(value, float):
                value = repr(value)
            lines.append(f"{key}={value}")
        path.write_text("\n".join(lines) + "\n", encoding="utf-8")
        return path
