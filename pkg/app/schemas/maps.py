import math
from enum import Enum

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, model_validator

from app.exceptions.maps import TailLengthError
from app.schemas.special import DeHaanModel, SlowlyVarying


class MapFamily(str, Enum):
    LSV = "lsv"
    LSV0 = "lsv0"
    DOUBLING = "doubling"


class MapSpec(BaseModel):
    family: MapFamily
    alpha: float | None = Field(None, description="Показатель alpha >= 1 (только для LSV), beta = 1/alpha")

    @model_validator(mode="after")
    def check_alpha(self):
        if self.family is MapFamily.LSV:
            if self.alpha is None or self.alpha < 1:
                raise ValueError("Для LSV требуется alpha >= 1 (режим бесконечной меры)")
        elif self.alpha is not None:
            raise ValueError(f"Параметр alpha не используется семейством {self.family.value}")
        return self

    @property
    def beta(self) -> float:
        if self.family is MapFamily.LSV:
            return 1.0 / self.alpha
        if self.family is MapFamily.LSV0:
            return 0.0
        return 1.0

    @property
    def top(self) -> float:
        """Предел левой ветви в точке 1/2 слева."""
        if self.family is MapFamily.LSV0:
            return 0.5 * (1 + 0.5 * math.exp(-2.0))
        return 1.0

    model_config = {
        "json_schema_extra": {
            "example": {
                "family": "lsv",
                "alpha": 2.0,
            }
        }
    }


class TailSequence(BaseModel):
    model_config = ConfigDict(arbitrary_types_allowed=True)

    x: np.ndarray = Field(..., description="x_1, ..., x_N; x_1 = 1/2")

    @property
    def N(self) -> int:
        return len(self.x)

    @property
    def y(self) -> np.ndarray:
        return (self.x + 1) / 2

    def x_of(self, n):
        """x_n с соглашением x_0 = 1."""
        n = np.asarray(n)
        if np.any(n > self.N) or np.any(n < 0):
            raise TailLengthError(requested=int(np.max(n)), available=self.N)
        padded = np.concatenate(([1.0], self.x))
        return padded[n]

    def y_of(self, n):
        return (self.x_of(n) + 1) / 2


class TailModel(BaseModel):
    model_config = ConfigDict(arbitrary_types_allowed=True)

    beta: float = Field(..., ge=0, le=1)
    c: float = Field(..., gt=0)
    ell: SlowlyVarying
    H: np.ndarray | None = Field(None, description="H(n), n = 1..len(H)")
    H_constant: float = Field(0.0, description="Оценка C в |H(n)| <= C n^{-2 beta} по последней декаде")
    de_haan: DeHaanModel | None = None

    def H_of(self, n):
        n = np.asarray(n)
        if self.H is None:
            return np.zeros(n.shape)
        inside = (n >= 1) & (n <= len(self.H))
        return np.where(inside, self.H[np.clip(n, 1, len(self.H)) - 1], 0.0)

    def tail(self, n):
        """mu(phi > n)."""
        n = np.asarray(n, dtype=float)
        if self.beta == 0:
            return self.ell(n)
        return self.c * (n ** (-self.beta) + self.H_of(n.astype(int)))


class TailSplit(BaseModel):
    b_monotone: bool
    c_partial_sums: list[float]
    c_last_decade_increment: float


class TailLawRow(BaseModel):
    n: int
    x_n: float
    ratio: float
    error_bar: float = Field(..., description="Накопленная погрешность обратных ветвей, n * ROOT_TOL")
