import numpy as np
from pydantic import BaseModel, ConfigDict, Field, model_validator
from scipy import special

from app.schemas.maps import TailModel
from app.schemas.reports import SlopeFit


class ReturnDistribution(BaseModel):
    """P(X = j) = f_j, j = 1..N, и аналитическая масса хвоста за N."""

    model_config = ConfigDict(arbitrary_types_allowed=True)

    f: np.ndarray = Field(..., description="f_1, ..., f_N")
    tail_mass: float = Field(0.0, ge=0, description="sum_{j > N} f_j")
    model: TailModel | None = None

    @model_validator(mode="after")
    def check_mass(self):
        if np.any(self.f < 0):
            raise ValueError("Вероятности f_j должны быть неотрицательными")
        total = float(np.sum(self.f)) + self.tail_mass
        if abs(total - 1) > 1e-12:
            raise ValueError(f"Полная масса распределения {total!r} != 1")
        return self

    @property
    def N(self) -> int:
        return len(self.f)

    def tail(self, n):
        """T(n) = sum_{j > n} f_j."""
        n = np.asarray(n)
        suffix = np.concatenate((np.cumsum(self.f[::-1])[::-1], [0.0])) + self.tail_mass
        return np.where(n >= self.N, self.tail_mass, suffix[np.clip(n, 0, self.N)])


class ScalarRenewal(BaseModel):
    model_config = ConfigDict(arbitrary_types_allowed=True)

    u: np.ndarray = Field(..., description="u_0, ..., u_{n_max}")

    @property
    def n_max(self) -> int:
        return len(self.u) - 1

    @property
    def U(self) -> np.ndarray:
        """U_n = sum_{j <= n} u_j."""
        return np.cumsum(self.u)


class AsymptoticExpansion(BaseModel):
    beta: float = Field(..., gt=0, lt=1)
    c: float = Field(..., gt=0)
    c_H: float = 0.0
    c_H_error: float = 0.0
    k: int = Field(..., ge=0)
    d: list[float] = Field(..., description="d_j = c_H^j / Г((j+1)beta - (j-1)), j = 0..k")

    @property
    def exponents(self) -> np.ndarray:
        j = np.arange(self.k + 1)
        return (j + 1) * self.beta - j

    @property
    def normalization(self) -> float:
        """c Г(1-beta)."""
        return self.c * float(special.gamma(1 - self.beta))

    @property
    def C(self) -> list[float]:
        """Скалярные коэффициенты C_j = d_j / (c Г(1-beta))."""
        return [d / self.normalization for d in self.d]


class ResidualRow(BaseModel):
    n: int
    partial_sum: float
    predicted: float
    residual: float


class ResidualReport(BaseModel):
    rows: list[ResidualRow]
    slope: SlopeFit
    terms: int


class OscillationRow(BaseModel):
    n: int
    ratio: float


class OscillationReport(BaseModel):
    rows: list[OscillationRow]
    limit: float
    last_decade_spread: float


class KaramataRow(BaseModel):
    n: int
    partial_sum: float
    first_order: float
    ratio: float
