import math
from enum import Enum

import numpy as np
from numpy.polynomial import Chebyshev
from pydantic import BaseModel, Field, model_validator

from app.schemas.reports import SlopeFit


class PolySide(str, Enum):
    LOWER = "lower"
    UPPER = "upper"


class OneSidedPoly(BaseModel):
    """q(x) = x p(x), p задан коэффициентами Чебышёва на [0, 1]; q(0) = 0 по построению."""

    side: PolySide
    factor: list[float] = Field(..., description="Коэффициенты p по T_k(2x - 1)")
    gap: float = Field(..., description="Значение функционала зазора между q и индикатором")
    coefficients: list[float] | None = Field(None, description="b_1..b_m в мономиальном базисе (малые степени)")

    @property
    def degree(self) -> int:
        return len(self.factor)

    @property
    def coefficient_sum(self) -> float | None:
        if self.coefficients is None:
            return None
        return float(np.sum(np.abs(self.coefficients)))

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        return x * Chebyshev(self.factor, domain=[0, 1])(x)


class KernelParams(BaseModel):
    n: int = Field(..., ge=8)
    p: int = Field(2, ge=1)
    gamma: float = Field(0.25, gt=0, lt=0.5)
    nodes: int | None = Field(None, description="Узлов Гаусса-Лежандра на панель")

    @model_validator(mode="after")
    def check_window(self):
        if 1 - self.r > self.alpha / 4:
            raise ValueError(f"Окно слишком узкое: 1 - r = {1 - self.r:.3g} > alpha/4 = {self.alpha / 4:.3g}")
        return self

    @property
    def r(self) -> float:
        return math.exp(-1 / self.n)

    @property
    def alpha(self) -> float:
        return self.n ** (-self.gamma)

    @property
    def normalizer(self) -> float:
        """2 pi r^{n-2p} (1 - 2r cos alpha + r^2)^p."""
        r = self.r
        return 2 * math.pi * r ** (self.n - 2 * self.p) * (1 - 2 * r * math.cos(self.alpha) + r * r) ** self.p

    @classmethod
    def for_beta(cls, n: int, beta: float, p: int = 2):
        return cls(n=n, p=p, gamma=min(beta, 0.5) / 2)


class KernelEstimate(BaseModel):
    n: int
    estimate: float | list[float]
    imaginary: float
    quad_error: float
    bound: float | None = None
    direct: float | None = None


class KernelWeightRow(BaseModel):
    s: float
    measured: float
    predicted: float


class ContourResult(BaseModel):
    check: str
    real: float
    imag: float
    reference: float
    error_bar: float

    @property
    def deviation(self) -> float:
        return abs(complex(self.real, self.imag) - self.reference)


class HypothesisRow(BaseModel):
    u: float
    theta: float
    residual: float


class ConclusionRow(BaseModel):
    n: int
    partial_sum: float
    predicted: float
    residual: float


class TauberianReport(BaseModel):
    hypothesis: list[HypothesisRow]
    conclusion: list[ConclusionRow]
    slope: SlopeFit


class FreudRow(BaseModel):
    m: int
    side: PolySide
    gap: float
    coefficient_sum: float
