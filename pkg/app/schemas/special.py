from enum import Enum

import numpy as np
from pydantic import BaseModel, Field, model_validator


class SlowlyVaryingKind(str, Enum):
    CONSTANT = "constant"
    INVERSE_LOG = "inverse_log"
    LOG_POWER = "log_power"
    TABULATED = "tabulated"


class SlowlyVarying(BaseModel):
    kind: SlowlyVaryingKind = SlowlyVaryingKind.CONSTANT
    c: float = Field(1.0, gt=0, description="Множитель модели")
    p: float = Field(0.0, description="Показатель степени логарифма для log_power")
    table_x: list[float] | None = Field(None, description="Узлы таблицы (для tabulated), x >= 2")
    table_y: list[float] | None = None

    @model_validator(mode="after")
    def check_table(self):
        if self.kind is SlowlyVaryingKind.TABULATED:
            if not self.table_x or not self.table_y or len(self.table_x) != len(self.table_y):
                raise ValueError("Табличная модель требует table_x и table_y одинаковой длины")
            if min(self.table_y) <= 0:
                raise ValueError("Медленно меняющаяся функция должна быть положительной")
            if any(b <= a for a, b in zip(self.table_x, self.table_x[1:])):
                raise ValueError("table_x должен строго возрастать")
        return self

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        if self.kind is SlowlyVaryingKind.CONSTANT:
            return np.full_like(x, self.c)
        if self.kind is SlowlyVaryingKind.INVERSE_LOG:
            return self.c / np.log(x)
        if self.kind is SlowlyVaryingKind.LOG_POWER:
            return self.c * np.log(x) ** self.p
        log_y = np.interp(np.log(x), np.log(self.table_x), np.log(self.table_y))
        return np.exp(log_y)


class DeHaanModel(BaseModel):
    base: SlowlyVarying
    auxiliary: SlowlyVarying


class NormalizationConstants(BaseModel):
    beta: float = Field(..., ge=0, le=1)
    D_beta: float
    ell: SlowlyVarying


class SlowVariationRow(BaseModel):
    x: float
    lam: float
    ratio: float


class SlowVariationReport(BaseModel):
    rows: list[SlowVariationRow]
    first_decade_deviation: float
    last_decade_deviation: float
    passed: bool


class DeHaanReport(BaseModel):
    constant: float
    worst_x: float
    worst_alpha: float
