from pydantic import BaseModel, Field


class SlopeFit(BaseModel):
    slope: float
    intercept: float
    stderr: float
    ci_low: float
    ci_high: float
    points: int = Field(..., description="Число точек, участвовавших в подгонке")


class Table(BaseModel):
    """Таблица для выгрузки: имена столбцов и строки одинаковой длины."""

    columns: list[str]
    rows: list[list[float | int | str]]
    meta: dict = Field(default_factory=dict)
