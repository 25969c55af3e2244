from enum import Enum

import numpy as np
from pydantic import BaseModel, ConfigDict, Field
from scipy import sparse

from app.schemas.maps import MapSpec, TailSequence
from app.schemas.reports import SlopeFit


class YGrid(BaseModel):
    M: int = Field(..., ge=2, description="Число ячеек равномерной сетки на Y = [1/2, 1]")

    @property
    def edges(self) -> np.ndarray:
        return np.linspace(0.5, 1.0, self.M + 1)

    @property
    def width(self) -> float:
        return 0.5 / self.M

    @property
    def midpoints(self) -> np.ndarray:
        edges = self.edges
        return (edges[:-1] + edges[1:]) / 2


class Regularity(str, Enum):
    BV = "BV"
    HOLDER = "Hölder"


class GridObservable(BaseModel):
    """Средние значения функции по ячейкам сетки (Y или лестничной сетки на (delta, 1])."""

    model_config = ConfigDict(arbitrary_types_allowed=True)

    values: np.ndarray
    regularity: Regularity = Regularity.BV
    support: tuple[float, float] = (0.5, 1.0)

    @property
    def variation(self) -> float:
        return float(np.sum(np.abs(np.diff(self.values))))


class LadderMesh(BaseModel):
    """Уровни X_0 = Y, X_1, ..., X_K, каждый разбит прообразами сетки на Y."""

    model_config = ConfigDict(arbitrary_types_allowed=True)

    spec: MapSpec
    grid: YGrid
    tails: TailSequence
    levels: list[np.ndarray] = Field(..., description="Рёбра ячеек уровня k (по возрастанию), k = 0..K")

    @property
    def depth(self) -> int:
        return len(self.levels) - 1

    @property
    def delta(self) -> float:
        return float(self.levels[-1][0])

    @property
    def sizes(self) -> list[int]:
        return [len(edges) - 1 for edges in self.levels]

    @property
    def offsets(self) -> np.ndarray:
        return np.concatenate(([0], np.cumsum(self.sizes)))

    @property
    def n_cells(self) -> int:
        return int(self.offsets[-1])

    @property
    def widths(self) -> np.ndarray:
        return np.concatenate([np.diff(edges) for edges in self.levels])

    def level_slice(self, k: int) -> slice:
        return slice(int(self.offsets[k]), int(self.offsets[k + 1]))


class InducedOperator(BaseModel):
    """Ульамовская дискретизация R_n = R 1_{phi = n} на Y (плотностная форма).

    Столбцы матрицы ``stacked`` нумеруются парами (n, i): ветвь n, ячейка-источник i;
    пары отсортированы по n.
    """

    model_config = ConfigDict(arbitrary_types_allowed=True)

    spec: MapSpec
    grid: YGrid
    N_trunc: int
    tails: TailSequence
    stacked: sparse.csc_matrix
    lags: np.ndarray
    cells: np.ndarray
    lag_ptr: np.ndarray = Field(..., description="Столбцы ветви n: lag_ptr[n-1]:lag_ptr[n]")
    tail_profile: np.ndarray = Field(..., description="Нормированный профиль образа последней ветви")
    tail_weights: np.ndarray = Field(..., description="|cell_i ∩ [1/2, y_N]|, масса, уходящая в отброшенные ветви")
    mass_deficit: float


class SpectralData(BaseModel):
    model_config = ConfigDict(arbitrary_types_allowed=True)

    z: complex
    lam: complex
    v: np.ndarray = Field(..., description="Собственная функция в mu-форме, int_Y v dmu = 1")
    left: np.ndarray
    density: np.ndarray
    eigengap: float
    residual: float

    def project(self, w: np.ndarray) -> np.ndarray:
        """P(z)w для наблюдаемой w в mu-форме."""
        scale = np.dot(self.left, w * self.density) / np.dot(self.left, self.v * self.density)
        return scale * self.v


class RenewalAccumulator(BaseModel):
    """T_n v, n = 0..n_max, и частичные суммы S_n = sum_{j <= n} T_j v."""

    model_config = ConfigDict(arbitrary_types_allowed=True)

    W: np.ndarray = Field(..., description="Итерации в плотностной форме, shape (n_max + 1, M)")
    density: np.ndarray | None = Field(None, description="Если задана, T_n действует в mu-форме")

    @property
    def n_max(self) -> int:
        return self.W.shape[0] - 1

    @property
    def Tn(self) -> np.ndarray:
        if self.density is None:
            return self.W
        return self.W / self.density

    @property
    def S(self) -> np.ndarray:
        return np.cumsum(self.Tn, axis=0)


class DualErgodicRow(BaseModel):
    n: int
    first_order_deviation: float
    higher_order_residual: float
    remainder: float
    error_bar: float


class DualErgodicReport(BaseModel):
    rows: list[DualErgodicRow]
    integral: float
    first_order_slope: SlopeFit
    residual_slope: SlopeFit


class FirstOrderRow(BaseModel):
    u: float
    lam: float
    ratio: float
    eigengap: float
    error_bar: float


class ResolventRow(BaseModel):
    u: float
    theta: float
    deviation: float
    error_bar: float


class IdentityCheck(BaseModel):
    z: complex
    residual: float
    bound: float


class ConsistencyRow(BaseModel):
    n: int
    scalar: float
    operator: float
    relative_gap: float
