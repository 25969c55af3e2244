from app.exceptions.base import BaseNumericError


class MassDeficitError(BaseNumericError):
    """Потеря массы при обрезке ветвей больше допустимой. Увеличьте N_trunc."""

    detail = "Truncated branch mass exceeds the configured bound, increase N_trunc"


class ConvergenceError(BaseNumericError):
    """Степенной метод не сошёлся за отведённое число итераций."""

    detail = "Power iteration did not converge"


class EigengapError(BaseNumericError):
    """Ведущее собственное значение R(z) не отделено от остального спектра."""

    detail = "Eigengap below threshold"


class EscapeError(BaseNumericError):
    """Масса ушла ниже нижней границы сетки."""

    detail = "Mass escaped below the mesh floor"


class MonotonicityError(BaseNumericError):
    """Инвариантная плотность LSV возрастает на сетке."""

    detail = "Invariant density is not non-increasing on the grid"
