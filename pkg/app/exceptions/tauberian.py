from app.exceptions.base import BaseNumericError


class QuadratureError(BaseNumericError):
    """Квадратура не достигла заданной точности."""

    detail = "Quadrature tolerance not met"


class DegreeCapError(BaseNumericError):
    """Требуемая степень многочлена превышает допустимую."""

    detail = "Required polynomial degree exceeds the cap"


class FitInfeasibleError(BaseNumericError):
    """Задача одностороннего приближения несовместна."""

    detail = "One-sided fit infeasible"
