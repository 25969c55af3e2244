from app.exceptions.base import BaseNumericError


class DivergenceError(BaseNumericError):
    """Интеграл для c_H расходится (beta <= 1/2)."""

    detail = "c_H integral diverges for beta <= 1/2"
