from app.exceptions.base import BaseNumericError


class GammaPoleError(BaseNumericError):
    """Гамма-функция вычисляется в полюсе (неположительное целое)."""

    detail = "Gamma function pole"
