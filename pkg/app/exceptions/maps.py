from app.exceptions.base import BaseNumericError, ValidationFailure


class MapDomainError(ValidationFailure):
    """Точка вне области определения отображения."""

    detail = "Point outside (0, 1)"


class BracketingError(BaseNumericError):
    """Не удалось локализовать корень обратной ветви."""

    detail = "Root bracketing failed"


class TailLengthError(BaseNumericError):
    """Запрошен индекс за пределами вычисленной последовательности x_n."""

    detail = "Tail sequence too short"


class SupportError(BaseNumericError):
    """Носитель наблюдаемой не отделён от нуля."""

    detail = "Observable support touches the indifferent fixed point"
