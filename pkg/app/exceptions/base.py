class BaseNumericError(Exception):
    exit_code = 1
    detail = "Numeric failure"

    def __init__(self, detail: str | None = None, **diagnostics):
        self.detail = detail or self.detail
        self.diagnostics = diagnostics
        super().__init__(self.detail)

    def __str__(self):
        if not self.diagnostics:
            return self.detail
        extra = ", ".join(f"{key}={value!r}" for key, value in self.diagnostics.items())
        return f"{self.detail} ({extra})"


class ValidationFailure(BaseNumericError):
    """Некорректные входные данные или конфигурация."""

    exit_code = 2
    detail = "Invalid input"
