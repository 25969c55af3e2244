from collections.abc import Callable

from pydantic import BaseModel, ConfigDict

from app.schemas.maps import MapFamily

COMMON_OPTIONS = ("family", "alpha", "grid", "ntrunc", "nmax", "gamma", "out", "config")

OPTIONS = {
    "family": (("--family",), {"choices": [MapFamily.LSV.value, MapFamily.LSV0.value], "help": "Семейство"}),
    "alpha": (("--alpha",), {"type": float, "help": "Показатель alpha >= 1 (только lsv)"}),
    "grid": (("--grid",), {"type": int, "help": "Число ячеек сетки на Y"}),
    "ntrunc": (("--ntrunc",), {"type": int, "help": "Число сохранённых ветвей R_n"}),
    "nmax": (("--nmax", "--n"), {"type": int, "dest": "nmax", "help": "Наибольшее n"}),
    "gamma": (("--gamma",), {"type": float, "help": "Параметр gamma в (0, 1/2)"}),
    "out": (("--out",), {"help": "Каталог результатов"}),
    "config": (("--config",), {"help": "Файл KEY=VALUE с параметрами запуска"}),
    "beta": (("--beta",), {"type": float, "help": "Показатель beta в (0, 1]"}),
    "check": (("--check",), {"choices": ["B1", "B2", "B3", "all"], "help": "Контурная проверка"}),
    "rho": (("--rho",), {"type": float, "help": "Показатель rho в B3"}),
    "u": (("--u",), {"type": float, "help": "Re s в B1"}),
    "theta": (("--theta",), {"type": float, "help": "Im s в B1"}),
    "R": (("--R",), {"type": float, "dest": "r", "help": "Отсечка по Im в B1"}),
    "sequence": (("--sequence",), {"help": "kernel: ones, delta, binomial, lsv; dual-ergodic: ones, linear"}),
    "p": (("--p",), {"type": int, "help": "Степень p окна ядра"}),
    "epsilons": (("--epsilons",), {"type": float, "nargs": "+", "help": "Точности многочленов Карамата"}),
    "degrees": (("--degrees",), {"type": int, "nargs": "+", "help": "Степени многочленов Фройда"}),
    "n_values": (("--n-values",), {"type": int, "nargs": "+", "dest": "n_values", "help": "Значения n для ядра"}),
    "ladder_depth": (("--ladder-depth",), {"type": int, "dest": "ladder_depth", "help": "Глубина лестницы"}),
}


class Command(BaseModel):
    model_config = ConfigDict(arbitrary_types_allowed=True)

    name: str
    summary: str
    options: tuple[str, ...] = ()
    handler: Callable


class CommandRouter:
    """Набор подкоманд CLI, регистрируемых декоратором."""

    def __init__(self, tags: list[str] | None = None):
        self.tags = tags or []
        self.commands: list[Command] = []

    def command(self, name: str, summary: str, options: tuple[str, ...] = ()):
        def decorator(func):
            self.commands.append(Command(name=name, summary=summary, options=options, handler=func))
            return func

        return decorator
