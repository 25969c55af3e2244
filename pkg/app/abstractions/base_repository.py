from abc import ABC, abstractmethod
from pathlib import Path

from app.schemas.reports import Table


class AbstractRepository(ABC):
    @abstractmethod
    def write_table(self, name: str, table: Table) -> Path:
        """Сохранить таблицу результатов."""

    @abstractmethod
    def write_metadata(self, name: str, payload: dict) -> Path:
        """Сохранить метаданные запуска рядом с таблицей."""

    @abstractmethod
    def write_plot_script(self, name: str, x: str, y: list[str], logscale: bool = True) -> Path:
        """Сохранить скрипт построения графика (не исполняется)."""
