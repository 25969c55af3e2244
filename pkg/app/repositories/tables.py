import csv
import json
from datetime import datetime, timezone
from enum import Enum
from pathlib import Path

import numpy as np
from loguru import logger
from pydantic import BaseModel

from app.abstractions.base_repository import AbstractRepository
from app.config.main import settings
from app.exceptions.base import BaseNumericError
from app.schemas.reports import Table


def _cell(value) -> str:
    if isinstance(value, (bool, np.bool_)):
        return str(bool(value)).lower()
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        return format(float(value), f".{settings.CSV_DIGITS}g")
    if isinstance(value, Enum):
        return str(value.value)
    return str(value)


def _jsonable(value):
    if isinstance(value, BaseModel):
        return value.model_dump(mode="json")
    if isinstance(value, Enum):
        return value.value
    if isinstance(value, (np.integer, np.floating)):
        return value.item()
    if isinstance(value, np.ndarray):
        return value.tolist()
    if isinstance(value, complex):
        return [value.real, value.imag]
    if isinstance(value, Path):
        return str(value)
    raise TypeError(f"Cannot serialize {type(value).__name__}")


class CsvRepository(AbstractRepository):
    """Таблицы CSV (UTF-8, заголовок обязателен), sidecar <name>.meta.json и скрипты gnuplot <name>.gp."""

    def __init__(self, directory: str | Path | None = None):
        self.directory = Path(directory or settings.OUTPUT_DIR)

    def _path(self, name: str, suffix: str) -> Path:
        self.directory.mkdir(parents=True, exist_ok=True)
        return self.directory / f"{name}{suffix}"

    def write_table(self, name: str, table: Table) -> Path:
        path = self._path(name, ".csv")
        try:
            with path.open("w", newline="", encoding="utf-8") as f:
                writer = csv.writer(f, lineterminator="\n")
                writer.writerow(table.columns)
                for row in table.rows:
                    if len(row) != len(table.columns):
                        raise BaseNumericError("Row width does not match header", row=row, columns=table.columns)
                    writer.writerow([_cell(value) for value in row])
        except OSError as e:
            logger.error(f"Error: {str(e)}")
            raise BaseNumericError(f"Cannot write {path}")
        logger.info(f"Wrote {len(table.rows)} rows to {path}")
        return path

    def write_metadata(self, name: str, payload: dict) -> Path:
        path = self._path(name, ".meta.json")
        body = {"created": datetime.now(timezone.utc).isoformat(), **payload}
        text = json.dumps(body, default=_jsonable, indent=2, ensure_ascii=False, allow_nan=True)
        path.write_text(text + "\n", encoding="utf-8")
        return path

    def write_plot_script(self, name: str, x: str, y: list[str], logscale: bool = True) -> Path:
        path = self._path(name, ".gp")
        lines = [
            "set datafile separator ','",
            "set key autotitle columnhead",
            f"set xlabel '{x}'",
        ]
        if logscale:
            lines.append("set logscale xy")
        plots = [f"'{name}.csv' using '{x}':(abs(column('{column}'))) with linespoints" for column in y]
        lines.append("plot " + ", \\\n     ".join(plots))
        path.write_text("\n".join(lines) + "\n", encoding="utf-8")
        return path


def table_from_rows(rows: list[BaseModel], columns: list[str] | None = None, meta: dict | None = None) -> Table:
    """Таблица из однотипных pydantic-строк."""
    columns = columns or (list(type(rows[0]).model_fields) if rows else [])
    body = []
    for row in rows:
        data = row.model_dump()
        body.append([data[column] for column in columns])
    return Table(columns=columns, rows=body, meta=meta or {})
