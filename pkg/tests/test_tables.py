import json

import numpy as np
import pytest

from app.exceptions.base import BaseNumericError
from app.repositories.tables import CsvRepository, table_from_rows
from app.schemas.reports import SlopeFit, Table


@pytest.fixture
def repository(tmp_path):
    return CsvRepository(tmp_path / "out")


def test_write_table_full_precision(repository):
    path = repository.write_table("demo", Table(columns=["n", "x"], rows=[[1, 0.1]]))
    assert path.name == "demo.csv"
    assert path.read_text(encoding="utf-8") == "n,x\n1,0.10000000000000001\n"


def test_row_width_checked(repository):
    with pytest.raises(BaseNumericError):
        repository.write_table("bad", Table(columns=["n", "x"], rows=[[1]]))


def test_metadata_sidecar(repository):
    path = repository.write_metadata("demo", {"lam": complex(0.5, -0.25), "n": np.int64(3), "ratio": float("nan")})
    body = json.loads(path.read_text(encoding="utf-8"))
    assert path.name == "demo.meta.json"
    assert "created" in body
    assert body["lam"] == [0.5, -0.25]
    assert body["n"] == 3


def test_plot_script(repository):
    path = repository.write_plot_script("demo", "n", ["ratio"], logscale=False)
    text = path.read_text(encoding="utf-8")
    assert "'demo.csv' using 'n'" in text
    assert "logscale" not in text


def test_table_from_rows():
    row = SlopeFit(slope=-0.5, intercept=0.0, stderr=0.01, ci_low=-0.52, ci_high=-0.48, points=6)
    table = table_from_rows([row, row], meta={"beta": 0.5})
    assert table.columns[:2] == ["slope", "intercept"]
    assert table.rows[1][0] == -0.5
    assert table.meta == {"beta": 0.5}
    assert table_from_rows([], columns=["n"]).rows == []
