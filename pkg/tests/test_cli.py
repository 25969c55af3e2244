import csv
import json

import pytest

from app.main import build_parser, main


def read_rows(path):
    with path.open(encoding="utf-8") as f:
        return list(csv.DictReader(f))


def test_every_command_registered():
    parser = build_parser()
    for name in ("tails", "renewal", "dual-ergodic", "kernel", "contour", "polys"):
        args = parser.parse_args([name])
        assert args.command == name


def test_help_exits_cleanly():
    assert main(["--help"]) == 0


def test_contour_b2(tmp_path):
    assert main(["contour", "--check", "B2", "--beta", "0.5", "--out", str(tmp_path)]) == 0
    rows = read_rows(tmp_path / "contour.csv")
    assert [row["check"] for row in rows] == ["B2"]
    assert float(rows[0]["abs_error"]) < 1e-6
    assert (tmp_path / "contour.meta.json").is_file()
    assert (tmp_path / "contour.gp").is_file()


@pytest.mark.parametrize(
    "argv",
    [
        ["contour", "--check", "B9"],
        ["tails", "--alpha", "0.5"],
        ["tails", "--gamma", "0.6"],
        ["unknown"],
    ],
)
def test_invalid_arguments(tmp_path, argv):
    assert main([*argv, "--out", str(tmp_path)]) == 2


def test_numeric_failure_exit_code(tmp_path):
    assert main(["tails", "--ntrunc", "1", "--grid", "32", "--out", str(tmp_path)]) == 1


def test_truncated_lsv0_operator_exits_with_numeric_failure(tmp_path):
    argv = ["dual-ergodic", "--family", "lsv0", "--grid", "32", "--ntrunc", "2000", "--nmax", "50"]
    assert main([*argv, "--out", str(tmp_path)]) == 1


def test_renewal_outputs(tmp_path):
    assert main(["renewal", "--beta", "0.5", "--nmax", "200", "--out", str(tmp_path)]) == 0
    karamata = read_rows(tmp_path / "renewal_karamata.csv")
    assert abs(float(karamata[-1]["ratio"]) - 1) < 0.1
    assert (tmp_path / "renewal_residuals.csv").is_file()


def test_tails_outputs(tmp_path):
    assert main(["tails", "--grid", "32", "--ntrunc", "100", "--nmax", "100", "--out", str(tmp_path)]) == 0
    rows = read_rows(tmp_path / "tails.csv")
    assert int(rows[-1]["n"]) == 100
    assert all(float(row["tail_prob"]) > 0 for row in rows)
    assert (tmp_path / "tails_law.csv").is_file()
    meta = json.loads((tmp_path / "tails.meta.json").read_text(encoding="utf-8"))
    assert 0 < meta["measure_deficit"] < 0.15


def test_config_file_with_flag_override(tmp_path):
    config = tmp_path / "run.env"
    config.write_text("CHECK=B1\nBETA=0.9\nOUT=ignored\n", encoding="utf-8")
    assert main(["contour", "--config", str(config), "--beta", "0.5", "--out", str(tmp_path)]) == 0
    rows = read_rows(tmp_path / "contour.csv")
    assert [row["check"] for row in rows] == ["B1"]


def test_repeated_runs_are_identical(tmp_path):
    for name in ("first", "second"):
        assert main(["contour", "--check", "B2", "--out", str(tmp_path / name)]) == 0
    first = (tmp_path / "first" / "contour.csv").read_bytes()
    assert first == (tmp_path / "second" / "contour.csv").read_bytes()
