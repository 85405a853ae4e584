"""Tests for the artifact writers."""

import csv
import json
import math
from unittest.mock import patch

import numpy as np
import pytest

from src.file_tools.file_operations import (
    format_float,
    read_file,
    save_csv,
    save_file,
    save_json,
)


def test_save_file_creates_parents(out_dir):
    target = out_dir / "nested" / "notes.txt"
    assert save_file(target, "psi solved\n") == target
    assert target.read_text(encoding="utf-8") == "psi solved\n"


def test_save_file_atomic_overwrite(out_dir):
    target = out_dir / "value.json"
    save_file(target, "old")
    save_file(target, "new")
    assert target.read_text(encoding="utf-8") == "new"
    assert [p.name for p in out_dir.iterdir()] == ["value.json"]


def test_save_file_rejects_non_text(out_dir):
    with pytest.raises(ValueError, match="must be a string"):
        save_file(out_dir / "x.txt", b"bytes")


def test_failed_write_leaves_no_temporary_file(out_dir):
    out_dir.mkdir(parents=True)
    with patch("src.file_tools.file_operations.os.replace", side_effect=PermissionError("denied")):
        with pytest.raises(PermissionError):
            save_file(out_dir / "x.txt", "content")
    assert list(out_dir.iterdir()) == []


class TestReadFile:
    def test_round_trip(self, out_dir):
        target = save_file(out_dir / "cfg.json", "{}")
        assert read_file(target) == "{}"

    def test_missing(self, out_dir):
        with pytest.raises(FileNotFoundError):
            read_file(out_dir / "absent.json")

    def test_directory(self, tmp_path):
        with pytest.raises(IsADirectoryError):
            read_file(tmp_path)

    def test_invalid_utf8(self, tmp_path):
        target = tmp_path / "binary.json"
        target.write_bytes(b"\xff\xfe\x00")
        with pytest.raises(ValueError, match="invalid characters"):
            read_file(target)


class TestStructuredWriters:
    def test_json_converts_numpy_and_non_finite(self, out_dir):
        path = save_json(
            out_dir / "report.json",
            {"psi": np.array([0.5, 1.0]), "n": np.int64(3), "kappa": math.inf, "b": {"z": 1, "a": 2}},
        )
        text = path.read_text(encoding="utf-8")
        data = json.loads(text)
        assert data == {"psi": [0.5, 1.0], "n": 3, "kappa": "inf", "b": {"z": 1, "a": 2}}
        assert text.index('"a"') < text.index('"z"')

    def test_csv_rows(self, out_dir):
        path = save_csv(out_dir / "psi.csv", ("t", "y", "psi"), [[0.0, -1.0, 0.1], [1.0, 2.0, np.float64(1 / 3)]])
        with open(path, newline="", encoding="utf-8") as handle:
            rows = list(csv.reader(handle))
        assert rows[0] == ["t", "y", "psi"]
        assert float(rows[2][2]) == 1 / 3
        assert len(rows) == 3

    def test_csv_provenance_header(self, out_dir):
        provenance = {"command": "simulate", "seed": 7}
        path = save_csv(out_dir / "paths.csv", ("path", "x_T"), [[0, 1.5]], provenance=provenance)
        lines = path.read_text(encoding="utf-8").splitlines()
        assert lines[:2] == ["# command=simulate", "# seed=7"]
        rows = list(csv.reader(line for line in lines if not line.startswith("#")))
        assert rows == [["path", "x_T"], ["0", "1.5"]]

    @pytest.mark.parametrize(
        "value, text",
        [(math.nan, "nan"), (math.inf, "inf"), (-math.inf, "-inf"), (0.5, "0.5")],
    )
    def test_format_float(self, value, text):
        assert format_float(value) == text
