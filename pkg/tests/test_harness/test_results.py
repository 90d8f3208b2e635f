import csv
import json
from pathlib import Path

import chex
import numpy as np
import pytest

from rydmirror.harness.harness_types import (make_experiment_config,
                                             make_result_set)
from rydmirror.harness.results import (code_version, read_result_set,
                                       result_columns, write_result_set)


def _result(rows=None):
    config = make_experiment_config(
        {"experiment": "reflectance-sweep", "sweep": {"waists": [1.0, 2.0]}}
    )
    rows = [[1.0, 0.9, 0.05, 0.05, 1e-12], [2.0, 0.95, 0.03, 0.02, 1e-3]] if rows is None else rows
    units = {"w": "lambda0", "R": "1", "T": "1", "K": "1", "residual": "1"}
    return make_result_set(
        config, ("w", "R", "T", "K", "residual"), rows, units, "residual", wall_time=1.25
    )


class TestWriteResultSet(chex.TestCase):
    def setUp(self):
        super().setUp()
        self.directory = Path(self.create_tempdir().full_path)

    def test_files_and_header(self):
        csv_path, json_path = write_result_set(_result(), self.directory)
        assert csv_path.name == "reflectance-sweep.csv"
        assert json_path.name == "reflectance-sweep.json"
        with csv_path.open(newline="") as handle:
            header = next(csv.reader(handle))
        assert header == ["w", "R", "T", "K", "residual"]

    def test_sidecar(self):
        result = _result()
        _, json_path = write_result_set(result, self.directory, "run")
        sidecar = json.loads(json_path.read_text())
        assert sidecar["schema_version"] == 1
        assert sidecar["config_hash"] == result.config_hash
        assert sidecar["config"]["experiment"] == "reflectance-sweep"
        assert sidecar["failed_rows"] == [1]
        assert sidecar["max_residual"] == pytest.approx(1e-3)
        assert sidecar["wall_time_s"] == 1.25
        assert sidecar["code_version"] == code_version()
        assert sidecar["units"]["w"] == "lambda0"

    def test_reruns_are_byte_identical(self):
        first, _ = write_result_set(_result(), self.directory, "a")
        second, _ = write_result_set(_result(), self.directory, "b")
        assert first.read_bytes() == second.read_bytes()

    def test_read_back(self):
        rows = [[0.1, 1.0 / 3.0, float("nan"), float("inf"), 2.0e-17]]
        csv_path, _ = write_result_set(_result(rows), self.directory)
        back = read_result_set(csv_path)
        np.testing.assert_array_equal(back.rows, np.asarray(rows))
        assert back.columns == ("w", "R", "T", "K", "residual")
        chex.assert_trees_all_close(result_columns(back)["R"], np.array([1.0 / 3.0]))

    def test_header_mismatch(self):
        csv_path, _ = write_result_set(_result(), self.directory)
        csv_path.write_text("w,R\n1.0,0.5\n")
        with pytest.raises(ValueError):
            read_result_set(csv_path)


if __name__ == "__main__":
    pytest.main([__file__])
