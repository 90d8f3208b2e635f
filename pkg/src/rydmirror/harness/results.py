"""
Module: harness.results
-----------------------
Result files: one CSV table per run plus a JSON sidecar with its metadata.

CSV headers are the ResultSet columns, in order, and values are written
with Python's shortest round-trip float repr, so rerunning an identical
config with the same seed and code version reproduces the CSV byte for
byte. The sidecar schema (version 1) holds

    schema_version, experiment, columns, units, residual_column,
    n_rows, failed_rows, skipped_rows, max_residual, wall_time_s,
    code_version, config_hash, config

Functions
---------
- `code_version`:
    Installed version of the package
- `write_result_set`:
    Writes the CSV and the sidecar, returning both paths
- `read_result_set`:
    Reads a CSV and its sidecar back into a ResultSet
- `result_columns`:
    Columns of a ResultSet as a name → array mapping
"""

import csv
import json
from importlib import metadata
from pathlib import Path

import numpy as np
from beartype import beartype
from beartype.typing import Dict, Optional, Tuple, Union

from rydmirror.tools import get_logger

from .harness_types import ResultSet

logger = get_logger(__name__)

SIDECAR_SCHEMA_VERSION: int = 1


def code_version() -> str:
    try:
        return metadata.version("rydmirror")
    except metadata.PackageNotFoundError:
        return "unknown"


def _sidecar(result: ResultSet) -> Dict:
    return {
        "schema_version": SIDECAR_SCHEMA_VERSION,
        "experiment": result.experiment,
        "columns": list(result.columns),
        "units": dict(result.units),
        "residual_column": result.residual_column,
        "n_rows": int(result.rows.shape[0]),
        "failed_rows": list(result.failed_rows),
        "skipped_rows": list(result.skipped_rows),
        "max_residual": result.max_residual,
        "wall_time_s": result.wall_time,
        "code_version": code_version(),
        "config_hash": result.config_hash,
        "config": result.config,
    }


@beartype
def write_result_set(
    result: ResultSet,
    directory: Union[str, Path],
    name: Optional[str] = None,
) -> Tuple[Path, Path]:
    """
    Description
    -----------
    Write `<name>.csv` and `<name>.json` into `directory`.

    Parameters
    ----------
    - `result` (ResultSet):
        The table to write
    - `directory` (str | Path):
        Output directory, created when missing
    - `name` (str, optional):
        File stem. Default is the output name of the config.

    Returns
    -------
    - `csv_path` (Path):
        The table
    - `json_path` (Path):
        The sidecar
    """
    out = Path(directory)
    out.mkdir(parents=True, exist_ok=True)
    stem = name or result.config["output"]["name"]
    csv_path = out / f"{stem}.csv"
    json_path = out / f"{stem}.json"
    with csv_path.open("w", newline="", encoding="utf-8") as handle:
        writer = csv.DictWriter(handle, fieldnames=list(result.columns), lineterminator="\n")
        writer.writeheader()
        for row in result.rows:
            writer.writerow({c: repr(float(v)) for c, v in zip(result.columns, row)})
    json_path.write_text(
        json.dumps(_sidecar(result), indent=2, sort_keys=True) + "\n", encoding="utf-8"
    )
    logger.info("wrote %d rows to %s", result.rows.shape[0], csv_path)
    return csv_path, json_path


@beartype
def read_result_set(csv_path: Union[str, Path]) -> ResultSet:
    """
    Description
    -----------
    Read a result CSV and the sidecar next to it.

    Raises
    ------
    - FileNotFoundError:
        When either file is missing
    - ValueError:
        When the CSV header differs from the sidecar columns
    """
    path = Path(csv_path)
    sidecar = json.loads(path.with_suffix(".json").read_text(encoding="utf-8"))
    with path.open(newline="", encoding="utf-8") as handle:
        reader = csv.DictReader(handle)
        columns = tuple(reader.fieldnames or ())
        rows = [[float(record[c]) for c in columns] for record in reader]
    if list(columns) != sidecar["columns"]:
        raise ValueError(f"{path} header {columns} does not match its sidecar")
    return ResultSet(
        experiment=sidecar["experiment"],
        columns=columns,
        rows=np.asarray(rows, dtype=np.float64).reshape(-1, len(columns)),
        units=sidecar["units"],
        residual_column=sidecar["residual_column"],
        failed_rows=tuple(sidecar["failed_rows"]),
        skipped_rows=tuple(sidecar["skipped_rows"]),
        wall_time=float(sidecar["wall_time_s"]),
        config=sidecar["config"],
        config_hash=sidecar["config_hash"],
    )


def result_columns(result: ResultSet) -> Dict[str, np.ndarray]:
    return {name: result.rows[:, i] for i, name in enumerate(result.columns)}
