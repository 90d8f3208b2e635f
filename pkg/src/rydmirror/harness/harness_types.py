"""
Module: harness.harness_types
-----------------------------
Experiment configurations and result tables of the command-line harness.

A configuration is a nested JSON document. Missing keys take the defaults
below, unknown keys are rejected, and every block is checked before any
solve starts. The resolved document is what gets hashed and embedded in
the outputs.

Classes
-------
- `ExperimentConfig`:
    A fully resolved and validated experiment configuration
- `ResultSet`:
    Named columns of one experiment run plus its run metadata

Factory Functions
-----------------
- `make_experiment_config`:
    Merges defaults, rejects unknown keys and validates every block
- `make_result_set`:
    Builds a ResultSet and marks the rows that failed their residual check

Functions
---------
- `canonical_json`:
    Sorted-key, whitespace-free JSON used for hashing
- `config_hash`:
    SHA-256 of the semantically meaningful part of a configuration
- `config_to_dict`:
    Plain nested dict of an ExperimentConfig
"""

import copy
import hashlib
import json
import math

import numpy as np
from beartype import beartype
from beartype.typing import (Any, Dict, List, Mapping, NamedTuple, Optional,
                             Sequence, Tuple)

from rydmirror.arrays.array_types import AXIS_LABELS, DRIVE_KINDS
from rydmirror.arrays.dispersion import WINDOWS
from rydmirror.errors import ConfigurationError
from rydmirror.rydberg.rydberg_types import BLOCKADE_KINDS
from rydmirror.rydberg.switch import SWITCH_MODES
from rydmirror.tools import get_logger

logger = get_logger(__name__)

EXPERIMENTS: Tuple[str, ...] = (
    "dispersion",
    "reflectance-sweep",
    "hole-scan",
    "dressing-potential",
    "physical-params",
    "g2-sweep",
    "switch-optimize",
    "strong-drive",
    "stochastic-mirror",
    "kmax-collapse",
)

DEFAULTS: Dict[str, Any] = {
    "experiment": None,
    "geometry": {"n_side": 10, "d": 0.5, "dipole_axis": "x"},
    "drive": {"kind": "gaussian", "waist": None, "delta": None},
    "blockade": {"kind": "step-infinite", "V": None},
    "solver": {
        "tol": 1e-8,
        "residual_threshold": 1e-6,
        "max_pairs": 60000,
        "max_states": 4096,
        "n_samples": 5000,
        "batch": 256,
        "mode": "fast",
        "radius_cut": 20.0,
        "window": "smooth",
        "dispersion_tol": 1e-2,
    },
    "sweep": {
        "omegas": [],
        "waists": [],
        "radii": [],
        "k_points": 0,
        "k_max": 0.9,
        "cases": [],
        "r_over_rb": [],
        "principal_numbers": [],
        "detunings": [],
        "interactions": [],
        "control_area": None,
        "C_s": None,
    },
    "output": {"directory": "results", "name": None},
    "seed": 0,
    "workers": 1,
    "constants": None,
}

# Sweep grids each experiment cannot run without.
REQUIRED_SWEEPS: Dict[str, Tuple[str, ...]] = {
    "dispersion": ("k_points",),
    "reflectance-sweep": ("waists",),
    "hole-scan": ("radii",),
    "dressing-potential": ("r_over_rb",),
    "physical-params": ("principal_numbers", "detunings"),
    "g2-sweep": ("radii",),
    "switch-optimize": ("radii",),
    "strong-drive": ("radii", "omegas"),
    "stochastic-mirror": ("radii", "omegas"),
    "kmax-collapse": ("cases", "omegas"),
}

# Blocks that do not change the numbers, left out of the config hash.
UNHASHED_KEYS: Tuple[str, ...] = ("output", "workers")


class ExperimentConfig(NamedTuple):
    """
    Description
    -----------
    A resolved experiment configuration. Blocks are plain dicts so the
    config serializes back to exactly the JSON that was validated.

    Attributes
    ----------
    - `experiment` (str):
        Experiment kind, one of EXPERIMENTS
    - `geometry` (Dict[str, Any]):
        n_side, d and dipole_axis of the square array
    - `drive` (Dict[str, Any]):
        kind, waist and delta of the probe. A null waist defaults to
        0.35 N d and a null delta to the resonant detuning.
    - `blockade` (Dict[str, Any]):
        kind and V of the blockade model; a null V is infinite
    - `solver` (Dict[str, Any]):
        Tolerances, caps, sample counts and the residual threshold
    - `sweep` (Dict[str, Any]):
        Sweep grids
    - `output` (Dict[str, Any]):
        directory and name of the result files
    - `seed` (int):
        Seed of every random stream in the run
    - `workers` (int):
        Worker threads over sweep points
    - `constants` (str, optional):
        Path of the fitted-constants file
    """

    experiment: str
    geometry: Dict[str, Any]
    drive: Dict[str, Any]
    blockade: Dict[str, Any]
    solver: Dict[str, Any]
    sweep: Dict[str, Any]
    output: Dict[str, Any]
    seed: int
    workers: int
    constants: Optional[str]

    @property
    def interaction(self) -> float:
        """Blockade interaction scale, infinite when unset."""
        value = self.blockade["V"]
        return math.inf if value is None else float(value)

    @property
    def waist(self) -> float:
        """Probe waist, 0.35 N d when unset."""
        value = self.drive["waist"]
        if value is None:
            return 0.35 * self.geometry["n_side"] * self.geometry["d"]
        return float(value)


class ResultSet(NamedTuple):
    """
    Description
    -----------
    Table of one experiment run. Rows are stored in grid order, which is
    the order the sweep points were listed in, whatever order the workers
    finished in.

    Attributes
    ----------
    - `experiment` (str):
        Experiment kind
    - `columns` (Tuple[str, ...]):
        Column names, stable per experiment kind
    - `rows` (np.ndarray):
        Float table of shape (n_rows, n_columns)
    - `units` (Dict[str, str]):
        Unit of each column
    - `residual_column` (str, optional):
        Column holding the solver residual, if the experiment solves
        anything
    - `failed_rows` (Tuple[int, ...]):
        Rows whose residual exceeds the threshold or that flag a failure
    - `skipped_rows` (Tuple[int, ...]):
        Rows not computed because a state space exceeded its cap
    - `wall_time` (float):
        Seconds spent in the run
    - `config` (Dict[str, Any]):
        Resolved configuration
    - `config_hash` (str):
        SHA-256 of the configuration
    """

    experiment: str
    columns: Tuple[str, ...]
    rows: np.ndarray
    units: Dict[str, str]
    residual_column: Optional[str]
    failed_rows: Tuple[int, ...]
    skipped_rows: Tuple[int, ...]
    wall_time: float
    config: Dict[str, Any]
    config_hash: str

    @property
    def max_residual(self) -> float:
        """Largest finite residual, 0 when the experiment has none."""
        if self.residual_column is None or self.rows.shape[0] == 0:
            return 0.0
        values = self.column(self.residual_column)
        finite = values[np.isfinite(values)]
        return float(np.max(finite)) if finite.size else 0.0

    @property
    def ok(self) -> bool:
        return len(self.failed_rows) == 0

    def column(self, name: str) -> np.ndarray:
        """One column by name."""
        if name not in self.columns:
            raise KeyError(f"no column {name!r}; have {self.columns}")
        return self.rows[:, self.columns.index(name)]


def canonical_json(value: Any) -> str:
    """JSON with sorted keys and no whitespace, the form that gets hashed."""
    return json.dumps(
        value, sort_keys=True, separators=(",", ":"), ensure_ascii=False, allow_nan=False
    )


def config_to_dict(config: ExperimentConfig) -> Dict[str, Any]:
    return copy.deepcopy(dict(config._asdict()))


def config_hash(config: ExperimentConfig) -> str:
    """
    Description
    -----------
    SHA-256 of the canonical JSON of the resolved configuration. Output
    paths and the worker count are left out, since they do not change
    any number in the results.
    """
    payload = {k: v for k, v in config_to_dict(config).items() if k not in UNHASHED_KEYS}
    return hashlib.sha256(canonical_json(payload).encode("utf-8")).hexdigest()


def _merge(defaults: Dict[str, Any], given: Mapping[str, Any], where: str) -> Dict[str, Any]:
    unknown = sorted(set(given) - set(defaults))
    if unknown:
        raise ConfigurationError(f"unknown key(s) in {where}: {', '.join(unknown)}")
    merged = copy.deepcopy(defaults)
    for key, value in given.items():
        if isinstance(defaults[key], dict):
            if not isinstance(value, Mapping):
                raise ConfigurationError(f"{where}.{key} must be an object")
            merged[key] = _merge(defaults[key], value, f"{where}.{key}")
        else:
            merged[key] = copy.deepcopy(value)
    return merged


def _positive(value: Any, name: str, allow_none: bool = False) -> None:
    if value is None and allow_none:
        return
    if isinstance(value, bool) or not isinstance(value, (int, float)) or not value > 0:
        raise ConfigurationError(f"{name} must be a positive number, got {value!r}")


def _number(value: Any, name: str, allow_none: bool = False) -> None:
    if value is None and allow_none:
        return
    if isinstance(value, bool) or not isinstance(value, (int, float)) or not math.isfinite(value):
        raise ConfigurationError(f"{name} must be a finite number, got {value!r}")


def _integer(value: Any, name: str, minimum: int) -> None:
    if isinstance(value, bool) or not isinstance(value, int) or value < minimum:
        raise ConfigurationError(f"{name} must be an integer >= {minimum}, got {value!r}")


def _choice(value: Any, options: Sequence[str], name: str) -> None:
    if value not in options:
        raise ConfigurationError(f"{name} must be one of {tuple(options)}, got {value!r}")


def _grid(values: Any, name: str, minimum: float = -math.inf) -> None:
    if not isinstance(values, list):
        raise ConfigurationError(f"{name} must be a list")
    for v in values:
        _number(v, f"{name}[]")
        if v < minimum:
            raise ConfigurationError(f"{name} entries must be >= {minimum}, got {v}")


def _validate(resolved: Dict[str, Any]) -> None:
    _choice(resolved["experiment"], EXPERIMENTS, "experiment")
    geometry = resolved["geometry"]
    _integer(geometry["n_side"], "geometry.n_side", 1)
    _positive(geometry["d"], "geometry.d")
    _choice(geometry["dipole_axis"], tuple(AXIS_LABELS), "geometry.dipole_axis")

    drive = resolved["drive"]
    _choice(drive["kind"], DRIVE_KINDS, "drive.kind")
    _positive(drive["waist"], "drive.waist", allow_none=True)
    _number(drive["delta"], "drive.delta", allow_none=True)

    blockade = resolved["blockade"]
    _choice(blockade["kind"], BLOCKADE_KINDS, "blockade.kind")
    _number(blockade["V"], "blockade.V", allow_none=True)
    if blockade["kind"] != "step-infinite" and blockade["V"] is None:
        raise ConfigurationError(f"blockade.V is required for kind {blockade['kind']!r}")

    solver = resolved["solver"]
    for key in ("tol", "residual_threshold", "radius_cut", "dispersion_tol"):
        _positive(solver[key], f"solver.{key}")
    for key in ("max_pairs", "max_states", "n_samples", "batch"):
        _integer(solver[key], f"solver.{key}", 1)
    _choice(solver["mode"], SWITCH_MODES, "solver.mode")
    _choice(solver["window"], WINDOWS, "solver.window")

    sweep = resolved["sweep"]
    _grid(sweep["omegas"], "sweep.omegas", 0.0)
    _grid(sweep["waists"], "sweep.waists", 0.0)
    _grid(sweep["radii"], "sweep.radii", 0.0)
    _grid(sweep["r_over_rb"], "sweep.r_over_rb", 0.0)
    _grid(sweep["detunings"], "sweep.detunings")
    _grid(sweep["interactions"], "sweep.interactions", 0.0)
    if any(w == 0.0 for w in sweep["waists"]):
        raise ConfigurationError("sweep.waists must be positive")
    if not isinstance(sweep["principal_numbers"], list):
        raise ConfigurationError("sweep.principal_numbers must be a list")
    for n in sweep["principal_numbers"]:
        _integer(n, "sweep.principal_numbers[]", 1)
    _integer(sweep["k_points"], "sweep.k_points", 0)
    _number(sweep["k_max"], "sweep.k_max")
    if not 0.0 <= sweep["k_max"] < 1.0:
        raise ConfigurationError(f"sweep.k_max is a fraction of k0 in [0, 1), got {sweep['k_max']}")
    _positive(sweep["control_area"], "sweep.control_area", allow_none=True)
    _positive(sweep["C_s"], "sweep.C_s", allow_none=True)
    if not isinstance(sweep["cases"], list):
        raise ConfigurationError("sweep.cases must be a list")
    for case in sweep["cases"]:
        if not isinstance(case, list) or len(case) != 4:
            raise ConfigurationError(f"sweep.cases entries are [N, d, w0, R_b], got {case!r}")
        _integer(case[0], "sweep.cases[][0]", 1)
        _positive(case[1], "sweep.cases[][1]")
        _positive(case[2], "sweep.cases[][2]")
        _number(case[3], "sweep.cases[][3]")

    for key in REQUIRED_SWEEPS[resolved["experiment"]]:
        if not sweep[key]:
            raise ConfigurationError(
                f"experiment {resolved['experiment']!r} needs a non-empty sweep.{key}"
            )

    output = resolved["output"]
    if not isinstance(output["directory"], str) or not output["directory"]:
        raise ConfigurationError("output.directory must be a non-empty string")
    if output["name"] is not None and not isinstance(output["name"], str):
        raise ConfigurationError("output.name must be a string")
    _integer(resolved["seed"], "seed", 0)
    _integer(resolved["workers"], "workers", 1)
    if resolved["constants"] is not None and not isinstance(resolved["constants"], str):
        raise ConfigurationError("constants must be a path string")


@beartype
def make_experiment_config(
    document: Mapping[str, Any],
    overrides: Optional[Mapping[str, Any]] = None,
) -> ExperimentConfig:
    """
    Description
    -----------
    Resolve a configuration document against the defaults and validate it.

    Parameters
    ----------
    - `document` (Mapping[str, Any]):
        Parsed JSON configuration
    - `overrides` (Mapping[str, Any], optional):
        Top-level or nested values applied on top of the document, as the
        CLI flags do

    Returns
    -------
    - `config` (ExperimentConfig):
        The resolved configuration

    Raises
    ------
    - ConfigurationError:
        For an unknown key, a missing required sweep grid or any value
        out of its range

    Flow
    ----
    - Merge the document, then the overrides, into the defaults
    - Validate every block
    - Name the output after the experiment when no name is given
    """
    resolved = _merge(DEFAULTS, document, "config")
    if overrides:
        resolved = _merge(resolved, overrides, "config")
    _validate(resolved)
    if resolved["output"]["name"] is None:
        resolved["output"]["name"] = resolved["experiment"]
    config = ExperimentConfig(**resolved)
    logger.debug("resolved %s config, hash %s", config.experiment, config_hash(config)[:12])
    return config


@beartype
def make_result_set(
    config: ExperimentConfig,
    columns: Sequence[str],
    rows: Any,
    units: Mapping[str, str],
    residual_column: Optional[str] = None,
    failed_column: Optional[str] = None,
    skipped_rows: Sequence[int] = (),
    wall_time: float = 0.0,
) -> ResultSet:
    """
    Description
    -----------
    Wrap an experiment table. A row fails when its residual exceeds
    `solver.residual_threshold`, or `solver.dispersion_tol` for the
    dispersion table, or when its failure column is set. Skipped rows are
    reported separately and never count as failures.

    Raises
    ------
    - ValueError:
        When the table width does not match the columns or a column has
        no unit
    """
    table = np.asarray(rows, dtype=np.float64).reshape(-1, len(columns))
    missing = [c for c in columns if c not in units]
    if missing:
        raise ValueError(f"columns without units: {missing}")
    for name in (residual_column, failed_column):
        if name is not None and name not in columns:
            raise ValueError(f"{name!r} is not one of the columns")
    threshold = (
        config.solver["dispersion_tol"]
        if config.experiment == "dispersion"
        else config.solver["residual_threshold"]
    )
    skipped = set(int(i) for i in skipped_rows)
    failed: List[int] = []
    for i in range(table.shape[0]):
        if i in skipped:
            continue
        bad = False
        if residual_column is not None:
            r = table[i, columns.index(residual_column)]
            bad = not np.isfinite(r) or r > threshold
        if failed_column is not None:
            bad = bad or table[i, columns.index(failed_column)] != 0.0
        if bad:
            failed.append(i)
    if failed:
        logger.warning("%d of %d rows failed their residual check", len(failed), table.shape[0])
    return ResultSet(
        experiment=config.experiment,
        columns=tuple(columns),
        rows=table,
        units={c: units[c] for c in columns},
        residual_column=residual_column,
        failed_rows=tuple(failed),
        skipped_rows=tuple(sorted(skipped)),
        wall_time=float(wall_time),
        config=config_to_dict(config),
        config_hash=config_hash(config),
    )
