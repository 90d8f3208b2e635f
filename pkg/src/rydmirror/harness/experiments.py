"""
Module: harness.experiments
---------------------------
One runner per experiment kind, and `run_experiment` to dispatch a config
to its runner and persist the result.

Each runner turns a validated config into a table. Runners never abort a
sweep because one point is bad: solves that miss their residual target are
kept and flagged, and points whose state space exceeds its cap are written
as NaN rows and listed as skipped.

Functions
---------
- `run_experiment`:
    Runs a config, writes the CSV and sidecar and returns the ResultSet
- `experiment_geometry`:
    The square array of a config
- `experiment_detuning`:
    The probe detuning of a config, resonant when unset
"""

import math
import time

import jax
import jax.numpy as jnp
import numpy as np
from beartype import beartype
from beartype.typing import (Callable, Dict, List, Mapping, NamedTuple,
                             Optional, Tuple)

from rydmirror.arrays.array_types import K0, ArrayGeometry
from rydmirror.arrays.dispersion import dispersion_table, resonant_detuning
from rydmirror.arrays.geometry import build_square_array, central_atom_index
from rydmirror.arrays.scattering import (aperture_analytics,
                                         hole_resolvent,
                                         hole_transmission_map,
                                         reflectance_sweep)
from rydmirror.errors import BasisSizeError
from rydmirror.rydberg.correlations import g2_sweep
from rydmirror.rydberg.dressing import dressing_curve, physical_parameter_table
from rydmirror.rydberg.master_equation import (STRONG_DRIVE_COLUMNS,
                                               strong_drive_sweep)
from rydmirror.rydberg.stochastic import (STOCHASTIC_COLUMNS, k_max_collapse,
                                          mc_sweep)
from rydmirror.rydberg.switch import BEYOND_STEP_COLUMNS, beyond_step_sweep
from rydmirror.tools import get_logger, ordered_map

from .constants import ConstantEntry, constant_value, load_constants
from .harness_types import ExperimentConfig, ResultSet, make_result_set
from .results import write_result_set

jax.config.update("jax_enable_x64", True)

logger = get_logger(__name__)


class _Table(NamedTuple):
    columns: Tuple[str, ...]
    rows: np.ndarray
    units: Dict[str, str]
    residual_column: Optional[str] = None
    failed_column: Optional[str] = None
    skipped_rows: Tuple[int, ...] = ()


def experiment_geometry(config: ExperimentConfig) -> ArrayGeometry:
    g = config.geometry
    return build_square_array(int(g["n_side"]), float(g["d"]), g["dipole_axis"])


def experiment_detuning(config: ExperimentConfig, geometry: ArrayGeometry) -> float:
    delta = config.drive["delta"]
    return float(resonant_detuning(geometry)) if delta is None else float(delta)


def _run_dispersion(config, constants, progress) -> _Table:
    sweep, solver = config.sweep, config.solver
    k_x = np.linspace(0.0, sweep["k_max"] * K0, sweep["k_points"])
    k_grid = jnp.asarray(np.stack([k_x, np.zeros_like(k_x)], axis=-1))
    rows = dispersion_table(
        k_grid,
        float(config.geometry["d"]),
        config.geometry["dipole_axis"],
        float(solver["radius_cut"]),
        solver["window"],
    )
    columns = ("k_x", "k_y", "Gamma_k", "Delta_k", "convergence")
    units = {
        "k_x": "rad/lambda0",
        "k_y": "rad/lambda0",
        "Gamma_k": "Gamma0",
        "Delta_k": "Gamma0",
        "convergence": "Gamma0",
    }
    return _Table(columns, np.asarray(rows), units, residual_column="convergence")


def _run_reflectance(config, constants, progress) -> _Table:
    geometry = experiment_geometry(config)
    delta = experiment_detuning(config, geometry)
    waists = [float(w) for w in config.sweep["waists"]]
    rows = np.asarray(reflectance_sweep(geometry, waists, delta))
    table = np.column_stack([np.asarray(waists), rows])
    columns = ("w", "R", "T", "K", "residual")
    units = {"w": "lambda0", "R": "1", "T": "1", "K": "1", "residual": "1"}
    return _Table(columns, table, units, residual_column="residual")


def _run_hole_scan(config, constants, progress) -> _Table:
    geometry = experiment_geometry(config)
    delta = experiment_detuning(config, geometry)
    w2 = config.waist
    center = central_atom_index(geometry)
    resolvent = hole_resolvent(geometry, delta)

    def point(radius: float) -> Tuple[float, ...]:
        t, residual = hole_transmission_map(geometry, [center], radius, w2, delta, resolvent)
        T = float(jnp.abs(t[0]) ** 2)
        T_aperture = float(aperture_analytics(radius, w2)[0])
        logger.info("R_b=%.3f: T=%.5f aperture %.5f", radius, T, T_aperture)
        return (radius, T, T_aperture, float(residual[0]))

    radii = [float(r) for r in config.sweep["radii"]]
    rows = ordered_map(point, radii, config.workers, "hole scan", progress)
    columns = ("R_b", "T", "T_aperture", "residual")
    units = {"R_b": "lambda0", "T": "1", "T_aperture": "1", "residual": "1"}
    return _Table(columns, np.asarray(rows), units, residual_column="residual")


def _run_dressing(config, constants, progress) -> _Table:
    x = jnp.asarray(config.sweep["r_over_rb"], dtype=jnp.float64)
    table = np.column_stack(
        [np.asarray(x), np.asarray(dressing_curve("ee", x)), np.asarray(dressing_curve("re", x))]
    )
    columns = ("r_over_rb", "V_ee_over_V", "V_re_over_V")
    return _Table(columns, table, {c: "1" for c in columns})


def _run_physical(config, constants, progress) -> _Table:
    sweep = config.sweep
    area = sweep["control_area"]
    if area is None:
        area = math.pi * (20.0 * float(config.geometry["d"])) ** 2
    rows = physical_parameter_table(
        np.asarray(sweep["principal_numbers"]),
        np.asarray(sweep["detunings"], dtype=np.float64),
        float(area),
        constant_value(constants(), "C0"),
    )
    columns = ("n", "delta_c", "R_b", "P_c", "V")
    units = {"n": "1", "delta_c": "Gamma0", "R_b": "lambda0", "P_c": "W", "V": "Gamma0"}
    return _Table(columns, rows, units)


def _run_g2(config, constants, progress) -> _Table:
    geometry = experiment_geometry(config)
    rows = np.asarray(
        g2_sweep(
            geometry,
            config.waist,
            [float(r) for r in config.sweep["radii"]],
            experiment_detuning(config, geometry),
            config.blockade["kind"],
            config.interaction,
            config.solver["max_pairs"],
            config.workers,
            progress,
        )
    )
    skipped = tuple(int(i) for i in np.flatnonzero(np.isnan(rows[:, 1])))
    columns = ("rb2_over_w02", "g2_R", "residual")
    units = {c: "1" for c in columns}
    return _Table(columns, rows, units, residual_column="residual", skipped_rows=skipped)


def _run_switch(config, constants, progress) -> _Table:
    geometry = experiment_geometry(config)
    C_s = config.sweep["C_s"]
    if C_s is None:
        C_s = constant_value(constants(), "C_s")
    interactions = config.sweep["interactions"] or [config.interaction]
    kind = "ee" if config.blockade["kind"] == "microscopic-ee" else "re"
    rows = np.asarray(
        beyond_step_sweep(
            geometry,
            [float(r) for r in config.sweep["radii"]],
            [float(V) for V in interactions],
            float(C_s),
            kind,
            config.solver["mode"],
            experiment_detuning(config, geometry),
            config.workers,
            progress,
        )
    )
    epsilon = rows[:, BEYOND_STEP_COLUMNS.index("epsilon")]
    converged = rows[:, BEYOND_STEP_COLUMNS.index("converged")]
    for k in np.flatnonzero(converged == 0.0):
        logger.warning("R_b=%.3f: optimizer stopped on a bound", rows[k, 0])
    skipped = tuple(int(i) for i in np.flatnonzero(np.isnan(epsilon)))
    units = {c: "1" for c in BEYOND_STEP_COLUMNS}
    units.update(
        {"R_b": "lambda0", "R_step": "lambda0", "w1": "lambda0", "w2": "lambda0", "V": "Gamma0"}
    )
    return _Table(BEYOND_STEP_COLUMNS, rows, units, skipped_rows=skipped)


def _run_strong_drive(config, constants, progress) -> _Table:
    geometry = experiment_geometry(config)
    delta = experiment_detuning(config, geometry)
    omegas = [float(o) for o in config.sweep["omegas"]]
    blocks: List[np.ndarray] = []
    skipped: List[int] = []
    for radius in config.sweep["radii"]:
        try:
            rows = np.asarray(
                strong_drive_sweep(
                    geometry,
                    config.waist,
                    float(radius),
                    omegas,
                    delta,
                    config.solver["max_states"],
                    float(config.solver["tol"]),
                    config.workers,
                    progress,
                )
            )
        except BasisSizeError as err:
            logger.warning("R_b=%.3f skipped: %s", radius, err)
            rows = np.full((len(omegas), len(STRONG_DRIVE_COLUMNS)), np.nan)
            rows[:, 0] = omegas
            rows[:, 4] = err.size
            rows[:, 6] = 0.0
            start = sum(b.shape[0] for b in blocks)
            skipped.extend(range(start, start + len(omegas)))
        blocks.append(np.column_stack([np.full(len(omegas), float(radius)), rows]))
    columns = ("R_b",) + STRONG_DRIVE_COLUMNS
    units = {c: "1" for c in columns}
    units.update({"R_b": "lambda0", "omega0": "Gamma0"})
    return _Table(
        columns,
        np.concatenate(blocks, axis=0),
        units,
        residual_column="residual",
        failed_column="failed",
        skipped_rows=tuple(skipped),
    )


def _run_stochastic(config, constants, progress) -> _Table:
    geometry = experiment_geometry(config)
    delta = experiment_detuning(config, geometry)
    omegas = [float(o) for o in config.sweep["omegas"]]
    blocks = []
    for radius in config.sweep["radii"]:
        rows = np.asarray(
            mc_sweep(
                geometry,
                config.waist,
                float(radius),
                omegas,
                config.solver["n_samples"],
                config.seed,
                delta,
                config.solver["batch"],
                config.workers,
                progress,
            )
        )
        blocks.append(np.column_stack([np.full(len(omegas), float(radius)), rows]))
    columns = ("R_b",) + STOCHASTIC_COLUMNS
    units = {c: "1" for c in columns}
    units.update({"R_b": "lambda0", "omega0": "Gamma0"})
    return _Table(columns, np.concatenate(blocks, axis=0), units)


def _run_kmax(config, constants, progress) -> _Table:
    cases = [(int(n), float(d), float(w0), float(r)) for n, d, w0, r in config.sweep["cases"]]
    rows = k_max_collapse(
        cases,
        [float(o) for o in config.sweep["omegas"]],
        config.solver["n_samples"],
        config.seed,
        config.workers,
        progress,
        config.solver["max_states"],
    )
    columns = ("inv_N_d", "K_max", "K_max_exact", "K_max_analytic")
    return _Table(columns, np.asarray(rows), {c: "1" for c in columns})


RUNNERS: Dict[str, Callable[..., _Table]] = {
    "dispersion": _run_dispersion,
    "reflectance-sweep": _run_reflectance,
    "hole-scan": _run_hole_scan,
    "dressing-potential": _run_dressing,
    "physical-params": _run_physical,
    "g2-sweep": _run_g2,
    "switch-optimize": _run_switch,
    "strong-drive": _run_strong_drive,
    "stochastic-mirror": _run_stochastic,
    "kmax-collapse": _run_kmax,
}


@beartype
def run_experiment(
    config: ExperimentConfig,
    write: bool = True,
    progress: bool = True,
    constants: Optional[Mapping[str, ConstantEntry]] = None,
) -> ResultSet:
    """
    Description
    -----------
    Run the pipeline of `config.experiment` and persist its table.

    Parameters
    ----------
    - `config` (ExperimentConfig):
        A validated configuration
    - `write` (bool):
        Write `<output.name>.csv` and `.json` into `output.directory`.
        Default is True.
    - `progress` (bool):
        Show progress bars over sweep points
    - `constants` (Mapping[str, ConstantEntry], optional):
        Constants to use instead of reading `config.constants`

    Returns
    -------
    - `result` (ResultSet):
        The table with failed and skipped rows marked

    Raises
    ------
    - ConfigurationError:
        When a needed constant is missing
    - OSError:
        When the output files cannot be written

    Flow
    ----
    - Dispatch to the runner of the experiment kind
    - Load the constants file only if the runner asks for it
    - Mark failed rows and write the CSV and sidecar
    """
    cache: Dict[str, Mapping[str, ConstantEntry]] = {}

    def lazy_constants() -> Mapping[str, ConstantEntry]:
        if "loaded" not in cache:
            cache["loaded"] = constants if constants is not None else load_constants(config.constants)
        return cache["loaded"]

    logger.info("running %s (seed %d, %d workers)", config.experiment, config.seed, config.workers)
    start = time.perf_counter()
    table = RUNNERS[config.experiment](config, lazy_constants, progress)
    wall_time = time.perf_counter() - start
    result = make_result_set(
        config,
        table.columns,
        table.rows,
        table.units,
        table.residual_column,
        table.failed_column,
        table.skipped_rows,
        wall_time,
    )
    logger.info(
        "%s finished in %.1f s: %d rows, %d failed, %d skipped",
        config.experiment,
        wall_time,
        result.rows.shape[0],
        len(result.failed_rows),
        len(result.skipped_rows),
    )
    if write:
        write_result_set(result, config.output["directory"])
    return result
