"""
Module: harness.constants
-------------------------
The versioned file of fitted and physical constants, and the fits that
produce its scaling constants.

The file is JSON of the form
    {"version": 1, "constants": {name: {"value", "units", "provenance"}}}.
It is looked up, in order, at an explicit path, at the path in the
RYDMIRROR_CONSTANTS environment variable, and in the package data.

Classes
-------
- `ConstantEntry`:
    One constant with its units and provenance
- `ConstantFit`:
    Outcome of fitting a scaling constant to a sweep dataset

Functions
---------
- `load_constants`:
    Reads and checks a constants file
- `constant_value`:
    Looks up a constant, failing with a ConfigurationError
- `save_constants`:
    Writes a constants file
- `fit_constants`:
    Fits C_R, C_s, C or C_eps to a dataset
- `store_fit`:
    Records a fitted constant in a constants file
"""

import json
import math
import os
import warnings
from importlib import resources
from pathlib import Path

import jax
import jax.numpy as jnp
import numpy as np
from beartype import beartype
from beartype.typing import (Callable, Dict, Mapping, NamedTuple, Optional,
                             Tuple, Union)
from jaxtyping import Array, Float
from scipy.optimize import OptimizeWarning

from rydmirror.arrays.scattering import finite_mirror_reflectance_model
from rydmirror.errors import ConfigurationError
from rydmirror.rydberg.switch import switch_error_scaling
from rydmirror.tools import fit_model, get_logger

jax.config.update("jax_enable_x64", True)

logger = get_logger(__name__)

CONSTANTS_ENV: str = "RYDMIRROR_CONSTANTS"
CONSTANTS_VERSION: int = 1
FIT_MODELS: Tuple[str, ...] = ("C_R", "C_s", "C", "C_eps")
# Relative one-sigma error above which a fit is reported as ill-conditioned.
ILL_CONDITIONED_STDERR: float = 0.5


class ConstantEntry(NamedTuple):
    value: float
    units: str
    provenance: str


class ConstantFit(NamedTuple):
    """
    Description
    -----------
    A fitted scaling constant.

    Attributes
    ----------
    - `name` (str):
        Constant name, one of FIT_MODELS
    - `value` (float):
        Best-fit value
    - `stderr` (float):
        One-sigma uncertainty
    - `variance` (float):
        Covariance of the single fitted parameter
    - `rmse` (float):
        Root mean squared residual of the fitted quantity
    - `max_relative_error` (float):
        Largest |model − data|/|data| over the points
    - `n_points` (int):
        Points used
    - `ill_conditioned` (bool):
        True when the covariance could not be estimated or the relative
        uncertainty exceeds ILL_CONDITIONED_STDERR
    """

    name: str
    value: float
    stderr: float
    variance: float
    rmse: float
    max_relative_error: float
    n_points: int
    ill_conditioned: bool


def _resolve_path(path: Optional[Union[str, Path]]):
    if path is not None:
        return Path(path)
    env = os.environ.get(CONSTANTS_ENV)
    if env:
        return Path(env)
    return resources.files("rydmirror.data").joinpath("constants.json")


@beartype
def load_constants(path: Optional[Union[str, Path]] = None) -> Dict[str, ConstantEntry]:
    """
    Description
    -----------
    Read a constants file.

    Parameters
    ----------
    - `path` (str | Path, optional):
        Explicit file. Default is $RYDMIRROR_CONSTANTS, then the copy
        shipped with the package.

    Returns
    -------
    - `constants` (Dict[str, ConstantEntry]):
        Entries by name

    Raises
    ------
    - ConfigurationError:
        When the file is missing, is not valid JSON, has another version
        or an entry lacks a numeric value
    """
    source = _resolve_path(path)
    try:
        document = json.loads(source.read_text(encoding="utf-8"))
    except FileNotFoundError as err:
        raise ConfigurationError(f"constants file not found: {source}") from err
    except json.JSONDecodeError as err:
        raise ConfigurationError(f"constants file {source} is not valid JSON: {err}") from err
    if document.get("version") != CONSTANTS_VERSION:
        raise ConfigurationError(
            f"constants file {source} has version {document.get('version')!r}, "
            f"expected {CONSTANTS_VERSION}"
        )
    constants: Dict[str, ConstantEntry] = {}
    for name, entry in document.get("constants", {}).items():
        value = entry.get("value") if isinstance(entry, Mapping) else None
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            raise ConfigurationError(f"constant {name!r} in {source} has no numeric value")
        constants[name] = ConstantEntry(
            float(value), str(entry.get("units", "")), str(entry.get("provenance", ""))
        )
    logger.debug("loaded %d constants from %s", len(constants), source)
    return constants


def constant_value(constants: Mapping[str, ConstantEntry], name: str) -> float:
    if name not in constants:
        raise ConfigurationError(
            f"constant {name!r} is missing from the constants file; "
            f"add it or point --constants / ${CONSTANTS_ENV} at a file that has it"
        )
    return constants[name].value


@beartype
def save_constants(constants: Mapping[str, ConstantEntry], path: Union[str, Path]) -> Path:
    """Write a constants file with sorted names, returning its path."""
    target = Path(path)
    target.parent.mkdir(parents=True, exist_ok=True)
    document = {
        "version": CONSTANTS_VERSION,
        "constants": {
            name: {"value": e.value, "units": e.units, "provenance": e.provenance}
            for name, e in sorted(constants.items())
        },
    }
    target.write_text(json.dumps(document, indent=2, sort_keys=True) + "\n", encoding="utf-8")
    return target


def _reflectance_deficit(n_side: int, d: float) -> Callable[..., Array]:
    def model(w: Float[Array, "M"], c_r: Array) -> Float[Array, "M"]:
        return 1.0 - jax.vmap(lambda wi: finite_mirror_reflectance_model(n_side, d, wi, c_r))(w)

    return model


def _storage_deficit(w1: Float[Array, "M"], c_s: Array) -> Float[Array, "M"]:
    return c_s / w1**4


def _switch_scaling(d: float) -> Callable[..., Array]:
    def model(r_b: Float[Array, "M"], c: Array) -> Float[Array, "M"]:
        return switch_error_scaling(r_b / d, c)

    return model


def _optimal_waist(d: float) -> Callable[..., Array]:
    def model(r_b: Float[Array, "M"], c_eps: Array) -> Float[Array, "M"]:
        return r_b / (1.0 + jnp.sqrt(jnp.log(c_eps * r_b / d)))

    return model


@beartype
def fit_constants(
    dataset: Mapping[str, np.ndarray],
    model: str,
    n_side: Optional[int] = None,
    d: Optional[float] = None,
) -> ConstantFit:
    """
    Description
    -----------
    Least-squares fit of one scaling constant to the columns of a sweep.

    | model   | columns       | fitted relation                          |
    |---------|---------------|------------------------------------------|
    | `C_R`   | w, R          | 1 − R = 1 − erf⁴(Nd/√2w) + C_R/w⁴        |
    | `C_s`   | w1, eta       | 1 − η = C_s/w₁⁴                          |
    | `C`     | R_b, epsilon  | ε = C(1 + log x)²/x⁴, x = R_b/d          |
    | `C_eps` | R_b, w1       | w₁ = R_b/(1 + √log(C_ε R_b/d))           |

    Parameters
    ----------
    - `dataset` (Mapping[str, np.ndarray]):
        Columns of a reflectance-sweep or switch-optimize result, or any
        table with the columns above
    - `model` (str):
        One of FIT_MODELS
    - `n_side` (int, optional):
        Atoms per side, needed by C_R
    - `d` (float, optional):
        Lattice constant, needed by C_R, C and C_eps

    Returns
    -------
    - `fit` (ConstantFit):
        The constant with its uncertainty and residuals

    Raises
    ------
    - ConfigurationError:
        For an unknown model, a missing column or a missing n_side/d

    Flow
    ----
    - Pick the columns and transform the data into the fitted quantity
    - Fit with curve_fit through `fit_model`, recording covariance warnings
    - Flag the fit when the covariance is unusable or too wide
    """
    if model not in FIT_MODELS:
        raise ConfigurationError(f"model must be one of {FIT_MODELS}, got {model!r}")
    needs_d = model in ("C_R", "C", "C_eps")
    if needs_d and d is None:
        raise ConfigurationError(f"fitting {model} needs the lattice constant d")
    if model == "C_R" and n_side is None:
        raise ConfigurationError("fitting C_R needs n_side")
    x_name, y_name = {
        "C_R": ("w", "R"),
        "C_s": ("w1", "eta"),
        "C": ("R_b", "epsilon"),
        "C_eps": ("R_b", "w1"),
    }[model]
    for name in (x_name, y_name):
        if name not in dataset:
            raise ConfigurationError(f"fitting {model} needs a {name!r} column")
    x = np.asarray(dataset[x_name], dtype=np.float64)
    y = np.asarray(dataset[y_name], dtype=np.float64)
    keep = np.isfinite(x) & np.isfinite(y)
    x, y = x[keep], y[keep]

    bounds = None
    if model == "C_R":
        fn, y = _reflectance_deficit(int(n_side), float(d)), 1.0 - y
        p0 = [float(np.median((y - 1.0 + _clip_power(int(n_side), float(d), x)) * x**4))]
    elif model == "C_s":
        fn, y = _storage_deficit, 1.0 - y
        p0 = [float(np.median(y * x**4))]
    elif model == "C":
        fn = _switch_scaling(float(d))
        p0 = [float(np.median(y / np.asarray(switch_error_scaling(jnp.asarray(x / d), 1.0))))]
    else:
        fn = _optimal_waist(float(d))
        lower = float(d) / float(np.min(x)) * (1.0 + 1e-9)
        p0 = [max(2.0, 2.0 * lower)]
        bounds = ([lower], [np.inf])

    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always", OptimizeWarning)
        result = fit_model(fn, x, y, p0, bounds=bounds)
    value, stderr = result.params[0], result.stderr[0]
    predicted = np.asarray(fn(jnp.asarray(x), jnp.asarray(value)))
    with np.errstate(divide="ignore", invalid="ignore"):
        relative = np.abs(predicted - y) / np.abs(y)
    max_relative = float(np.max(relative)) if relative.size else math.nan
    ill = (
        any(issubclass(w.category, OptimizeWarning) for w in caught)
        or not math.isfinite(stderr)
        or (value != 0.0 and stderr / abs(value) > ILL_CONDITIONED_STDERR)
    )
    if ill:
        logger.warning("%s fit is ill-conditioned: %.4g +/- %.2g", model, value, stderr)
    else:
        logger.info("%s = %.4g +/- %.2g (max relative error %.3f)", model, value, stderr, max_relative)
    return ConstantFit(
        name=model,
        value=value,
        stderr=stderr,
        variance=stderr**2,
        rmse=result.rmse,
        max_relative_error=max_relative,
        n_points=int(x.size),
        ill_conditioned=bool(ill),
    )


def _clip_power(n_side: int, d: float, w: np.ndarray) -> np.ndarray:
    """erf⁴(Nd/√2w), the part of the reflectance that C_R does not cover."""
    return np.asarray(
        jax.vmap(lambda wi: finite_mirror_reflectance_model(n_side, d, wi, 0.0))(jnp.asarray(w))
    )


_FIT_UNITS: Dict[str, str] = {
    "C_R": "lambda0^4",
    "C_s": "lambda0^4",
    "C": "1",
    "C_eps": "1",
}


@beartype
def store_fit(fit: ConstantFit, path: Union[str, Path], provenance: str) -> Path:
    """
    Description
    -----------
    Record a fitted constant in the constants file at `path`, starting
    from the packaged file when `path` does not exist yet.
    """
    target = Path(path)
    constants = load_constants(target) if target.exists() else load_constants(_resolve_path(None))
    constants = dict(constants)
    constants[fit.name] = ConstantEntry(
        fit.value,
        _FIT_UNITS[fit.name],
        f"{provenance}; stderr {fit.stderr:.3g}, {fit.n_points} points, "
        f"max relative error {fit.max_relative_error:.3g}",
    )
    logger.info("stored %s = %.6g in %s", fit.name, fit.value, target)
    return save_constants(constants, target)
