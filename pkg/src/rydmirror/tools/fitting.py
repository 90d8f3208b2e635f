"""
Module: tools.fitting
--------------------
Least-squares fitting of the empirical scaling constants.

Classes
-------
- `FitResult`:
    Fitted parameters, their uncertainties and the RMSE residual

Functions
---------
- `create_loss_function`:
    Creates a JIT-compatible loss comparing a model with data
- `fit_model`:
    Fits model parameters with scipy's curve_fit and reports the residual
"""

import jax
import jax.numpy as jnp
import numpy as np
from beartype import beartype
from beartype.typing import (Callable, NamedTuple, Optional, Sequence, Tuple,
                             Union)
from jaxtyping import Array, Float
from scipy.optimize import curve_fit

from .logger import get_logger

jax.config.update("jax_enable_x64", True)

logger = get_logger(__name__)


class FitResult(NamedTuple):
    """
    Description
    -----------
    Outcome of a least-squares fit.

    Attributes
    ----------
    - `params` (Tuple[float, ...]):
        Best-fit parameters
    - `stderr` (Tuple[float, ...]):
        One-sigma uncertainties from the covariance diagonal
    - `rmse` (float):
        Root mean squared residual at the optimum
    """

    params: Tuple[float, ...]
    stderr: Tuple[float, ...]
    rmse: float


def create_loss_function(
    model: Callable[..., Array],
    x_data: Union[Array, np.ndarray],
    y_data: Union[Array, np.ndarray],
    loss_type: str = "mse",
) -> Callable[..., Float[Array, ""]]:
    """
    Description
    -----------
    Create a JIT-compatible loss function comparing `model(x_data, *params)`
    with `y_data`.

    Parameters
    ----------
    - `model` (Callable[..., Array]):
        Model written with jax.numpy, called as model(x, *params)
    - `x_data` (Array):
        Independent variable
    - `y_data` (Array):
        Observations
    - `loss_type` (str):
        "mae", "mse" or "rmse". Default is "mse".

    Returns
    -------
    - `loss_fn` (Callable[..., Float[Array, ""]]):
        Loss as a function of the model parameters

    Flow
    ----
    - Select the reduction for the requested loss
    - JIT a function that evaluates the model and reduces the residual
    """

    def mae_loss(diff):
        return jnp.mean(jnp.abs(diff))

    def mse_loss(diff):
        return jnp.mean(jnp.square(diff))

    def rmse_loss(diff):
        return jnp.sqrt(jnp.mean(jnp.square(diff)))

    loss_functions = {"mae": mae_loss, "mse": mse_loss, "rmse": rmse_loss}
    if loss_type not in loss_functions:
        raise ValueError(f"Unknown loss type: {loss_type}")
    selected_loss_fn = loss_functions[loss_type]
    x_arr = jnp.asarray(x_data, dtype=jnp.float64)
    y_arr = jnp.asarray(y_data, dtype=jnp.float64)

    @jax.jit
    def loss_fn(*params: Array) -> Float[Array, ""]:
        diff = model(x_arr, *params) - y_arr
        return selected_loss_fn(diff)

    return loss_fn


@beartype
def fit_model(
    model: Callable[..., Array],
    x_data: Union[Sequence[float], np.ndarray],
    y_data: Union[Sequence[float], np.ndarray],
    p0: Sequence[float],
    bounds: Optional[Tuple[Sequence[float], Sequence[float]]] = None,
) -> FitResult:
    """
    Description
    -----------
    Least-squares fit of `model(x, *params)` to data with
    `scipy.optimize.curve_fit`.

    Parameters
    ----------
    - `model` (Callable[..., Array]):
        Model written with jax.numpy
    - `x_data` (Sequence[float] | np.ndarray):
        Independent variable
    - `y_data` (Sequence[float] | np.ndarray):
        Observations
    - `p0` (Sequence[float]):
        Initial parameters
    - `bounds` (Tuple[Sequence[float], Sequence[float]], optional):
        Lower and upper parameter bounds

    Returns
    -------
    - `result` (FitResult):
        Parameters, uncertainties and RMSE residual

    Flow
    ----
    - Wrap the JAX model so curve_fit sees numpy arrays
    - Run curve_fit
    - Evaluate the RMSE loss at the optimum
    """
    x_np = np.asarray(x_data, dtype=np.float64)
    y_np = np.asarray(y_data, dtype=np.float64)
    if x_np.shape != y_np.shape or x_np.size < len(p0):
        raise ValueError(
            f"need matching x/y with at least {len(p0)} points, "
            f"got {x_np.shape} and {y_np.shape}"
        )

    def numpy_model(x: np.ndarray, *params: float) -> np.ndarray:
        return np.asarray(model(jnp.asarray(x), *params), dtype=np.float64)

    kwargs = {} if bounds is None else {"bounds": bounds}
    popt, pcov = curve_fit(numpy_model, x_np, y_np, p0=list(p0), **kwargs)
    stderr = np.sqrt(np.clip(np.diag(np.atleast_2d(pcov)), 0.0, np.inf))
    rmse_fn = create_loss_function(model, x_np, y_np, loss_type="rmse")
    rmse = float(rmse_fn(*[jnp.asarray(p) for p in popt]))
    logger.info("fit params=%s rmse=%.3e", np.round(popt, 6).tolist(), rmse)
    return FitResult(
        params=tuple(float(p) for p in popt),
        stderr=tuple(float(s) for s in stderr),
        rmse=rmse,
    )
