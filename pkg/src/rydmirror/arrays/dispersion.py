"""
Module: arrays.dispersion
-------------------------
Spin-wave dispersion of the infinite array and its plane-wave reflection.

The collective shift Δ_k∥ = Σ_{j≠0} e^{ik∥·r_j} J^{0j} is a conditionally
convergent two-dimensional lattice sum. A hard cutoff leaves an oscillating
tail of order Γ₀, so sums are taken with a Gaussian window e^{−r²/R²} by
default ("smooth"); "hard" truncation at r ≤ R is kept for comparison.

Functions
---------
- `collective_rate`:
    Analytic Γ_k∥ = (3π/k₀²d²)(1 − |k∥|²/k₀²)
- `lattice_sum`:
    Windowed lattice sums Σ_j Γ^{0j}e^{ik·r_j} and Σ_{j≠0} J^{0j}e^{ik·r_j}
- `collective_shift`:
    Δ_k∥ from the central atom of a geometry, with a convergence report
- `make_dispersion`:
    Bundles Γ_k∥ and Δ_k∥ for one wavevector
- `resonant_detuning`:
    δ = Δ_{k∥=0} from the finite geometry or the infinite lattice
- `plane_wave_r_t`:
    Lorentzian reflection and transmission of the infinite array
- `dispersion_table`:
    (k_x, k_y, Γ_k, Δ_k, convergence) rows over a k-grid
"""

import math
from functools import partial

import jax
import jax.numpy as jnp
from beartype import beartype
from beartype.typing import Optional, Tuple, Union
from jaxtyping import Array, Complex, Float, jaxtyped

from rydmirror.tools import get_logger

from .array_types import (K0, WAVELENGTH, ArrayGeometry, Dispersion,
                          scalar_float)
from .coupling import projected_green
from .geometry import build_square_array, central_atom_index

jax.config.update("jax_enable_x64", True)

logger = get_logger(__name__)

WINDOWS: Tuple[str, ...] = ("smooth", "hard")
SMOOTH_EXTENT: float = 4.0
DEFAULT_RADIUS_CUT: float = 20.0


def _check_k(k_par: Float[Array, "2"]) -> None:
    k_norm = float(jnp.linalg.norm(k_par))
    if k_norm > K0 * (1.0 + 1e-12):
        raise ValueError(
            f"|k_par| = {k_norm:.6f} exceeds k0 = {K0:.6f}; evanescent spin waves are not supported"
        )


def _check_window(window: str) -> None:
    if window not in WINDOWS:
        raise ValueError(f"window must be one of {WINDOWS}, got {window!r}")


@jaxtyped(typechecker=beartype)
def collective_rate(
    k_par: Union[Float[Array, "2"], Tuple[float, float]],
    d: scalar_float,
) -> Float[Array, ""]:
    """
    Description
    -----------
    Collective decay rate of the spin wave k∥ of an infinite array,
    Γ_k∥ = (3π/k₀²d²)(1 − |k∥|²/k₀²) in units of Γ₀.

    Parameters
    ----------
    - `k_par` (Float[Array, "2"]):
        In-plane wavevector with |k∥| ≤ k₀
    - `d` (scalar_float):
        Lattice constant, d < λ₀

    Returns
    -------
    - `gamma_k` (Float[Array, ""]):
        Γ_k∥

    Raises
    ------
    - ValueError:
        For |k∥| > k₀ or d ≥ λ₀
    """
    k_par = jnp.asarray(k_par, dtype=jnp.float64)
    _check_k(k_par)
    if not 0.0 < float(d) < WAVELENGTH:
        raise ValueError(f"lattice constant must lie in (0, λ0), got {float(d)}")
    k_sq = jnp.sum(k_par**2)
    return 3.0 * jnp.pi / (K0**2 * d**2) * (1.0 - k_sq / K0**2)


@partial(jax.jit, static_argnames=("smooth",))
def _windowed_sums(
    offsets: Float[Array, "M 2"],
    dipole_axis: Float[Array, "3"],
    k_par: Float[Array, "2"],
    radius_cut: Float[Array, ""],
    smooth: bool,
) -> Tuple[Float[Array, ""], Float[Array, ""]]:
    dist = jnp.linalg.norm(offsets, axis=-1)
    if smooth:
        weight = jnp.exp(-((dist / radius_cut) ** 2))
    else:
        weight = (dist <= radius_cut).astype(jnp.float64)
    pos3 = jnp.concatenate([offsets, jnp.zeros((offsets.shape[0], 1))], axis=-1)
    pgp = projected_green(pos3, dipole_axis)
    phase = jnp.exp(1j * offsets @ k_par)
    gamma_sum = 1.0 + (6.0 * jnp.pi / K0) * jnp.real(jnp.sum(weight * phase * jnp.imag(pgp)))
    shift = -(3.0 * jnp.pi / K0) * jnp.real(jnp.sum(weight * phase * jnp.real(pgp)))
    return gamma_sum, shift


def _lattice_offsets(d: float, extent: float) -> Float[Array, "M 2"]:
    half = int(math.ceil(extent / d))
    return build_square_array(2 * half + 1, d).positions


@beartype
def lattice_sum(
    k_par: Union[Float[Array, "2"], Tuple[float, float]],
    d: scalar_float,
    dipole_axis: Union[str, Float[Array, "3"]] = "x",
    radius_cut: scalar_float = DEFAULT_RADIUS_CUT,
    window: str = "smooth",
) -> Tuple[Float[Array, ""], Float[Array, ""]]:
    """
    Description
    -----------
    Windowed sums over an infinite square lattice around the atom at the
    origin,
        Γ-sum = Σ_j Γ^{0j} e^{ik∥·r_j}   (j = 0 included, Γ^{00} = 1)
        Δ-sum = Σ_{j≠0} J^{0j} e^{ik∥·r_j}.
    The Γ-sum reproduces `collective_rate` for |k∥| < k₀.

    Parameters
    ----------
    - `k_par` (Float[Array, "2"]):
        In-plane wavevector
    - `d` (scalar_float):
        Lattice constant
    - `dipole_axis` (str | Float[Array, "3"]):
        Dipole orientation. Default is "x".
    - `radius_cut` (scalar_float):
        Window radius R. Default is 20 λ₀.
    - `window` (str):
        "smooth" (Gaussian window, lattice out to 4R) or "hard" (r ≤ R).
        Default is "smooth".

    Returns
    -------
    - `gamma_sum` (Float[Array, ""]):
        Lattice sum of Γ
    - `delta_sum` (Float[Array, ""]):
        Lattice sum of J, i.e. Δ_k∥
    """
    _check_window(window)
    k_par = jnp.asarray(k_par, dtype=jnp.float64)
    _check_k(k_par)
    smooth = window == "smooth"
    extent = SMOOTH_EXTENT * float(radius_cut) if smooth else float(radius_cut)
    lattice = build_square_array(1, d, dipole_axis)
    offsets = _lattice_offsets(float(d), extent)
    return _windowed_sums(
        offsets,
        lattice.dipole_axis,
        k_par,
        jnp.asarray(radius_cut, dtype=jnp.float64),
        smooth,
    )


@beartype
def collective_shift(
    k_par: Union[Float[Array, "2"], Tuple[float, float]],
    geometry: ArrayGeometry,
    radius_cut: scalar_float = DEFAULT_RADIUS_CUT,
    window: str = "smooth",
) -> Tuple[Float[Array, ""], Float[Array, ""]]:
    """
    Description
    -----------
    Collective shift Δ_k∥ = Σ_{j≠0} e^{ik∥·(r_j − r_0)} J^{0j}, summed over the
    atoms of `geometry` around its central atom r_0.

    Parameters
    ----------
    - `k_par` (Float[Array, "2"]):
        In-plane wavevector
    - `geometry` (ArrayGeometry):
        Atoms entering the sum
    - `radius_cut` (scalar_float):
        Window radius. Default is 20 λ₀.
    - `window` (str):
        "smooth" or "hard". Default is "smooth".

    Returns
    -------
    - `delta_k` (Float[Array, ""]):
        The sum at `radius_cut`
    - `change` (Float[Array, ""]):
        |Δ(2·radius_cut) − Δ(radius_cut)|, the convergence report

    Flow
    ----
    - Offsets of all atoms from the central atom
    - Windowed sum at R and at 2R
    - Report the value at R and the change under doubling
    """
    _check_window(window)
    k_par = jnp.asarray(k_par, dtype=jnp.float64)
    _check_k(k_par)
    center = central_atom_index(geometry)
    offsets = geometry.positions - geometry.positions[center]
    smooth = window == "smooth"
    r_cut = jnp.asarray(radius_cut, dtype=jnp.float64)
    _, value = _windowed_sums(offsets, geometry.dipole_axis, k_par, r_cut, smooth)
    _, doubled = _windowed_sums(offsets, geometry.dipole_axis, k_par, 2.0 * r_cut, smooth)
    change = jnp.abs(doubled - value)
    logger.debug(
        "collective shift k=%s R=%.3g: %.6g (change %.2e)",
        k_par.tolist(),
        float(radius_cut),
        float(value),
        float(change),
    )
    return value, change


def finite_window_radius(geometry: ArrayGeometry) -> float:
    """Window radius that keeps the Gaussian taper inside the array: max(d, L/3)."""
    d = float(geometry.lattice_constant)
    half_extent = (geometry.n_side - 1) * d / 2.0
    return max(d, half_extent / 3.0)


@beartype
def make_dispersion(
    k_par: Union[Float[Array, "2"], Tuple[float, float]],
    d: scalar_float,
    geometry: Optional[ArrayGeometry] = None,
    radius_cut: scalar_float = DEFAULT_RADIUS_CUT,
    window: str = "smooth",
) -> Dispersion:
    """
    Description
    -----------
    Build the Dispersion of one spin wave: analytic Γ_k∥ and summed Δ_k∥.

    Parameters
    ----------
    - `k_par` (Float[Array, "2"]):
        In-plane wavevector
    - `d` (scalar_float):
        Lattice constant
    - `geometry` (ArrayGeometry, optional):
        Finite geometry for the central-atom sum. If None the infinite
        lattice with an x dipole is summed.
    - `radius_cut` (scalar_float):
        Window radius. Default is 20 λ₀.
    - `window` (str):
        "smooth" or "hard". Default is "smooth".

    Returns
    -------
    - `dispersion` (Dispersion):
        Γ_k∥, Δ_k∥, k∥ and the change of Δ under radius doubling
    """
    k_arr = jnp.asarray(k_par, dtype=jnp.float64)
    gamma_k = collective_rate(k_arr, d)
    if geometry is None:
        _, delta = lattice_sum(k_arr, d, "x", radius_cut, window)
        _, doubled = lattice_sum(k_arr, d, "x", 2.0 * float(radius_cut), window)
        change = jnp.abs(doubled - delta)
    else:
        delta, change = collective_shift(k_arr, geometry, radius_cut, window)
    return Dispersion(gamma_k=gamma_k, delta_k=delta, k_par=k_arr, convergence=change)


@beartype
def resonant_detuning(
    geometry: ArrayGeometry,
    reference: str = "finite",
    radius_cut: Optional[scalar_float] = None,
) -> Float[Array, ""]:
    """
    Description
    -----------
    The detuning δ = Δ_{k∥=0} at which the array reflects perfectly.

    Parameters
    ----------
    - `geometry` (ArrayGeometry):
        The driven array
    - `reference` (str):
        "finite" sums over the atoms of `geometry` around its center with a
        window that stays inside the array; "lattice" sums the infinite
        lattice of the same d and dipole axis. Default is "finite".
    - `radius_cut` (scalar_float, optional):
        Window radius. Defaults to `finite_window_radius` for "finite" and
        20 λ₀ for "lattice".

    Returns
    -------
    - `delta` (Float[Array, ""]):
        The resonant detuning
    """
    zero = jnp.zeros(2, dtype=jnp.float64)
    if reference == "finite":
        r_cut = finite_window_radius(geometry) if radius_cut is None else radius_cut
        delta, _ = collective_shift(zero, geometry, r_cut, "smooth")
    elif reference == "lattice":
        r_cut = DEFAULT_RADIUS_CUT if radius_cut is None else radius_cut
        _, delta = lattice_sum(
            zero, geometry.lattice_constant, geometry.dipole_axis, r_cut, "smooth"
        )
    else:
        raise ValueError(f"reference must be 'finite' or 'lattice', got {reference!r}")
    logger.debug("resonant detuning (%s): %.6f", reference, float(delta))
    return delta


@jaxtyped(typechecker=beartype)
def plane_wave_r_t(
    delta: scalar_float,
    dispersion: Dispersion,
) -> Tuple[Complex[Array, ""], Complex[Array, ""]]:
    """
    Description
    -----------
    Plane-wave amplitudes of the infinite array,
        r = −(iΓ_k∥/2)/(δ − Δ_k∥ + iΓ_k∥/2),  t = 1 + r.

    Parameters
    ----------
    - `delta` (scalar_float):
        Laser detuning
    - `dispersion` (Dispersion):
        Γ_k∥ and Δ_k∥

    Returns
    -------
    - `r` (Complex[Array, ""]):
        Reflection amplitude
    - `t` (Complex[Array, ""]):
        Transmission amplitude
    """
    half_width = 0.5j * dispersion.gamma_k
    r: Complex[Array, ""] = -half_width / (delta - dispersion.delta_k + half_width)
    return r, 1.0 + r


@beartype
def dispersion_table(
    k_grid: Float[Array, "M 2"],
    d: scalar_float,
    dipole_axis: Union[str, Float[Array, "3"]] = "x",
    radius_cut: scalar_float = DEFAULT_RADIUS_CUT,
    window: str = "smooth",
) -> Float[Array, "M 5"]:
    """
    Description
    -----------
    Dispersion rows (k_x, k_y, Γ_k, Δ_k, convergence) over a grid of
    in-plane wavevectors, with Δ_k from the infinite-lattice sum.

    Parameters
    ----------
    - `k_grid` (Float[Array, "M 2"]):
        Wavevectors, each with |k∥| ≤ k₀
    - `d` (scalar_float):
        Lattice constant
    - `dipole_axis` (str | Float[Array, "3"]):
        Dipole orientation. Default is "x".
    - `radius_cut` (scalar_float):
        Window radius. Default is 20 λ₀.
    - `window` (str):
        "smooth" or "hard". Default is "smooth".

    Returns
    -------
    - `table` (Float[Array, "M 5"]):
        One row per wavevector

    Flow
    ----
    - Validate every wavevector
    - Build the lattice offsets once for R and 2R
    - lax.map the windowed sums over the grid
    - Stack with the analytic rates
    """
    _check_window(window)
    for k in k_grid:
        _check_k(k)
    smooth = window == "smooth"
    r_cut = float(radius_cut)
    scale = SMOOTH_EXTENT if smooth else 1.0
    axis = build_square_array(1, d, dipole_axis).dipole_axis
    offsets = _lattice_offsets(float(d), scale * 2.0 * r_cut)
    r_arr = jnp.asarray(r_cut, dtype=jnp.float64)

    def row(k: Float[Array, "2"]) -> Float[Array, "2"]:
        _, delta = _windowed_sums(offsets, axis, k, r_arr, smooth)
        _, doubled = _windowed_sums(offsets, axis, k, 2.0 * r_arr, smooth)
        return jnp.stack([delta, jnp.abs(doubled - delta)])

    sums = jax.lax.map(row, k_grid)
    k_sq = jnp.sum(k_grid**2, axis=-1)
    gamma_k = 3.0 * jnp.pi / (K0**2 * d**2) * (1.0 - k_sq / K0**2)
    return jnp.stack(
        [k_grid[:, 0], k_grid[:, 1], gamma_k, sums[:, 0], sums[:, 1]], axis=-1
    )
