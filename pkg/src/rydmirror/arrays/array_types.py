"""
Module: arrays.array_types
--------------------------
Data structures and type definitions for sub-wavelength atomic arrays.

All lengths are in units of the transition wavelength (λ₀ = 1, k₀ = 2π) and
all rates and frequencies are in units of the single-atom decay rate Γ₀.

Type Aliases
------------
- `scalar_float`:
    A type alias for float or Float[Array, ""]
- `scalar_integer`:
    A type alias for int or Int[Array, ""]
- `scalar_complex`:
    A type alias for complex or Complex[Array, ""]
- `scalar_numeric`:
    A type alias for int, float, complex or Num[Array, ""]
- `non_jax_number`:
    A type alias for int, float or complex

Classes
-------
- `ArrayGeometry`:
    Atom positions, lattice constant and dipole orientation of a square array
- `DriveMode`:
    Gaussian or plane-wave drive/detection mode with Rabi frequency and detuning
- `ModeNorm`:
    Squared-amplitude-integrated area of a detection mode
- `CouplingMatrix`:
    Coherent and dissipative photon-mediated couplings
- `Dispersion`:
    Collective decay rate and shift of a spin wave of the infinite array
- `SingleExcitationState`:
    Weak-drive single-excitation amplitudes under an atom mask
- `ScatteringResult`:
    Mode-projected reflection and transmission amplitudes and powers

Factory Functions
----------------
- `make_array_geometry`:
    Creates an ArrayGeometry instance with validation
- `make_drive_mode`:
    Creates a DriveMode instance with validation
- `make_mode_norm`:
    Creates a ModeNorm instance with validation
- `make_coupling_matrix`:
    Creates a CouplingMatrix instance with validation
- `make_scattering_result`:
    Creates a ScatteringResult from the reflection amplitude

    Note: Always use these factory functions instead of directly instantiating the
    NamedTuple classes to ensure proper runtime type checking of the contents.
"""

import math

import jax
import jax.numpy as jnp
import numpy as np
from beartype import beartype
from beartype.typing import NamedTuple, Optional, Tuple, TypeAlias, Union
from jax.tree_util import register_pytree_node_class
from jaxtyping import Array, Bool, Complex, Float, Int, Num, jaxtyped

jax.config.update("jax_enable_x64", True)

scalar_float: TypeAlias = Union[float, Float[Array, ""]]
scalar_integer: TypeAlias = Union[int, Int[Array, ""]]
scalar_complex: TypeAlias = Union[complex, Complex[Array, ""]]
scalar_numeric: TypeAlias = Union[int, float, complex, Num[Array, ""]]
non_jax_number: TypeAlias = Union[int, float, complex]

WAVELENGTH: float = 1.0
K0: float = 2.0 * math.pi / WAVELENGTH

DRIVE_KINDS: Tuple[str, ...] = ("gaussian", "plane-wave")
AXIS_LABELS = {"x": (1.0, 0.0, 0.0), "y": (0.0, 1.0, 0.0), "z": (0.0, 0.0, 1.0)}


@jaxtyped(typechecker=beartype)
@register_pytree_node_class
class ArrayGeometry(NamedTuple):
    """
    Description
    -----------
    PyTree structure for an N×N square array in the z = 0 plane.

    Attributes
    ----------
    - `positions` (Float[Array, "Na 2"]):
        In-plane atom coordinates, row-major, centered at the origin
    - `lattice_constant` (Float[Array, ""]):
        Lattice constant d in units of λ₀
    - `dipole_axis` (Float[Array, "3"]):
        Unit vector of the transition dipole
    - `n_side` (int):
        Atoms per side N, kept as static auxiliary data

    Notes
    -----
    `n_side` fixes array shapes, so it travels in the auxiliary data of the
    PyTree and changing it triggers recompilation.
    """

    positions: Float[Array, "Na 2"]
    lattice_constant: Float[Array, ""]
    dipole_axis: Float[Array, "3"]
    n_side: int

    def tree_flatten(self):
        return (
            (
                self.positions,
                self.lattice_constant,
                self.dipole_axis,
            ),
            self.n_side,
        )

    @classmethod
    def tree_unflatten(cls, aux_data, children):
        return cls(*children, aux_data)

    @property
    def n_atoms(self) -> int:
        return self.n_side * self.n_side


@jaxtyped(typechecker=beartype)
@register_pytree_node_class
class DriveMode(NamedTuple):
    """
    Description
    -----------
    PyTree structure for a drive or detection mode at the array plane.

    Attributes
    ----------
    - `waist` (Float[Array, ""]):
        Gaussian waist w in units of λ₀. Ignored for plane waves.
    - `in_plane_wavevector` (Float[Array, "2"]):
        k∥ of a plane wave. Zero for the normal-incidence Gaussian.
    - `peak_rabi` (Float[Array, ""]):
        Peak Rabi frequency Ω₀ in units of Γ₀
    - `detuning` (Float[Array, ""]):
        Laser detuning δ = ω_L − ω₀ in units of Γ₀
    - `kind` (str):
        "gaussian" or "plane-wave", static auxiliary data
    """

    waist: Float[Array, ""]
    in_plane_wavevector: Float[Array, "2"]
    peak_rabi: Float[Array, ""]
    detuning: Float[Array, ""]
    kind: str

    def tree_flatten(self):
        return (
            (
                self.waist,
                self.in_plane_wavevector,
                self.peak_rabi,
                self.detuning,
            ),
            self.kind,
        )

    @classmethod
    def tree_unflatten(cls, aux_data, children):
        return cls(*children, aux_data)


@jaxtyped(typechecker=beartype)
@register_pytree_node_class
class ModeNorm(NamedTuple):
    """
    Description
    -----------
    Normalization area A = ∫|E_det|² d²ρ of a unit-peak detection mode.

    Attributes
    ----------
    - `area` (Float[Array, ""]):
        A in units of λ₀²
    """

    area: Float[Array, ""]

    def tree_flatten(self):
        return ((self.area,), None)

    @classmethod
    def tree_unflatten(cls, aux_data, children):
        return cls(*children)


@jaxtyped(typechecker=beartype)
@register_pytree_node_class
class CouplingMatrix(NamedTuple):
    """
    Description
    -----------
    PyTree structure for the photon-mediated interactions of an array.

    Attributes
    ----------
    - `J` (Float[Array, "Na Na"]):
        Coherent exchange J^ij in units of Γ₀, zero diagonal
    - `Gamma` (Float[Array, "Na Na"]):
        Collective decay Γ^ij in units of Γ₀, unit diagonal
    - `H` (Complex[Array, "Na Na"]):
        H_jk = J^jk − iΓ^jk/2 off the diagonal, zero on it
    """

    J: Float[Array, "Na Na"]
    Gamma: Float[Array, "Na Na"]
    H: Complex[Array, "Na Na"]

    def tree_flatten(self):
        return ((self.J, self.Gamma, self.H), None)

    @classmethod
    def tree_unflatten(cls, aux_data, children):
        return cls(*children)


@jaxtyped(typechecker=beartype)
@register_pytree_node_class
class Dispersion(NamedTuple):
    """
    Description
    -----------
    Spin-wave dispersion of the infinite array at one in-plane wavevector.

    Attributes
    ----------
    - `gamma_k` (Float[Array, ""]):
        Collective decay rate Γ_k∥ in units of Γ₀
    - `delta_k` (Float[Array, ""]):
        Collective shift Δ_k∥ in units of Γ₀
    - `k_par` (Float[Array, "2"]):
        In-plane wavevector
    - `convergence` (Float[Array, ""]):
        Change of Δ_k∥ when the summation radius is doubled
    """

    gamma_k: Float[Array, ""]
    delta_k: Float[Array, ""]
    k_par: Float[Array, "2"]
    convergence: Float[Array, ""]

    def tree_flatten(self):
        return ((self.gamma_k, self.delta_k, self.k_par, self.convergence), None)

    @classmethod
    def tree_unflatten(cls, aux_data, children):
        return cls(*children)


@jaxtyped(typechecker=beartype)
@register_pytree_node_class
class SingleExcitationState(NamedTuple):
    """
    Description
    -----------
    Weak-drive steady state in the single-excitation manifold.

    Attributes
    ----------
    - `c_e` (Complex[Array, "Na"]):
        Amplitudes c_j^(e), zero on removed atoms
    - `drive` (DriveMode):
        The drive that produced the state
    - `active_mask` (Bool[Array, "Na"]):
        True where the atom is present
    - `residual` (Float[Array, ""]):
        Relative residual of the linear solve
    """

    c_e: Complex[Array, "Na"]
    drive: DriveMode
    active_mask: Bool[Array, "Na"]
    residual: Float[Array, ""]

    def tree_flatten(self):
        return ((self.c_e, self.drive, self.active_mask, self.residual), None)

    @classmethod
    def tree_unflatten(cls, aux_data, children):
        return cls(*children)


@jaxtyped(typechecker=beartype)
@register_pytree_node_class
class ScatteringResult(NamedTuple):
    """
    Description
    -----------
    Mode-projected scattering of a weak coherent drive.

    Attributes
    ----------
    - `r_amp` (Complex[Array, ""]):
        Reflection amplitude into the backward detection mode
    - `t_amp` (Complex[Array, ""]):
        Transmission amplitude into the forward detection mode
    - `R` (Float[Array, ""]):
        Reflectance |r|²
    - `T` (Float[Array, ""]):
        Transmittance |t|²
    - `K` (Float[Array, ""]):
        Loss 1 − R − T
    """

    r_amp: Complex[Array, ""]
    t_amp: Complex[Array, ""]
    R: Float[Array, ""]
    T: Float[Array, ""]
    K: Float[Array, ""]

    def tree_flatten(self):
        return ((self.r_amp, self.t_amp, self.R, self.T, self.K), None)

    @classmethod
    def tree_unflatten(cls, aux_data, children):
        return cls(*children)


def _axis_vector(dipole_axis: Union[str, Float[Array, "3"], Tuple[float, ...]]) -> Array:
    if isinstance(dipole_axis, str):
        if dipole_axis not in AXIS_LABELS:
            raise ValueError(
                f"dipole_axis must be one of {sorted(AXIS_LABELS)}, got {dipole_axis!r}"
            )
        return jnp.asarray(AXIS_LABELS[dipole_axis], dtype=jnp.float64)
    axis = jnp.asarray(dipole_axis, dtype=jnp.float64)
    if axis.shape != (3,):
        raise ValueError(f"dipole_axis must be a 3-vector, got shape {axis.shape}")
    norm = float(jnp.linalg.norm(axis))
    if not math.isclose(norm, 1.0, rel_tol=0.0, abs_tol=1e-9):
        raise ValueError(f"dipole_axis must have unit length, got |p| = {norm}")
    return axis


@beartype
def make_array_geometry(
    positions: Union[Float[Array, "Na 2"], np.ndarray],
    lattice_constant: scalar_float,
    dipole_axis: Union[str, Float[Array, "3"], Tuple[float, ...]],
    n_side: int,
) -> ArrayGeometry:
    """
    Description
    -----------
    Factory for ArrayGeometry with data validation.

    Parameters
    ----------
    - `positions` (Float[Array, "Na 2"]):
        In-plane atom coordinates
    - `lattice_constant` (scalar_float):
        Lattice constant d > 0
    - `dipole_axis` (str | Float[Array, "3"]):
        Axis label ("x", "y", "z") or unit 3-vector
    - `n_side` (int):
        Atoms per side, N ≥ 1

    Returns
    -------
    - `geometry` (ArrayGeometry):
        Validated geometry

    Raises
    ------
    - ValueError:
        If d or N are not positive, the dipole axis is not a unit vector or
        the positions do not hold N² points

    Flow
    ----
    - Convert inputs to float64 JAX arrays
    - Check N, d and the dipole axis
    - Check there are N² positions
    - Create and return the ArrayGeometry
    """
    if n_side < 1:
        raise ValueError(f"n_side must be >= 1, got {n_side}")
    d = jnp.asarray(lattice_constant, dtype=jnp.float64)
    if not float(d) > 0.0:
        raise ValueError(f"lattice_constant must be positive, got {float(d)}")
    pos = jnp.asarray(positions, dtype=jnp.float64)
    if pos.shape != (n_side * n_side, 2):
        raise ValueError(
            f"positions must have shape ({n_side * n_side}, 2), got {pos.shape}"
        )
    return ArrayGeometry(
        positions=pos,
        lattice_constant=d,
        dipole_axis=_axis_vector(dipole_axis),
        n_side=int(n_side),
    )


@beartype
def make_drive_mode(
    kind: str = "gaussian",
    waist: scalar_float = 1.0,
    peak_rabi: scalar_float = 1.0,
    detuning: scalar_float = 0.0,
    in_plane_wavevector: Optional[Union[Float[Array, "2"], Tuple[float, float]]] = None,
) -> DriveMode:
    """
    Description
    -----------
    Factory for DriveMode with data validation.

    Parameters
    ----------
    - `kind` (str):
        "gaussian" (normal incidence) or "plane-wave". Default is "gaussian".
    - `waist` (scalar_float):
        Gaussian waist, must be positive. Default is 1.0.
    - `peak_rabi` (scalar_float):
        Peak Rabi frequency Ω₀ ≥ 0. Default is 1.0.
    - `detuning` (scalar_float):
        Laser detuning δ. Default is 0.0.
    - `in_plane_wavevector` (Float[Array, "2"], optional):
        k∥ of a plane wave with |k∥| ≤ k₀. Default is normal incidence.

    Returns
    -------
    - `mode` (DriveMode):
        Validated drive mode

    Raises
    ------
    - ValueError:
        If the kind is unknown, the waist is not positive, the Rabi frequency
        is negative or |k∥| exceeds k₀
    """
    if kind not in DRIVE_KINDS:
        raise ValueError(f"kind must be one of {DRIVE_KINDS}, got {kind!r}")
    w = jnp.asarray(waist, dtype=jnp.float64)
    if not float(w) > 0.0:
        raise ValueError(f"waist must be positive, got {float(w)}")
    omega = jnp.asarray(peak_rabi, dtype=jnp.float64)
    if float(omega) < 0.0:
        raise ValueError(f"peak_rabi must be non-negative, got {float(omega)}")
    if in_plane_wavevector is None:
        k_par = jnp.zeros(2, dtype=jnp.float64)
    else:
        k_par = jnp.asarray(in_plane_wavevector, dtype=jnp.float64)
    if kind == "gaussian" and float(jnp.linalg.norm(k_par)) > 0.0:
        raise ValueError("gaussian modes are restricted to normal incidence")
    if float(jnp.linalg.norm(k_par)) > K0 * (1.0 + 1e-12):
        raise ValueError(f"|k_par| must not exceed k0 = {K0:.6f}")
    return DriveMode(
        waist=w,
        in_plane_wavevector=k_par,
        peak_rabi=omega,
        detuning=jnp.asarray(detuning, dtype=jnp.float64),
        kind=kind,
    )


@beartype
def make_mode_norm(area: scalar_float) -> ModeNorm:
    """Factory for ModeNorm; the area must be positive."""
    a = jnp.asarray(area, dtype=jnp.float64)
    if not float(a) > 0.0:
        raise ValueError(f"mode area must be positive, got {float(a)}")
    return ModeNorm(area=a)


@jaxtyped(typechecker=beartype)
def make_coupling_matrix(
    J: Float[Array, "Na Na"],
    Gamma: Float[Array, "Na Na"],
) -> CouplingMatrix:
    """
    Description
    -----------
    Factory for CouplingMatrix. Assembles H = J − iΓ/2 with the diagonal
    removed; the single-atom terms enter the equations of motion separately.

    Parameters
    ----------
    - `J` (Float[Array, "Na Na"]):
        Coherent exchange matrix
    - `Gamma` (Float[Array, "Na Na"]):
        Collective decay matrix

    Returns
    -------
    - `coupling` (CouplingMatrix):
        Couplings with the assembled H
    """
    n = J.shape[0]
    off = 1.0 - jnp.eye(n)
    J = J * off
    H: Complex[Array, "Na Na"] = (J - 0.5j * Gamma) * off
    return CouplingMatrix(J=J, Gamma=Gamma, H=H)


@jaxtyped(typechecker=beartype)
def make_scattering_result(r_amp: Complex[Array, ""]) -> ScatteringResult:
    """
    Description
    -----------
    Build the ScatteringResult for a forward mode that interferes with the
    input, t = 1 + r.

    Parameters
    ----------
    - `r_amp` (Complex[Array, ""]):
        Reflection amplitude

    Returns
    -------
    - `result` (ScatteringResult):
        Amplitudes and R, T, K = 1 − R − T
    """
    t_amp = 1.0 + r_amp
    R = jnp.abs(r_amp) ** 2
    T = jnp.abs(t_amp) ** 2
    return ScatteringResult(r_amp=r_amp, t_amp=t_amp, R=R, T=T, K=1.0 - R - T)
