"""
Module: rydberg.dressing
------------------------
Rydberg dressing potentials, their step-function approximation and the
conversion to laboratory parameters of ⁸⁷Rb.

Two schemes are modelled. In the ee scheme two atoms in |e⟩ lose part of
their fourth-order light shift when closer than R_b,
    V^ee(r) = −(|Ω_c|⁴/δ_c³) / (1 + r⁶/R_b⁶).
In the re scheme a stored Rydberg excitation suppresses the whole light
shift of nearby |e⟩ atoms,
    V^re(r) = (|Ω_c|²/δ_c) / (1 + 2R_b⁶/r⁶),
which vanishes at r → 0 and tends to the single-atom shift far away.
The single-atom shift is absorbed into the transition frequency, so the
level shift seen by the array is the departure from the far-field value.

Everything except the `physical_*` helpers works in units of Γ₀ and λ₀.

Functions
---------
- `stark_shift`:
    Single-atom light shift Δ_ac = |Ω_c|²/δ_c − |Ω_c|⁴/δ_c³
- `pair_potential`:
    V^ee(r) or V^re(r) of a dressing scheme
- `shift_profile`:
    Pair potential relative to its value at infinite separation
- `step_radius`:
    Radius inside which the shift exceeds the collective linewidth
- `blockade_mask`:
    Pair blockade and pair energy matrices of a geometry
- `blockade_from_scheme`:
    Microscopic BlockadeMask matching a dressing scheme
- `dressing_curve`:
    Normalized potential V(r)/V versus r/R_b
- `rydberg_dipole`:
    |e⟩–|r⟩ dipole moment d_er(n) in units of a₀e
- `c6_coefficient`:
    Van der Waals coefficient C₆(n) = C₀ n¹¹ in J m⁶
- `blockade_radius`:
    R_b = (C₆ / 2ħ|δ_c|)^{1/6} in metres
- `control_power`:
    Control power P_c = 2ε₀c|δ_c|²ħ²A/|d_er|² in watts
- `physical_parameters`:
    (R_b, P_c, V) for a principal quantum number and control detuning
"""

import math

import jax
import jax.numpy as jnp
import numpy as np
from beartype import beartype
from beartype.typing import Optional, Tuple, Union
from jaxtyping import Array, Bool, Float, jaxtyped
from scipy import constants as sc

from rydmirror.arrays.array_types import ArrayGeometry, scalar_float
from rydmirror.arrays.geometry import pairwise_distances
from rydmirror.errors import ConfigurationError
from rydmirror.tools import get_logger

from .rydberg_types import (DRESSING_KINDS, BlockadeMask, DressingScheme,
                            make_blockade_mask)

jax.config.update("jax_enable_x64", True)

logger = get_logger(__name__)

RB87_WAVELENGTH: float = 780.0e-9
RB87_GAMMA0: float = 2.0 * math.pi * 6.065e6
DIPOLE_REFERENCE_N: int = 43
DIPOLE_REFERENCE_VALUE: float = 0.0103
DISTANCE_TOLERANCE: float = 1e-9


@jaxtyped(typechecker=beartype)
def stark_shift(omega_c: scalar_float, delta_c: scalar_float) -> Float[Array, ""]:
    """
    Description
    -----------
    Light shift of a single dressed atom up to fourth order,
    Δ_ac = |Ω_c|²/δ_c − |Ω_c|⁴/δ_c³.

    Raises
    ------
    - ValueError:
        For δ_c = 0
    """
    if not isinstance(delta_c, jax.core.Tracer) and float(delta_c) == 0.0:
        raise ValueError("delta_c must be nonzero")
    oc_sq = jnp.abs(jnp.asarray(omega_c, dtype=jnp.float64)) ** 2
    dc = jnp.asarray(delta_c, dtype=jnp.float64)
    return oc_sq / dc - oc_sq**2 / dc**3


def _normalized_profile(kind: str, x: Array) -> Array:
    """Departure from the far-field shift in units of the contact value."""
    x6 = x**6
    if kind == "ee":
        return 1.0 / (1.0 + x6)
    return 2.0 / (x6 + 2.0)


@jaxtyped(typechecker=beartype)
def pair_potential(
    scheme: DressingScheme,
    r_ij: Union[scalar_float, Float[Array, "..."]],
) -> Float[Array, "..."]:
    """
    Description
    -----------
    Dressed pair potential of the scheme at distance r_ij.

    Parameters
    ----------
    - `scheme` (DressingScheme):
        ee or re dressing
    - `r_ij` (scalar_float | Float[Array, "..."]):
        Separations in units of λ₀

    Returns
    -------
    - `V` (Float[Array, "..."]):
        ee: −V/(1 + r⁶/R_b⁶); re: V r⁶/(r⁶ + 2R_b⁶), with V the scheme's
        interaction scale
    """
    x = jnp.asarray(r_ij, dtype=jnp.float64) / scheme.R_b
    if scheme.kind == "ee":
        return -scheme.V * _normalized_profile("ee", x)
    x6 = x**6
    return scheme.V * x6 / (x6 + 2.0)


@jaxtyped(typechecker=beartype)
def shift_profile(
    scheme: DressingScheme,
    r_ij: Union[scalar_float, Float[Array, "..."]],
) -> Float[Array, "..."]:
    """
    Description
    -----------
    Level shift of an |e⟩ atom at distance r_ij from another excitation,
    measured from the far-field single-atom shift that the drive frequency
    already compensates. Both schemes give −V at contact and 0 far away.
    """
    x = jnp.asarray(r_ij, dtype=jnp.float64) / scheme.R_b
    return -scheme.V * _normalized_profile(scheme.kind, x)


@beartype
def step_radius(
    R_b: scalar_float,
    V: scalar_float,
    gamma_k0: scalar_float,
    kappa: float,
) -> float:
    """
    Description
    -----------
    Radius of the equivalent step potential: the distance at which the
    level shift drops to the collective linewidth Γ_{k∥=0},
        R_b^step = R_b (κ(|V|/Γ_{k∥=0} − 1))^{1/6}.

    Parameters
    ----------
    - `R_b` (scalar_float):
        Microscopic blockade radius
    - `V` (scalar_float):
        Interaction scale in units of Γ₀
    - `gamma_k0` (scalar_float):
        Collective decay rate Γ_{k∥=0}
    - `kappa` (float):
        1 for the ee scheme, 2 for the re scheme

    Returns
    -------
    - `R_step` (float):
        Step radius, 0 when |V| ≤ Γ_{k∥=0}
    """
    if kappa <= 0.0:
        raise ValueError(f"kappa must be positive, got {kappa}")
    ratio = abs(float(V)) / float(gamma_k0)
    if ratio <= 1.0:
        logger.warning(
            "|V| = %.3g does not exceed the collective linewidth %.3g; no blockaded region",
            abs(float(V)),
            float(gamma_k0),
        )
        return 0.0
    return float(R_b) * (kappa * (ratio - 1.0)) ** (1.0 / 6.0)


def kappa_for(kind: str) -> float:
    """κ of the step-radius relation for a dressing or microscopic mask kind."""
    return 2.0 if kind.endswith("re") else 1.0


@beartype
def blockade_mask(
    geometry: ArrayGeometry,
    mask: BlockadeMask,
) -> Tuple[Bool[Array, "Na Na"], Float[Array, "Na Na"]]:
    """
    Description
    -----------
    Pair matrices of a geometry under a blockade model.

    Parameters
    ----------
    - `geometry` (ArrayGeometry):
        The array
    - `mask` (BlockadeMask):
        Interaction model

    Returns
    -------
    - `blocked` (Bool[Array, "Na Na"]):
        Pairs whose double excitation is forbidden. Only "step-infinite"
        blocks pairs; the diagonal is False.
    - `energy` (Float[Array, "Na Na"]):
        Pair energy added to a doubly excited pair, zero on the diagonal

    Flow
    ----
    - Pairwise distances with Θ(0) = 1 at the radius
    - step-infinite: block every pair within the radius
    - step-finite: energy V inside the radius
    - microscopic kinds: the smooth dressing profile with contact value V
    """
    dist = pairwise_distances(geometry)
    n = dist.shape[0]
    off = ~jnp.eye(n, dtype=bool)
    tol = DISTANCE_TOLERANCE * geometry.lattice_constant
    inside = (dist <= mask.radius + tol) & off
    zeros = jnp.zeros((n, n), dtype=jnp.float64)
    if mask.kind == "step-infinite":
        return inside, zeros
    if mask.kind == "step-finite":
        return jnp.zeros((n, n), dtype=bool), jnp.where(inside, mask.V, 0.0)
    if float(mask.radius) == 0.0:
        return jnp.zeros((n, n), dtype=bool), zeros
    kind = mask.kind.split("-")[1]
    energy = mask.V * _normalized_profile(kind, dist / mask.radius)
    return jnp.zeros((n, n), dtype=bool), jnp.where(off, energy, 0.0)


@beartype
def blockade_from_scheme(scheme: DressingScheme) -> BlockadeMask:
    """Microscopic mask with the contact shift of `scheme`, −V."""
    return make_blockade_mask(f"microscopic-{scheme.kind}", scheme.R_b, -scheme.V)


@jaxtyped(typechecker=beartype)
def dressing_curve(
    kind: str,
    r_over_rb: Float[Array, "M"],
) -> Float[Array, "M"]:
    """
    Description
    -----------
    Pair potential normalized by the interaction scale,
    ee: 1/(1 + x⁶) and re: x⁶/(x⁶ + 2), with x = r/R_b.
    """
    if kind not in DRESSING_KINDS:
        raise ValueError(f"kind must be one of {DRESSING_KINDS}, got {kind!r}")
    if kind == "ee":
        return _normalized_profile("ee", r_over_rb)
    x6 = r_over_rb**6
    return x6 / (x6 + 2.0)


@beartype
def rydberg_dipole(n: int) -> float:
    """d_er(n) = (43/n)³ · 0.0103 in units of a₀e."""
    if n < 1:
        raise ValueError(f"principal quantum number must be >= 1, got {n}")
    return (DIPOLE_REFERENCE_N / n) ** 3 * DIPOLE_REFERENCE_VALUE


@beartype
def c6_coefficient(n: int, c0: float) -> float:
    """C₆(n) = C₀ n¹¹, with C₀ and the result in J m⁶."""
    if c0 <= 0.0:
        raise ValueError(f"C0 must be positive, got {c0}")
    return c0 * float(n) ** 11


@beartype
def blockade_radius(c6: float, delta_c: float) -> float:
    """
    Description
    -----------
    R_b = (C₆ / 2ħ|δ_c|)^{1/6}.

    Parameters
    ----------
    - `c6` (float):
        Van der Waals coefficient in J m⁶
    - `delta_c` (float):
        Control detuning in rad/s

    Returns
    -------
    - `R_b` (float):
        Blockade radius in metres
    """
    if delta_c == 0.0:
        raise ValueError("delta_c must be nonzero")
    return (c6 / (2.0 * sc.hbar * abs(delta_c))) ** (1.0 / 6.0)


@beartype
def control_power(delta_c: float, d_er: float, area: float) -> float:
    """
    Description
    -----------
    Control-field power that reaches Ω_c ≈ |δ_c| over an illuminated area,
    P_c = 2ε₀c |δ_c|² ħ² A / |d_er|².

    Parameters
    ----------
    - `delta_c` (float):
        Control detuning in rad/s
    - `d_er` (float):
        Dipole moment in C m
    - `area` (float):
        Illuminated area in m²

    Returns
    -------
    - `P_c` (float):
        Power in watts
    """
    return 2.0 * sc.epsilon_0 * sc.c * delta_c**2 * sc.hbar**2 * area / d_er**2


@beartype
def physical_parameters(
    n: int,
    delta_c: float,
    geometry_area: float,
    c0: Optional[float] = None,
    wavelength: float = RB87_WAVELENGTH,
    gamma0: float = RB87_GAMMA0,
) -> Tuple[float, float, float]:
    """
    Description
    -----------
    Laboratory parameters of a dressing scheme run at the edge of
    perturbation theory, Ω_c ≈ |δ_c| and V ≈ δ_c.

    Parameters
    ----------
    - `n` (int):
        Principal quantum number of the Rydberg level
    - `delta_c` (float):
        Control detuning in units of Γ₀
    - `geometry_area` (float):
        Area illuminated by the control field in units of λ₀²
    - `c0` (float, optional):
        C₀ of the C₆(n) = C₀n¹¹ fit in J m⁶, from the constants file
    - `wavelength` (float):
        λ₀ in metres. Default is the ⁸⁷Rb D2 line.
    - `gamma0` (float):
        Γ₀ in rad/s. Default is ⁸⁷Rb.

    Returns
    -------
    - `R_b` (float):
        Blockade radius in units of λ₀
    - `P_c` (float):
        Control power in watts
    - `V` (float):
        Interaction scale in units of Γ₀

    Raises
    ------
    - ConfigurationError:
        When C₀ is not supplied

    Flow
    ----
    - Convert δ_c to rad/s and the area to m²
    - C₆(n), then R_b from the sixth-root law
    - d_er(n) in C m, then the control power
    """
    if c0 is None:
        raise ConfigurationError(
            "C0 of the C6(n) = C0 n^11 fit is required; set it in the constants file"
        )
    delta_si = float(delta_c) * gamma0
    area_si = float(geometry_area) * wavelength**2
    a0_e = sc.physical_constants["Bohr radius"][0] * sc.e
    d_er = rydberg_dipole(n) * a0_e
    r_b = blockade_radius(c6_coefficient(n, c0), delta_si) / wavelength
    p_c = control_power(delta_si, d_er, area_si)
    logger.debug(
        "n=%d delta_c=%.3g Gamma0: R_b=%.3f lambda0, P_c=%.3e W", n, delta_c, r_b, p_c
    )
    return r_b, p_c, float(delta_c)


def physical_parameter_table(
    principal_numbers: np.ndarray,
    detunings: np.ndarray,
    geometry_area: float,
    c0: Optional[float],
) -> np.ndarray:
    """Rows (n, δ_c, R_b, P_c, V) over every (n, δ_c) pair."""
    rows = []
    for n in principal_numbers:
        for delta_c in detunings:
            r_b, p_c, v = physical_parameters(int(n), float(delta_c), geometry_area, c0)
            rows.append((float(n), float(delta_c), r_b, p_c, v))
    return np.asarray(rows, dtype=np.float64)
