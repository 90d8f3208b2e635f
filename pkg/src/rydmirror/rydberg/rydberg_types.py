"""
Module: rydberg.rydberg_types
-----------------------------
Data structures and factories for Rydberg-blockaded atomic mirrors.

Rates are in units of Γ₀ and lengths in units of λ₀, as in
`rydmirror.arrays`. Physical (SI) quantities appear only in
`rydberg.dressing`.

Classes
-------
- `DressingScheme`:
    Control-field dressing of the excited state (ee or re scheme)
- `BlockadeMask`:
    Pair interaction model used to block or shift excitation pairs
- `TwoExcitationState`:
    Weak-drive two-excitation amplitudes over unordered atom pairs
- `StoredSpinWave`:
    Gaussian Rydberg spin wave stored by the gate photon
- `SwitchReport`:
    Outcome of a photon-switch evaluation or optimization
- `BlockadeBasis`:
    Independent sets of the blockade graph with raising/lowering maps
- `DensityMatrixState`:
    Steady-state density matrix on a blockade basis with its diagnostics
- `ProjectedLiouvillian`:
    Sparse non-Hermitian Hamiltonian and jump data on a blockade basis
- `MirrorConfiguration`:
    Saturated/reflecting assignment drawn by the stochastic mirror model
- `BinomialLossModel`:
    Uniform-drive superatom model of the classical loss
- `MonteCarloEstimate`:
    Sample means and standard errors of a Monte Carlo average

Factory Functions
----------------
- `make_dressing_scheme`:
    Creates a DressingScheme from control-field or interaction parameters
- `make_blockade_mask`:
    Creates a BlockadeMask with validation
- `make_stored_spinwave`:
    Creates a normalized StoredSpinWave
- `make_binomial_loss_model`:
    Creates a BinomialLossModel from N_b, N_d and the saturation parameter

    Note: Always use these factory functions instead of directly instantiating the
    NamedTuple classes to ensure proper runtime type checking of the contents.
"""

import math

import jax
import jax.numpy as jnp
from beartype import beartype
from beartype.typing import NamedTuple, Optional, Tuple
from jax.tree_util import register_pytree_node_class
from jaxtyping import Array, Bool, Complex, Float, Int, jaxtyped

from rydmirror.arrays.array_types import scalar_float, scalar_numeric
from rydmirror.tools import get_logger

jax.config.update("jax_enable_x64", True)

logger = get_logger(__name__)

DRESSING_KINDS: Tuple[str, ...] = ("ee", "re")
BLOCKADE_KINDS: Tuple[str, ...] = (
    "step-infinite",
    "step-finite",
    "microscopic-ee",
    "microscopic-re",
)


@jaxtyped(typechecker=beartype)
@register_pytree_node_class
class DressingScheme(NamedTuple):
    """
    Description
    -----------
    PyTree structure for the far-detuned coupling of |e⟩ (ee scheme) or of
    a stored |r⟩ excitation (re scheme) to a Rydberg level.

    Attributes
    ----------
    - `omega_c` (Float[Array, ""]):
        Control Rabi frequency Ω_c in units of Γ₀
    - `delta_c` (Float[Array, ""]):
        Control detuning δ_c in units of Γ₀, negative for repulsive C₆
    - `V` (Float[Array, ""]):
        Interaction scale |Ω_c|⁴/δ_c³ (ee) or |Ω_c|²/δ_c (re)
    - `R_b` (Float[Array, ""]):
        Microscopic blockade radius in units of λ₀
    - `two_photon_detuning` (Float[Array, ""]):
        Δ = δ + δ_c. Carried for bookkeeping only.
    - `kind` (str):
        "ee" or "re", static auxiliary data
    """

    omega_c: Float[Array, ""]
    delta_c: Float[Array, ""]
    V: Float[Array, ""]
    R_b: Float[Array, ""]
    two_photon_detuning: Float[Array, ""]
    kind: str

    def tree_flatten(self):
        return (
            (self.omega_c, self.delta_c, self.V, self.R_b, self.two_photon_detuning),
            self.kind,
        )

    @classmethod
    def tree_unflatten(cls, aux_data, children):
        return cls(*children, aux_data)

    def is_perturbative(self) -> bool:
        """True while |Ω_c| < |δ_c|, the regime where dressing is valid."""
        return abs(float(self.omega_c)) < abs(float(self.delta_c))


@jaxtyped(typechecker=beartype)
@register_pytree_node_class
class BlockadeMask(NamedTuple):
    """
    Description
    -----------
    PyTree structure for the pair interaction between two excitations.

    Attributes
    ----------
    - `radius` (Float[Array, ""]):
        R_b for the microscopic kinds, R_b^step for the step kinds
    - `V` (Float[Array, ""]):
        Interaction scale in units of Γ₀; +inf for "step-infinite"
    - `kind` (str):
        "step-infinite", "step-finite", "microscopic-ee" or
        "microscopic-re", static auxiliary data

    Notes
    -----
    Pairs at distance ≤ radius are blockaded (Θ(0) = 1), so a radius equal
    to the lattice constant blocks the nearest neighbours.
    """

    radius: Float[Array, ""]
    V: Float[Array, ""]
    kind: str

    def tree_flatten(self):
        return ((self.radius, self.V), self.kind)

    @classmethod
    def tree_unflatten(cls, aux_data, children):
        return cls(*children, aux_data)


@jaxtyped(typechecker=beartype)
@register_pytree_node_class
class TwoExcitationState(NamedTuple):
    """
    Description
    -----------
    Weak-drive two-excitation amplitudes c^(2e)_jk over the unordered pairs
    j < k, listed in row-major upper-triangle order.

    Attributes
    ----------
    - `c_ee` (Complex[Array, "P"]):
        Amplitudes, zero on blockaded pairs
    - `pairs` (Int[Array, "P 2"]):
        (j, k) with j < k for every entry of `c_ee`
    - `blockade` (BlockadeMask):
        The interaction model
    - `residual` (Float[Array, ""]):
        Relative residual of the pair-space solve
    """

    c_ee: Complex[Array, "P"]
    pairs: Int[Array, "P 2"]
    blockade: BlockadeMask
    residual: Float[Array, ""]

    def tree_flatten(self):
        return ((self.c_ee, self.pairs, self.blockade, self.residual), None)

    @classmethod
    def tree_unflatten(cls, aux_data, children):
        return cls(*children)


@jaxtyped(typechecker=beartype)
@register_pytree_node_class
class StoredSpinWave(NamedTuple):
    """
    Description
    -----------
    Rydberg spin wave |Ψ₀⟩ = Σ_j c_j σ^{rg}_j |g⟩ left by a stored gate
    photon, c_j ∝ e^{−|r_j|²/w₁²}.

    Attributes
    ----------
    - `c_r` (Float[Array, "Na"]):
        Non-negative weights with Σ c_j² = 1
    - `w1` (Float[Array, ""]):
        Gate waist
    """

    c_r: Float[Array, "Na"]
    w1: Float[Array, ""]

    def tree_flatten(self):
        return ((self.c_r, self.w1), None)

    @classmethod
    def tree_unflatten(cls, aux_data, children):
        return cls(*children)


class SwitchReport(NamedTuple):
    """
    Description
    -----------
    Errors of the single-photon switch at one pair of waists.

    Attributes
    ----------
    - `eta` (float):
        Storage efficiency η(w₁)
    - `T_cond` (float):
        Conditional transmittance T(w₁, w₂, R_b)
    - `R_uncond` (float):
        Reflectance R(w₂) without a stored photon
    - `epsilon` (float):
        ε = max(1 − ηT, 1 − R)
    - `epsilon_t` (float):
        1 − ηT
    - `epsilon_r` (float):
        1 − R
    - `w1` (float):
        Gate waist
    - `w2` (float):
        Signal waist
    - `R_b` (float):
        Blockade radius
    - `epsilon_V` (float, optional):
        Finite-interaction correction
    - `epsilon_N` (float, optional):
        Finite-array correction
    - `converged` (bool):
        False when the optimizer stopped on a search bound or its budget
    - `n_evals` (int):
        Objective evaluations spent
    """

    eta: float
    T_cond: float
    R_uncond: float
    epsilon: float
    epsilon_t: float
    epsilon_r: float
    w1: float
    w2: float
    R_b: float
    epsilon_V: Optional[float] = None
    epsilon_N: Optional[float] = None
    converged: bool = True
    n_evals: int = 0


@jaxtyped(typechecker=beartype)
@register_pytree_node_class
class BlockadeBasis(NamedTuple):
    """
    Description
    -----------
    Excitation configurations with no two excited atoms within R_b,
    ordered by excitation number and then lexicographically.

    Attributes
    ----------
    - `occupation` (Bool[Array, "M Na"]):
        Excited atoms of every configuration; row 0 is the ground state
    - `raise_index` (Int[Array, "M Na"]):
        Index of the configuration with atom j added, −1 if j is already
        excited or adding it violates the blockade
    - `lower_index` (Int[Array, "M Na"]):
        Index of the configuration with atom j removed, −1 if j is not
        excited
    - `n_excitations` (Int[Array, "M"]):
        Number of excitations of every configuration
    - `radius` (float):
        Blockade radius used for the enumeration, static auxiliary data
    """

    occupation: Bool[Array, "M Na"]
    raise_index: Int[Array, "M Na"]
    lower_index: Int[Array, "M Na"]
    n_excitations: Int[Array, "M"]
    radius: float

    def tree_flatten(self):
        return (
            (self.occupation, self.raise_index, self.lower_index, self.n_excitations),
            self.radius,
        )

    @classmethod
    def tree_unflatten(cls, aux_data, children):
        return cls(*children, aux_data)

    @property
    def n_states(self) -> int:
        return self.occupation.shape[0]


@jaxtyped(typechecker=beartype)
@register_pytree_node_class
class DensityMatrixState(NamedTuple):
    """
    Description
    -----------
    Steady state of the blockade-projected master equation.

    Attributes
    ----------
    - `rho` (Complex[Array, "M M"]):
        Density matrix over the basis configurations
    - `basis` (BlockadeBasis):
        The basis
    - `trace` (Float[Array, ""]):
        Re tr ρ
    - `residual` (Float[Array, ""]):
        Frobenius norm of L[ρ]
    - `hermiticity` (Float[Array, ""]):
        Frobenius norm of ρ − ρ†
    - `min_eigenvalue` (Float[Array, ""]):
        Smallest eigenvalue of the Hermitian part of ρ
    """

    rho: Complex[Array, "M M"]
    basis: BlockadeBasis
    trace: Float[Array, ""]
    residual: Float[Array, ""]
    hermiticity: Float[Array, ""]
    min_eigenvalue: Float[Array, ""]

    def tree_flatten(self):
        return (
            (
                self.rho,
                self.basis,
                self.trace,
                self.residual,
                self.hermiticity,
                self.min_eigenvalue,
            ),
            None,
        )

    @classmethod
    def tree_unflatten(cls, aux_data, children):
        return cls(*children)


@jaxtyped(typechecker=beartype)
@register_pytree_node_class
class ProjectedLiouvillian(NamedTuple):
    """
    Description
    -----------
    Master-equation generator restricted to a blockade basis.

    The non-Hermitian Hamiltonian is stored row-wise in ELLPACK form:
    (H x)[a] = Σ_s h_vals[a, s] x[h_cols[a, s]], with padding entries
    carrying a zero value.

    Attributes
    ----------
    - `h_cols` (Int[Array, "M S"]):
        Column indices of the Hamiltonian
    - `h_vals` (Complex[Array, "M S"]):
        Hamiltonian entries
    - `raise_index` (Int[Array, "M Na"]):
        Basis raising map with forbidden moves sent to the padding index M
    - `gamma` (Float[Array, "Na Na"]):
        Collective decay matrix Γ with unit diagonal
    """

    h_cols: Int[Array, "M S"]
    h_vals: Complex[Array, "M S"]
    raise_index: Int[Array, "M Na"]
    gamma: Float[Array, "Na Na"]

    def tree_flatten(self):
        return ((self.h_cols, self.h_vals, self.raise_index, self.gamma), None)

    @classmethod
    def tree_unflatten(cls, aux_data, children):
        return cls(*children)


@jaxtyped(typechecker=beartype)
@register_pytree_node_class
class MirrorConfiguration(NamedTuple):
    """
    Description
    -----------
    One draw of the stochastic hole-punching model.

    Attributes
    ----------
    - `saturated` (Bool[Array, "Na"]):
        True for saturated atoms, which are removed from the mirror
    - `seed` (Int[Array, ""]):
        Seed of the random stream
    - `sample_index` (Int[Array, ""]):
        Index of the draw within the stream
    - `n_steps` (Int[Array, ""]):
        Number of region assignments it took to label every atom
    """

    saturated: Bool[Array, "Na"]
    seed: Int[Array, ""]
    sample_index: Int[Array, ""]
    n_steps: Int[Array, ""]

    def tree_flatten(self):
        return ((self.saturated, self.seed, self.sample_index, self.n_steps), None)

    @classmethod
    def tree_unflatten(cls, aux_data, children):
        return cls(*children)


@jaxtyped(typechecker=beartype)
@register_pytree_node_class
class BinomialLossModel(NamedTuple):
    """
    Description
    -----------
    N_d independent blockade regions of N_b atoms each, every one
    saturated with probability p = s/(1 + s).

    Attributes
    ----------
    - `N_b` (Float[Array, ""]):
        Atoms per region
    - `N_d` (Float[Array, ""]):
        Number of regions under the beam
    - `p` (Float[Array, ""]):
        Saturation probability
    - `s` (Float[Array, ""]):
        Saturation parameter
    """

    N_b: Float[Array, ""]
    N_d: Float[Array, ""]
    p: Float[Array, ""]
    s: Float[Array, ""]

    def tree_flatten(self):
        return ((self.N_b, self.N_d, self.p, self.s), None)

    @classmethod
    def tree_unflatten(cls, aux_data, children):
        return cls(*children)


class MonteCarloEstimate(NamedTuple):
    """
    Description
    -----------
    Sample means and standard errors of the reflectance and loss.

    Attributes
    ----------
    - `R_mean` (float):
        Mean reflectance
    - `K_mean` (float):
        Mean loss
    - `R_se` (float):
        Standard error of `R_mean`
    - `K_se` (float):
        Standard error of `K_mean`
    - `n_samples` (int):
        Number of configurations averaged
    """

    R_mean: float
    K_mean: float
    R_se: float
    K_se: float
    n_samples: int


@beartype
def make_dressing_scheme(
    kind: str,
    R_b: scalar_float,
    omega_c: Optional[scalar_float] = None,
    delta_c: Optional[scalar_float] = None,
    V: Optional[scalar_float] = None,
    two_photon_detuning: scalar_float = 0.0,
) -> DressingScheme:
    """
    Description
    -----------
    Factory for DressingScheme. Either the control field (Ω_c, δ_c) or the
    interaction scale V is given. With V alone the scheme is placed at the
    edge of perturbation theory, Ω_c = |δ_c| and δ_c = V, for which both
    schemes give |V| = |δ_c|.

    Parameters
    ----------
    - `kind` (str):
        "ee" or "re"
    - `R_b` (scalar_float):
        Microscopic blockade radius, positive
    - `omega_c` (scalar_float, optional):
        Control Rabi frequency
    - `delta_c` (scalar_float, optional):
        Control detuning, nonzero
    - `V` (scalar_float, optional):
        Interaction scale, used when the control field is not given
    - `two_photon_detuning` (scalar_float):
        Δ = δ + δ_c. Default is 0.0.

    Returns
    -------
    - `scheme` (DressingScheme):
        Validated scheme

    Raises
    ------
    - ValueError:
        Unknown kind, non-positive R_b, δ_c = 0, or neither the control
        field nor V given

    Flow
    ----
    - Validate the kind and R_b
    - Derive V from (Ω_c, δ_c), or (Ω_c, δ_c) from V
    - Warn when |Ω_c| ≥ |δ_c|
    """
    if kind not in DRESSING_KINDS:
        raise ValueError(f"kind must be one of {DRESSING_KINDS}, got {kind!r}")
    if not float(R_b) > 0.0:
        raise ValueError(f"R_b must be positive, got {float(R_b)}")
    if omega_c is not None and delta_c is not None:
        if float(delta_c) == 0.0:
            raise ValueError("delta_c must be nonzero")
        oc = jnp.asarray(abs(float(omega_c)), dtype=jnp.float64)
        dc = jnp.asarray(delta_c, dtype=jnp.float64)
        scale = oc**4 / dc**3 if kind == "ee" else oc**2 / dc
    elif V is not None:
        if float(V) == 0.0:
            raise ValueError("V must be nonzero")
        dc = jnp.asarray(V, dtype=jnp.float64)
        oc = jnp.abs(dc)
        scale = dc
    else:
        raise ValueError("give either omega_c and delta_c, or V")
    scheme = DressingScheme(
        omega_c=oc,
        delta_c=dc,
        V=jnp.asarray(scale, dtype=jnp.float64),
        R_b=jnp.asarray(R_b, dtype=jnp.float64),
        two_photon_detuning=jnp.asarray(two_photon_detuning, dtype=jnp.float64),
        kind=kind,
    )
    if not scheme.is_perturbative():
        logger.warning(
            "|omega_c| = %.3g is not below |delta_c| = %.3g; dressing formulas "
            "are outside perturbation theory",
            float(oc),
            abs(float(dc)),
        )
    return scheme


@beartype
def make_blockade_mask(
    kind: str,
    radius: scalar_float,
    V: scalar_float = math.inf,
) -> BlockadeMask:
    """
    Description
    -----------
    Factory for BlockadeMask.

    Parameters
    ----------
    - `kind` (str):
        One of BLOCKADE_KINDS
    - `radius` (scalar_float):
        Blockade radius, non-negative. 0 disables the blockade.
    - `V` (scalar_float):
        Interaction scale. Must be finite for every kind but
        "step-infinite". Default is +inf.

    Returns
    -------
    - `mask` (BlockadeMask):
        Validated mask

    Raises
    ------
    - ValueError:
        Unknown kind, negative radius, or an infinite V for a finite kind
    """
    if kind not in BLOCKADE_KINDS:
        raise ValueError(f"kind must be one of {BLOCKADE_KINDS}, got {kind!r}")
    if float(radius) < 0.0:
        raise ValueError(f"blockade radius must be non-negative, got {float(radius)}")
    if kind == "step-infinite":
        V = math.inf
    elif not math.isfinite(float(V)):
        raise ValueError(f"{kind} needs a finite interaction scale V")
    return BlockadeMask(
        radius=jnp.asarray(radius, dtype=jnp.float64),
        V=jnp.asarray(V, dtype=jnp.float64),
        kind=kind,
    )


@jaxtyped(typechecker=beartype)
def make_stored_spinwave(
    weights: Float[Array, "Na"],
    w1: scalar_float,
) -> StoredSpinWave:
    """Normalize non-negative weights to Σ c_j² = 1."""
    norm = jnp.sqrt(jnp.sum(weights**2))
    return StoredSpinWave(
        c_r=weights / norm,
        w1=jnp.asarray(w1, dtype=jnp.float64),
    )


@beartype
def make_binomial_loss_model(
    N_b: scalar_numeric,
    N_d: scalar_numeric,
    s: scalar_float,
) -> BinomialLossModel:
    """
    Description
    -----------
    Factory for BinomialLossModel with p = s/(1 + s).

    Raises
    ------
    - ValueError:
        N_b < 1, N_d < 1 or s < 0
    """
    if float(N_b) < 1.0 or float(N_d) < 1.0:
        raise ValueError(f"N_b and N_d must be >= 1, got {float(N_b)} and {float(N_d)}")
    if float(s) < 0.0:
        raise ValueError(f"saturation parameter must be non-negative, got {float(s)}")
    s_arr = jnp.asarray(s, dtype=jnp.float64)
    return BinomialLossModel(
        N_b=jnp.asarray(N_b, dtype=jnp.float64),
        N_d=jnp.asarray(N_d, dtype=jnp.float64),
        p=s_arr / (1.0 + s_arr),
        s=s_arr,
    )
