"""
Module: rydberg.correlations
----------------------------
Two-excitation weak-drive steady state under a Rydberg blockade and the
equal-time second-order correlation of the reflected light.

To second order in the drive the pair amplitudes obey
    (2δ + i − V_jk) c_jk − Σ_l H_jl c_lk − Σ_l H_lk c_jl = −(Ω_j c_k + Ω_k c_j)
for every allowed pair j < k, with c the single-excitation amplitudes and
V_jk the pair energy of a finite blockade. Pairs inside an infinite step
blockade are pinned to zero and dropped from the unknowns.

Small pair spaces are assembled densely and solved by LU. Larger ones are
solved matrix-free with GMRES acting on the symmetric N_a×N_a amplitude
matrix, preconditioned by the pair diagonal.

Functions
---------
- `allowed_pairs`:
    Pair list, allowed-pair matrix and pair energies of a geometry
- `steady_state_two_excitation`:
    Solves the pair equations for c^(2e)
- `pair_amplitude_matrix`:
    Symmetric N_a×N_a view of the pair amplitudes
- `g2_reflected`:
    g²_R(0) of the light scattered into the detection mode
- `g2_saturation_baseline`:
    (1 − 1/N_i)², the antibunching of N_i saturable emitters
- `g2_sweep`:
    g²_R over a list of blockade radii
"""

import math

import jax
import jax.numpy as jnp
import numpy as np
from beartype import beartype
from beartype.typing import Optional, Sequence, Tuple
from jax.scipy.sparse.linalg import gmres
from jaxtyping import Array, Bool, Complex, Float, Int, jaxtyped

from rydmirror.arrays.array_types import (ArrayGeometry, CouplingMatrix,
                                          DriveMode, SingleExcitationState,
                                          make_drive_mode, scalar_float)
from rydmirror.arrays.coupling import coupling_matrices
from rydmirror.arrays.dispersion import resonant_detuning
from rydmirror.arrays.geometry import drive_rabi, illuminated_count, mode_amplitudes
from rydmirror.arrays.scattering import steady_state_single_excitation
from rydmirror.errors import BasisSizeError
from rydmirror.tools import get_logger, ordered_map

from .dressing import blockade_mask
from .rydberg_types import BlockadeMask, TwoExcitationState, make_blockade_mask

jax.config.update("jax_enable_x64", True)

logger = get_logger(__name__)

DIRECT_PAIR_LIMIT: int = 4000
DEFAULT_MAX_PAIRS: int = 60000
PAIR_TOLERANCE: float = 1e-9


@beartype
def allowed_pairs(
    geometry: ArrayGeometry,
    blockade: BlockadeMask,
) -> Tuple[np.ndarray, Bool[Array, "Na Na"], Float[Array, "Na Na"]]:
    """
    Description
    -----------
    Pair bookkeeping of the two-excitation problem.

    Returns
    -------
    - `pairs` (np.ndarray):
        All unordered pairs (j, k), j < k, row-major, shape (P, 2)
    - `allowed` (Bool[Array, "Na Na"]):
        Symmetric, False on the diagonal and on blocked pairs
    - `energy` (Float[Array, "Na Na"]):
        Pair energies V_jk
    """
    n = geometry.positions.shape[0]
    blocked, energy = blockade_mask(geometry, blockade)
    allowed = ~blocked & ~jnp.eye(n, dtype=bool)
    jj, kk = np.triu_indices(n, 1)
    pairs = np.stack([jj, kk], axis=-1).astype(np.int64)
    return pairs, allowed, energy


def _dense_pair_solve(
    h: np.ndarray,
    shift: np.ndarray,
    rhs: np.ndarray,
    pj: np.ndarray,
    pk: np.ndarray,
) -> Tuple[Array, Array]:
    n = h.shape[0]
    n_pairs = pj.shape[0]
    index = -np.ones((n, n), dtype=np.int64)
    index[pj, pk] = np.arange(n_pairs)
    index[pk, pj] = np.arange(n_pairs)
    rows = np.repeat(np.arange(n_pairs), n)
    l_idx = np.tile(np.arange(n), n_pairs)
    j_rep = np.repeat(pj, n)
    k_rep = np.repeat(pk, n)
    # (HC)_jk couples (j,k) to (l,k), (CH)_jk couples it to (j,l)
    q1 = index[l_idx, k_rep]
    q2 = index[j_rep, l_idx]
    ok1 = q1 >= 0
    ok2 = q2 >= 0
    a = jnp.diag(jnp.asarray(shift[pj, pk]))
    a = a.at[rows[ok1], q1[ok1]].add(-jnp.asarray(h[j_rep[ok1], l_idx[ok1]]))
    a = a.at[rows[ok2], q2[ok2]].add(-jnp.asarray(h[l_idx[ok2], k_rep[ok2]]))
    b = jnp.asarray(rhs[pj, pk])
    x = jnp.linalg.solve(a, b)
    b_norm = jnp.linalg.norm(b)
    residual = jnp.linalg.norm(a @ x - b) / jnp.where(b_norm > 0.0, b_norm, 1.0)
    return x, residual


def _iterative_pair_solve(
    h: Array,
    shift: Array,
    rhs: Array,
    allowed: Array,
    tol: float,
    restart: int,
    maxiter: int,
) -> Tuple[Array, Array]:
    n = h.shape[0]

    def apply(vec: Array) -> Array:
        c = vec.reshape(n, n)
        return jnp.where(allowed, shift * c - h @ c - c @ h, c).ravel()

    def precondition(vec: Array) -> Array:
        c = vec.reshape(n, n)
        return jnp.where(allowed, c / shift, c).ravel()

    b = rhs.ravel()
    x, _ = gmres(
        apply,
        b,
        x0=precondition(b),
        tol=tol,
        atol=0.0,
        restart=restart,
        maxiter=maxiter,
        M=precondition,
    )
    b_norm = jnp.linalg.norm(b)
    residual = jnp.linalg.norm(apply(x) - b) / jnp.where(b_norm > 0.0, b_norm, 1.0)
    return x.reshape(n, n), residual


@beartype
def steady_state_two_excitation(
    geometry: ArrayGeometry,
    drive: DriveMode,
    single_state: SingleExcitationState,
    blockade: BlockadeMask,
    coupling: Optional[CouplingMatrix] = None,
    max_pairs: int = DEFAULT_MAX_PAIRS,
    direct_limit: int = DIRECT_PAIR_LIMIT,
    tol: float = PAIR_TOLERANCE,
    restart: int = 60,
    maxiter: int = 200,
) -> TwoExcitationState:
    """
    Description
    -----------
    Weak-drive two-excitation steady state of a blockaded array.

    Parameters
    ----------
    - `geometry` (ArrayGeometry):
        The array
    - `drive` (DriveMode):
        Signal drive; its detuning is δ
    - `single_state` (SingleExcitationState):
        Solved single-excitation amplitudes for the same drive
    - `blockade` (BlockadeMask):
        Interaction model
    - `coupling` (CouplingMatrix, optional):
        Precomputed couplings
    - `max_pairs` (int):
        Largest number of allowed pairs accepted. Default is 60000.
    - `direct_limit` (int):
        Dense LU below this many allowed pairs, GMRES above. Default is 4000.
    - `tol` (float):
        Relative residual target of GMRES. Default is 1e-9.
    - `restart` (int):
        GMRES Krylov subspace size. Default is 60.
    - `maxiter` (int):
        GMRES restarts. Default is 200.

    Returns
    -------
    - `state` (TwoExcitationState):
        c_jk over all pairs j < k, zero on blocked pairs, with the residual

    Raises
    ------
    - BasisSizeError:
        When the allowed pair space exceeds `max_pairs`

    Flow
    ----
    - Allowed pairs and pair energies from the blockade mask
    - Refuse oversized pair spaces before assembling anything
    - Right-hand side −(Ω_j c_k + Ω_k c_j) on allowed pairs
    - Dense pair matrix and LU for small spaces, otherwise matrix-free GMRES
    - Warn when the residual misses the tolerance
    """
    n = geometry.positions.shape[0]
    pairs, allowed, energy = allowed_pairs(geometry, blockade)
    allowed_np = np.asarray(allowed)
    pj_all, pk_all = pairs[:, 0], pairs[:, 1]
    keep = allowed_np[pj_all, pk_all]
    n_allowed = int(np.count_nonzero(keep))
    if n_allowed > max_pairs:
        raise BasisSizeError("two-excitation pair space", n_allowed, max_pairs)
    logger.debug(
        "pair space: %d of %d pairs allowed (%s blockade, radius %.3f)",
        n_allowed,
        pairs.shape[0],
        blockade.kind,
        float(blockade.radius),
    )
    coupling = coupling_matrices(geometry) if coupling is None else coupling
    rabi = drive_rabi(geometry, drive)
    c1 = single_state.c_e
    shift = 2.0 * drive.detuning + 1.0j - energy
    rhs = jnp.where(allowed, -(jnp.outer(rabi, c1) + jnp.outer(c1, rabi)), 0.0)
    c_ee = jnp.zeros(pairs.shape[0], dtype=jnp.complex128)
    if n_allowed == 0:
        residual = jnp.asarray(0.0)
    elif n_allowed <= direct_limit:
        x, residual = _dense_pair_solve(
            np.asarray(coupling.H),
            np.asarray(shift),
            np.asarray(rhs),
            pj_all[keep],
            pk_all[keep],
        )
        c_ee = c_ee.at[np.flatnonzero(keep)].set(x)
    else:
        c_full, residual = _iterative_pair_solve(
            coupling.H, shift, rhs, allowed, tol, restart, maxiter
        )
        c_ee = jnp.where(jnp.asarray(keep), c_full[pj_all, pk_all], 0.0)
    if float(residual) > tol:
        logger.warning(
            "two-excitation solve reached residual %.2e above %.1e (%d pairs)",
            float(residual),
            tol,
            n_allowed,
        )
    return TwoExcitationState(
        c_ee=c_ee,
        pairs=jnp.asarray(pairs, dtype=jnp.int64).reshape(-1, 2),
        blockade=blockade,
        residual=jnp.asarray(residual, dtype=jnp.float64),
    )


@jaxtyped(typechecker=beartype)
def pair_amplitude_matrix(
    two_state: TwoExcitationState,
    n_atoms: int,
) -> Complex[Array, "Na Na"]:
    """Symmetric matrix C with C_jk = C_kj = c_jk and a zero diagonal."""
    c = jnp.zeros((n_atoms, n_atoms), dtype=jnp.complex128)
    j, k = two_state.pairs[:, 0], two_state.pairs[:, 1]
    return c.at[j, k].set(two_state.c_ee).at[k, j].set(two_state.c_ee)


@beartype
def g2_reflected(
    single_state: SingleExcitationState,
    two_state: TwoExcitationState,
    det_mode: DriveMode,
    geometry: ArrayGeometry,
) -> Float[Array, ""]:
    """
    Description
    -----------
    Equal-time correlation of the reflected field,
        g²_R = |2 Σ_{j<k} u*_j u*_k c_jk|² / |Σ_j u*_j c_j|⁴.
    The factor 2 makes two independent identical emitters give 1/4, the
    saturation value for two emitters.

    Raises
    ------
    - ValueError:
        When no light is reflected into the detection mode
    """
    u_conj = jnp.conj(mode_amplitudes(det_mode, geometry))
    j, k = two_state.pairs[:, 0], two_state.pairs[:, 1]
    two_photon = 2.0 * jnp.sum(u_conj[j] * u_conj[k] * two_state.c_ee)
    one_photon = jnp.sum(u_conj * single_state.c_e)
    denominator = jnp.abs(one_photon) ** 4
    if float(denominator) == 0.0:
        raise ValueError("no reflected light in the detection mode; g2 is undefined")
    return jnp.abs(two_photon) ** 2 / denominator


@jaxtyped(typechecker=beartype)
def g2_saturation_baseline(n_illuminated: scalar_float) -> Float[Array, ""]:
    """g²_R ≈ (1 − 1/N_i)² for N_i illuminated saturable atoms."""
    if not isinstance(n_illuminated, jax.core.Tracer) and float(n_illuminated) < 1.0:
        raise ValueError(f"N_i must be >= 1, got {float(n_illuminated)}")
    return (1.0 - 1.0 / jnp.asarray(n_illuminated, dtype=jnp.float64)) ** 2


@beartype
def g2_at_radius(
    geometry: ArrayGeometry,
    w0: scalar_float,
    R_b: scalar_float,
    delta: Optional[scalar_float] = None,
    kind: str = "step-infinite",
    V: float = math.inf,
    coupling: Optional[CouplingMatrix] = None,
    max_pairs: int = DEFAULT_MAX_PAIRS,
) -> Tuple[float, float]:
    """g²_R and the pair-solve residual for one blockade radius."""
    delta = resonant_detuning(geometry) if delta is None else delta
    coupling = coupling_matrices(geometry) if coupling is None else coupling
    drive = make_drive_mode("gaussian", w0, 1.0, delta)
    single = steady_state_single_excitation(geometry, drive, coupling=coupling)
    mask = make_blockade_mask(kind, R_b, V)
    two = steady_state_two_excitation(
        geometry, drive, single, mask, coupling=coupling, max_pairs=max_pairs
    )
    g2 = g2_reflected(single, two, drive, geometry)
    residual = max(float(two.residual), float(single.residual))
    return float(g2), residual


@beartype
def g2_sweep(
    geometry: ArrayGeometry,
    w0: scalar_float,
    radii: Sequence[float],
    delta: Optional[scalar_float] = None,
    kind: str = "step-infinite",
    V: float = math.inf,
    max_pairs: int = DEFAULT_MAX_PAIRS,
    workers: int = 1,
    progress: bool = True,
) -> Float[Array, "M 3"]:
    """
    Description
    -----------
    g²_R of the reflected light over a list of blockade radii.

    Parameters
    ----------
    - `geometry` (ArrayGeometry):
        The array
    - `w0` (scalar_float):
        Waist of the drive and the detection mode
    - `radii` (Sequence[float]):
        Blockade radii R_b
    - `delta` (scalar_float, optional):
        Detuning. Default is the resonant detuning of the geometry.
    - `kind` (str):
        Blockade model. Default is "step-infinite".
    - `V` (float):
        Interaction scale of the finite models
    - `max_pairs` (int):
        Pair-space cap. Radii whose pair space is larger give NaN rows.
    - `workers` (int):
        Worker threads over the radii
    - `progress` (bool):
        Show a progress bar

    Returns
    -------
    - `rows` (Float[Array, "M 3"]):
        (R_b²/w₀², g²_R, residual) per radius, in input order. Skipped
        radii carry NaN in the last two columns.
    """
    delta = resonant_detuning(geometry) if delta is None else delta
    coupling = coupling_matrices(geometry)

    def point(radius: float) -> Tuple[float, float, float]:
        try:
            g2, residual = g2_at_radius(geometry, w0, radius, delta, kind, V, coupling, max_pairs)
        except BasisSizeError as err:
            logger.warning("R_b=%.3f skipped: %s", radius, err)
            return radius**2 / float(w0) ** 2, math.nan, math.nan
        logger.info("R_b=%.3f: g2_R=%.4g (residual %.1e)", radius, g2, residual)
        return radius**2 / float(w0) ** 2, g2, residual

    rows = ordered_map(point, radii, workers=workers, description="g2 sweep", progress=progress)
    baseline = g2_saturation_baseline(illuminated_count(w0, geometry.lattice_constant))
    logger.debug("saturation baseline (1 - 1/N_i)^2 = %.4f", float(baseline))
    return jnp.asarray(rows, dtype=jnp.float64).reshape(-1, 3)
