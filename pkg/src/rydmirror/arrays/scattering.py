"""
Module: arrays.scattering
-------------------------
Weak-drive (single-excitation) scattering of Gaussian beams by finite arrays.

The steady state solves H_eff c = Ω with H_eff = J − iΓ/2 − (δ + i/2)𝟙, i.e.
    (δ + i/2) c_j − Σ_{k≠j} H_jk c_k = −Ω_j.
Removed atoms are handled with fixed shapes: their rows and columns are
replaced by the identity and their drive is zeroed, so masked solves batch
under vmap and lax.map.

The reflected amplitude into the detection mode u is
    r = i β Σ_j u*(r_j) c_j / Ω₀,  β = 3π/(2k₀²A),
which reproduces the plane-wave Lorentzian of an infinite array in the
uniform limit; the forward mode interferes with the input, t = 1 + r.

Functions
---------
- `masked_linear_response`:
    Masked solve of H_eff c = Ω with its relative residual
- `steady_state_single_excitation`:
    Single-excitation steady state of a driven array
- `project_scattering`:
    Projects a state onto the Gaussian detection mode (r, t, R, T, K)
- `blockade_hole_mask`:
    Active-atom mask of an array with a blockade hole
- `hole_transmission`:
    Transmitted amplitude through an array with a step-blockade hole
- `hole_resolvent`:
    Inverse of H_eff, shared by every hole of a hole map
- `hole_transmission_map`:
    Batched hole amplitudes over many hole centers
- `potential_hole_transmission`:
    Transmitted amplitude with a smooth level-shift profile instead of a hole
- `reflectance_sweep`:
    R, T, K over a list of beam waists from a single factorization
- `symmetry_representatives`:
    Reduces hole centers to one atom per x → −x, y → −y orbit
- `aperture_analytics`:
    Gaussian beam through a circular hole in a perfect mirror
- `finite_mirror_reflectance_model`:
    erf⁴(Nd/√2w) − C_R λ⁴/w⁴
"""

import math

import jax
import jax.numpy as jnp
import numpy as np
from beartype import beartype
from beartype.typing import Callable, Dict, Optional, Sequence, Tuple
from jax.scipy.special import erf
from jaxtyping import Array, Bool, Complex, Float, Int, jaxtyped

from rydmirror.tools import get_logger

from .array_types import (K0, ArrayGeometry, CouplingMatrix, DriveMode,
                          ScatteringResult, SingleExcitationState,
                          make_drive_mode, make_scattering_result,
                          scalar_float, scalar_numeric)
from .coupling import coupling_matrices, effective_hamiltonian_matrix
from .dispersion import resonant_detuning
from .geometry import (drive_rabi, mode_amplitudes, mode_norm,
                       pairwise_distances)

jax.config.update("jax_enable_x64", True)

logger = get_logger(__name__)

DISTANCE_TOLERANCE: float = 1e-9


@jax.jit
def masked_linear_response(
    h_eff: Complex[Array, "Na Na"],
    rabi: Complex[Array, "Na"],
    mask: Bool[Array, "Na"],
) -> Tuple[Complex[Array, "Na"], Float[Array, ""]]:
    """
    Description
    -----------
    Solve H_eff c = Ω restricted to the atoms where `mask` is True.

    Parameters
    ----------
    - `h_eff` (Complex[Array, "Na Na"]):
        Effective Hamiltonian
    - `rabi` (Complex[Array, "Na"]):
        Per-atom Rabi frequencies
    - `mask` (Bool[Array, "Na"]):
        True for atoms that are present

    Returns
    -------
    - `c` (Complex[Array, "Na"]):
        Amplitudes, exactly zero on removed atoms
    - `residual` (Float[Array, ""]):
        ‖A c − b‖/‖b‖ of the masked system (absolute when b = 0)

    Flow
    ----
    - Replace removed rows and columns by the identity
    - Zero the drive on removed atoms
    - Dense LU solve
    """
    keep = mask.astype(h_eff.dtype)
    a = h_eff * keep[:, None] * keep[None, :] + jnp.diag(1.0 - keep)
    b = rabi * keep
    c = jnp.linalg.solve(a, b) * keep
    b_norm = jnp.linalg.norm(b)
    residual = jnp.linalg.norm(a @ c - b) / jnp.where(b_norm > 0.0, b_norm, 1.0)
    return c, residual


def _coupling_or_build(
    geometry: ArrayGeometry, coupling: Optional[CouplingMatrix]
) -> CouplingMatrix:
    return coupling_matrices(geometry) if coupling is None else coupling


@beartype
def steady_state_single_excitation(
    geometry: ArrayGeometry,
    drive: DriveMode,
    active_mask: Optional[Bool[Array, "Na"]] = None,
    coupling: Optional[CouplingMatrix] = None,
    shifts: Optional[Float[Array, "Na"]] = None,
) -> SingleExcitationState:
    """
    Description
    -----------
    Weak-drive steady state of the array in the single-excitation manifold,
    (δ + i/2)c_j − Σ_{k≠j} H_jk c_k = −Ω_j on the active atoms.

    Parameters
    ----------
    - `geometry` (ArrayGeometry):
        The array
    - `drive` (DriveMode):
        Drive mode; its detuning is δ
    - `active_mask` (Bool[Array, "Na"], optional):
        Atoms present. Default is all atoms.
    - `coupling` (CouplingMatrix, optional):
        Precomputed couplings of `geometry`
    - `shifts` (Float[Array, "Na"], optional):
        Per-atom level shifts U_j, giving an effective detuning δ − U_j

    Returns
    -------
    - `state` (SingleExcitationState):
        Amplitudes c^(e), the drive, the mask and the solve residual

    Flow
    ----
    - Build couplings unless supplied
    - Assemble H_eff at the drive detuning
    - Replace a zero drive by a unit peak drive
    - Masked dense solve

    Notes
    -----
    The amplitudes are linear in Ω₀, so for Ω₀ = 0 the returned state
    carries a unit peak drive and its amplitudes are the Ω₀ → 0 limit of
    c/Ω₀. Observables projected from it are the zero-drive limits.
    """
    n = geometry.positions.shape[0]
    mask = jnp.ones(n, dtype=bool) if active_mask is None else active_mask
    if float(drive.peak_rabi) == 0.0:
        drive = drive._replace(peak_rabi=jnp.asarray(1.0, dtype=jnp.float64))
    coupling = _coupling_or_build(geometry, coupling)
    h_eff = effective_hamiltonian_matrix(coupling, drive.detuning, shifts)
    c, residual = masked_linear_response(h_eff, drive_rabi(geometry, drive), mask)
    logger.debug("single-excitation solve: N_a=%d residual=%.2e", n, float(residual))
    return SingleExcitationState(c_e=c, drive=drive, active_mask=mask, residual=residual)


def projection_constant(det_mode: DriveMode) -> Float[Array, ""]:
    """β = 3π/(2k₀²A) for the Gaussian detection mode."""
    return 3.0 * jnp.pi / (2.0 * K0**2 * mode_norm(det_mode).area)


@beartype
def project_scattering(
    state: SingleExcitationState,
    det_mode: DriveMode,
    geometry: ArrayGeometry,
) -> ScatteringResult:
    """
    Description
    -----------
    Project the scattered field of a weak-drive state onto the Gaussian
    detection mode.

    Parameters
    ----------
    - `state` (SingleExcitationState):
        Solved amplitudes
    - `det_mode` (DriveMode):
        Gaussian detection mode, normally identical to the drive
    - `geometry` (ArrayGeometry):
        Array positions

    Returns
    -------
    - `result` (ScatteringResult):
        r = iβ Σ u* c/Ω₀, t = 1 + r, R, T, K

    Flow
    ----
    - Warn when the detection waist differs from the drive waist
    - Overlap the amplitudes with the detection mode
    - Normalize by Ω₀ of the state's drive, which the solver keeps nonzero
    """
    if state.drive.kind == "gaussian" and not math.isclose(
        float(state.drive.waist), float(det_mode.waist), rel_tol=1e-12
    ):
        logger.warning(
            "detection waist %.4g differs from drive waist %.4g; t = 1 + r assumes matched modes",
            float(det_mode.waist),
            float(state.drive.waist),
        )
    beta = projection_constant(det_mode)
    u = mode_amplitudes(det_mode, geometry)
    omega0 = state.drive.peak_rabi
    overlap = jnp.sum(jnp.conj(u) * state.c_e)
    r_amp = 1j * beta * overlap / jnp.where(omega0 > 0.0, omega0, 1.0)
    return make_scattering_result(r_amp)


@beartype
def blockade_hole_mask(
    geometry: ArrayGeometry,
    hole_center_index: int,
    R_b: scalar_float,
) -> Bool[Array, "Na"]:
    """
    Description
    -----------
    Mask of the atoms that survive a step-blockade hole: atoms with
    |r_j − r_i| ≤ R_b are removed, the center itself included.
    """
    dist = jnp.linalg.norm(geometry.positions - geometry.positions[hole_center_index], axis=-1)
    return dist > R_b + DISTANCE_TOLERANCE * geometry.lattice_constant


def _signal_drive(det_waist: scalar_float, delta: scalar_float) -> DriveMode:
    return make_drive_mode("gaussian", det_waist, 1.0, delta)


def _default_delta(geometry: ArrayGeometry, delta: Optional[scalar_float]):
    return resonant_detuning(geometry) if delta is None else delta


@beartype
def hole_transmission(
    geometry: ArrayGeometry,
    hole_center_index: int,
    R_b: scalar_float,
    det_waist: scalar_float,
    delta: Optional[scalar_float] = None,
    coupling: Optional[CouplingMatrix] = None,
) -> Tuple[Complex[Array, ""], Float[Array, ""]]:
    """
    Description
    -----------
    Transmitted amplitude t_i = √T̄_i e^{iφ_i} of a Gaussian beam through
    the array with a step-blockade hole of radius R_b around atom i.

    Parameters
    ----------
    - `geometry` (ArrayGeometry):
        The array
    - `hole_center_index` (int):
        Atom i holding the stored excitation
    - `R_b` (scalar_float):
        Blockade radius; atoms at distance ≤ R_b are removed
    - `det_waist` (scalar_float):
        Waist w₂ of the signal drive and detection mode
    - `delta` (scalar_float, optional):
        Detuning. Default is the resonant detuning of the geometry.
    - `coupling` (CouplingMatrix, optional):
        Precomputed couplings

    Returns
    -------
    - `t_i` (Complex[Array, ""]):
        Transmitted amplitude
    - `residual` (Float[Array, ""]):
        Residual of the masked solve
    """
    delta = _default_delta(geometry, delta)
    drive = _signal_drive(det_waist, delta)
    mask = blockade_hole_mask(geometry, hole_center_index, R_b)
    state = steady_state_single_excitation(geometry, drive, mask, coupling)
    result = project_scattering(state, drive, geometry)
    return result.t_amp, state.residual


@beartype
def hole_resolvent(
    geometry: ArrayGeometry,
    delta: scalar_float,
    coupling: Optional[CouplingMatrix] = None,
) -> Complex[Array, "Na Na"]:
    """
    Description
    -----------
    G = H_eff⁻¹ of the intact array. Every hole of a hole map is a
    low-rank modification of the intact array, so one inverse serves all
    holes and all signal waists at a given detuning.
    """
    coupling = _coupling_or_build(geometry, coupling)
    h_eff = effective_hamiltonian_matrix(coupling, delta)
    return jnp.linalg.inv(h_eff)


def _hole_index_table(
    geometry: ArrayGeometry,
    centers: Sequence[int],
    R_b: float,
) -> Tuple[np.ndarray, np.ndarray]:
    positions = np.asarray(geometry.positions)
    tol = DISTANCE_TOLERANCE * float(geometry.lattice_constant)
    members = []
    for i in centers:
        dist = np.linalg.norm(positions - positions[i], axis=-1)
        members.append(np.flatnonzero(dist <= R_b + tol))
    width = max(len(m) for m in members)
    index = np.zeros((len(centers), width), dtype=np.int64)
    valid = np.zeros((len(centers), width), dtype=bool)
    for row, m in enumerate(members):
        index[row, : len(m)] = m
        valid[row, : len(m)] = True
    return index, valid


def symmetry_representatives(
    geometry: ArrayGeometry, centers: Sequence[int]
) -> Tuple[np.ndarray, np.ndarray]:
    """Map each center to the atom at (|x|, |y|) and return the unique set."""
    positions = np.asarray(geometry.positions)
    lookup: Dict[Tuple[int, int], int] = {}
    d = float(geometry.lattice_constant)
    for idx, (x, y) in enumerate(positions):
        lookup[(int(round(2 * x / d)), int(round(2 * y / d)))] = idx
    canon = []
    for i in centers:
        x, y = positions[i]
        canon.append(lookup[(int(round(2 * abs(x) / d)), int(round(2 * abs(y) / d)))])
    canon_arr = np.asarray(canon, dtype=np.int64)
    unique, inverse = np.unique(canon_arr, return_inverse=True)
    return unique, inverse


@jax.jit
def _hole_amplitudes(
    resolvent: Complex[Array, "Na Na"],
    rabi: Complex[Array, "Na"],
    u_det: Complex[Array, "Na"],
    beta: Float[Array, ""],
    index: Int[Array, "M K"],
    valid: Bool[Array, "M K"],
) -> Tuple[Complex[Array, "M"], Float[Array, "M"]]:
    c0 = resolvent @ rabi
    w = jnp.conj(u_det) @ resolvent
    base_overlap = jnp.sum(jnp.conj(u_det) * c0)

    def one_hole(args):
        idx, ok = args
        okc = ok.astype(resolvent.dtype)
        g_ss = resolvent[idx[:, None], idx[None, :]]
        g_ss = g_ss * okc[:, None] * okc[None, :] + jnp.diag(1.0 - okc)
        omega_s = rabi[idx] * okc
        rhs = (c0[idx] - g_ss @ omega_s) * okc
        x = -jnp.linalg.solve(g_ss, rhs)
        w_s = w[idx] * okc
        overlap = base_overlap - jnp.sum(w_s * omega_s) + jnp.sum(w_s * x)
        r_norm = jnp.linalg.norm(rhs)
        residual = jnp.linalg.norm(g_ss @ x + rhs) / jnp.where(r_norm > 0.0, r_norm, 1.0)
        return 1.0 + 1j * beta * overlap, residual

    return jax.lax.map(one_hole, (index, valid))


@beartype
def hole_transmission_map(
    geometry: ArrayGeometry,
    centers: Sequence[int],
    R_b: scalar_float,
    det_waist: scalar_float,
    delta: Optional[scalar_float] = None,
    resolvent: Optional[Complex[Array, "Na Na"]] = None,
    use_symmetry: bool = True,
) -> Tuple[Complex[Array, "M"], Float[Array, "M"]]:
    """
    Description
    -----------
    Transmitted amplitudes t_i for step-blockade holes centered on each of
    `centers`, from a single inverse of the intact array.

    With G = H_eff⁻¹ and hole set S, the masked solution is
    c = G b' + G[:, S] x with b' the drive zeroed on S and
    x = −G_SS⁻¹ (G b')_S, so each hole costs one |S|×|S| solve.

    Parameters
    ----------
    - `geometry` (ArrayGeometry):
        The array
    - `centers` (Sequence[int]):
        Hole-center atom indices
    - `R_b` (scalar_float):
        Blockade radius
    - `det_waist` (scalar_float):
        Signal waist w₂
    - `delta` (scalar_float, optional):
        Detuning. Default is the resonant detuning of the geometry.
    - `resolvent` (Complex[Array, "Na Na"], optional):
        Precomputed `hole_resolvent` at the same detuning
    - `use_symmetry` (bool):
        Solve only one center per x → −x, y → −y orbit. Valid for the
        centered beam on the square lattice with an in-plane dipole.
        Default is True.

    Returns
    -------
    - `t` (Complex[Array, "M"]):
        Transmitted amplitudes in the order of `centers`
    - `residual` (Float[Array, "M"]):
        Relative residuals of the hole solves

    Flow
    ----
    - Reduce the centers to symmetry representatives
    - Tabulate padded hole index sets
    - Invert the intact array unless the inverse is supplied
    - lax.map the low-rank hole updates
    - Scatter the representatives back to the requested order
    """
    if len(centers) == 0:
        return jnp.zeros(0, dtype=jnp.complex128), jnp.zeros(0)
    delta = _default_delta(geometry, delta)
    if resolvent is None:
        resolvent = hole_resolvent(geometry, delta)
    if use_symmetry:
        unique, inverse = symmetry_representatives(geometry, centers)
    else:
        unique = np.asarray(centers, dtype=np.int64)
        inverse = np.arange(len(centers))
    index, valid = _hole_index_table(geometry, unique.tolist(), float(R_b))
    drive = _signal_drive(det_waist, delta)
    rabi = drive_rabi(geometry, drive)
    u_det = mode_amplitudes(drive, geometry)
    beta = projection_constant(drive)
    t_unique, residual = _hole_amplitudes(
        resolvent, rabi, u_det, beta, jnp.asarray(index), jnp.asarray(valid)
    )
    logger.debug(
        "hole map: %d centers (%d solved), hole size <= %d, max residual %.2e",
        len(centers),
        len(unique),
        index.shape[1],
        float(jnp.max(residual)),
    )
    inverse_j = jnp.asarray(inverse)
    return t_unique[inverse_j], residual[inverse_j]


@beartype
def potential_hole_transmission(
    geometry: ArrayGeometry,
    hole_center_index: int,
    potential: Callable[[Float[Array, "Na"]], Float[Array, "Na"]],
    det_waist: scalar_float,
    delta: Optional[scalar_float] = None,
    coupling: Optional[CouplingMatrix] = None,
) -> Tuple[Complex[Array, ""], Float[Array, ""]]:
    """
    Description
    -----------
    Transmitted amplitude when the excitation stored on atom i shifts the
    other atoms by a smooth potential U(r) instead of removing them. The
    storing atom itself is removed; every other atom sees the effective
    detuning δ − U(|r_j − r_i|).

    Parameters
    ----------
    - `geometry` (ArrayGeometry):
        The array
    - `hole_center_index` (int):
        Atom i holding the stored excitation
    - `potential` (Callable):
        Maps distances to level shifts U(r) in units of Γ₀
    - `det_waist` (scalar_float):
        Signal waist w₂
    - `delta` (scalar_float, optional):
        Detuning. Default is the resonant detuning of the geometry.
    - `coupling` (CouplingMatrix, optional):
        Precomputed couplings

    Returns
    -------
    - `t_i` (Complex[Array, ""]):
        Transmitted amplitude
    - `residual` (Float[Array, ""]):
        Residual of the solve
    """
    delta = _default_delta(geometry, delta)
    drive = _signal_drive(det_waist, delta)
    dist = pairwise_distances(geometry)[hole_center_index]
    shifts = potential(dist)
    mask = jnp.arange(geometry.positions.shape[0]) != hole_center_index
    state = steady_state_single_excitation(geometry, drive, mask, coupling, shifts)
    return project_scattering(state, drive, geometry).t_amp, state.residual


@beartype
def reflectance_sweep(
    geometry: ArrayGeometry,
    waists: Sequence[float],
    delta: Optional[scalar_float] = None,
    coupling: Optional[CouplingMatrix] = None,
) -> Float[Array, "M 4"]:
    """
    Description
    -----------
    Reflectance, transmittance, loss and residual of the intact array for a
    list of Gaussian waists, sharing one factorization of H_eff.

    Parameters
    ----------
    - `geometry` (ArrayGeometry):
        The array
    - `waists` (Sequence[float]):
        Drive and detection waists
    - `delta` (scalar_float, optional):
        Detuning. Default is the resonant detuning of the geometry.
    - `coupling` (CouplingMatrix, optional):
        Precomputed couplings

    Returns
    -------
    - `rows` (Float[Array, "M 4"]):
        (R, T, K, residual) per waist
    """
    delta = _default_delta(geometry, delta)
    coupling = _coupling_or_build(geometry, coupling)
    h_eff = effective_hamiltonian_matrix(coupling, delta)
    modes = [make_drive_mode("gaussian", w, 1.0, delta) for w in waists]
    rabi = jnp.stack([drive_rabi(geometry, m) for m in modes], axis=-1)
    c = jnp.linalg.solve(h_eff, rabi)
    residual = jnp.linalg.norm(h_eff @ c - rabi, axis=0) / jnp.linalg.norm(rabi, axis=0)
    rows = []
    for k, mode in enumerate(modes):
        state = SingleExcitationState(
            c_e=c[:, k],
            drive=mode,
            active_mask=jnp.ones(c.shape[0], dtype=bool),
            residual=residual[k],
        )
        res = project_scattering(state, mode, geometry)
        rows.append(jnp.stack([res.R, res.T, res.K, residual[k]]))
        logger.info("w=%.3f: R=%.5f T=%.5f K=%.5f", waists[k], float(res.R), float(res.T), float(res.K))
    return jnp.stack(rows)


@jaxtyped(typechecker=beartype)
def aperture_analytics(
    R_b: scalar_float,
    w2: scalar_float,
) -> Tuple[Float[Array, ""], Float[Array, ""], Float[Array, ""]]:
    """
    Description
    -----------
    Gaussian beam of waist w₂ on a perfect mirror with a circular hole of
    radius R_b. A fraction 1 − ν of the power, ν = e^{−2R_b²/w₂²}, passes
    the hole; by reciprocity the transmitted mode amplitude is 1 − ν.

    Parameters
    ----------
    - `R_b` (scalar_float):
        Hole radius
    - `w2` (scalar_float):
        Beam waist

    Returns
    -------
    - `T_bar` (Float[Array, ""]):
        (1 − ν)²
    - `R` (Float[Array, ""]):
        ν²
    - `K` (Float[Array, ""]):
        2ν(1 − ν)
    """
    nu = jnp.exp(-2.0 * jnp.asarray(R_b, dtype=jnp.float64) ** 2 / jnp.asarray(w2) ** 2)
    return (1.0 - nu) ** 2, nu**2, 2.0 * nu * (1.0 - nu)


@jaxtyped(typechecker=beartype)
def finite_mirror_reflectance_model(
    n_side: scalar_numeric,
    d: scalar_float,
    w: scalar_float,
    c_r: scalar_float,
) -> Float[Array, ""]:
    """
    Description
    -----------
    Reflectance of an N×N array for a Gaussian of waist w,
    R ≈ erf⁴(Nd/√2w) − C_R λ₀⁴/w⁴. The first term is the power clipped by
    the array edge, the second the diffraction of the waist.

    Parameters
    ----------
    - `n_side` (scalar_numeric):
        Atoms per side N
    - `d` (scalar_float):
        Lattice constant
    - `w` (scalar_float):
        Beam waist
    - `c_r` (scalar_float):
        Fitted constant C_R(d)

    Returns
    -------
    - `R` (Float[Array, ""]):
        Model reflectance
    """
    w = jnp.asarray(w, dtype=jnp.float64)
    clip = erf(n_side * d / (jnp.sqrt(2.0) * w)) ** 4
    return clip - c_r / w**4
