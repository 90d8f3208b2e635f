"""
Module: rydberg.master_equation
-------------------------------
Exact steady state of the driven, collectively decaying array under an
infinitely strong Rydberg blockade.

With V → ∞ every configuration with two excitations closer than R_b is
energetically excluded, so the density matrix lives on the independent
sets of the blockade graph. The master equation
    ρ̇ = −i(H ρ − ρ H†) + Σ_ij Γ_ij σ⁻_j ρ σ⁺_i,
    H = Σ_{j≠k} H_jk σ⁺_j σ⁻_k − (δ + i/2) Σ_j n_j − Σ_j (Ω_j σ⁺_j + Ω*_j σ⁻_j),
is projected on that basis by dropping every coupling into a forbidden
configuration. Jumps only remove excitations, so the projection keeps the
trace.

The steady state solves the trace-augmented system
    L[x] + tr(x) 𝟙/M = 𝟙/M,
which is nonsingular whenever the steady state is unique. Small bases
assemble this operator densely; larger ones evolve from the ground state
with an adaptive Runge–Kutta integrator and polish with GMRES.

Functions
---------
- `enumerate_blockade_basis`:
    Independent sets of the blockade graph with raising/lowering maps
- `build_liouvillian`:
    Projected Hamiltonian and jump data for a drive
- `liouvillian_apply`:
    Action of the projected Liouvillian on a matrix
- `steady_state_density_matrix`:
    Stationary state with trace, Hermiticity and positivity diagnostics
- `single_atom_excitation`:
    Two-level steady-state population Ω²/(δ² + 1/4 + 2Ω²)
- `strong_drive_observables`:
    R, T and K of a steady state projected on the Gaussian modes
- `strong_drive_sweep`:
    Observables over a grid of drive strengths
"""

import jax
import jax.numpy as jnp
import numpy as np
from beartype import beartype
from beartype.typing import Dict, List, Optional, Sequence, Tuple
from jax.scipy.sparse.linalg import gmres
from jaxtyping import Array, Complex, Float, jaxtyped
from scipy.integrate import solve_ivp

from rydmirror.arrays.array_types import (ArrayGeometry, CouplingMatrix,
                                          DriveMode, make_drive_mode,
                                          scalar_float)
from rydmirror.arrays.coupling import coupling_matrices
from rydmirror.arrays.dispersion import resonant_detuning
from rydmirror.arrays.geometry import (drive_rabi, mode_amplitudes,
                                       pairwise_distances)
from rydmirror.arrays.scattering import (project_scattering, projection_constant,
                                         steady_state_single_excitation)
from rydmirror.errors import BasisSizeError, ConvergenceError
from rydmirror.tools import get_logger, ordered_map

from .rydberg_types import (BlockadeBasis, DensityMatrixState,
                            ProjectedLiouvillian)

jax.config.update("jax_enable_x64", True)

logger = get_logger(__name__)

DEFAULT_MAX_STATES: int = 4096
DIRECT_LIOUVILLE_DIM: int = 4096
STEADY_STATE_TOLERANCE: float = 1e-8
DISTANCE_TOLERANCE: float = 1e-9


@beartype
def enumerate_blockade_basis(
    geometry: ArrayGeometry,
    R_b: scalar_float,
    max_states: int = DEFAULT_MAX_STATES,
) -> BlockadeBasis:
    """
    Description
    -----------
    Enumerate every excitation configuration in which no two excited atoms
    are within R_b of each other (Θ(0) = 1, so r = R_b is blocked).
    R_b = 0 imposes no constraint.

    Parameters
    ----------
    - `geometry` (ArrayGeometry):
        The array
    - `R_b` (scalar_float):
        Blockade radius
    - `max_states` (int):
        Largest basis accepted. Default is 4096.

    Returns
    -------
    - `basis` (BlockadeBasis):
        Configurations ordered by excitation number, then lexicographically
        by their sorted atom indices; row 0 is the ground state

    Raises
    ------
    - BasisSizeError:
        As soon as the enumeration passes `max_states`

    Flow
    ----
    - Conflict bitmask of every atom from the pair distances
    - Extend each configuration of one level by atoms above its largest
      member that conflict with none of its members
    - Stop with BasisSizeError once the count passes the cap
    - Tabulate the raising and lowering maps through a configuration index
    """
    n = geometry.positions.shape[0]
    radius = float(R_b)
    if radius < 0.0:
        raise ValueError(f"blockade radius must be non-negative, got {radius}")
    dist = np.asarray(pairwise_distances(geometry))
    tol = DISTANCE_TOLERANCE * float(geometry.lattice_constant)
    conflict = np.zeros((n, n), dtype=bool)
    if radius > 0.0:
        conflict = (dist <= radius + tol) & ~np.eye(n, dtype=bool)
    conflict_bits = [sum(1 << int(k) for k in np.flatnonzero(conflict[j])) for j in range(n)]
    states: List[int] = [0]
    level: List[Tuple[int, int]] = [(0, -1)]
    while level:
        following: List[Tuple[int, int]] = []
        for bits, last in level:
            for j in range(last + 1, n):
                if bits & conflict_bits[j] == 0:
                    following.append((bits | (1 << j), j))
            if len(states) + len(following) > max_states:
                raise BasisSizeError(
                    f"blockade basis (N_a={n}, R_b={radius:.4g})",
                    len(states) + len(following),
                    max_states,
                )
        states.extend(bits for bits, _ in following)
        level = following
    index: Dict[int, int] = {bits: a for a, bits in enumerate(states)}
    m = len(states)
    occupation = np.zeros((m, n), dtype=bool)
    raise_index = -np.ones((m, n), dtype=np.int64)
    lower_index = -np.ones((m, n), dtype=np.int64)
    for a, bits in enumerate(states):
        for j in range(n):
            bit = 1 << j
            if bits & bit:
                occupation[a, j] = True
                lower_index[a, j] = index[bits & ~bit]
            else:
                raise_index[a, j] = index.get(bits | bit, -1)
    logger.debug("blockade basis: N_a=%d R_b=%.4g has %d configurations", n, radius, m)
    return BlockadeBasis(
        occupation=jnp.asarray(occupation),
        raise_index=jnp.asarray(raise_index),
        lower_index=jnp.asarray(lower_index),
        n_excitations=jnp.asarray(occupation.sum(axis=1), dtype=jnp.int64),
        radius=radius,
    )


def _coo_to_ell(rows: np.ndarray, cols: np.ndarray, vals: np.ndarray, m: int):
    order = np.argsort(rows, kind="stable")
    rows, cols, vals = rows[order], cols[order], vals[order]
    counts = np.bincount(rows, minlength=m)
    width = max(int(counts.max()), 1)
    starts = np.concatenate([[0], np.cumsum(counts)[:-1]])
    slot = np.arange(rows.size) - starts[rows]
    ell_cols = np.zeros((m, width), dtype=np.int64)
    ell_vals = np.zeros((m, width), dtype=np.complex128)
    ell_cols[rows, slot] = cols
    ell_vals[rows, slot] = vals
    return ell_cols, ell_vals


@beartype
def build_liouvillian(
    basis: BlockadeBasis,
    coupling: CouplingMatrix,
    rabi: Complex[Array, "Na"],
    delta: scalar_float,
) -> ProjectedLiouvillian:
    """
    Description
    -----------
    Assemble the projected non-Hermitian Hamiltonian and jump data.

    Parameters
    ----------
    - `basis` (BlockadeBasis):
        Allowed configurations
    - `coupling` (CouplingMatrix):
        Couplings of the array
    - `rabi` (Complex[Array, "Na"]):
        Per-atom Rabi frequencies Ω_j
    - `delta` (scalar_float):
        Laser detuning

    Returns
    -------
    - `operator` (ProjectedLiouvillian):
        ELLPACK Hamiltonian, padded raising map and Γ

    Flow
    ----
    - Diagonal −(δ + i/2) n_a
    - Drive: −Ω_j from b to b + j and −Ω*_j from b to b − j
    - Exchange H_jk from b to b − k + j when that configuration is allowed
    - Pack the entries row-wise
    """
    m = basis.n_states
    raise_np = np.asarray(basis.raise_index)
    lower_np = np.asarray(basis.lower_index)
    h = np.asarray(coupling.H)
    omega = np.asarray(rabi)
    n = h.shape[0]
    arange_m = np.arange(m)
    n_exc = np.asarray(basis.n_excitations)
    rows = [arange_m]
    cols = [arange_m]
    vals = [-(float(delta) + 0.5j) * n_exc.astype(np.complex128)]
    b_idx, j_idx = np.nonzero(raise_np >= 0)
    rows.append(raise_np[b_idx, j_idx])
    cols.append(b_idx)
    vals.append(-omega[j_idx])
    b_idx, j_idx = np.nonzero(lower_np >= 0)
    rows.append(lower_np[b_idx, j_idx])
    cols.append(b_idx)
    vals.append(-np.conj(omega[j_idx]))
    # lowered[b, k] = b − k, then raised by every j
    b_idx, k_idx = np.nonzero(lower_np >= 0)
    lowered = lower_np[b_idx, k_idx]
    targets = raise_np[lowered]
    valid = (targets >= 0) & (np.arange(n)[None, :] != k_idx[:, None])
    sel_row, sel_j = np.nonzero(valid)
    rows.append(targets[sel_row, sel_j])
    cols.append(b_idx[sel_row])
    vals.append(h[sel_j, k_idx[sel_row]])
    ell_cols, ell_vals = _coo_to_ell(
        np.concatenate(rows), np.concatenate(cols), np.concatenate(vals), m
    )
    raise_pad = np.where(raise_np < 0, m, raise_np)
    return ProjectedLiouvillian(
        h_cols=jnp.asarray(ell_cols),
        h_vals=jnp.asarray(ell_vals),
        raise_index=jnp.asarray(raise_pad),
        gamma=coupling.Gamma,
    )


def _apply_hamiltonian(operator: ProjectedLiouvillian, x: Array) -> Array:
    def body(acc, s):
        return acc + operator.h_vals[:, s, None] * x[operator.h_cols[:, s], :], None

    out, _ = jax.lax.scan(body, jnp.zeros_like(x), jnp.arange(operator.h_cols.shape[1]))
    return out


def _apply_jump(operator: ProjectedLiouvillian, x: Array) -> Array:
    n = operator.gamma.shape[0]
    idx = operator.raise_index
    padded = jnp.pad(x, ((0, 1), (0, 1)))

    def outer(acc, i):
        cols = padded[:, idx[:, i]]

        def inner(acc_in, j):
            return acc_in + operator.gamma[i, j] * cols[idx[:, j], :], None

        acc, _ = jax.lax.scan(inner, acc, jnp.arange(n))
        return acc, None

    out, _ = jax.lax.scan(outer, jnp.zeros_like(x), jnp.arange(n))
    return out


@jax.jit
def liouvillian_apply(
    rho: Complex[Array, "M M"],
    operator: ProjectedLiouvillian,
) -> Complex[Array, "M M"]:
    """
    Description
    -----------
    L[ρ] = −i(Hρ − ρH†) + Σ_ij Γ_ij σ⁻_j ρ σ⁺_i on the blockade basis.
    ρH† is evaluated as (Hρ†)†, so non-Hermitian iterates are handled
    exactly. The jump term reads jump[a, b] = Σ_ij Γ_ij ρ[a + j, b + i].
    """
    h_rho = _apply_hamiltonian(operator, rho)
    rho_h_dag = jnp.conj(_apply_hamiltonian(operator, jnp.conj(rho.T)).T)
    return -1j * (h_rho - rho_h_dag) + _apply_jump(operator, rho)


@jax.jit
def _augmented(x: Array, operator: ProjectedLiouvillian) -> Array:
    m = x.shape[0]
    return liouvillian_apply(x, operator) + jnp.trace(x) * jnp.eye(m) / m


def _dense_steady_state(operator: ProjectedLiouvillian, m: int) -> Array:
    units = jnp.eye(m * m, dtype=jnp.complex128).reshape(m * m, m, m)
    images = jax.vmap(lambda e: _augmented(e, operator).ravel())(units)
    rhs = (jnp.eye(m, dtype=jnp.complex128) / m).ravel()
    return jnp.linalg.solve(images.T, rhs).reshape(m, m)


def _evolve(
    operator: ProjectedLiouvillian,
    rho: np.ndarray,
    coarse_tol: float,
    t_chunk: float,
    max_time: float,
) -> np.ndarray:
    m = rho.shape[0]

    def rhs(_t: float, y: np.ndarray) -> np.ndarray:
        return np.asarray(liouvillian_apply(jnp.asarray(y.reshape(m, m)), operator)).ravel()

    y = rho.ravel().astype(np.complex128)
    t = 0.0
    while t < max_time:
        sol = solve_ivp(rhs, (t, t + t_chunk), y, method="RK45", rtol=1e-7, atol=1e-10)
        y = sol.y[:, -1]
        t += t_chunk
        residual = float(np.linalg.norm(rhs(t, y)))
        logger.debug("evolution t=%.1f residual %.2e", t, residual)
        if residual < coarse_tol:
            break
    return y.reshape(m, m)


def _polish(
    operator: ProjectedLiouvillian,
    x: Array,
    tol: float,
    restart: int,
    maxiter: int,
    rounds: int,
) -> Array:
    m = x.shape[0]
    target = jnp.eye(m, dtype=jnp.complex128) / m

    def apply(v: Array) -> Array:
        return _augmented(v.reshape(m, m), operator).ravel()

    for _ in range(rounds):
        defect = (target - _augmented(x, operator)).ravel()
        if float(jnp.linalg.norm(defect)) < 0.1 * tol:
            break
        step, _ = gmres(apply, defect, tol=0.0, atol=0.05 * tol, restart=restart, maxiter=maxiter)
        x = x + step.reshape(m, m)
    return x


@jaxtyped(typechecker=beartype)
def _diagnose(
    rho: Complex[Array, "M M"],
    basis: BlockadeBasis,
    operator: ProjectedLiouvillian,
) -> DensityMatrixState:
    return DensityMatrixState(
        rho=rho,
        basis=basis,
        trace=jnp.real(jnp.trace(rho)),
        residual=jnp.linalg.norm(liouvillian_apply(rho, operator)),
        hermiticity=jnp.linalg.norm(rho - jnp.conj(rho.T)),
        min_eigenvalue=jnp.min(jnp.linalg.eigvalsh(rho)),
    )


@beartype
def steady_state_density_matrix(
    geometry: ArrayGeometry,
    drive: DriveMode,
    basis: BlockadeBasis,
    coupling: Optional[CouplingMatrix] = None,
    tol: float = STEADY_STATE_TOLERANCE,
    direct_dim: int = DIRECT_LIOUVILLE_DIM,
    coarse_tol: float = 1e-4,
    t_chunk: float = 20.0,
    max_time: float = 2000.0,
    restart: int = 40,
    maxiter: int = 50,
    polish_rounds: int = 4,
    initial: Optional[Complex[Array, "M M"]] = None,
) -> DensityMatrixState:
    """
    Description
    -----------
    Steady state of the blockade-projected master equation.

    Parameters
    ----------
    - `geometry` (ArrayGeometry):
        The array
    - `drive` (DriveMode):
        Drive; its detuning is δ
    - `basis` (BlockadeBasis):
        Allowed configurations
    - `coupling` (CouplingMatrix, optional):
        Precomputed couplings
    - `tol` (float):
        Target ‖L[ρ]‖. Default is 1e-8.
    - `direct_dim` (int):
        Dense solve while M² ≤ direct_dim. Default is 4096.
    - `coarse_tol` (float):
        Residual at which time evolution hands over to GMRES
    - `t_chunk` (float):
        Evolution time between residual checks, in 1/Γ₀
    - `max_time` (float):
        Evolution budget, in 1/Γ₀
    - `restart` (int):
        GMRES Krylov size
    - `maxiter` (int):
        GMRES restarts per polishing round
    - `polish_rounds` (int):
        Polishing rounds
    - `initial` (Complex[Array, "M M"], optional):
        Starting state. Default is the ground state.

    Returns
    -------
    - `state` (DensityMatrixState):
        ρ with its trace, residual, Hermiticity and smallest eigenvalue

    Raises
    ------
    - ConvergenceError:
        When the residual stays above `tol`; `best` holds the final state

    Flow
    ----
    - Assemble the projected Liouvillian for the drive
    - Dense trace-augmented solve for small bases
    - Otherwise adaptive evolution to `coarse_tol`, then GMRES polishing
    - Hermitize, normalize the trace and compute diagnostics
    """
    coupling = coupling_matrices(geometry) if coupling is None else coupling
    operator = build_liouvillian(basis, coupling, drive_rabi(geometry, drive), drive.detuning)
    m = basis.n_states
    if m * m <= direct_dim:
        rho = _dense_steady_state(operator, m)
        path = "dense"
    else:
        if initial is None:
            start = np.zeros((m, m), dtype=np.complex128)
            start[0, 0] = 1.0
        else:
            start = np.asarray(initial, dtype=np.complex128)
        evolved = _evolve(operator, start, coarse_tol, t_chunk, max_time)
        rho = _polish(operator, jnp.asarray(evolved), tol, restart, maxiter, polish_rounds)
        path = "evolution+gmres"
    rho = 0.5 * (rho + jnp.conj(rho.T))
    rho = rho / jnp.real(jnp.trace(rho))
    state = _diagnose(rho, basis, operator)
    logger.debug(
        "steady state (%s, M=%d): residual %.2e, min eigenvalue %.2e",
        path,
        m,
        float(state.residual),
        float(state.min_eigenvalue),
    )
    if float(state.residual) > tol:
        raise ConvergenceError(
            f"steady state of a {m}-configuration basis did not converge", float(state.residual), state
        )
    return state


@jaxtyped(typechecker=beartype)
def single_atom_excitation(omega: scalar_float, delta: scalar_float) -> Float[Array, ""]:
    """ρ_ee = Ω²/(δ² + 1/4 + 2Ω²) of a two-level atom with Γ₀ = 1."""
    omega_sq = jnp.asarray(omega, dtype=jnp.float64) ** 2
    return omega_sq / (jnp.asarray(delta) ** 2 + 0.25 + 2.0 * omega_sq)


def _expectations(rho: Array, basis: BlockadeBasis) -> Tuple[Array, Array]:
    m = basis.n_states
    padded = jnp.pad(rho, ((0, 1), (0, 1)))
    raise_pad = jnp.where(basis.raise_index < 0, m, basis.raise_index)
    lower_pad = jnp.where(basis.lower_index < 0, m, basis.lower_index)
    a = jnp.arange(m)
    # ⟨σ⁻_j⟩ = Σ_a ρ[a + j, a]
    sigma = jnp.sum(padded[raise_pad, a[:, None]], axis=0)
    # ⟨σ⁺_i σ⁻_j⟩ = Σ_{a ∋ i} ρ[(a − i) + j, a]
    lowered = jnp.pad(raise_pad, ((0, 1), (0, 0)), constant_values=m)[lower_pad]
    correlator = jnp.einsum("aij->ij", padded[lowered, a[:, None, None]])
    return sigma, correlator


@beartype
def strong_drive_observables(
    state: DensityMatrixState,
    geometry: ArrayGeometry,
    drive: DriveMode,
    det_mode: DriveMode,
    coupling: Optional[CouplingMatrix] = None,
) -> Tuple[float, float, float]:
    """
    Description
    -----------
    Reflectance, transmittance and loss of a steady state. The ratios are
    continuous at Ω₀ = 0, where they equal the linear response of the
    intact array; a zero drive therefore returns the weak-drive values.

    Parameters
    ----------
    - `state` (DensityMatrixState):
        Steady state
    - `geometry` (ArrayGeometry):
        The array
    - `drive` (DriveMode):
        Drive mode, for Ω₀
    - `det_mode` (DriveMode):
        Gaussian detection mode
    - `coupling` (CouplingMatrix, optional):
        Precomputed couplings, used for the zero-drive limit

    Returns
    -------
    - `R` (float):
        β² Σ_ij u_i u*_j ⟨σ⁺_i σ⁻_j⟩/Ω₀²
    - `T` (float):
        1 + 2 Re(iβ Σ_j u*_j ⟨σ⁻_j⟩/Ω₀) + R
    - `K` (float):
        1 − R − T
    """
    beta = projection_constant(det_mode)
    u = mode_amplitudes(det_mode, geometry)
    omega0 = float(drive.peak_rabi)
    if omega0 == 0.0:
        linear = project_scattering(
            steady_state_single_excitation(geometry, drive, coupling=coupling), det_mode, geometry
        )
        return float(linear.R), float(linear.T), float(linear.K)
    sigma, correlator = _expectations(state.rho, state.basis)
    R = float(jnp.real(beta**2 * jnp.einsum("i,ij,j->", u, correlator, jnp.conj(u)))) / omega0**2
    coherent = 1j * beta * jnp.sum(jnp.conj(u) * sigma) / omega0
    T = 1.0 + 2.0 * float(jnp.real(coherent)) + R
    return R, T, 1.0 - R - T


STRONG_DRIVE_COLUMNS: Tuple[str, ...] = (
    "omega0",
    "R",
    "T",
    "K",
    "basis_dim",
    "residual",
    "failed",
)


@beartype
def strong_drive_sweep(
    geometry: ArrayGeometry,
    w0: scalar_float,
    R_b: scalar_float,
    omegas: Sequence[float],
    delta: Optional[scalar_float] = None,
    max_states: int = DEFAULT_MAX_STATES,
    tol: float = STEADY_STATE_TOLERANCE,
    workers: int = 1,
    progress: bool = True,
) -> Float[Array, "K 7"]:
    """
    Description
    -----------
    Steady-state optics over a grid of peak Rabi frequencies. Points that
    miss the residual target are kept with their best state and flagged.

    Parameters
    ----------
    - `geometry` (ArrayGeometry):
        The array
    - `w0` (scalar_float):
        Waist of the drive and detection modes
    - `R_b` (scalar_float):
        Blockade radius
    - `omegas` (Sequence[float]):
        Peak Rabi frequencies Ω₀
    - `delta` (scalar_float, optional):
        Detuning. Default is the resonant detuning of the geometry.
    - `max_states` (int):
        Basis cap
    - `tol` (float):
        Residual target
    - `workers` (int):
        Worker threads over the grid
    - `progress` (bool):
        Show a progress bar

    Returns
    -------
    - `rows` (Float[Array, "K 7"]):
        (Ω₀, R, T, K, basis_dim, residual, failed) per drive strength

    Raises
    ------
    - BasisSizeError:
        When the blockade basis exceeds `max_states`
    """
    delta = resonant_detuning(geometry) if delta is None else delta
    basis = enumerate_blockade_basis(geometry, R_b, max_states)
    coupling = coupling_matrices(geometry)

    def point(omega0: float) -> Tuple[float, ...]:
        drive = make_drive_mode("gaussian", w0, omega0, delta)
        failed = 0.0
        try:
            state = steady_state_density_matrix(geometry, drive, basis, coupling, tol=tol)
        except ConvergenceError as err:
            logger.warning("Omega0=%.4g: %s", omega0, err)
            state = err.best
            failed = 1.0
        R, T, K = strong_drive_observables(state, geometry, drive, drive, coupling)
        logger.info("Omega0=%.4g: R=%.5f T=%.5f K=%.5f", omega0, R, T, K)
        return (omega0, R, T, K, float(basis.n_states), float(state.residual), failed)

    rows = ordered_map(point, omegas, workers=workers, description="strong drive", progress=progress)
    return jnp.asarray(rows, dtype=jnp.float64).reshape(-1, len(STRONG_DRIVE_COLUMNS))
