"""
Module: rydberg.stochastic
--------------------------
Semi-classical model of the saturated mirror: strong driving punches
random holes into the array, and each configuration of holes is scattered
linearly.

A configuration is drawn by repeating, until every atom carries a label,
    (i)   for each unassigned atom j, its region is the unassigned atoms
          within R_b of j (inclusive), of size N_b^j;
    (ii)  pick j with probability Ω_j² N_b^j / Σ_k Ω_k² N_b^k;
    (iii) label the whole region saturated with probability s/(1 + s),
          s = 8 N_b^j Ω_j² / (Γ²_{k∥=0} + 4(δ − Δ_{k∥=0})²),
          and reflecting otherwise.
Saturated atoms are removed and the rest scatter as a weak-drive mirror.
When no unassigned atom is driven the remainder is labelled reflecting.

Random numbers are drawn from keys fold_in(fold_in(key(seed), sample),
step), so each draw depends only on its own indices and batches can be
split or reordered freely.

Functions
---------
- `region_matrix`:
    Inclusive within-R_b matrix of a geometry
- `saturation_parameter`:
    s of a blockade region with N_b atoms
- `sample_configuration`:
    One seeded draw of the saturated/reflecting assignment
- `sample_configurations`:
    A vmapped batch of draws
- `configuration_optics`:
    R and K of the mirror with the saturated atoms removed
- `mc_estimate`:
    Sample means and standard errors of R and K
- `mc_sweep`:
    Monte Carlo estimates over a grid of drive strengths
- `analytic_binomial_loss`:
    K = 2p(1 − p)(1 − 1/N_d)
- `k_max`:
    K^max = (1 − 1/N_d)/2
- `omega_max`:
    Rabi frequency of maximum loss, √(Γ² + 4(δ − Δ)²)/√(8N_b)
- `region_counts`:
    N_b = max(πR_b²/d², 1) and N_d = 2πw₀²/(N_b d²)
- `uniform_drive_model`:
    BinomialLossModel of a uniformly driven beam spot
- `binomial_loss_mc`:
    Direct sampling of the uniform-drive region model
- `k_max_collapse`:
    (1/N_d, K^max) over array and blockade cases, sampled and exact
"""

import math

import jax
import jax.numpy as jnp
import numpy as np
from beartype import beartype
from beartype.typing import Optional, Sequence, Tuple
from jaxtyping import Array, Bool, Complex, Float, Int, jaxtyped

from rydmirror.arrays.array_types import (ArrayGeometry, CouplingMatrix,
                                          DriveMode, make_drive_mode,
                                          scalar_float, scalar_numeric)
from rydmirror.arrays.coupling import (coupling_matrices,
                                       effective_hamiltonian_matrix)
from rydmirror.arrays.dispersion import collective_rate, resonant_detuning
from rydmirror.arrays.geometry import (build_square_array, drive_rabi,
                                       mode_amplitudes, pairwise_distances)
from rydmirror.arrays.scattering import (masked_linear_response,
                                         projection_constant)
from rydmirror.errors import BasisSizeError
from rydmirror.tools import get_logger, ordered_map, shard_array

from .master_equation import (DEFAULT_MAX_STATES, STRONG_DRIVE_COLUMNS,
                              strong_drive_sweep)
from .rydberg_types import (BinomialLossModel, MirrorConfiguration,
                            MonteCarloEstimate, make_binomial_loss_model)

jax.config.update("jax_enable_x64", True)

logger = get_logger(__name__)

DISTANCE_TOLERANCE: float = 1e-9
DEFAULT_BATCH: int = 256


@beartype
def region_matrix(geometry: ArrayGeometry, R_b: scalar_float) -> Bool[Array, "Na Na"]:
    """within[j, k] = |r_j − r_k| ≤ R_b, True on the diagonal."""
    tol = DISTANCE_TOLERANCE * geometry.lattice_constant
    return pairwise_distances(geometry) <= R_b + tol


@jaxtyped(typechecker=beartype)
def saturation_parameter(
    n_b: scalar_numeric,
    omega: scalar_float,
    delta: scalar_float,
    delta0: scalar_float,
    gamma_k0: scalar_float,
) -> Float[Array, ""]:
    """s = 8 N_b Ω² / (Γ²_{k∥=0} + 4(δ − Δ_{k∥=0})²)."""
    return jnp.asarray(
        8.0 * n_b * omega**2 / (gamma_k0**2 + 4.0 * (delta - delta0) ** 2),
        dtype=jnp.float64,
    )


def _sample_core(
    within: Array,
    omega_sq: Array,
    denominator: Array,
    seed: Array,
    sample_index: Array,
) -> Tuple[Array, Array]:
    n = within.shape[0]
    base = jax.random.fold_in(jax.random.PRNGKey(seed), sample_index)
    within_f = within.astype(jnp.float64)

    def cond(carry):
        unassigned, _, _ = carry
        return jnp.any(unassigned)

    def body(carry):
        unassigned, saturated, step = carry
        key_pick, key_coin = jax.random.split(jax.random.fold_in(base, step))
        n_b = within_f @ unassigned.astype(jnp.float64)
        weights = jnp.where(unassigned, omega_sq * n_b, 0.0)
        driven = jnp.sum(weights) > 0.0
        logits = jnp.where(weights > 0.0, jnp.log(jnp.where(weights > 0.0, weights, 1.0)), -jnp.inf)
        j = jax.random.categorical(key_pick, logits)
        s = 8.0 * n_b[j] * omega_sq[j] / denominator
        coin = jax.random.bernoulli(key_coin, s / (1.0 + s)) & driven
        region = jnp.where(driven, within[j] & unassigned, unassigned)
        return unassigned & ~region, saturated | (region & coin), step + 1

    start = (jnp.ones(n, dtype=bool), jnp.zeros(n, dtype=bool), jnp.asarray(0, dtype=jnp.int64))
    _, saturated, steps = jax.lax.while_loop(cond, body, start)
    return saturated, steps


_sample_batch = jax.jit(jax.vmap(_sample_core, in_axes=(None, None, None, None, 0)))


def _sampler_inputs(
    geometry: ArrayGeometry,
    drive: DriveMode,
    R_b: scalar_float,
    gamma_k0: Optional[scalar_float],
    delta0: Optional[scalar_float],
) -> Tuple[Array, Array, Array]:
    if gamma_k0 is None:
        gamma_k0 = collective_rate(jnp.zeros(2), geometry.lattice_constant)
    if delta0 is None:
        delta0 = resonant_detuning(geometry)
    within = region_matrix(geometry, R_b)
    omega_sq = jnp.abs(drive_rabi(geometry, drive)) ** 2
    denominator = jnp.asarray(gamma_k0**2 + 4.0 * (drive.detuning - delta0) ** 2)
    return within, omega_sq, denominator


@beartype
def sample_configuration(
    geometry: ArrayGeometry,
    drive: DriveMode,
    R_b: scalar_float,
    seed: int,
    sample_index: int = 0,
    gamma_k0: Optional[scalar_float] = None,
    delta0: Optional[scalar_float] = None,
) -> MirrorConfiguration:
    """
    Description
    -----------
    Draw one saturated/reflecting assignment.

    Parameters
    ----------
    - `geometry` (ArrayGeometry):
        The array
    - `drive` (DriveMode):
        Drive; its detuning is δ
    - `R_b` (scalar_float):
        Blockade radius
    - `seed` (int):
        Seed of the random stream
    - `sample_index` (int):
        Index of this draw in the stream. Default is 0.
    - `gamma_k0` (scalar_float, optional):
        Γ_{k∥=0}. Default is the infinite-array value 3π/(k₀d)².
    - `delta0` (scalar_float, optional):
        Δ_{k∥=0}. Default is the resonant detuning of the geometry.

    Returns
    -------
    - `config` (MirrorConfiguration):
        Saturated atoms and the number of region assignments
    """
    within, omega_sq, denominator = _sampler_inputs(geometry, drive, R_b, gamma_k0, delta0)
    saturated, steps = _sample_batch(
        within,
        omega_sq,
        denominator,
        jnp.asarray(seed, dtype=jnp.int64),
        jnp.asarray([sample_index], dtype=jnp.int64),
    )
    return MirrorConfiguration(
        saturated=saturated[0],
        seed=jnp.asarray(seed, dtype=jnp.int64),
        sample_index=jnp.asarray(sample_index, dtype=jnp.int64),
        n_steps=steps[0],
    )


@beartype
def sample_configurations(
    geometry: ArrayGeometry,
    drive: DriveMode,
    R_b: scalar_float,
    seed: int,
    sample_indices: Int[Array, "S"],
    gamma_k0: Optional[scalar_float] = None,
    delta0: Optional[scalar_float] = None,
) -> Tuple[Bool[Array, "S Na"], Int[Array, "S"]]:
    """
    Description
    -----------
    Batch of draws, vmapped over the sample indices. Row s equals
    `sample_configuration(..., seed, sample_indices[s])`.

    Returns
    -------
    - `saturated` (Bool[Array, "S Na"]):
        Saturated atoms per draw
    - `n_steps` (Int[Array, "S"]):
        Region assignments per draw
    """
    within, omega_sq, denominator = _sampler_inputs(geometry, drive, R_b, gamma_k0, delta0)
    indices = shard_array(sample_indices)
    return _sample_batch(within, omega_sq, denominator, jnp.asarray(seed, dtype=jnp.int64), indices)


@jax.jit
def _optics_batch(
    h_eff: Complex[Array, "Na Na"],
    rabi: Complex[Array, "Na"],
    u_conj: Complex[Array, "Na"],
    scale: Complex[Array, ""],
    saturated: Bool[Array, "S Na"],
) -> Tuple[Float[Array, "S"], Float[Array, "S"], Float[Array, "S"]]:
    def one(mask):
        c, residual = masked_linear_response(h_eff, rabi, ~mask)
        r = scale * jnp.sum(u_conj * c)
        R = jnp.abs(r) ** 2
        T = jnp.abs(1.0 + r) ** 2
        return R, 1.0 - R - T, residual

    return jax.vmap(one)(saturated)


def _optics_inputs(
    geometry: ArrayGeometry,
    drive: DriveMode,
    coupling: Optional[CouplingMatrix],
) -> Tuple[Array, Array, Array, Array]:
    coupling = coupling_matrices(geometry) if coupling is None else coupling
    h_eff = effective_hamiltonian_matrix(coupling, drive.detuning)
    weak = make_drive_mode(drive.kind, drive.waist, 1.0, drive.detuning)
    rabi = drive_rabi(geometry, weak)
    u_conj = jnp.conj(mode_amplitudes(weak, geometry))
    scale = jnp.asarray(1j * projection_constant(weak), dtype=jnp.complex128)
    return h_eff, rabi, u_conj, scale


@beartype
def configuration_optics(
    config: MirrorConfiguration,
    geometry: ArrayGeometry,
    drive: DriveMode,
    coupling: Optional[CouplingMatrix] = None,
) -> Tuple[float, float]:
    """
    Description
    -----------
    Weak-drive reflectance and loss of the mirror with the saturated atoms
    removed. Saturated atoms are taken to scatter nothing coherently, so
    the linear response of the remaining atoms sets R and K.

    Returns
    -------
    - `R` (float):
        Reflectance into the Gaussian detection mode
    - `K` (float):
        Loss 1 − R − T
    """
    h_eff, rabi, u_conj, scale = _optics_inputs(geometry, drive, coupling)
    R, K, _ = _optics_batch(h_eff, rabi, u_conj, scale, config.saturated[None, :])
    return float(R[0]), float(K[0])


@beartype
def mc_estimate(
    geometry: ArrayGeometry,
    drive: DriveMode,
    R_b: scalar_float,
    n_samples: int,
    seed: int,
    batch_size: int = DEFAULT_BATCH,
    coupling: Optional[CouplingMatrix] = None,
    gamma_k0: Optional[scalar_float] = None,
    delta0: Optional[scalar_float] = None,
) -> MonteCarloEstimate:
    """
    Description
    -----------
    Monte Carlo average of the configuration optics.

    Parameters
    ----------
    - `geometry` (ArrayGeometry):
        The array
    - `drive` (DriveMode):
        Gaussian drive; Ω₀ sets the saturation and the mode sets the optics
    - `R_b` (scalar_float):
        Blockade radius
    - `n_samples` (int):
        Number of configurations, at least 1
    - `seed` (int):
        Seed of the random stream
    - `batch_size` (int):
        Draws per vmapped batch. Default is 256.
    - `coupling` (CouplingMatrix, optional):
        Precomputed couplings
    - `gamma_k0` (scalar_float, optional):
        Γ_{k∥=0} used in the saturation parameter
    - `delta0` (scalar_float, optional):
        Δ_{k∥=0} used in the saturation parameter

    Returns
    -------
    - `estimate` (MonteCarloEstimate):
        Means of R and K with standard errors s/√n

    Flow
    ----
    - Split the sample indices 0..n−1 into batches
    - Draw each batch with the vmapped sampler
    - Solve every configuration with the vmapped masked solve
    - Reduce to sample means and standard errors
    """
    if n_samples < 1:
        raise ValueError(f"n_samples must be >= 1, got {n_samples}")
    if gamma_k0 is None:
        gamma_k0 = collective_rate(jnp.zeros(2), geometry.lattice_constant)
    if delta0 is None:
        delta0 = resonant_detuning(geometry)
    h_eff, rabi, u_conj, scale = _optics_inputs(geometry, drive, coupling)
    r_values = []
    k_values = []
    for start in range(0, n_samples, batch_size):
        indices = jnp.arange(start, min(start + batch_size, n_samples), dtype=jnp.int64)
        saturated, _ = sample_configurations(
            geometry, drive, R_b, seed, indices, gamma_k0, delta0
        )
        R, K, _ = _optics_batch(h_eff, rabi, u_conj, scale, saturated)
        r_values.append(np.asarray(R))
        k_values.append(np.asarray(K))
    r_all = np.concatenate(r_values)
    k_all = np.concatenate(k_values)
    r_se, k_se = 0.0, 0.0
    if n_samples > 1:
        r_se = float(np.std(r_all, ddof=1)) / math.sqrt(n_samples)
        k_se = float(np.std(k_all, ddof=1)) / math.sqrt(n_samples)
    estimate = MonteCarloEstimate(
        R_mean=float(np.mean(r_all)),
        K_mean=float(np.mean(k_all)),
        R_se=r_se,
        K_se=k_se,
        n_samples=n_samples,
    )
    logger.debug(
        "MC Omega0=%.4g R_b=%.3f: R=%.5f±%.1e K=%.5f±%.1e over %d samples",
        float(drive.peak_rabi),
        float(R_b),
        estimate.R_mean,
        estimate.R_se,
        estimate.K_mean,
        estimate.K_se,
        n_samples,
    )
    return estimate


STOCHASTIC_COLUMNS: Tuple[str, ...] = ("omega0", "R_mean", "K_mean", "R_se", "K_se")


@beartype
def mc_sweep(
    geometry: ArrayGeometry,
    w0: scalar_float,
    R_b: scalar_float,
    omegas: Sequence[float],
    n_samples: int,
    seed: int,
    delta: Optional[scalar_float] = None,
    batch_size: int = DEFAULT_BATCH,
    workers: int = 1,
    progress: bool = True,
) -> Float[Array, "K 5"]:
    """(Ω₀, R̄, K̄, se_R, se_K) rows over a drive grid, one seed for all points.

    `delta` is the drive detuning; the saturation parameter always measures
    it from the array resonance Δ_{k∥=0}.
    """
    delta0 = resonant_detuning(geometry)
    delta = delta0 if delta is None else delta
    coupling = coupling_matrices(geometry)
    gamma_k0 = collective_rate(jnp.zeros(2), geometry.lattice_constant)

    def point(omega0: float) -> Tuple[float, ...]:
        drive = make_drive_mode("gaussian", w0, omega0, delta)
        est = mc_estimate(
            geometry,
            drive,
            R_b,
            n_samples,
            seed,
            batch_size=batch_size,
            coupling=coupling,
            gamma_k0=gamma_k0,
            delta0=delta0,
        )
        logger.info("Omega0=%.4g: R=%.5f K=%.5f", omega0, est.R_mean, est.K_mean)
        return (omega0, est.R_mean, est.K_mean, est.R_se, est.K_se)

    rows = ordered_map(point, omegas, workers=workers, description="stochastic mirror", progress=progress)
    return jnp.asarray(rows, dtype=jnp.float64).reshape(-1, len(STOCHASTIC_COLUMNS))


@jaxtyped(typechecker=beartype)
def analytic_binomial_loss(p: scalar_float, N_d: scalar_numeric) -> Float[Array, ""]:
    """Mean loss 2p(1 − p)(1 − 1/N_d) of N_d regions saturated with probability p."""
    return jnp.asarray(2.0 * p * (1.0 - p) * (1.0 - 1.0 / N_d), dtype=jnp.float64)


@jaxtyped(typechecker=beartype)
def k_max(N_d: scalar_numeric) -> Float[Array, ""]:
    """Largest mean loss (1 − 1/N_d)/2, reached at p = 1/2."""
    return jnp.asarray(0.5 * (1.0 - 1.0 / N_d), dtype=jnp.float64)


@jaxtyped(typechecker=beartype)
def omega_max(
    N_b: scalar_numeric,
    delta: scalar_float,
    delta0: scalar_float,
    gamma_k0: scalar_float,
) -> Float[Array, ""]:
    """Ω at which s = 1, √(Γ² + 4(δ − Δ)²)/√(8N_b)."""
    return jnp.asarray(
        jnp.sqrt(gamma_k0**2 + 4.0 * (delta - delta0) ** 2) / jnp.sqrt(8.0 * N_b),
        dtype=jnp.float64,
    )


@beartype
def region_counts(R_b: float, d: float, w0: float) -> Tuple[float, float]:
    """N_b = max(πR_b²/d², 1) atoms per region and N_d = 2πw₀²/(N_b d²) regions."""
    n_b = max(math.pi * R_b**2 / d**2, 1.0)
    return n_b, 2.0 * math.pi * w0**2 / (n_b * d**2)


@beartype
def uniform_drive_model(
    R_b: float,
    d: float,
    w0: float,
    omega: float,
    delta: float,
    delta0: float,
    gamma_k0: float,
) -> BinomialLossModel:
    """Region model of a beam of waist w₀ driving every region at Ω."""
    n_b, n_d = region_counts(R_b, d, w0)
    s = saturation_parameter(n_b, omega, delta, delta0, gamma_k0)
    return make_binomial_loss_model(n_b, max(n_d, 1.0), float(s))


@beartype
def binomial_loss_mc(
    p: float,
    N_d: int,
    n_samples: int,
    seed: int,
) -> Tuple[float, float]:
    """
    Description
    -----------
    Sample the idealized region model directly: each of N_d regions
    saturates independently with probability p, and a configuration with
    saturated fraction ν loses K_cl = 2ν(1 − ν).

    Returns
    -------
    - `K_mean` (float):
        Sample mean of K_cl
    - `K_se` (float):
        Its standard error
    """
    if N_d < 1 or n_samples < 1:
        raise ValueError(f"N_d and n_samples must be >= 1, got {N_d} and {n_samples}")
    keys = jax.vmap(lambda i: jax.random.fold_in(jax.random.PRNGKey(seed), i))(
        jnp.arange(n_samples)
    )
    draws = jax.vmap(lambda k: jax.random.bernoulli(k, p, (N_d,)))(shard_array(keys))
    nu = jnp.mean(draws.astype(jnp.float64), axis=1)
    loss = np.asarray(2.0 * nu * (1.0 - nu))
    se = float(np.std(loss, ddof=1)) / math.sqrt(n_samples) if n_samples > 1 else 0.0
    logger.debug(
        "binomial model p=%.3f N_d=%d: K=%.5f (analytic %.5f)",
        p,
        N_d,
        float(np.mean(loss)),
        float(analytic_binomial_loss(p, N_d)),
    )
    return float(np.mean(loss)), se


@beartype
def k_max_collapse(
    cases: Sequence[Tuple[int, float, float, float]],
    omegas: Sequence[float],
    n_samples: int,
    seed: int,
    workers: int = 1,
    progress: bool = True,
    max_states: int = DEFAULT_MAX_STATES,
) -> Float[Array, "C 4"]:
    """
    Description
    -----------
    Largest loss over a drive grid for several arrays, against the number
    of blockade regions under the beam. The Monte Carlo maximum is given
    for every case; the exact maximum from the blockade-projected master
    equation is added wherever its basis fits under `max_states`.

    Parameters
    ----------
    - `cases` (Sequence[Tuple[int, float, float, float]]):
        (N, d, w₀, R_b) per case
    - `omegas` (Sequence[float]):
        Drive grid scanned for the maximum loss
    - `n_samples` (int):
        Configurations per grid point
    - `seed` (int):
        Seed shared by every case
    - `max_states` (int):
        Basis cap of the exact solve. Default is 4096.

    Returns
    -------
    - `rows` (Float[Array, "C 4"]):
        (1/N_d, K^max from sampling, exact K^max, (1 − 1/N_d)/2) per case.
        The exact value is NaN when the basis is too large or no grid
        point converged.
    """
    def exact_peak(geometry: ArrayGeometry, w0: float, radius: float) -> float:
        try:
            rows = strong_drive_sweep(
                geometry, w0, radius, omegas, max_states=max_states, progress=False
            )
        except BasisSizeError as err:
            logger.info("exact K_max skipped: %s", err)
            return math.nan
        good = np.asarray(rows[:, STRONG_DRIVE_COLUMNS.index("failed")]) == 0.0
        if not np.any(good):
            return math.nan
        return float(np.max(np.asarray(rows[:, STRONG_DRIVE_COLUMNS.index("K")])[good]))

    def case_row(case: Tuple[int, float, float, float]) -> Tuple[float, float, float, float]:
        n_side, d, w0, radius = case
        geometry = build_square_array(int(n_side), float(d))
        rows = mc_sweep(geometry, w0, radius, omegas, n_samples, seed, progress=False)
        _, n_d = region_counts(float(radius), float(d), float(w0))
        k_peak = float(jnp.max(rows[:, 2]))
        k_exact = exact_peak(geometry, float(w0), float(radius))
        analytic = float(k_max(max(n_d, 1.0)))
        logger.info(
            "N=%d R_b=%.3f: 1/N_d=%.4f K_max=%.4f exact %.4f",
            n_side,
            radius,
            1.0 / n_d,
            k_peak,
            k_exact,
        )
        return 1.0 / n_d, k_peak, k_exact, analytic

    rows = ordered_map(case_row, cases, workers=workers, description="kmax collapse", progress=progress)
    return jnp.asarray(rows, dtype=jnp.float64).reshape(-1, 4)
