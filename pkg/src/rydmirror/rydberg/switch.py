"""
Module: rydberg.switch
----------------------
Single-photon switch built from a Rydberg-blockaded mirror.

A gate photon stored as a Rydberg spin wave c_i ∝ e^{−|r_i|²/w₁²} punches
a blockade hole of radius R_b around the atom that holds it. A signal
photon of waist w₂ is then transmitted with probability
    T(w₁, w₂, R_b) = Σ_i |c_i|² T̄(r_i, w₂, R_b),
and reflected with R(w₂) when no gate photon was stored. The switch error
    ε = max(1 − ηT, 1 − R)
trades a small w₂ (hole covers the beam) against a large w₂ (the mirror
reflects well), with η = 1 − C_s/w₁⁴ the storage efficiency.

All hole amplitudes of one detuning share a single inverse of the intact
array's effective Hamiltonian, so an optimization costs one inversion plus
one small solve per distinct hole center and waist.

Functions
---------
- `stored_spinwave`:
    Normalized Gaussian Rydberg spin wave on the lattice
- `hole_amplitude_profile`:
    Hole centers, their weights and transmitted amplitudes t_i
- `conditional_transmittance`:
    T(w₁, w₂, R_b) as the weighted mean of hole transmittances
- `potential_conditional_transmittance`:
    T for a smooth dressing potential instead of a step hole
- `toy_model_T`:
    Closed-form 1 − e^{−2(R_b−w₂)²/w₁²}
- `storage_efficiency`:
    η(w₁) = 1 − C_s/w₁⁴, clipped to [0, 1]
- `intact_reflectance`:
    R(w₂) of the mirror without a stored photon
- `switch_errors`:
    Errors of the switch at given waists
- `optimize_switch`:
    Waists minimizing the switch error
- `optimal_waist_analytic`:
    w ≈ R_b/(1 + √log(C_ε R_b/d))
- `switch_error_scaling`:
    C(1 + log x)²/x⁴ with x = R_b/d
- `retrieval_overlap_error`:
    Distortion 1 − |⟨Ψ₀|Ψ_new⟩|² of the stored excitation
- `beyond_step_error`:
    Step error plus finite-interaction and finite-array corrections
- `with_beyond_step`:
    Fills the correction fields of a SwitchReport
- `switch_sweep`:
    Optimized switch over a list of blockade radii
- `beyond_step_sweep`:
    Switch error at finite interaction over microscopic blockade radii
"""

import math

import jax
import jax.numpy as jnp
import numpy as np
from beartype import beartype
from beartype.typing import List, NamedTuple, Optional, Sequence, Tuple
from jax.scipy.special import erf
from jaxtyping import Array, Complex, Float, jaxtyped

from rydmirror.arrays.array_types import (ArrayGeometry, make_drive_mode,
                                          scalar_float)
from rydmirror.arrays.dispersion import collective_rate, resonant_detuning
from rydmirror.arrays.geometry import drive_rabi, mode_amplitudes
from rydmirror.arrays.scattering import (hole_resolvent, hole_transmission_map,
                                         potential_hole_transmission,
                                         projection_constant,
                                         symmetry_representatives)
from rydmirror.tools import (coordinate_search, get_logger,
                             grid_golden_search, memoize_objective,
                             ordered_map)

from .dressing import kappa_for, shift_profile, step_radius
from .rydberg_types import (DRESSING_KINDS, DressingScheme, StoredSpinWave,
                            SwitchReport, make_dressing_scheme,
                            make_stored_spinwave)

jax.config.update("jax_enable_x64", True)

logger = get_logger(__name__)

WEIGHT_CUTOFF: float = 1e-6
SWITCH_MODES: Tuple[str, ...] = ("fast", "full")


class HoleProfile(NamedTuple):
    """
    Description
    -----------
    Transmitted amplitudes of every hole center that carries weight.

    Attributes
    ----------
    - `centers` (np.ndarray):
        Atom indices with |c_i|² at or above the cutoff
    - `weights` (Float[Array, "M"]):
        |c_i|² of those centers
    - `t` (Complex[Array, "M"]):
        Transmitted amplitudes t_i
    - `residual` (float):
        Largest hole-solve residual
    - `skipped_weight` (float):
        Population of the centers below the cutoff
    """

    centers: np.ndarray
    weights: Float[Array, "M"]
    t: Complex[Array, "M"]
    residual: float
    skipped_weight: float


@beartype
def stored_spinwave(geometry: ArrayGeometry, w1: scalar_float) -> StoredSpinWave:
    """
    Description
    -----------
    Rydberg spin wave c_i ∝ e^{−|r_i|²/w₁²} normalized to Σ c_i² = 1.
    The exponent is shifted by its maximum before exponentiation, so a
    waist far below d leaves the whole weight on the central atom.

    Raises
    ------
    - ValueError:
        For w₁ ≤ 0
    """
    if not float(w1) > 0.0:
        raise ValueError(f"w1 must be positive, got {float(w1)}")
    log_w = -jnp.sum(geometry.positions**2, axis=-1) / jnp.asarray(w1) ** 2
    weights = jnp.exp(log_w - jnp.max(log_w))
    return make_stored_spinwave(weights, w1)


@beartype
def hole_amplitude_profile(
    geometry: ArrayGeometry,
    spinwave: StoredSpinWave,
    R_b: scalar_float,
    w2: scalar_float,
    delta: Optional[scalar_float] = None,
    resolvent: Optional[Complex[Array, "Na Na"]] = None,
    cutoff: float = WEIGHT_CUTOFF,
) -> HoleProfile:
    """
    Description
    -----------
    Hole amplitudes t_i for every stored-excitation site whose population
    reaches `cutoff`.

    Parameters
    ----------
    - `geometry` (ArrayGeometry):
        The array
    - `spinwave` (StoredSpinWave):
        Stored gate excitation
    - `R_b` (scalar_float):
        Step blockade radius
    - `w2` (scalar_float):
        Signal waist
    - `delta` (scalar_float, optional):
        Detuning. Default is the resonant detuning of the geometry.
    - `resolvent` (Complex[Array, "Na Na"], optional):
        Shared inverse of the intact array
    - `cutoff` (float):
        Smallest |c_i|² kept. Default is 1e-6.

    Returns
    -------
    - `profile` (HoleProfile):
        Centers, weights, amplitudes and the skipped population
    """
    weights = np.asarray(spinwave.c_r) ** 2
    centers = np.flatnonzero(weights >= cutoff)
    skipped = float(np.sum(weights) - np.sum(weights[centers]))
    t, residual = hole_transmission_map(
        geometry, centers.tolist(), R_b, w2, delta=delta, resolvent=resolvent
    )
    if skipped > 1e-3:
        logger.warning(
            "hole centers below the weight cutoff carry %.2e of the population", skipped
        )
    return HoleProfile(
        centers=centers,
        weights=jnp.asarray(weights[centers]),
        t=t,
        residual=float(jnp.max(residual)) if centers.size else 0.0,
        skipped_weight=skipped,
    )


@beartype
def conditional_transmittance(
    geometry: ArrayGeometry,
    spinwave: StoredSpinWave,
    R_b: scalar_float,
    w2: scalar_float,
    delta: Optional[scalar_float] = None,
    resolvent: Optional[Complex[Array, "Na Na"]] = None,
    cutoff: float = WEIGHT_CUTOFF,
) -> float:
    """
    Description
    -----------
    Transmittance of the signal conditioned on a stored gate photon,
    T = Σ_i |c_i|² |t_i|², summed over the centers above `cutoff`. The
    skipped population bounds the truncation error and is logged.
    """
    profile = hole_amplitude_profile(geometry, spinwave, R_b, w2, delta, resolvent, cutoff)
    T = float(jnp.sum(profile.weights * jnp.abs(profile.t) ** 2))
    logger.debug(
        "T(w1=%.3f, w2=%.3f, R_b=%.3f) = %.6f over %d centers (skipped %.1e)",
        float(spinwave.w1),
        float(w2),
        float(R_b),
        T,
        profile.centers.size,
        profile.skipped_weight,
    )
    return T


@beartype
def potential_conditional_transmittance(
    geometry: ArrayGeometry,
    spinwave: StoredSpinWave,
    scheme: DressingScheme,
    w2: scalar_float,
    delta: Optional[scalar_float] = None,
    cutoff: float = WEIGHT_CUTOFF,
) -> float:
    """
    Description
    -----------
    Conditional transmittance when the stored excitation shifts its
    neighbours by the microscopic dressing profile instead of removing
    them. One full solve per symmetry-distinct center.
    """
    delta = resonant_detuning(geometry) if delta is None else delta
    weights = np.asarray(spinwave.c_r) ** 2
    centers = np.flatnonzero(weights >= cutoff)
    unique, inverse = symmetry_representatives(geometry, centers.tolist())

    def potential(r: Float[Array, "Na"]) -> Float[Array, "Na"]:
        return shift_profile(scheme, r)

    t_unique = []
    for i in unique.tolist():
        t_i, _ = potential_hole_transmission(geometry, int(i), potential, w2, delta)
        t_unique.append(t_i)
    t = jnp.stack(t_unique)[jnp.asarray(inverse)]
    return float(jnp.sum(jnp.asarray(weights[centers]) * jnp.abs(t) ** 2))


@beartype
def toy_model_T(w1: scalar_float, w2: scalar_float, R_b: scalar_float) -> float:
    """
    Description
    -----------
    Aperture estimate of the conditional transmittance,
    T ≈ 1 − e^{−2(R_b − w₂)²/w₁²}. Only meaningful for R_b > w₂; returns
    0 with a warning otherwise.
    """
    gap = float(R_b) - float(w2)
    if gap <= 0.0:
        logger.warning("toy model needs R_b > w2 (R_b=%.3f, w2=%.3f)", float(R_b), float(w2))
        return 0.0
    return 1.0 - math.exp(-2.0 * gap**2 / float(w1) ** 2)


@jaxtyped(typechecker=beartype)
def storage_efficiency(w1: scalar_float, C_s: scalar_float) -> Float[Array, ""]:
    """η = 1 − C_s/w₁⁴ in units of λ₀, clipped to [0, 1]."""
    w1 = jnp.asarray(w1, dtype=jnp.float64)
    return jnp.clip(1.0 - C_s / w1**4, 0.0, 1.0)


@beartype
def intact_reflectance(
    geometry: ArrayGeometry,
    w2: scalar_float,
    delta: scalar_float,
    resolvent: Complex[Array, "Na Na"],
) -> float:
    """R(w₂) of the intact mirror, reusing the shared inverse."""
    drive = make_drive_mode("gaussian", w2, 1.0, delta)
    c = resolvent @ drive_rabi(geometry, drive)
    overlap = jnp.sum(jnp.conj(mode_amplitudes(drive, geometry)) * c)
    return float(jnp.abs(projection_constant(drive) * overlap) ** 2)


@beartype
def switch_errors(
    geometry: ArrayGeometry,
    R_b: scalar_float,
    w1: scalar_float,
    w2: scalar_float,
    C_s: scalar_float,
    delta: Optional[scalar_float] = None,
    resolvent: Optional[Complex[Array, "Na Na"]] = None,
    cutoff: float = WEIGHT_CUTOFF,
) -> SwitchReport:
    """
    Description
    -----------
    Switch errors at fixed waists.

    Parameters
    ----------
    - `geometry` (ArrayGeometry):
        The array
    - `R_b` (scalar_float):
        Step blockade radius
    - `w1` (scalar_float):
        Gate waist
    - `w2` (scalar_float):
        Signal waist
    - `C_s` (scalar_float):
        Storage constant
    - `delta` (scalar_float, optional):
        Detuning. Default is the resonant detuning of the geometry.
    - `resolvent` (Complex[Array, "Na Na"], optional):
        Shared inverse of the intact array at `delta`
    - `cutoff` (float):
        Weight cutoff of the hole-center sum

    Returns
    -------
    - `report` (SwitchReport):
        η, T, R, ε_t = 1 − ηT, ε_r = 1 − R and ε = max(ε_t, ε_r)
    """
    delta = resonant_detuning(geometry) if delta is None else delta
    if resolvent is None:
        resolvent = hole_resolvent(geometry, delta)
    spinwave = stored_spinwave(geometry, w1)
    eta = float(storage_efficiency(w1, C_s))
    T = conditional_transmittance(geometry, spinwave, R_b, w2, delta, resolvent, cutoff)
    R = intact_reflectance(geometry, w2, delta, resolvent)
    eps_t = 1.0 - eta * T
    eps_r = 1.0 - R
    return SwitchReport(
        eta=eta,
        T_cond=T,
        R_uncond=R,
        epsilon=max(eps_t, eps_r),
        epsilon_t=eps_t,
        epsilon_r=eps_r,
        w1=float(w1),
        w2=float(w2),
        R_b=float(R_b),
    )


def _on_bound(x: float, lower: float, upper: float, tol: float) -> bool:
    return x - lower <= 2.0 * tol or upper - x <= 2.0 * tol


@beartype
def optimize_switch(
    geometry: ArrayGeometry,
    R_b: scalar_float,
    C_s: scalar_float,
    mode: str = "fast",
    delta: Optional[scalar_float] = None,
    resolvent: Optional[Complex[Array, "Na Na"]] = None,
    bounds: Optional[Tuple[float, float]] = None,
    n_grid: int = 9,
    tol: Optional[float] = None,
    cutoff: float = WEIGHT_CUTOFF,
) -> SwitchReport:
    """
    Description
    -----------
    Waists that minimize the switch error at a given blockade radius.

    Parameters
    ----------
    - `geometry` (ArrayGeometry):
        The array
    - `R_b` (scalar_float):
        Step blockade radius
    - `C_s` (scalar_float):
        Storage constant
    - `mode` (str):
        "fast" minimizes f(w) = (ε_t + ε_r)/2 along w₁ = w₂ = w;
        "full" then refines ε over (w₁, w₂) by coordinate search.
        Default is "fast".
    - `delta` (scalar_float, optional):
        Detuning. Default is the resonant detuning of the geometry.
    - `resolvent` (Complex[Array, "Na Na"], optional):
        Shared inverse of the intact array at `delta`
    - `bounds` (Tuple[float, float], optional):
        Waist search interval. Default is [d/2, max(R_b, d)].
    - `n_grid` (int):
        Coarse grid of the line search. Default is 9.
    - `tol` (float, optional):
        Waist tolerance. Default is d/100.
    - `cutoff` (float):
        Weight cutoff of the hole-center sum

    Returns
    -------
    - `report` (SwitchReport):
        Errors at the optimum, with `converged` False when the optimum
        sits on a search bound

    Flow
    ----
    - Shared inverse of the intact array at δ
    - Memoized f(w) along w₁ = w₂, grid then golden-section refinement
    - In full mode, coordinate search on ε(w₁, w₂) from the fast optimum
    - Flag optima on the search bounds
    """
    if mode not in SWITCH_MODES:
        raise ValueError(f"mode must be one of {SWITCH_MODES}, got {mode!r}")
    d = float(geometry.lattice_constant)
    delta = resonant_detuning(geometry) if delta is None else delta
    if resolvent is None:
        resolvent = hole_resolvent(geometry, delta)
    lower, upper = bounds if bounds is not None else (0.5 * d, max(float(R_b), d))
    tol = 0.01 * d if tol is None else tol
    n_evals = 0

    def report_at(w1: float, w2: float) -> SwitchReport:
        return switch_errors(geometry, R_b, w1, w2, C_s, delta, resolvent, cutoff)

    def balanced(w: float) -> float:
        rep = report_at(w, w)
        return 0.5 * (rep.epsilon_t + rep.epsilon_r)

    line = grid_golden_search(
        memoize_objective(balanced), lower, upper, n_grid=n_grid, tol=tol
    )
    n_evals += line.n_evals
    w_best = line.x[0]
    best = report_at(w_best, w_best)
    converged = not _on_bound(w_best, lower, upper, tol)
    if mode == "full":

        def total(w1: float, w2: float) -> float:
            return report_at(w1, w2).epsilon

        search = coordinate_search(
            memoize_objective(total),
            (w_best, w_best),
            ((lower, upper), (lower, upper)),
            tol=tol,
        )
        n_evals += search.n_evals
        if search.fun <= best.epsilon:
            best = report_at(*search.x)
        converged = not any(_on_bound(x, lower, upper, tol) for x in search.x)
    if not converged:
        logger.warning(
            "switch optimum for R_b=%.3f lies on the search bound [%.3f, %.3f]",
            float(R_b),
            lower,
            upper,
        )
    logger.info(
        "R_b=%.3f: w1=%.3f w2=%.3f eps=%.4g (eps_t=%.4g, eps_r=%.4g), %d evaluations",
        float(R_b),
        best.w1,
        best.w2,
        best.epsilon,
        best.epsilon_t,
        best.epsilon_r,
        n_evals,
    )
    return best._replace(converged=converged, n_evals=n_evals)


@beartype
def optimal_waist_analytic(R_b: scalar_float, d: scalar_float, C_eps: scalar_float) -> float:
    """
    Description
    -----------
    Waist that balances the transmission and reflection errors,
    w ≈ R_b/(1 + √log(C_ε R_b/d)).

    Raises
    ------
    - ValueError:
        When C_ε R_b/d ≤ 1, where the logarithm is not positive
    """
    argument = float(C_eps) * float(R_b) / float(d)
    if argument <= 1.0:
        raise ValueError(f"C_eps R_b/d must exceed 1, got {argument:.4g}")
    return float(R_b) / (1.0 + math.sqrt(math.log(argument)))


@jaxtyped(typechecker=beartype)
def switch_error_scaling(
    rb_over_d: Float[Array, "..."],
    C: scalar_float,
) -> Float[Array, "..."]:
    """ε_opt ≈ C(1 + log x)²/x⁴ with x = R_b/d."""
    return C * (1.0 + jnp.log(rb_over_d)) ** 2 / rb_over_d**4


@jaxtyped(typechecker=beartype)
def retrieval_overlap_error(
    weights: Float[Array, "M"],
    t: Complex[Array, "M"],
) -> Float[Array, ""]:
    """
    Description
    -----------
    Distortion of the stored excitation by the signal photon. The signal
    leaves c_i → c_i t_i, so with w_i = |c_i|²
        1 − |⟨Ψ₀|Ψ_new⟩|² = 1 − |Σ w_i t_i|² / Σ w_i |t_i|².

    Parameters
    ----------
    - `weights` (Float[Array, "M"]):
        Populations |c_i|² of the hole centers, summing to about 1
    - `t` (Complex[Array, "M"]):
        Hole amplitudes t_i

    Raises
    ------
    - ValueError:
        When every amplitude vanishes
    """
    norm = jnp.sum(weights * jnp.abs(t) ** 2)
    if not isinstance(norm, jax.core.Tracer) and float(norm) == 0.0:
        raise ValueError("distorted excitation has zero norm")
    overlap = jnp.sum(weights * t)
    return 1.0 - jnp.abs(overlap) ** 2 / norm


@jaxtyped(typechecker=beartype)
def beyond_step_error(
    epsilon_step: scalar_float,
    V: scalar_float,
    gamma_k0: scalar_float,
    n_side: int,
    d: scalar_float,
    w2: scalar_float,
) -> Float[Array, ""]:
    """
    Description
    -----------
    Switch error with the two corrections the step model leaves out,
    ε = ε_step + ε_V + ε_N, where
        ε_V = 1/(1 + 4V²/Γ²_{k∥=0}) is the leakage through a finite shift,
        ε_N = 1 − erf⁴(Nd/√2w₂) is the power that misses the array.
    """
    eps_v = 1.0 / (1.0 + 4.0 * jnp.asarray(V, dtype=jnp.float64) ** 2 / gamma_k0**2)
    eps_n = 1.0 - erf(n_side * d / (jnp.sqrt(2.0) * w2)) ** 4
    return epsilon_step + eps_v + eps_n


@beartype
def with_beyond_step(
    report: SwitchReport,
    V: float,
    gamma_k0: float,
    n_side: int,
    d: float,
) -> SwitchReport:
    """Fill ε_V and ε_N of a step-model report."""
    eps_v = 1.0 / (1.0 + 4.0 * V**2 / gamma_k0**2)
    eps_n = 1.0 - float(erf(n_side * d / (math.sqrt(2.0) * report.w2))) ** 4
    return report._replace(epsilon_V=eps_v, epsilon_N=eps_n)


SWITCH_COLUMNS: Tuple[str, ...] = (
    "R_b",
    "w1",
    "w2",
    "eta",
    "T",
    "R",
    "epsilon",
    "epsilon_t",
    "epsilon_r",
    "overlap_error",
    "converged",
    "n_evals",
)


@beartype
def switch_sweep(
    geometry: ArrayGeometry,
    radii: Sequence[float],
    C_s: float,
    mode: str = "fast",
    delta: Optional[scalar_float] = None,
    workers: int = 1,
    progress: bool = True,
) -> List[Tuple[SwitchReport, float]]:
    """
    Description
    -----------
    Optimized switch and retrieval distortion over blockade radii.

    Returns
    -------
    - `rows` (List[Tuple[SwitchReport, float]]):
        The optimized report and the retrieval overlap error at the
        optimal waists, per radius in input order
    """
    delta = resonant_detuning(geometry) if delta is None else delta
    resolvent = hole_resolvent(geometry, delta)

    def point(radius: float) -> Tuple[SwitchReport, float]:
        report = optimize_switch(geometry, radius, C_s, mode, delta, resolvent)
        spinwave = stored_spinwave(geometry, report.w1)
        profile = hole_amplitude_profile(
            geometry, spinwave, radius, report.w2, delta, resolvent
        )
        overlap = float(retrieval_overlap_error(profile.weights, profile.t))
        return report, overlap

    return ordered_map(point, radii, workers=workers, description="switch", progress=progress)


BEYOND_STEP_COLUMNS: Tuple[str, ...] = (
    ("R_b", "V", "R_step")
    + SWITCH_COLUMNS[1:]
    + ("epsilon_V", "epsilon_N", "epsilon_total", "T_potential", "epsilon_potential")
)


def _dressing_for(kind: str, R_b: float, V: float) -> DressingScheme:
    """Scheme with contact shift V at δ_c = 2V, where |Ω_c| < |δ_c|."""
    delta_c = 2.0 * V
    omega_c = math.sqrt(V * delta_c) if kind == "re" else (V * delta_c**3) ** 0.25
    return make_dressing_scheme(kind, R_b, omega_c=omega_c, delta_c=delta_c)


@beartype
def beyond_step_sweep(
    geometry: ArrayGeometry,
    radii: Sequence[float],
    interactions: Sequence[float],
    C_s: float,
    kind: str = "re",
    mode: str = "fast",
    delta: Optional[scalar_float] = None,
    workers: int = 1,
    progress: bool = True,
) -> Float[Array, "P 19"]:
    """
    Description
    -----------
    Switch error against the microscopic blockade radius at finite
    interaction strength. Each (R_b, V) point is mapped to its equivalent
    step radius, the step switch is optimized there, and the finite-shift
    and finite-array corrections are added. For finite V the conditional
    transmittance of the smooth dressing potential is also evaluated at
    the optimal waists.

    Parameters
    ----------
    - `geometry` (ArrayGeometry):
        The array
    - `radii` (Sequence[float]):
        Microscopic blockade radii
    - `interactions` (Sequence[float]):
        Interaction scales V in units of Γ₀; inf is the step limit
    - `C_s` (float):
        Storage constant
    - `kind` (str):
        Dressing scheme, "ee" or "re". Default is "re".
    - `mode` (str):
        Optimizer mode of `optimize_switch`
    - `delta` (scalar_float, optional):
        Detuning. Default is the resonant detuning of the geometry.

    Returns
    -------
    - `rows` (Float[Array, "P 19"]):
        One row of BEYOND_STEP_COLUMNS per (R_b, V), radius-major. Points
        whose step radius vanishes keep R_b, V and R_step = 0 and are NaN
        elsewhere.

    Raises
    ------
    - ValueError:
        When `kind` is not a dressing scheme

    Flow
    ----
    - Map every (R_b, V) to R_step, with R_step = R_b for infinite V
    - Optimize the switch once per distinct nonzero R_step
    - Add ε_V and ε_N at the optimal signal waist
    - Solve the dressing potential at the optimal waists for finite V
    """
    if kind not in DRESSING_KINDS:
        raise ValueError(f"kind must be one of {DRESSING_KINDS}, got {kind!r}")
    delta = resonant_detuning(geometry) if delta is None else delta
    d = float(geometry.lattice_constant)
    gamma_k0 = float(collective_rate(jnp.zeros(2), d))
    kappa = kappa_for(kind)
    points = [(float(r), float(V)) for r in radii for V in interactions]
    steps = [
        r if math.isinf(V) else step_radius(r, V, gamma_k0, kappa) for r, V in points
    ]
    distinct = sorted({s for s in steps if s > 0.0})
    optimized = dict(
        zip(distinct, switch_sweep(geometry, distinct, C_s, mode, delta, workers, progress))
    )

    def row(k: int) -> Tuple[float, ...]:
        (r, V), r_step = points[k], steps[k]
        if r_step == 0.0:
            logger.warning("R_b=%.3f, V=%.3g: no blockaded region, point skipped", r, V)
            return (r, V, 0.0) + (math.nan,) * (len(BEYOND_STEP_COLUMNS) - 3)
        report, overlap = optimized[r_step]
        extended = with_beyond_step(report, V, gamma_k0, geometry.n_side, d)
        total = float(
            beyond_step_error(report.epsilon, V, gamma_k0, geometry.n_side, d, report.w2)
        )
        T_pot, eps_pot = math.nan, math.nan
        if not math.isinf(V):
            T_pot = potential_conditional_transmittance(
                geometry,
                stored_spinwave(geometry, report.w1),
                _dressing_for(kind, r, V),
                report.w2,
                delta,
            )
            eps_pot = max(1.0 - report.eta * T_pot, report.epsilon_r)
        logger.info(
            "R_b=%.3f V=%.3g: R_step=%.3f eps_total=%.4g eps_potential=%.4g",
            r,
            V,
            r_step,
            total,
            eps_pot,
        )
        return (
            r,
            V,
            r_step,
            report.w1,
            report.w2,
            report.eta,
            report.T_cond,
            report.R_uncond,
            report.epsilon,
            report.epsilon_t,
            report.epsilon_r,
            overlap,
            float(report.converged),
            float(report.n_evals),
            extended.epsilon_V,
            extended.epsilon_N,
            total,
            T_pot,
            eps_pot,
        )

    rows = ordered_map(row, range(len(points)), workers=workers, description="beyond step", progress=progress)
    return jnp.asarray(rows, dtype=jnp.float64).reshape(-1, len(BEYOND_STEP_COLUMNS))
