"""Full-size runs through the harness. Deselected unless run with -m slow."""

import functools
import math

import chex
import jax
import jax.numpy as jnp
import numpy as np
import pytest
from absl.testing import parameterized

from rydmirror.arrays.dispersion import collective_rate
from rydmirror.harness.constants import fit_constants
from rydmirror.harness.experiments import run_experiment
from rydmirror.harness.harness_types import make_experiment_config
from rydmirror.rydberg.correlations import g2_saturation_baseline
from rydmirror.rydberg.stochastic import analytic_binomial_loss, binomial_loss_mc

jax.config.update("jax_enable_x64", True)

_D = 0.5
_SMALL_RADII = (_D, math.sqrt(2.0) * _D, 2.0 * _D, math.sqrt(5.0) * _D, 3.0 * _D)
_FULL_BLOCKADE = 2.2
_OMEGAS = [0.02, 0.05, 0.1, 0.2, 0.4, 0.8, 1.6, 3.2, 6.4]


def _run(document):
    return run_experiment(make_experiment_config(document), write=False, progress=False)


def _rows_at(result, radius):
    return np.flatnonzero(np.isclose(result.column("R_b"), radius))


@functools.lru_cache(maxsize=None)
def _switch_sweep():
    return _run(
        {
            "experiment": "switch-optimize",
            "geometry": {"n_side": 41, "d": _D},
            "solver": {"mode": "full"},
            "sweep": {"radii": [2.0, 2.5, 3.0, 4.0, 5.0]},
        }
    )


@functools.lru_cache(maxsize=None)
def _exact_small_array():
    return _run(
        {
            "experiment": "strong-drive",
            "geometry": {"n_side": 4, "d": _D},
            "drive": {"waist": 0.4 * 4.0 * _D},
            "sweep": {"radii": list(_SMALL_RADII) + [_FULL_BLOCKADE], "omegas": _OMEGAS},
        }
    )


@pytest.mark.slow
class TestAcceptance(chex.TestCase):
    def test_aperture_law(self):
        result = _run(
            {
                "experiment": "hole-scan",
                "geometry": {"n_side": 41, "d": 0.5},
                "drive": {"waist": 2.5},
                "sweep": {"radii": [1.0, 2.0, 3.0, 4.0, 5.0]},
            }
        )
        gap = np.abs(result.column("T") - result.column("T_aperture"))
        assert np.all(gap < 0.05)

    def test_finite_mirror_fit(self):
        result = _run(
            {
                "experiment": "reflectance-sweep",
                "geometry": {"n_side": 41, "d": _D},
                "sweep": {"waists": [1.0, 1.25, 1.5, 2.0, 2.5, 3.0]},
            }
        )
        assert float(np.max(result.column("R"))) >= 0.98
        fit = fit_constants(
            {"w": result.column("w"), "R": result.column("R")}, "C_R", n_side=41, d=_D
        )
        assert fit.value > 0.0
        assert fit.max_relative_error < 0.2

    def test_switch_error_slope(self):
        result = _switch_sweep()
        slope = np.polyfit(np.log(result.column("R_b")), np.log(result.column("epsilon")), 1)[0]
        assert -4.5 <= slope <= -3.2

    def test_switch_scaling_fit(self):
        result = _switch_sweep()
        fit = fit_constants(
            {"R_b": result.column("R_b"), "epsilon": result.column("epsilon")}, "C", d=_D
        )
        assert fit.max_relative_error < 0.3

    def test_switch_errors_balanced(self):
        result = _switch_sweep()
        gap = np.abs(result.column("epsilon_t") - result.column("epsilon_r"))
        assert np.all(gap < 0.2 * result.column("epsilon"))

    def test_retrieval_overlap_below_switch_error(self):
        result = _switch_sweep()
        assert np.all(result.column("overlap_error") < result.column("epsilon"))

    def test_beyond_step_plateau(self):
        interactions = [5.0, 10.0]
        result = _run(
            {
                "experiment": "switch-optimize",
                "geometry": {"n_side": 31, "d": _D},
                "sweep": {"radii": [2.5, 3.5], "interactions": interactions},
            }
        )
        gamma = float(collective_rate(jnp.zeros(2), _D))
        for V in interactions:
            rows = np.flatnonzero(result.column("V") == V)
            total = result.column("epsilon_total")[rows]
            eps_v = 1.0 / (1.0 + 4.0 * V**2 / gamma**2)
            assert eps_v <= total[-1] <= 2.0 * eps_v
            assert np.all(np.isfinite(result.column("T_potential")[rows]))

    @parameterized.parameters(4, 6, 8, 10)
    def test_g2_without_blockade(self, n_side):
        result = _run(
            {
                "experiment": "g2-sweep",
                "geometry": {"n_side": n_side, "d": _D},
                "sweep": {"radii": [0.0]},
            }
        )
        w0 = 0.35 * n_side * _D
        baseline = float(g2_saturation_baseline(math.pi * w0**2 / _D**2))
        assert result.column("g2_R")[0] == pytest.approx(baseline, rel=0.1)

    def test_g2_falls_with_blockade_radius(self):
        result = _run(
            {
                "experiment": "g2-sweep",
                "geometry": {"n_side": 10, "d": 0.5},
                "sweep": {"radii": [0.5, 1.0, 1.75, 2.5, 3.5]},
            }
        )
        g2 = result.column("g2_R")
        assert np.all(np.diff(g2) <= 1e-3)
        assert np.all(g2[result.column("rb2_over_w02") >= 4.0] < 0.1)
        assert result.ok

    def test_strong_drive_exact(self):
        result = _exact_small_array()
        interior = []
        for radius in _SMALL_RADII + (_FULL_BLOCKADE,):
            rows = _rows_at(result, radius)
            if rows[0] in result.skipped_rows or np.any(result.column("failed")[rows] != 0.0):
                continue
            R = result.column("R")[rows]
            K = result.column("K")[rows]
            assert np.all(np.diff(R) <= 1e-6)
            interior.append(0 < int(np.argmax(K)) < K.size - 1)
        assert any(interior)
        full = _rows_at(result, _FULL_BLOCKADE)
        assert float(np.max(result.column("K")[full])) < 0.05

    def test_stochastic_matches_exact(self):
        exact = _exact_small_array()
        sampled = _run(
            {
                "experiment": "stochastic-mirror",
                "geometry": {"n_side": 4, "d": _D},
                "drive": {"waist": 0.4 * 4.0 * _D},
                "solver": {"n_samples": 5000},
                "sweep": {"radii": list(_SMALL_RADII), "omegas": _OMEGAS},
            }
        )
        matched, compared = 0, 0
        for radius in _SMALL_RADII:
            rows = _rows_at(exact, radius)
            if rows[0] in exact.skipped_rows or np.any(exact.column("failed")[rows] != 0.0):
                continue
            compared += 1
            gap = np.abs(exact.column("K")[rows] - sampled.column("K_mean")[_rows_at(sampled, radius)])
            matched += int(np.max(gap) < 0.05)
        assert compared >= 4
        assert matched >= 4

    @parameterized.product(p=(0.25, 0.5, 0.75), n_d=(1, 2, 4))
    def test_binomial_loss(self, p, n_d):
        mean, se = binomial_loss_mc(p, n_d, 20000, seed=17)
        expected = float(analytic_binomial_loss(p, float(n_d)))
        assert abs(mean - expected) <= 3.0 * se + 1e-12

    def test_k_max_collapse(self):
        result = _run(
            {
                "experiment": "kmax-collapse",
                "solver": {"n_samples": 2000},
                "sweep": {
                    "cases": [[10, _D, w0, 0.5] for w0 in (1.0, 1.5, 2.0)],
                    "omegas": [0.05, 0.1, 0.15, 0.2, 0.3, 0.4, 0.6, 0.8, 1.2, 2.0],
                },
            }
        )
        collapsed = result.column("inv_N_d") <= 0.3
        assert np.any(collapsed)
        sampled = result.column("K_max")[collapsed]
        analytic = result.column("K_max_analytic")[collapsed]
        assert np.all(sampled <= analytic + 0.05)
        assert np.all(sampled >= 0.6 * analytic)


if __name__ == "__main__":
    pytest.main([__file__])
