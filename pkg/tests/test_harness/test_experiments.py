import math
from pathlib import Path

import chex
import jax
import numpy as np
import pytest

from rydmirror.arrays.array_types import make_drive_mode
from rydmirror.arrays.dispersion import resonant_detuning
from rydmirror.arrays.geometry import build_square_array
from rydmirror.arrays.scattering import (project_scattering,
                                         steady_state_single_excitation)
from rydmirror.errors import ConfigurationError
from rydmirror.harness.constants import ConstantEntry
from rydmirror.harness.experiments import run_experiment
from rydmirror.harness.harness_types import make_experiment_config
from rydmirror.rydberg.master_equation import strong_drive_sweep
from rydmirror.rydberg.stochastic import k_max, region_counts

jax.config.update("jax_enable_x64", True)

_C0 = {"C0": ConstantEntry(2.5e-78, "J m^6", "test")}


def _run(document, **kwargs):
    config = make_experiment_config(document)
    return run_experiment(config, write=False, progress=False, **kwargs)


class TestLinearExperiments(chex.TestCase):
    def test_dispersion(self):
        result = _run(
            {
                "experiment": "dispersion",
                "solver": {"radius_cut": 5.0},
                "sweep": {"k_points": 3, "k_max": 0.5},
            }
        )
        assert result.rows.shape == (3, 5)
        chex.assert_trees_all_close(result.column("k_x"), np.array([0.0, 0.25, 0.5]) * 2 * math.pi)
        assert result.column("Gamma_k")[0] == pytest.approx(3.0 / math.pi)
        assert result.residual_column == "convergence"

    def test_reflectance_sweep(self):
        result = _run(
            {
                "experiment": "reflectance-sweep",
                "geometry": {"n_side": 4},
                "sweep": {"waists": [0.6, 0.8]},
            }
        )
        chex.assert_trees_all_close(result.column("w"), np.array([0.6, 0.8]))
        assert np.all(result.column("R") > 0.0)
        assert result.ok

    def test_hole_covering_array_transmits(self):
        result = _run(
            {
                "experiment": "hole-scan",
                "geometry": {"n_side": 5},
                "drive": {"waist": 0.6},
                "sweep": {"radii": [5.0]},
            }
        )
        assert result.column("T")[0] == pytest.approx(1.0, abs=1e-8)
        assert result.column("T_aperture")[0] == pytest.approx(1.0, abs=1e-8)

    def test_dressing_potential(self):
        result = _run({"experiment": "dressing-potential", "sweep": {"r_over_rb": [0.0, 1.0]}})
        chex.assert_trees_all_close(result.column("V_ee_over_V"), np.array([1.0, 0.5]))
        chex.assert_trees_all_close(result.column("V_re_over_V"), np.array([0.0, 1.0 / 3.0]))

    def test_physical_params(self):
        result = _run(
            {
                "experiment": "physical-params",
                "sweep": {"principal_numbers": [50, 100], "detunings": [10.0]},
            },
            constants=_C0,
        )
        R_b = result.column("R_b")
        assert R_b[1] / R_b[0] == pytest.approx(2.0 ** (11.0 / 6.0), rel=1e-10)
        assert np.all(result.column("P_c") > 0.0)

    def test_physical_params_need_c0(self):
        with pytest.raises(ConfigurationError, match="C0"):
            _run(
                {
                    "experiment": "physical-params",
                    "sweep": {"principal_numbers": [60], "detunings": [5.0]},
                },
                constants={},
            )


class TestRydbergExperiments(chex.TestCase):
    def test_g2_sweep_with_skipped_radius(self):
        result = _run(
            {
                "experiment": "g2-sweep",
                "geometry": {"n_side": 2},
                "drive": {"waist": 0.5},
                "solver": {"max_pairs": 3},
                "sweep": {"radii": [0.0, 2.0]},
            }
        )
        assert result.skipped_rows == (0,)
        assert math.isnan(result.column("g2_R")[0])
        assert result.column("g2_R")[1] == pytest.approx(0.0, abs=1e-12)
        assert result.ok

    def test_switch_with_interactions(self):
        result = _run(
            {
                "experiment": "switch-optimize",
                "geometry": {"n_side": 5},
                "sweep": {"radii": [1.0], "C_s": 1e-3, "interactions": [5.0, 10.0]},
            }
        )
        assert result.rows.shape == (2, len(result.columns))
        chex.assert_trees_all_close(result.column("V"), np.array([5.0, 10.0]))
        assert result.column("epsilon_V")[0] > result.column("epsilon_V")[1]
        total = result.column("epsilon") + result.column("epsilon_V") + result.column("epsilon_N")
        chex.assert_trees_all_close(result.column("epsilon_total"), total)
        assert result.column("R_step")[0] < result.column("R_step")[1]
        assert np.all(np.isfinite(result.column("T_potential")))

    def test_switch_skips_weak_interaction(self):
        result = _run(
            {
                "experiment": "switch-optimize",
                "geometry": {"n_side": 5},
                "sweep": {"radii": [1.0], "C_s": 1e-3, "interactions": [0.5, 5.0]},
            }
        )
        assert result.skipped_rows == (0,)
        assert result.column("R_step")[0] == 0.0
        assert np.isnan(result.column("epsilon")[0])
        assert result.column("R_step")[1] > 1.0

    def test_switch_step_limit(self):
        result = _run(
            {
                "experiment": "switch-optimize",
                "geometry": {"n_side": 5},
                "sweep": {"radii": [1.0], "C_s": 1e-3},
            }
        )
        assert result.rows.shape[0] == 1
        assert math.isinf(result.column("V")[0])
        assert result.column("epsilon_V")[0] == 0.0

    def test_strong_drive_skips_large_basis(self):
        result = _run(
            {
                "experiment": "strong-drive",
                "geometry": {"n_side": 2},
                "drive": {"waist": 0.6},
                "solver": {"max_states": 8},
                "sweep": {"radii": [0.5, 0.0], "omegas": [0.0, 1.0]},
            }
        )
        assert result.rows.shape == (4, 8)
        assert result.skipped_rows == (2, 3)
        chex.assert_trees_all_close(result.column("basis_dim")[:2], np.array([7.0, 7.0]))
        assert np.all(result.column("basis_dim")[2:] > 8.0)
        geometry = build_square_array(2, 0.5)
        unit = make_drive_mode("gaussian", 0.6, 1.0, float(resonant_detuning(geometry)))
        linear = project_scattering(steady_state_single_excitation(geometry, unit), unit, geometry)
        chex.assert_trees_all_close(
            result.rows[0, 2:5], np.array([float(linear.R), float(linear.T), float(linear.K)]), atol=1e-10
        )
        assert np.all(np.isnan(result.column("R")[2:]))
        assert result.ok

    def test_stochastic_mirror(self):
        result = _run(
            {
                "experiment": "stochastic-mirror",
                "geometry": {"n_side": 3},
                "drive": {"waist": 0.6},
                "solver": {"n_samples": 8, "batch": 4},
                "sweep": {"radii": [0.5], "omegas": [0.0, 1e4]},
            }
        )
        assert result.columns == ("R_b", "omega0", "R_mean", "K_mean", "R_se", "K_se")
        assert result.column("R_se")[0] == pytest.approx(0.0, abs=1e-12)
        assert result.column("K_mean")[1] == pytest.approx(0.0, abs=1e-12)

    def test_kmax_collapse(self):
        result = _run(
            {
                "experiment": "kmax-collapse",
                "solver": {"n_samples": 16},
                "sweep": {"cases": [[3, 0.5, 0.6, 0.5]], "omegas": [0.5]},
            }
        )
        _, n_d = region_counts(0.5, 0.5, 0.6)
        assert result.column("inv_N_d")[0] == pytest.approx(1.0 / n_d)
        assert result.column("K_max_analytic")[0] == pytest.approx(float(k_max(n_d)))
        exact = strong_drive_sweep(build_square_array(3, 0.5), 0.6, 0.5, [0.5], progress=False)
        assert result.column("K_max_exact")[0] == pytest.approx(float(exact[0, 3]), rel=1e-10)

    def test_kmax_exact_skipped_over_cap(self):
        result = _run(
            {
                "experiment": "kmax-collapse",
                "solver": {"n_samples": 8, "max_states": 16},
                "sweep": {"cases": [[3, 0.5, 0.6, 0.5]], "omegas": [0.5]},
            }
        )
        assert np.isnan(result.column("K_max_exact")[0])
        assert np.isfinite(result.column("K_max")[0])


class TestPersistence(chex.TestCase):
    def test_writes_named_outputs(self):
        directory = Path(self.create_tempdir().full_path)
        config = make_experiment_config(
            {
                "experiment": "dressing-potential",
                "sweep": {"r_over_rb": [0.5]},
                "output": {"directory": str(directory), "name": "curves"},
            }
        )
        run_experiment(config, progress=False)
        assert (directory / "curves.csv").exists()
        assert (directory / "curves.json").exists()


if __name__ == "__main__":
    pytest.main([__file__])
