import json
from pathlib import Path

import chex
import numpy as np
import pytest
from absl.testing import parameterized

from rydmirror.harness.cli import (EXIT_BAD_CONFIG, EXIT_FAILED_ROWS,
                                   EXIT_OK, build_parser, main)
from rydmirror.harness.constants import load_constants
from rydmirror.harness.harness_types import (EXPERIMENTS,
                                             make_experiment_config,
                                             make_result_set)
from rydmirror.harness.presets import PRESETS, preset_configs, preset_names
from rydmirror.harness.results import read_result_set, write_result_set


class TestPresets(chex.TestCase):
    @parameterized.parameters(*sorted(PRESETS))
    def test_every_preset_validates(self, name):
        configs = preset_configs(name)
        assert configs
        names = [c.output["name"] for c in configs]
        assert len(set(names)) == len(names)
        assert all(n.startswith(f"{name}-v") for n in names)

    def test_fig4_bundles_exact_and_stochastic(self):
        experiments = [c.experiment for c in preset_configs("fig4")]
        assert experiments == ["strong-drive", "stochastic-mirror"]
        exact, stochastic = preset_configs("fig4")
        assert exact.sweep == stochastic.sweep
        assert exact.waist == pytest.approx(0.8)

    def test_overrides_reach_every_config(self):
        for config in preset_configs("figC2", {"seed": 5, "output": {"directory": "x"}}):
            assert config.seed == 5
            assert config.output["directory"] == "x"

    def test_names(self):
        assert preset_names() == sorted(PRESETS)
        for required in ("fig2", "fig3", "fig4", "figC2", "figC5", "figD"):
            assert required in PRESETS


class TestParser(chex.TestCase):
    def test_subcommands(self):
        parser = build_parser()
        for name in EXPERIMENTS:
            args = parser.parse_args([name, "--seed", "3", "--workers", "2"])
            assert args.command == name
            assert args.seed == 3 and args.workers == 2
        args = parser.parse_args(["preset", "fig2", "--quiet"])
        assert args.name == "fig2" and args.quiet


class TestMain(chex.TestCase):
    def setUp(self):
        super().setUp()
        self.directory = Path(self.create_tempdir().full_path)

    def _write_config(self, document):
        path = self.directory / "config.json"
        path.write_text(json.dumps(document))
        return str(path)

    def test_runs_experiment(self):
        config = self._write_config({"sweep": {"r_over_rb": [0.0, 1.0]}})
        status = main(
            ["dressing-potential", "--config", config, "--output-dir", str(self.directory), "--quiet"]
        )
        assert status == EXIT_OK
        result = read_result_set(self.directory / "dressing-potential.csv")
        chex.assert_trees_all_close(result.column("V_ee_over_V"), np.array([1.0, 0.5]))

    def test_mismatched_experiment(self):
        config = self._write_config({"experiment": "g2-sweep", "sweep": {"radii": [0.5]}})
        assert main(["dressing-potential", "--config", config, "--quiet"]) == EXIT_BAD_CONFIG

    def test_invalid_config(self):
        config = self._write_config({"sweep": {"r_over_rb": [1.0]}, "plot": True})
        assert main(["dressing-potential", "--config", config, "--quiet"]) == EXIT_BAD_CONFIG

    def test_missing_config_file(self):
        missing = str(self.directory / "absent.json")
        assert main(["dressing-potential", "--config", missing, "--quiet"]) == EXIT_BAD_CONFIG

    def test_missing_sweep(self):
        assert main(["g2-sweep", "--quiet"]) == EXIT_BAD_CONFIG

    def test_preset_list(self):
        assert main(["preset", "--list"]) == EXIT_OK

    def test_fit_constants(self):
        config = make_experiment_config(
            {"experiment": "reflectance-sweep", "sweep": {"waists": [1.0]}}
        )
        w1 = np.array([1.0, 1.5, 2.0, 3.0])
        rows = np.column_stack([w1, 1.0 - 0.03 / w1**4])
        result = make_result_set(config, ("w1", "eta"), rows, {"w1": "lambda0", "eta": "1"})
        csv_path, _ = write_result_set(result, self.directory, "storage")
        store = self.directory / "constants.json"
        status = main(
            ["fit-constants", "--dataset", str(csv_path), "--model", "C_s", "--store", str(store)]
        )
        assert status == EXIT_OK
        assert load_constants(store)["C_s"].value == pytest.approx(0.03, rel=1e-6)

    def test_ill_conditioned_fit_fails(self):
        config = make_experiment_config(
            {"experiment": "reflectance-sweep", "sweep": {"waists": [1.0]}}
        )
        result = make_result_set(
            config, ("w1", "eta"), [[1.5, 0.99]], {"w1": "lambda0", "eta": "1"}
        )
        csv_path, _ = write_result_set(result, self.directory, "single")
        status = main(["fit-constants", "--dataset", str(csv_path), "--model", "C_s"])
        assert status == EXIT_FAILED_ROWS


if __name__ == "__main__":
    pytest.main([__file__])
