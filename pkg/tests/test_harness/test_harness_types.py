import json
import math

import chex
import numpy as np
import pytest
from absl.testing import parameterized

from rydmirror.errors import ConfigurationError
from rydmirror.harness.harness_types import (canonical_json, config_hash,
                                             make_experiment_config,
                                             make_result_set)


def _g2_document(**extra):
    document = {
        "experiment": "g2-sweep",
        "geometry": {"n_side": 4, "d": 0.5},
        "sweep": {"radii": [0.0, 0.5]},
    }
    document.update(extra)
    return document


class TestExperimentConfig(chex.TestCase):
    def test_defaults_fill_in(self):
        config = make_experiment_config(_g2_document())
        assert config.geometry["dipole_axis"] == "x"
        assert config.solver["max_pairs"] == 60000
        assert config.output["name"] == "g2-sweep"
        assert config.seed == 0
        assert config.waist == pytest.approx(0.35 * 4 * 0.5)
        assert math.isinf(config.interaction)

    def test_explicit_waist_and_interaction(self):
        config = make_experiment_config(
            _g2_document(
                drive={"waist": 0.7},
                blockade={"kind": "step-finite", "V": 3.0},
            )
        )
        assert config.waist == 0.7
        assert config.interaction == 3.0

    @parameterized.named_parameters(
        ("top_level", {"colour": "red"}),
        ("nested", {"solver": {"tolerance": 1e-3}}),
        ("block_not_object", {"geometry": 5}),
    )
    def test_unknown_or_malformed_keys(self, extra):
        with pytest.raises(ConfigurationError):
            make_experiment_config(_g2_document(**extra))

    @parameterized.named_parameters(
        ("experiment", {"experiment": "fig9"}),
        ("n_side", {"geometry": {"n_side": 0}}),
        ("negative_d", {"geometry": {"d": -0.5}}),
        ("axis", {"geometry": {"dipole_axis": "w"}}),
        ("drive_kind", {"drive": {"kind": "bessel"}}),
        ("blockade_kind", {"blockade": {"kind": "soft"}}),
        ("finite_without_V", {"blockade": {"kind": "step-finite"}}),
        ("mode", {"solver": {"mode": "slow"}}),
        ("negative_radius", {"sweep": {"radii": [-1.0]}}),
        ("bool_seed", {"seed": True}),
        ("workers", {"workers": 0}),
        ("k_max", {"sweep": {"radii": [0.5], "k_max": 1.5}}),
        ("case_shape", {"sweep": {"radii": [0.5], "cases": [[4, 0.5, 1.0]]}}),
    )
    def test_invalid_values(self, extra):
        document = _g2_document()
        for key, value in extra.items():
            if isinstance(value, dict) and isinstance(document.get(key), dict):
                document[key] = {**document[key], **value}
            else:
                document[key] = value
        with pytest.raises(ConfigurationError):
            make_experiment_config(document)

    def test_required_sweep(self):
        with pytest.raises(ConfigurationError, match="sweep.omegas"):
            make_experiment_config(
                {"experiment": "strong-drive", "sweep": {"radii": [0.5]}}
            )

    def test_overrides(self):
        config = make_experiment_config(
            _g2_document(), {"seed": 9, "output": {"directory": "elsewhere"}}
        )
        assert config.seed == 9
        assert config.output["directory"] == "elsewhere"
        assert config.output["name"] == "g2-sweep"


class TestConfigHash(chex.TestCase):
    def test_canonical_json(self):
        assert canonical_json({"b": 1, "a": [1.5, None]}) == '{"a":[1.5,null],"b":1}'

    def test_stable(self):
        first = make_experiment_config(_g2_document())
        second = make_experiment_config(json.loads(json.dumps(_g2_document())))
        assert config_hash(first) == config_hash(second)
        assert len(config_hash(first)) == 64

    def test_ignores_output_and_workers(self):
        base = make_experiment_config(_g2_document())
        moved = make_experiment_config(
            _g2_document(output={"directory": "other", "name": "x"}, workers=4)
        )
        assert config_hash(base) == config_hash(moved)

    @parameterized.named_parameters(
        ("seed", {"seed": 1}),
        ("geometry", {"geometry": {"n_side": 5, "d": 0.5}}),
        ("solver", {"solver": {"tol": 1e-9}}),
        ("constants", {"constants": "custom.json"}),
    )
    def test_changes_with_meaningful_fields(self, extra):
        base = make_experiment_config(_g2_document())
        changed = make_experiment_config(_g2_document(**extra))
        assert config_hash(base) != config_hash(changed)


class TestResultSet(chex.TestCase):
    def setUp(self):
        super().setUp()
        self.config = make_experiment_config(_g2_document())
        self.units = {"x": "1", "residual": "1", "failed": "1"}

    def test_failed_rows(self):
        rows = [[0.0, 1e-9, 0.0], [1.0, 1e-3, 0.0], [2.0, 1e-9, 1.0], [3.0, np.nan, 0.0]]
        result = make_result_set(
            self.config, ("x", "residual", "failed"), rows, self.units, "residual", "failed"
        )
        assert result.failed_rows == (1, 2, 3)
        assert not result.ok
        assert result.max_residual == pytest.approx(1e-3)

    def test_skipped_rows_do_not_fail(self):
        rows = [[0.0, 1e-9, 0.0], [1.0, np.nan, 0.0]]
        result = make_result_set(
            self.config,
            ("x", "residual", "failed"),
            rows,
            self.units,
            "residual",
            "failed",
            skipped_rows=[1],
        )
        assert result.ok
        assert result.skipped_rows == (1,)
        assert result.max_residual == pytest.approx(1e-9)

    def test_column_lookup(self):
        result = make_result_set(self.config, ("x",), [[1.0], [2.0]], {"x": "1"})
        chex.assert_trees_all_close(result.column("x"), np.array([1.0, 2.0]))
        assert result.max_residual == 0.0
        with pytest.raises(KeyError):
            result.column("y")

    def test_units_required(self):
        with pytest.raises(ValueError):
            make_result_set(self.config, ("x", "y"), [[1.0, 2.0]], {"x": "1"})


if __name__ == "__main__":
    pytest.main([__file__])
