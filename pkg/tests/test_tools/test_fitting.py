import chex
import jax
import jax.numpy as jnp
import numpy as np
import pytest
from absl.testing import parameterized

from rydmirror.tools.fitting import create_loss_function, fit_model

jax.config.update("jax_enable_x64", True)


def _line(x, slope, offset):
    return slope * x + offset


def _inverse_quartic(w, c):
    return 1.0 - c / w**4


class TestLossFunction(chex.TestCase):
    @parameterized.parameters(
        {"loss_type": "mae", "expected": 1.0},
        {"loss_type": "mse", "expected": 1.0},
        {"loss_type": "rmse", "expected": 1.0},
    )
    def test_unit_offset(self, loss_type: str, expected: float):
        x = jnp.linspace(0.0, 1.0, 5)
        loss_fn = create_loss_function(_line, x, 2.0 * x, loss_type)
        chex.assert_trees_all_close(loss_fn(2.0, 1.0), expected)
        chex.assert_trees_all_close(loss_fn(2.0, 0.0), 0.0)

    def test_unknown_loss(self):
        with pytest.raises(ValueError):
            create_loss_function(_line, jnp.zeros(2), jnp.zeros(2), "huber")


class TestFitModel(chex.TestCase):
    def test_exact_line(self):
        x = np.linspace(-1.0, 3.0, 12)
        result = fit_model(_line, x, 0.7 * x - 0.2, p0=(1.0, 0.0))
        np.testing.assert_allclose(result.params, (0.7, -0.2), atol=1e-8)
        self.assertLess(result.rmse, 1e-8)
        self.assertEqual(len(result.stderr), 2)

    def test_diffraction_constant(self):
        w = np.linspace(1.0, 3.0, 9)
        result = fit_model(_inverse_quartic, w, 1.0 - 0.16 / w**4, p0=(0.1,), bounds=((0.0,), (10.0,)))
        self.assertAlmostEqual(result.params[0], 0.16, delta=1e-6)

    def test_too_few_points(self):
        with pytest.raises(ValueError):
            fit_model(_line, [1.0], [1.0], p0=(1.0, 0.0))


if __name__ == "__main__":
    pytest.main([__file__])
