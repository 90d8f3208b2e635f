import chex
import pytest
from absl.testing import parameterized

from rydmirror.tools.optimizers import (coordinate_search,
                                        golden_section_search,
                                        grid_golden_search, memoize_objective)


def _two_wells(x: float) -> float:
    """Local minimum 0.5 at x = 1, global minimum 0 at x = 4."""
    return min((x - 1.0) ** 2 + 0.5, (x - 4.0) ** 2)


class TestGoldenSection(chex.TestCase):
    @parameterized.parameters(
        {"center": 0.3, "lower": -1.0, "upper": 2.0},
        {"center": 1.9, "lower": 2.0, "upper": -1.0},
        {"center": -0.99, "lower": -1.0, "upper": 2.0},
    )
    def test_quadratic(self, center: float, lower: float, upper: float):
        result = golden_section_search(
            lambda x: (x - center) ** 2, lower, upper, tol=1e-5
        )
        self.assertAlmostEqual(result.x[0], center, delta=1e-4)
        self.assertEqual(result.n_evals, len(result.history))
        self.assertLessEqual(result.n_evals, 60)

    def test_budget_is_respected(self):
        result = golden_section_search(lambda x: x**2, -1.0, 1.0, tol=1e-12, max_evals=10)
        self.assertLessEqual(result.n_evals, 10)

    def test_narrow_bracket(self):
        result = golden_section_search(lambda x: x, 1.0, 1.0 + 1e-6, tol=1e-3)
        self.assertEqual(result.n_evals, 1)

    def test_invalid_tolerance(self):
        with pytest.raises(ValueError):
            golden_section_search(lambda x: x, 0.0, 1.0, tol=0.0)


class TestGridGolden(chex.TestCase):
    def test_escapes_local_minimum(self):
        result = grid_golden_search(_two_wells, 0.0, 5.0, n_grid=9, tol=1e-5)
        self.assertAlmostEqual(result.x[0], 4.0, delta=1e-3)
        self.assertAlmostEqual(result.fun, 0.0, delta=1e-6)

    def test_history_contains_grid(self):
        result = grid_golden_search(_two_wells, 0.0, 5.0, n_grid=5)
        grid_points = [h[0][0] for h in result.history[:5]]
        self.assertEqual(grid_points, [0.0, 1.25, 2.5, 3.75, 5.0])

    def test_minimum_grid_size(self):
        with pytest.raises(ValueError):
            grid_golden_search(_two_wells, 0.0, 5.0, n_grid=2)


class TestCoordinateSearch(chex.TestCase):
    def test_separable_bowl(self):
        result = coordinate_search(
            lambda x, y: (x - 1.0) ** 2 + 2.0 * (y + 2.0) ** 2,
            start=(0.0, 0.0),
            bounds=((-5.0, 5.0), (-5.0, 5.0)),
            tol=1e-5,
        )
        self.assertAlmostEqual(result.x[0], 1.0, delta=1e-3)
        self.assertAlmostEqual(result.x[1], -2.0, delta=1e-3)

    def test_start_is_clipped_to_bounds(self):
        result = coordinate_search(
            lambda x: x, start=(10.0,), bounds=((0.0, 1.0),), max_sweeps=1
        )
        self.assertEqual(result.history[0][0], (1.0,))
        self.assertAlmostEqual(result.x[0], 0.0, delta=1e-2)

    def test_length_mismatch(self):
        with pytest.raises(ValueError):
            coordinate_search(lambda x, y: x + y, (0.0, 0.0), ((0.0, 1.0),))


class TestMemoize(chex.TestCase):
    def test_revisits_are_cached(self):
        calls = []

        def objective(x: float) -> float:
            calls.append(x)
            return x**2

        cached = memoize_objective(objective)
        self.assertEqual(cached(0.5), 0.25)
        self.assertEqual(cached(0.5 + 1e-13), 0.25)
        self.assertAlmostEqual(cached(0.7), 0.49)
        self.assertEqual(len(calls), 2)
        self.assertEqual(len(cached.cache), 2)


if __name__ == "__main__":
    pytest.main([__file__])
