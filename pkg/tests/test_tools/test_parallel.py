import time

import chex
import jax.numpy as jnp
import pytest
from absl.testing import parameterized

from rydmirror.tools.parallel import ordered_map, shard_array


def _slow_square(x: int) -> int:
    time.sleep(0.002 * (5 - x % 5))
    return x * x


class TestOrderedMap(chex.TestCase):
    @parameterized.parameters({"workers": 1}, {"workers": 4})
    def test_input_order(self, workers: int):
        results = ordered_map(_slow_square, range(12), workers=workers, progress=False)
        self.assertEqual(results, [x * x for x in range(12)])

    def test_empty(self):
        self.assertEqual(ordered_map(_slow_square, [], progress=False), [])

    def test_invalid_workers(self):
        with pytest.raises(ValueError):
            ordered_map(_slow_square, [1], workers=0)


class TestShardArray(chex.TestCase):
    def test_values_preserved(self):
        batch = jnp.arange(12.0).reshape(4, 3)
        chex.assert_trees_all_close(shard_array(batch), batch)

    def test_uneven_batch_untouched(self):
        batch = jnp.arange(3.0)
        self.assertIs(shard_array(batch, devices=[None, None]), batch)


if __name__ == "__main__":
    pytest.main([__file__])
