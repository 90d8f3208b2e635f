"""
Module: tools.parallel
---------------------
Parallel processing utilities for parameter sweeps and Monte Carlo batches.

Sweep points in this package are expensive, independent solves. They are
scheduled on a thread pool (JAX releases the GIL inside compiled kernels)
and the results are always returned in input order, so output files do not
depend on completion order. Batched array work, such as the Monte Carlo
configuration batches, can additionally be sharded across devices.

Functions
---------
- `ordered_map`:
    Maps a function over sweep points on a worker pool, preserving order
- `shard_array`:
    Shards an array along its leading axis across the available devices

Notes
-----
`shard_array` falls back to returning the input untouched when the leading
axis does not divide evenly over the devices, which is the usual situation on
a single-CPU workstation.
"""

from concurrent.futures import ThreadPoolExecutor

import jax
from beartype.typing import Callable, Iterable, List, Optional, Sequence, TypeVar
from jax.sharding import Mesh, NamedSharding, PartitionSpec
from jaxtyping import Array
from tqdm.auto import tqdm

from .logger import get_logger

logger = get_logger(__name__)

T = TypeVar("T")
R = TypeVar("R")


def ordered_map(
    fn: Callable[[T], R],
    items: Iterable[T],
    workers: int = 1,
    description: Optional[str] = None,
    progress: bool = True,
) -> List[R]:
    """
    Description
    -----------
    Apply `fn` to every sweep point and return the results in the order of
    `items`, regardless of the order in which workers finish.

    Parameters
    ----------
    - `fn` (Callable[[T], R]):
        Function evaluated per sweep point
    - `items` (Iterable[T]):
        Sweep points
    - `workers` (int):
        Number of worker threads. 1 runs serially in the calling thread.
    - `description` (str, optional):
        Label of the progress bar
    - `progress` (bool):
        Show a tqdm progress bar. Default is True.

    Returns
    -------
    - `results` (List[R]):
        `fn(item)` for each item, in input order

    Flow
    ----
    - Materialize the sweep points
    - Run serially when a single worker is requested
    - Otherwise submit to a ThreadPoolExecutor and use its order-preserving map
    - Wrap either path in a tqdm progress bar
    """
    points = list(items)
    if workers < 1:
        raise ValueError(f"workers must be >= 1, got {workers}")
    logger.debug("ordered_map over %d points with %d workers", len(points), workers)
    bar = tqdm(total=len(points), desc=description, disable=not progress, leave=False)
    results: List[R] = []
    if workers == 1:
        for point in points:
            results.append(fn(point))
            bar.update(1)
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            for result in pool.map(fn, points):
                results.append(result)
                bar.update(1)
    bar.close()
    return results


def shard_array(
    input_array: Array,
    devices: Optional[Sequence[jax.Device]] = None,
) -> Array:
    """
    Description
    -----------
    Shards an array along its leading (batch) axis across devices.

    Parameters
    ----------
    - `input_array` (Array):
        Batched array, for example a stack of PRNG keys or blockade masks
    - `devices` (Sequence[jax.Device], optional):
        The devices to shard across. If None, uses all available devices

    Returns
    -------
    - `sharded_array` (Array):
        The array placed with a NamedSharding over the batch axis, or the
        input itself when sharding is not possible

    Flow
    ----
    - Get all available devices if none specified
    - Return the input unchanged for one device or an uneven batch
    - Create a one-axis mesh and a PartitionSpec on the leading axis
    - Place the array on devices using the sharding configuration
    """
    if devices is None:
        devices = jax.devices()
    if len(devices) < 2 or input_array.shape[0] % len(devices) != 0:
        return input_array
    mesh = Mesh(devices, ("batch",))
    pspec = PartitionSpec("batch", *([None] * (input_array.ndim - 1)))
    sharding = NamedSharding(mesh, pspec)
    with mesh:
        sharded_array = jax.device_put(input_array, sharding)
    return sharded_array
