"""
Module: tools.optimizers
-----------------------
Derivative-free minimizers for expensive scalar objectives.

Every objective in this package is a full scattering or master-equation solve,
so evaluations are counted, cached and logged rather than differentiated.
The golden-section search and its grid-seeded variant are used for one
dimensional waist optimizations; the coordinate search refines two waist
parameters jointly.

Classes
-------
- `SearchResult`:
    Outcome of a minimization (argmin, minimum, evaluation count, history)

Functions
---------
- `memoize_objective`:
    Caches an objective on rounded arguments
- `golden_section_search`:
    Golden-section minimization of a unimodal function on a bracket
- `grid_golden_search`:
    Coarse grid scan followed by golden-section refinement around the best point
- `coordinate_search`:
    Alternating golden-section sweeps over the coordinates of a small vector

Notes
-----
The objectives return plain floats and are evaluated eagerly. None of these
routines are traced by JAX.
"""

import math

import numpy as np
from beartype import beartype
from beartype.typing import Callable, Dict, List, NamedTuple, Sequence, Tuple

from .logger import get_logger

logger = get_logger(__name__)

INV_PHI: float = (math.sqrt(5.0) - 1.0) / 2.0
INV_PHI_SQUARE: float = (3.0 - math.sqrt(5.0)) / 2.0


class SearchResult(NamedTuple):
    """
    Description
    -----------
    Outcome of a derivative-free minimization.

    Attributes
    ----------
    - `x` (Tuple[float, ...]):
        Location of the best evaluated point
    - `fun` (float):
        Objective value at `x`
    - `n_evals` (int):
        Number of objective evaluations, cache hits excluded
    - `history` (Tuple[Tuple[Tuple[float, ...], float], ...]):
        Every evaluated point with its value, in evaluation order
    """

    x: Tuple[float, ...]
    fun: float
    n_evals: int
    history: Tuple[Tuple[Tuple[float, ...], float], ...]


class _Tracker:
    """Records evaluations and keeps the running best."""

    def __init__(self, objective: Callable[..., float]) -> None:
        self.objective = objective
        self.history: List[Tuple[Tuple[float, ...], float]] = []
        self.best_x: Tuple[float, ...] = ()
        self.best_f: float = math.inf

    def __call__(self, *x: float) -> float:
        value = float(self.objective(*x))
        self.history.append((tuple(float(v) for v in x), value))
        if value < self.best_f or not self.best_x:
            self.best_f = value
            self.best_x = tuple(float(v) for v in x)
        return value

    def result(self) -> SearchResult:
        return SearchResult(
            x=self.best_x,
            fun=self.best_f,
            n_evals=len(self.history),
            history=tuple(self.history),
        )


@beartype
def memoize_objective(
    objective: Callable[..., float],
    decimals: int = 10,
) -> Callable[..., float]:
    """
    Description
    -----------
    Wrap an objective with a cache keyed on its arguments rounded to
    `decimals` places. Golden-section and coordinate searches revisit
    points, and each revisit would otherwise cost a full solve.

    Parameters
    ----------
    - `objective` (Callable[..., float]):
        Function of one or more floats
    - `decimals` (int):
        Rounding used for the cache key. Default is 10.

    Returns
    -------
    - `cached` (Callable[..., float]):
        The cached objective. The cache is exposed as `cached.cache`.
    """
    cache: Dict[Tuple[float, ...], float] = {}

    def cached(*x: float) -> float:
        key = tuple(round(float(v), decimals) for v in x)
        if key not in cache:
            cache[key] = float(objective(*x))
        return cache[key]

    cached.cache = cache  # type: ignore[attr-defined]
    return cached


@beartype
def golden_section_search(
    objective: Callable[[float], float],
    lower: float,
    upper: float,
    tol: float = 1e-3,
    max_evals: int = 60,
) -> SearchResult:
    """
    Description
    -----------
    Golden-section minimization of a function with a single local minimum
    in [lower, upper].

    Parameters
    ----------
    - `objective` (Callable[[float], float]):
        Scalar objective
    - `lower` (float):
        Lower end of the bracket
    - `upper` (float):
        Upper end of the bracket
    - `tol` (float):
        Final bracket width. Default is 1e-3.
    - `max_evals` (int):
        Hard limit on evaluations. Default is 60.

    Returns
    -------
    - `result` (SearchResult):
        Best evaluated point inside the bracket

    Flow
    ----
    - Order the bracket and return its midpoint if it is already narrow
    - Place the two interior golden points
    - Shrink the bracket towards the lower of the two values until the
      width falls below `tol` or the evaluation budget is spent
    - Return the best point seen
    """
    if tol <= 0:
        raise ValueError(f"tol must be positive, got {tol}")
    track = _Tracker(objective)
    a, b = min(lower, upper), max(lower, upper)
    h = b - a
    if h <= tol:
        track(0.5 * (a + b))
        return track.result()
    n_steps = int(math.ceil(math.log(tol / h) / math.log(INV_PHI)))
    n_steps = max(1, min(n_steps, max_evals - 1))
    c = a + INV_PHI_SQUARE * h
    d = a + INV_PHI * h
    yc = track(c)
    yd = track(d)
    for _ in range(n_steps - 1):
        if yc < yd:
            b, d, yd = d, c, yc
            h = INV_PHI * h
            c = a + INV_PHI_SQUARE * h
            yc = track(c)
        else:
            a, c, yc = c, d, yd
            h = INV_PHI * h
            d = a + INV_PHI * h
            yd = track(d)
    result = track.result()
    logger.debug(
        "golden section: x=%.6g f=%.6g after %d evaluations",
        result.x[0],
        result.fun,
        result.n_evals,
    )
    return result


@beartype
def grid_golden_search(
    objective: Callable[[float], float],
    lower: float,
    upper: float,
    n_grid: int = 9,
    tol: float = 1e-3,
    max_evals: int = 60,
) -> SearchResult:
    """
    Description
    -----------
    Scan a uniform grid, then refine with a golden-section search on the
    two grid cells around the best grid point. This tolerates objectives
    that are only unimodal near their minimum.

    Parameters
    ----------
    - `objective` (Callable[[float], float]):
        Scalar objective
    - `lower` (float):
        Lower end of the search interval
    - `upper` (float):
        Upper end of the search interval
    - `n_grid` (int):
        Number of grid points, at least 3. Default is 9.
    - `tol` (float):
        Final bracket width of the refinement. Default is 1e-3.
    - `max_evals` (int):
        Evaluation budget of the refinement. Default is 60.

    Returns
    -------
    - `result` (SearchResult):
        Best point over the grid and the refinement, with the merged history
    """
    if n_grid < 3:
        raise ValueError(f"n_grid must be at least 3, got {n_grid}")
    grid = np.linspace(lower, upper, n_grid)
    track = _Tracker(objective)
    values = [track(float(x)) for x in grid]
    best = int(np.argmin(values))
    lo = float(grid[max(best - 1, 0)])
    hi = float(grid[min(best + 1, n_grid - 1)])
    golden_section_search(track, lo, hi, tol=tol, max_evals=max_evals)
    return track.result()


@beartype
def coordinate_search(
    objective: Callable[..., float],
    start: Sequence[float],
    bounds: Sequence[Tuple[float, float]],
    tol: float = 1e-3,
    max_sweeps: int = 6,
    max_evals_per_line: int = 30,
) -> SearchResult:
    """
    Description
    -----------
    Minimize a function of a few bounded variables by alternating
    golden-section line searches along each coordinate.

    Parameters
    ----------
    - `objective` (Callable[..., float]):
        Objective taking one float per coordinate
    - `start` (Sequence[float]):
        Starting point
    - `bounds` (Sequence[Tuple[float, float]]):
        (lower, upper) per coordinate
    - `tol` (float):
        Line-search tolerance; the sweep stops once no coordinate moves by
        more than this. Default is 1e-3.
    - `max_sweeps` (int):
        Maximum number of full sweeps. Default is 6.
    - `max_evals_per_line` (int):
        Evaluation budget of each line search. Default is 30.

    Returns
    -------
    - `result` (SearchResult):
        Best point seen and the full history
    """
    if len(start) != len(bounds):
        raise ValueError("start and bounds must have the same length")
    track = _Tracker(objective)
    x = [float(min(max(v, lo), hi)) for v, (lo, hi) in zip(start, bounds)]
    track(*x)
    for sweep in range(max_sweeps):
        moved = 0.0
        for axis, (lo, hi) in enumerate(bounds):

            def line(value: float, axis: int = axis) -> float:
                point = list(x)
                point[axis] = value
                return track(*point)

            step = golden_section_search(line, lo, hi, tol=tol, max_evals=max_evals_per_line)
            candidate = step.x[0]
            if step.fun <= track.best_f:
                moved = max(moved, abs(candidate - x[axis]))
                x[axis] = candidate
        logger.debug("coordinate sweep %d: x=%s f=%.6g", sweep, x, track.best_f)
        if moved <= tol:
            break
    return track.result()
