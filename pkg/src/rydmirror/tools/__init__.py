"""
Module: rydmirror.tools
-----------------------
Utility tools shared by the array and Rydberg simulations.

Submodules
----------
- `fitting`:
    Loss functions and least-squares fits of empirical scaling constants
- `logger`:
    Package-scoped loggers and the CLI logging setup
- `optimizers`:
    Derivative-free golden-section, grid and coordinate searches for
    expensive scalar objectives
- `parallel`:
    Order-preserving worker pools for sweeps and device sharding of batches
"""

from .fitting import FitResult, create_loss_function, fit_model
from .logger import configure_logging, get_logger
from .optimizers import (SearchResult, coordinate_search,
                         golden_section_search, grid_golden_search,
                         memoize_objective)
from .parallel import ordered_map, shard_array

__all__: list[str] = [
    "FitResult",
    "create_loss_function",
    "fit_model",
    "configure_logging",
    "get_logger",
    "SearchResult",
    "coordinate_search",
    "golden_section_search",
    "grid_golden_search",
    "memoize_objective",
    "ordered_map",
    "shard_array",
]
