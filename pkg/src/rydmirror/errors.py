"""
Module: rydmirror.errors
------------------------
Exceptions raised by the simulation and harness code.

Classes
-------
- `ConfigurationError`:
    Invalid, incomplete or inconsistent experiment configuration
- `BasisSizeError`:
    A pair space or blockade basis exceeds its configured cap
- `ConvergenceError`:
    A solver or optimizer exhausted its budget
"""

from beartype.typing import Any, Optional


class ConfigurationError(ValueError):
    """Raised before any solve when a config block or constant is unusable."""


class BasisSizeError(ValueError):
    """
    Description
    -----------
    Raised when a state space is larger than the caller allows.

    Attributes
    ----------
    - `size` (int):
        Dimension that was requested
    - `cap` (int):
        Configured maximum
    """

    def __init__(self, what: str, size: int, cap: int) -> None:
        self.size = size
        self.cap = cap
        super().__init__(
            f"{what} has dimension {size}, above the cap of {cap}; "
            "shrink the array or raise the cap"
        )


class ConvergenceError(RuntimeError):
    """
    Description
    -----------
    Raised when an iterative solve stops before reaching its tolerance.

    Attributes
    ----------
    - `residual` (float):
        Residual norm at the last iterate
    - `best` (Any, optional):
        Best iterate found, so callers can still report it
    """

    def __init__(self, message: str, residual: float, best: Optional[Any] = None) -> None:
        self.residual = residual
        self.best = best
        super().__init__(f"{message} (residual {residual:.3e})")
