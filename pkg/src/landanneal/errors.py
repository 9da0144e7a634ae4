"""Exception types shared across the package."""

from __future__ import annotations


class DimensionError(ValueError):
    """Input vector does not match the dimension of the potential."""


class UnsupportedError(RuntimeError):
    """Operation requested on an object that lacks the needed metadata."""


class ConfigError(ValueError):
    """Malformed or unknown configuration key / value."""


class NumericError(ArithmeticError):
    """Base class for numerical failures (quadrature, underflow, divergence)."""


class QuadratureError(NumericError):
    def __init__(self, message: str, partial: float):
        super().__init__(f"{message} (partial estimate {partial!r})")
        self.partial = partial


class DensityUnderflowError(NumericError):
    pass


class DivergenceError(NumericError):
    def __init__(self, step: int, last_checkpoint=None):
        super().__init__(f"trajectory diverged at step {step}")
        self.step = step
        self.last_checkpoint = last_checkpoint
