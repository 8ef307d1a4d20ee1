"""Free-space optical links for continuous-variable QKD: turbulence, loss, noise and key rates."""

from .errors import ConvergenceError, PhysicsDomainError

__all__ = ["ConvergenceError", "PhysicsDomainError"]
__version__ = "0.1.0"
