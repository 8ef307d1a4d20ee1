"""Exception types shared across the package."""


class PhysicsDomainError(ValueError):
    """An input lies outside the validity domain of a physical formula."""


class ConvergenceError(RuntimeError):
    """Raised when a numerical procedure cannot meet its tolerance.

    The best available estimate and its error bound are attached so callers
    can decide whether the result is still usable.
    """

    def __init__(self, message: str, estimate: float = float("nan"), error: float = float("nan")):
        super().__init__(f"{message} (estimate={estimate!r}, error={error!r})")
        self.estimate = estimate
        self.error = error
