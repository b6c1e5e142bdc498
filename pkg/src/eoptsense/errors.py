"""Exception types shared across the package."""


class InvalidArgumentError(ValueError):
    pass


class CapacityError(RuntimeError):
    """Raised when an exact enumeration would exceed the subset cap."""

    def __init__(self, count, cap):
        super().__init__(f"enumeration of {count} subsets exceeds cap of {cap}")
        self.count = count
        self.cap = cap


class DegenerateDistributionError(ValueError):
    """All subset weights are zero, so no distribution can be normalized."""


class RankDeficiencyError(ArithmeticError):
    pass


class ConfigError(ValueError):
    pass
