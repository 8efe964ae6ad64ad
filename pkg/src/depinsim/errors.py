"""Exception types raised across the package."""


class DepinError(Exception):
    """Base class for domain errors."""


class InvalidSpec(DepinError):
    def __init__(self, violations):
        self.violations = list(violations)
        super().__init__("invalid job spec: " + "; ".join(self.violations))


class InsufficientBalance(DepinError):
    pass


class DuplicateLock(DepinError):
    pass


class InsufficientLocked(DepinError):
    pass


class UnknownJob(DepinError):
    pass


class WrongState(DepinError):
    pass


class NotProposed(DepinError):
    pass


class AlreadyMatched(DepinError):
    pass


class WrongProcessor(DepinError):
    pass


class DuplicateSlot(DepinError):
    pass


class SlotOutOfRange(DepinError):
    pass


class InvalidScenario(DepinError):
    pass


class EmptySampleSet(DepinError):
    pass


class TooFewPlatforms(DepinError):
    pass


class InvariantViolation(RuntimeError):
    """An internal consistency check failed; indicates a bug, not bad input."""
