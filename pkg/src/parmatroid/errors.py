"""Exception types raised across the package."""


class MatroidError(Exception):
    pass


class DomainError(MatroidError, ValueError):
    """An element outside the live ground set, or an otherwise invalid argument."""


class BudgetExceeded(MatroidError):
    def __init__(self, size, cap):
        super().__init__(f"batch of {size} queries exceeds budget cap {cap}")
        self.size = size
        self.cap = cap


class EmptyBatch(MatroidError, ValueError):
    pass


class InsufficientSample(MatroidError):
    def __init__(self, element, found, needed):
        super().__init__(f"element {element}: {found} circuits in sample, need {needed}")
        self.element = element
        self.found = found
        self.needed = needed


class NoCircuitForElement(MatroidError):
    pass


class EmptyPeel(MatroidError):
    def __init__(self, message="peeling removed every element", partial=None, independent=False):
        super().__init__(message)
        self.partial = list(partial or [])
        self.independent = independent


class ContractionFailed(MatroidError):
    pass


class EmptyDeletion(MatroidError):
    pass


class PreconditionError(MatroidError, ValueError):
    pass
