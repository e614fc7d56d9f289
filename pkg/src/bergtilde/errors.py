"""Exception types shared across the package."""


class DomainError(ValueError):
    """A point, target or parameter is incompatible with the domain."""


class NumericalFailure(ArithmeticError):
    """A computation produced a degenerate or non-finite result.

    The CLI maps this family to exit status 3.
    """


class DegenerateKernelError(NumericalFailure):
    pass


class NotPositiveDefiniteError(NumericalFailure):
    pass


class DependentTupleError(NumericalFailure):
    pass


class OptimizerError(NumericalFailure):
    def __init__(self, message, diagnostics=None):
        super().__init__(message)
        self.diagnostics = dict(diagnostics or {})
