"""Exception types raised by the solver."""


class ArgumentError(ValueError):
    """Malformed input: wrong shape, non-unitary matrix, degenerate frame."""


class CapacityError(RuntimeError):
    """A dense expansion would exceed the term budget."""


class DomainError(ValueError):
    """A formula was evaluated outside its domain (e.g. ``r <= D``)."""


class SingularPointError(ArithmeticError):
    """A (projected) gradient or restricted Jacobian vanishes at the point."""


class BranchAmbiguityError(ArithmeticError):
    """A unitary has an eigenvalue at -1, so its principal logarithm is not defined."""


class SamplingError(RuntimeError):
    """A randomized sampler failed repeatedly (a probability-zero event in exact arithmetic)."""
