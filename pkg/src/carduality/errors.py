"""Exception and warning types raised across the package."""


class NotHermitian(ValueError):
    """Matrix is not self-adjoint within tolerance."""


class Singular(ArithmeticError):
    """Operator that must be invertible has a (numerically) nontrivial kernel."""


class RankDeficient(RuntimeError):
    """Random draw failed to produce vectors of the requested rank."""


class NotGeneric(ValueError):
    """The pair (p, q) is not in generic position."""


class NotCyclicSeparating(ValueError):
    """The Fock vacuum is not cyclic and separating for the local algebra."""


class FockDimensionError(ValueError):
    """Requested Fock space exceeds the dense-matrix cap."""


class InvalidSpace(ValueError):
    """Input does not satisfy the structural invariants of its type."""


class IllConditionedWarning(RuntimeWarning):
    """The opening ||PQ|| is so close to 1 that modular data lose accuracy."""
