"""Shared exception types."""


class StructuralError(ValueError):
    """A tensor/matrix is malformed (asymmetry, wrong sparsity pattern).

    Distinct from a physical validity failure, which is reported, not raised.
    """


class DomainError(ValueError):
    """Input is outside the mathematical domain of an operation."""


class UnsupportedInputError(ValueError):
    """Input has a shape/structure the implemented formulas do not cover."""
