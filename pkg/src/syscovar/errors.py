class SysCovarError(Exception):
    """Base class for library errors."""


class DomainError(SysCovarError, ValueError):
    """Argument outside the mathematical domain of an operation."""


class DivergenceError(SysCovarError, ArithmeticError):
    """Requested moment or tail average is infinite."""


class UnsupportedCopulaError(SysCovarError, ValueError):
    """Operation is not defined for this copula (e.g. conditioning a comonotone law on U = a)."""


class ConvergenceError(SysCovarError, ArithmeticError):
    """Root search or quadrature missed its tolerance within the iteration budget."""
