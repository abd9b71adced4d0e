"""Exception hierarchy shared by all cpm modules."""


class CPMError(Exception):
    """Base class for all errors raised by cpm."""


class ParseError(CPMError, ValueError):
    """A CSV file could not be read into a dataset."""

    def __init__(self, message, row=None, column=None):
        self.row = row
        self.column = column
        where = []
        if row is not None:
            where.append(f"row {row}")
        if column is not None:
            where.append(f"column {column}")
        if where:
            message = f"{message} ({', '.join(where)})"
        super().__init__(message)


class InvalidParameterError(CPMError, ValueError):
    """A parameter is outside its admissible range."""


class InvalidGeometryError(InvalidParameterError):
    """Generator parameters describe an impossible configuration."""


class ContractError(CPMError, ValueError):
    """Inputs violate a documented precondition (shape, sortedness, labels)."""


class InsufficientDataError(CPMError, ValueError):
    """Too few samples to fit a statistic reliably."""


class DegenerateDataError(CPMError, ValueError):
    """Input data carries no usable scale information (e.g. all distances zero)."""


class UndefinedCorrelationError(CPMError, ValueError):
    """A rank correlation is undefined because one column is constant."""


class OptimizationDivergedError(CPMError, ArithmeticError):
    """The embedding objective became non-finite."""

    def __init__(self, message, iteration):
        self.iteration = iteration
        super().__init__(f"{message} at iteration {iteration}")
