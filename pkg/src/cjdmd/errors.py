"""Exception types shared across the package."""


class CJDMDError(Exception):
    """Base class for all errors raised by cjdmd."""


class ContractError(CJDMDError, ValueError):
    """An argument violates a documented precondition."""


class DegenerateInputError(ContractError):
    pass


class CapacityError(ContractError):
    pass


class InsufficientDataError(ContractError):
    pass


class UndefinedMetricError(ContractError):
    pass


class NumericalError(CJDMDError, ArithmeticError):
    """A numerical routine failed (non-convergence, overflow)."""


class DivergenceError(NumericalError):
    def __init__(self, step: int, message: str | None = None):
        self.step = step
        super().__init__(message or f"rollout produced a non-finite value at step {step}")


class ModelFileError(CJDMDError):
    """Malformed or inconsistent model file."""


class ModelVersionError(ModelFileError):
    pass


class DataFormatError(CJDMDError, ValueError):
    """Malformed plate-reader CSV. ``row`` and ``column`` are 1-based."""

    def __init__(self, message: str, row: int | None = None, column: int | None = None):
        self.row = row
        self.column = column
        where = ""
        if row is not None:
            where = f" (row {row}" + (f", column {column})" if column is not None else ")")
        super().__init__(message + where)
