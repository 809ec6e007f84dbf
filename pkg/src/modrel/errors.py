class ModrelError(Exception):
    """Base class for every error raised by modrel."""


# ------------------------------------------------------------
# Data errors (exit status 1)
# ------------------------------------------------------------
class DataError(ModrelError, ValueError):
    pass


class InvalidModel(DataError):
    def __init__(self, report):
        self.report = report
        super().__init__(f"model has {len(report.violations)} violation(s): {report.summary()}")


class UnknownModule(DataError):
    pass


class UnknownInput(DataError):
    pass


class EmptyProfile(DataError):
    pass


class EmptyLog(DataError):
    pass


class IncompleteEstimates(DataError):
    pass


# ------------------------------------------------------------
# Numerical errors (exit status 3)
# ------------------------------------------------------------
class NumericalError(ModrelError, ArithmeticError):
    pass


class SingularMatrix(NumericalError):
    pass


class DegenerateUpdate(NumericalError):
    pass


# ------------------------------------------------------------
# File format errors (exit status 2)
# ------------------------------------------------------------
class FormatError(ModrelError):
    def __init__(self, message: str, location: str | int | None = None):
        self.location = location
        if location is not None:
            message = f"{location}: {message}"
        super().__init__(message)


class ModelFileError(FormatError):
    pass


class LogFileError(FormatError):
    pass
