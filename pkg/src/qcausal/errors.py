"""Exception hierarchy.

Every error carries a short machine-readable ``category`` that the command
line front end reports on failure.
"""


class QCausalError(Exception):
    category = "Error"


class TypeMismatch(QCausalError):
    category = "TypeMismatch"


class TheoryMismatch(QCausalError):
    category = "TheoryMismatch"


class WrongTheory(QCausalError):
    category = "WrongTheory"


class ShapeMismatch(QCausalError):
    category = "ShapeMismatch"


class ModelSyntaxError(QCausalError):
    """Malformed model/plan/table text; ``line`` and ``column`` are 1-based when known."""

    category = "SyntaxError"

    def __init__(self, message, line=None, column=None):
        self.line = line
        self.column = column
        if line is not None:
            message = f"line {line}, column {column}: {message}"
        super().__init__(message)


class UnknownSystem(QCausalError):
    category = "UnknownSystem"


class PortArityMismatch(QCausalError):
    category = "PortArityMismatch"


class CycleDetected(QCausalError):
    category = "CycleDetected"


class NonCausalBox(QCausalError):
    category = "NonCausalBox"


class UnknownLocus(QCausalError):
    category = "UnknownLocus"


class RankDeficientFrame(QCausalError):
    category = "RankDeficientFrame"


class MissingTable(QCausalError):
    category = "MissingTable"


class ZeroDivisor(QCausalError):
    category = "ZeroDivisor"


class DescendancyViolation(QCausalError):
    category = "DescendancyViolation"


class BadLambda(QCausalError):
    category = "BadLambda"
