"""Exception hierarchy shared by all modules."""


class BITError(Exception):
    pass


class InputError(BITError, ValueError):
    """Bad image, box, or map handed to an operation."""


class ParameterError(BITError, ValueError):
    pass


class FormatError(InputError):
    """Malformed sequence, ground-truth or table file."""


class NumericalError(BITError, ArithmeticError):
    """Singular division, NaN response or similar failure."""


class EvaluationMismatch(BITError, ValueError):
    """Trajectory and ground truth disagree in length."""
