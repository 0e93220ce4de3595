class VfnError(Exception):
    """Base class for every error raised by this package."""


class ShapeError(VfnError, ValueError):
    pass


class NonFiniteError(VfnError, ArithmeticError):
    pass


class NonDeterministicError(VfnError, RuntimeError):
    pass


class DegenerateFrameError(VfnError, ValueError):
    def __init__(self, message: str, residue_index: int | None = None) -> None:
        super().__init__(message)
        self.residue_index = residue_index


class PdbParseError(VfnError, ValueError):
    def __init__(self, message: str, line_number: int | None = None) -> None:
        if line_number is not None:
            message = f"line {line_number}: {message}"
        super().__init__(message)
        self.line_number = line_number


class DatasetFormatError(VfnError, ValueError):
    def __init__(self, message: str, line_number: int | None = None) -> None:
        if line_number is not None:
            message = f"line {line_number}: {message}"
        super().__init__(message)
        self.line_number = line_number


class ConfigError(VfnError, ValueError):
    pass


class CheckpointError(VfnError, ValueError):
    pass


class TrainingDivergedError(VfnError, RuntimeError):
    def __init__(self, message: str, protein: str | None = None) -> None:
        super().__init__(message)
        self.protein = protein


class StructureError(VfnError, ValueError):
    pass


class InvalidTransformError(VfnError, ValueError):
    pass


class LabelError(VfnError, ValueError):
    pass
