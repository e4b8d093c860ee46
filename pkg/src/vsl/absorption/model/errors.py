class AbsorptionError(Exception):
    """Base class of every error raised by the toolkit."""


class InvalidRoomError(AbsorptionError, ValueError):
    pass


class InfeasibleGeometryError(AbsorptionError):
    pass


class IterationCapError(AbsorptionError):
    pass


class SampleRateError(AbsorptionError, ValueError):
    pass


class UndefinedCurveError(AbsorptionError):
    pass


class InsufficientDecayError(AbsorptionError):
    pass


class ZeroSignalError(AbsorptionError):
    pass


class NonPositiveInputError(AbsorptionError, ValueError):
    pass


class EyringDomainError(AbsorptionError, ValueError):
    pass


class EmptyReferenceError(AbsorptionError):
    pass


class ShapeMismatchError(AbsorptionError, ValueError):
    pass


class DivergenceError(AbsorptionError):
    pass


class EmptyDatasetError(AbsorptionError):
    pass


class CorruptModelError(AbsorptionError):

    def __init__(self, message: str, offset: int = None):
        self.offset = offset
        super().__init__(message if offset is None else f"{message} (at byte offset {offset})")


class DatasetIOError(AbsorptionError, OSError):

    def __init__(self, message: str, path=None, offset: int = None):
        self.path = path
        self.offset = offset
        where = "" if path is None else f" [{path}" + ("" if offset is None else f" @ {offset}") + "]"
        super().__init__(f"{message}{where}")


class MisalignedInputError(AbsorptionError, ValueError):
    pass


class EmptyInputError(AbsorptionError, ValueError):
    pass


class MissingModelError(AbsorptionError):
    pass
