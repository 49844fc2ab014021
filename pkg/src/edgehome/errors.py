"""Exception types shared across the package.

Every failure mode that callers are expected to branch on gets its own
class; the class name doubles as the error-class label used in metrics
and HTTP error bodies.
"""


class EdgeHomeError(Exception):
    """Base class for all package errors."""

    def __init__(self, message: str = ""):
        super().__init__(message)
        self.message = message

    @property
    def error_class(self) -> str:
        return type(self).__name__


# -- domain model ------------------------------------------------------------

class MalformedEntityId(EdgeHomeError):
    pass


class DuplicateDevice(EdgeHomeError):
    pass


class DuplicateService(EdgeHomeError):
    pass


class IllegalState(EdgeHomeError):
    pass


class UnknownService(EdgeHomeError):
    pass


class UnknownDevice(EdgeHomeError):
    pass


class DomainMismatch(EdgeHomeError):
    pass


class MissingParam(EdgeHomeError):
    pass


class UnexpectedParam(EdgeHomeError):
    pass


# -- prompt codec ------------------------------------------------------------

class EmptyContext(EdgeHomeError):
    pass


class EmptyUtterance(EdgeHomeError):
    pass


class MissingSection(EdgeHomeError):
    pass


class MalformedServiceList(EdgeHomeError):
    pass


class MalformedDeviceLine(EdgeHomeError):
    def __init__(self, message: str, line_number: int):
        super().__init__(message)
        self.line_number = line_number


# -- assistant output parsing ------------------------------------------------

class UnterminatedFence(EdgeHomeError):
    pass


class MalformedJson(EdgeHomeError):
    pass


class MissingField(EdgeHomeError):
    def __init__(self, field: str):
        super().__init__(f"required field missing: {field}")
        self.field = field


# -- simulator ---------------------------------------------------------------

class UnknownDomain(EdgeHomeError):
    pass


class StaleAction(EdgeHomeError):
    pass


# -- inference backends ------------------------------------------------------

class BackendUnavailable(EdgeHomeError):
    pass


class GenerationTimeout(EdgeHomeError):
    pass


class ContextOverflow(EdgeHomeError):
    pass


class ModelNotFound(EdgeHomeError):
    pass


class OutOfMemoryBudget(EdgeHomeError):
    pass


# -- baseline classifier -----------------------------------------------------

class EmptyCorpus(EdgeHomeError):
    pass


class DegenerateLabels(EdgeHomeError):
    pass


# -- datasets and evaluation -------------------------------------------------

class UnreadableFile(EdgeHomeError):
    pass


class UnwritableFile(EdgeHomeError):
    pass


class SchemaViolation(EdgeHomeError):
    def __init__(self, message: str, index: int = -1):
        super().__init__(message)
        self.index = index


class InsufficientClassSize(EdgeHomeError):
    pass


class EmptyText(EdgeHomeError):
    pass


# -- assistant service -------------------------------------------------------

class UnknownSession(EdgeHomeError):
    pass


class InvalidHomeConfig(EdgeHomeError):
    pass
