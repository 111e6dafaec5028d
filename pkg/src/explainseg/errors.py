"""Exception types shared across the package.

The CLI maps these onto exit codes: corpus/config problems exit 2,
backend failures exit 3, mapping parse failures exit 4.
"""


class ExplainsegError(Exception):
    """Base class for all package errors."""


# --- corpus / configuration -------------------------------------------------

class CorpusError(ExplainsegError):
    """A question bank, response file, or label file is invalid."""


class MissingField(CorpusError):
    def __init__(self, field: str, path: str = ""):
        self.field = field
        self.path = path
        where = f" in {path}" if path else ""
        super().__init__(f"missing required field '{field}'{where}")


class BadLineIndex(CorpusError):
    def __init__(self, field: str, detail: str, path: str = ""):
        self.field = field
        where = f" in {path}" if path else ""
        super().__init__(f"bad line index for '{field}'{where}: {detail}")


class NoFewShot(CorpusError):
    def __init__(self, detail: str, path: str = ""):
        where = f" in {path}" if path else ""
        super().__init__(f"few-shot examples invalid{where}: {detail}")


class InvalidField(CorpusError):
    def __init__(self, field: str, detail: str, path: str = ""):
        self.field = field
        where = f" in {path}" if path else ""
        super().__init__(f"invalid value for '{field}'{where}: {detail}")


class BadLabel(CorpusError):
    def __init__(self, label: str, where: str = ""):
        self.label = label
        at = f" at {where}" if where else ""
        super().__init__(f"unknown label string {label!r}{at}")


class DuplicateResponseId(CorpusError):
    def __init__(self, response_id: str):
        self.response_id = response_id
        super().__init__(f"duplicate response_id {response_id!r}")


class EmptyResponse(ExplainsegError):
    """A segmentation request was built from an empty explanation."""


class BadThreshold(ExplainsegError):
    def __init__(self, threshold: int):
        self.threshold = threshold
        super().__init__(f"classification threshold must be >= 1, got {threshold}")


# --- backend ----------------------------------------------------------------

class BackendError(ExplainsegError):
    """Base class for completion-backend failures."""


class TransportError(BackendError):
    """Network or server failure; retried with backoff."""


class RateLimited(BackendError):
    """Server asked us to slow down; retried, honoring retry-after."""

    def __init__(self, message: str, retry_after: float | None = None):
        self.retry_after = retry_after
        super().__init__(message)


class SchemaRefused(BackendError):
    """Backend could not satisfy the output schema; never retried."""


class Exhausted(BackendError):
    """All retry attempts spent without a successful completion."""


class FixtureMissing(BackendError):
    """Mock backend has no canned reply for this request."""


# --- mapping parse ----------------------------------------------------------

class MappingParseError(ExplainsegError):
    """Base class for raw mapping text that cannot be parsed."""


class MalformedJson(MappingParseError):
    def __init__(self, detail: str, position: int):
        self.position = position
        super().__init__(f"malformed mapping JSON at byte {position}: {detail}")


class SchemaViolation(MappingParseError):
    def __init__(self, path: str, detail: str):
        self.path = path
        super().__init__(f"mapping JSON violates schema at {path}: {detail}")


# --- evaluation -------------------------------------------------------------

class EvaluationError(ExplainsegError):
    """Base class for evaluation-stage failures."""


class EmptyMatrix(EvaluationError):
    """Metrics requested on a confusion matrix with zero observations."""


class EmptyAfterFilter(EvaluationError):
    """No usable (label, prediction) pairs remain after filtering."""


class MissingLabel(EvaluationError):
    def __init__(self, response_id: str):
        self.response_id = response_id
        super().__init__(f"no human label for response_id {response_id!r}")
