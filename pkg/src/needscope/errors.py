"""Exception hierarchy shared across the pipeline."""


class NeedscopeError(Exception):
    """Base class for all errors raised by this package."""


class ConfigError(NeedscopeError):
    """Invalid configuration or CLI arguments (exit code 1)."""


class IngestError(NeedscopeError):
    """Input stream unreadable or otherwise unusable."""


class AttributionError(NeedscopeError):
    """Age/income resolution violated its contract (e.g. unknown period)."""


class ExtractionError(NeedscopeError):
    """Extraction engine failure after retries were exhausted."""


class SchemaValidationError(ExtractionError):
    """Engine produced a payload that does not validate against its schema.

    The raw payload is retained for debugging; nothing is silently coerced.
    """

    def __init__(self, message: str, raw_payload: object = None, post_id: str | None = None):
        super().__init__(message)
        self.raw_payload = raw_payload
        self.post_id = post_id


class ModelingError(NeedscopeError):
    """Topic-model preconditions not met (empty vocabulary, k too large...)."""


class AnalyticsError(NeedscopeError):
    """Aggregation input violated an upstream contract."""


class DependencyError(NeedscopeError):
    """A required upstream artifact is missing."""

    def __init__(self, message: str, stage: str | None = None):
        super().__init__(message)
        self.stage = stage


class StageError(NeedscopeError):
    """A pipeline stage failed (exit code 2)."""

    def __init__(self, stage: str, cause: BaseException):
        super().__init__(f"stage '{stage}' failed: {cause}")
        self.stage = stage
        self.cause = cause
