"""Exception types shared across the engine."""


class EngineError(Exception):
    """Base class for every error raised by this package."""


class PreconditionError(EngineError):
    """An operation was called with arguments that violate its contract."""


# --- gateway ---------------------------------------------------------------

class EmptyRequest(PreconditionError):
    """A completion was requested with no messages."""


class BackendError(EngineError):
    """A backend call failed permanently."""


class TransientBackendError(BackendError):
    """A backend call failed in a way that is worth retrying."""


class BackendExhausted(BackendError):
    """All retry attempts were consumed without a successful reply."""

    def __init__(self, message: str, attempts: int = 0):
        super().__init__(message)
        self.attempts = attempts


class ScriptExhausted(EngineError):
    """A scripted backend ran out of matching replies."""


class EmptyText(PreconditionError):
    """An embedding was requested for an empty string."""


class DimensionMismatch(EngineError):
    """A live embedding backend returned vectors of inconsistent dimension."""


# --- corpus / retrieval ----------------------------------------------------

class EmptyDocument(PreconditionError):
    """chunk_document was given an empty body."""


class EmptyStore(PreconditionError):
    """retrieve was called against a store with no chunks."""


# --- sampling --------------------------------------------------------------

class MissingEmbedding(PreconditionError):
    """A duplicate check needs embeddings that were never attached."""


class TargetUnreachable(EngineError):
    """The divergent phase exhausted its batch budget short of the target.

    Carries the partial pool and stats so callers can persist what exists.
    """

    def __init__(self, message: str, pool=None, stats=None):
        super().__init__(message)
        self.pool = pool
        self.stats = stats


class JudgeParseFailure(EngineError):
    """A judge reply had no usable score after all re-asks."""


# --- dialog ----------------------------------------------------------------

class DialogAborted(EngineError):
    """A dialog failed partway; the partial transcript is preserved."""

    def __init__(self, message: str, partial=None):
        super().__init__(message)
        self.partial = partial


class DistillParseFailure(EngineError):
    """Distillation never produced the required structure."""


# --- protocols -------------------------------------------------------------

class UnknownIdeaId(EngineError):
    """A selection referenced an idea id outside the pool."""


class QAUnderflow(EngineError):
    """Could not collect the requested number of distinct questions."""


class PartialProcedure(EngineError):
    """The distilled procedure text could not be parsed into sections.

    The raw text is kept so it can still be persisted for human review.
    """

    def __init__(self, message: str, raw: str = ""):
        super().__init__(message)
        self.raw = raw


class AssignmentParseFailure(EngineError):
    """A category assignment reply did not name a known label."""


class LabelProposalFailure(EngineError):
    """The judge never proposed an acceptable label set."""


# --- evaluation ------------------------------------------------------------

class KeywordParseFailure(EngineError):
    """Keyword extraction stayed out of the 3-5 range after re-asks."""


class ScholarUnavailable(EngineError):
    """The literature search backend could not serve the query."""


class MetricMismatch(PreconditionError):
    """compare_sets was given score sets over different metrics."""


# --- runs / service --------------------------------------------------------

class ValidationError(EngineError):
    """A request failed schema validation; carries field-level messages."""

    def __init__(self, errors: list):
        self.errors = list(errors)
        super().__init__("; ".join(f"{f}: {m}" for f, m in self.errors))


class NotFound(EngineError):
    """No run with the given id exists."""


class WrongState(EngineError):
    """The run is not in a state that allows the requested operation."""
