"""Exception types shared across the pipeline stages."""


class PipelineError(Exception):
    """Base class for all pipeline errors."""


class ConfigError(PipelineError):
    """Configuration value out of range or unparseable."""


class EmptyDocument(PipelineError):
    """Document text is empty after whitespace trim."""


class NoTrainingData(PipelineError):
    """Scorer training corpus yielded no sequences."""


class InvalidDistribution(PipelineError):
    """Probability vector fails non-negativity or sum-to-one."""


class ContextOverflow(PipelineError):
    """Prefix exceeds the scorer's declared max context."""

    def __init__(self, message: str, position: int | None = None):
        super().__init__(message)
        self.position = position


class ScorerUnavailable(PipelineError):
    """Remote scorer unreachable after retries."""

    def __init__(self, message: str, attempts: int = 0, position: int | None = None):
        super().__init__(message)
        self.attempts = attempts
        self.position = position


class EmbedderUnavailable(PipelineError):
    """Remote embedder unreachable after retries."""

    def __init__(self, message: str, attempts: int = 0):
        super().__init__(message)
        self.attempts = attempts


class EmptyProfile(PipelineError):
    """Entropy profile has no positions."""


class PositionOutOfRange(PipelineError):
    """Anchor position outside the token sequence."""


class IndexBuildError(PipelineError):
    """Retrieval index cannot be built or loaded."""


class VerificationSkipped(PipelineError):
    """Candidate cannot be scored even after full chunk truncation."""


class EmptyDependencies(PipelineError):
    """Ordering requested for an empty dependency list."""


class SampleDiscarded(PipelineError):
    """Assembly dropped below the minimum dependency count."""
