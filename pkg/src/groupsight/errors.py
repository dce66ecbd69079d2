"""Exception taxonomy shared across the package."""

from __future__ import annotations


class GroupsightError(Exception):
    """Base class for all package-specific failures."""


class ArtifactValidationError(GroupsightError):
    """An artifact violated its structural contract.

    Carries the individual validation messages and, when the artifact came
    from a provider, the raw provider output for audit.
    """

    def __init__(self, message: str, errors: list[str] | None = None, raw_text: str | None = None):
        super().__init__(message)
        self.errors = list(errors or [])
        self.raw_text = raw_text


class GenerationFailedError(GroupsightError):
    """Provider transport failure that persisted through the retry budget."""


class InvalidArtifactError(ArtifactValidationError):
    """Provider output failed validation even after the repair round-trip."""


class ProviderTransportError(GroupsightError):
    """A single provider call failed at the transport level (retryable)."""


class MockScriptError(GroupsightError):
    """The deterministic mock provider received a request it has no script for."""


class TextTooLongError(GroupsightError):
    """Text exceeds the embedding provider's context window."""


class EmbedFailedError(GroupsightError):
    """Embedding provider failure."""


class UndefinedStatisticError(GroupsightError):
    """A statistic is undefined for the given data (e.g. zero expected disagreement)."""


class AgentFailedError(GroupsightError):
    """Agent run aborted on a provider failure; carries the partial trace."""

    def __init__(self, message: str, partial_trace=None):
        super().__init__(message)
        self.partial_trace = partial_trace


class StoreError(GroupsightError):
    """Persistence-layer failure (missing discussion, parse error, ...)."""
