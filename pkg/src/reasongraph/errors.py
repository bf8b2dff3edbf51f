"""Exception hierarchy shared across the package."""

from __future__ import annotations


class ReasonGraphError(Exception):
    """Base class for all errors raised by this package."""


class UnknownMethodError(ReasonGraphError):
    """A method name does not match any of the six supported methods."""


class EmptyQuestionError(ReasonGraphError):
    """A prompt was requested for an empty question."""


class NoSelectionFoundError(ReasonGraphError):
    """Meta-selection output contains no <selected_method> element."""


class CycleError(ReasonGraphError):
    """The trace graph contains a cycle."""


class MalformedTraceError(ReasonGraphError):
    """A serialized trace document cannot be decoded."""


class NoElementsError(ReasonGraphError):
    """Raw model output contains no elements of the method's grammar.

    diagnostics carries whatever the scanner still reported, e.g. an
    unclosed-tag warning for "<step>never closed".
    """

    def __init__(self, message: str, diagnostics: list | None = None):
        super().__init__(message)
        self.diagnostics = diagnostics or []


class WrongMethodError(ReasonGraphError):
    """An analysis was requested for a trace of the wrong method."""


class MissingScoreError(ReasonGraphError):
    """A beam candidate node has no score."""

    def __init__(self, node_id: str):
        super().__init__(f"candidate node {node_id!r} has no score")
        self.node_id = node_id


class NoCandidatePathsError(ReasonGraphError):
    """A beam trace has no root-to-leaf candidate path."""


class NoChainAnswersError(ReasonGraphError):
    """A self-consistency trace has no chain answer nodes."""


class InvalidConfigError(ReasonGraphError):
    """A configuration value violates its invariants."""


class GatewayError(ReasonGraphError):
    """Base class for provider gateway failures."""


class MalformedConfigError(GatewayError):
    """The provider configuration document cannot be parsed or validated."""


class DuplicateProviderIdError(GatewayError):
    """Two providers in one configuration share an id."""


class UnknownProviderError(GatewayError):
    """A request names a provider that is not in the registry."""


class UnknownModelError(GatewayError):
    """A request names a model the provider does not list."""


class UnauthorizedError(GatewayError):
    """The provider rejected our credentials, or none are configured."""


class RateLimitedError(GatewayError):
    """The provider kept returning 429 past the retry budget."""


class ProviderError(GatewayError):
    """The provider kept failing (5xx or network error) past the retry budget."""


class ProviderTimeoutError(GatewayError):
    """Every attempt timed out."""


class MalformedProviderResponseError(GatewayError):
    """The provider responded 200 but the text field is missing."""
