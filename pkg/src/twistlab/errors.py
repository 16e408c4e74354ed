"""Exception types shared across twistlab."""


class TwistlabError(Exception):
    """Base class for all library errors."""


class DomainError(TwistlabError, ValueError):
    """An input lies outside the domain of an operation."""


class ResourceError(TwistlabError, RuntimeError):
    """A request would exceed a configured resource cap."""


class ValidationError(TwistlabError, ValueError):
    """Input data is inconsistent (bad curve record, bad q-expansion record)."""


class ConfigurationError(TwistlabError, ValueError):
    """Required auxiliary data (Atkin-Lehner signs, Tamagawa numbers) is missing."""


class PrecisionError(TwistlabError, ValueError):
    """A q-expansion is too short for the requested operation."""


class IndeterminateError(TwistlabError, ValueError):
    """The data carries no information to decide the question asked."""


class FactorizationError(TwistlabError, RuntimeError):
    """An integer resisted factorization within the configured effort."""
