"""Domain error hierarchy.

Every error raised on purpose by this package derives from HelionError so
callers (CLI, HTTP service) can map domain failures to exit codes / status
codes without catching bare Exception.
"""


class HelionError(Exception):
    """Base class for all domain errors."""


class MalformedToken(HelionError):
    pass


class MalformedVocabulary(HelionError):
    pass


class MalformedRoutine(HelionError):
    pass


class UnknownToken(HelionError):
    """A token failed vocabulary validation; carries the offending text."""

    def __init__(self, token_text: str, context: str = ""):
        detail = f" ({context})" if context else ""
        super().__init__(f"unknown token: {token_text}{detail}")
        self.token_text = token_text


class DuplicateRoutineId(HelionError):
    pass


class EmptyRoutineSet(HelionError):
    pass


class UnknownRoutineId(HelionError):
    pass


class MalformedCorpus(HelionError):
    pass


class EmptyCorpus(HelionError):
    pass


class EmptySequence(HelionError):
    pass


class EmptyVocabulary(HelionError):
    pass


class MalformedPolicy(HelionError):
    pass


class UnknownEntity(HelionError):
    """Raised for service calls against entities missing from the registry.

    When raised mid-scenario, `report` holds the partial execution report.
    """

    def __init__(self, message: str, report=None, token_text: str | None = None):
        super().__init__(message)
        self.report = report
        self.token_text = token_text


class IllegalState(HelionError):
    """Raised for service calls with a target state the entity does not allow."""

    def __init__(self, message: str, report=None, token_text: str | None = None):
        super().__init__(message)
        self.report = report
        self.token_text = token_text


class SessionExhausted(HelionError):
    pass
