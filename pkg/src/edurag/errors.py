"""Exception hierarchy shared across the engine."""

from __future__ import annotations


class EngineError(Exception):
    """Base class for every classified engine failure."""

    code = "engine_error"


class ValidationError(EngineError):
    code = "validation_error"


class SchemaError(EngineError):
    code = "schema_error"


class NotFoundError(EngineError):
    code = "not_found"


class ContractError(EngineError):
    """A caller violated an operation precondition."""

    code = "contract_error"


class StateError(EngineError):
    code = "state_error"


class ParseError(EngineError):
    code = "parse_error"

    def __init__(self, message: str, offset: int | None = None, location: str | None = None):
        parts = [message]
        if offset is not None:
            parts.append(f"at byte offset {offset}")
        if location is not None:
            parts.append(f"at {location}")
        super().__init__(" ".join(parts))
        self.offset = offset
        self.location = location


class TransportError(EngineError):
    """Retryable failure talking to a remote service."""

    code = "transport_error"


class RequestError(EngineError):
    """Non-retryable rejection from a remote service (4xx)."""

    code = "request_error"

    def __init__(self, message: str, status: int | None = None):
        super().__init__(message)
        self.status = status


class ScriptedMissError(EngineError):
    code = "scripted_miss"

    def __init__(self, fingerprint: str):
        super().__init__(f"no scripted response for fingerprint {fingerprint}")
        self.fingerprint = fingerprint


class EmptyGenerationError(EngineError):
    code = "empty_generation"


class GenerationFailedError(EngineError):
    code = "generation_failed"


class MalformedAnswerError(EngineError):
    code = "malformed_answer"


class EmptyGroupError(EngineError):
    code = "empty_group"


class InFlightError(EngineError):
    code = "in_flight"
