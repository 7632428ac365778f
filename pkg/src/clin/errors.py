"""Exception hierarchy shared across the package."""

from __future__ import annotations


class ClinError(Exception):
    """Base class for all errors raised by this package."""


# memory language
class MalformedAbstraction(ClinError, ValueError):
    """A memory line has no relation phrase or an empty side."""


class EmptyMemory(MalformedAbstraction):
    """A strict parse produced zero abstractions."""


class NoEpisodes(ClinError, ValueError):
    """Crucial-memory selection or generalization got no past episodes."""


# gateway
class PromptTooLong(ClinError):
    """The prompt exceeds the token budget even with an empty trace."""


class MissingNewTask(ClinError, ValueError):
    """A generalization prompt was requested without a new task."""


class OutOfRange(ClinError, ValueError):
    """A score outside 0..100 was given to reward_to_feedback."""


class BackendError(ClinError):
    """Base for model-backend failures."""


class BackendExhausted(BackendError):
    """The scripted backend has no rule matching the request."""


class TransportError(BackendError):
    """The live backend failed after all retries."""


class AuthError(BackendError):
    """The live backend rejected or lacks a credential."""


# agent
class UnparseableResponse(ClinError):
    """A model completion does not follow the action contract."""


# grounding
class EmptyActionSpace(ClinError, ValueError):
    """Grounding was asked to match against zero admissible actions."""


class NeedsRefinement(ClinError):
    """No admissible action is similar enough to the candidate."""

    def __init__(self, candidate: str, best_action: str | None, score: float):
        self.candidate = candidate
        self.best_action = best_action
        self.score = score
        super().__init__(
            f"candidate {candidate!r} best matches {best_action!r} at {score:.3f}"
        )


class GroundingFailure(ClinError):
    """Refinement ran out of tries without producing an admissible action."""

    def __init__(self, candidate: str, tries: int):
        self.candidate = candidate
        self.tries = tries
        super().__init__(f"no admissible action after {tries} tries (last {candidate!r})")


# world
class InvalidConfig(ClinError, ValueError):
    """A world or task configuration fails validation."""


class Unsolvable(ClinError):
    """The oracle solver found no winning action sequence."""


# harness
class ConfigError(ClinError, ValueError):
    """A run configuration is invalid; ``path`` names the offending field."""

    def __init__(self, path: str, message: str):
        self.path = path
        super().__init__(f"{path}: {message}")


class TraceFormatError(ClinError, ValueError):
    """A trace file cannot be parsed; ``line`` is 1-based."""

    def __init__(self, line: int, message: str):
        self.line = line
        super().__init__(f"line {line}: {message}")


class DivergenceAt(ClinError):
    """Replay produced a different observation or score than recorded."""

    def __init__(self, step: int, trial: int, t: int, field: str, expected, actual):
        self.step = step
        self.trial = trial
        self.t = t
        self.field = field
        self.expected = expected
        self.actual = actual
        super().__init__(
            f"divergence at step {step} (trial {trial}, t={t}) in {field}: "
            f"recorded {expected!r}, replayed {actual!r}"
        )


class EmptyInput(ClinError, ValueError):
    """Metrics were requested over directories holding no episode records."""
