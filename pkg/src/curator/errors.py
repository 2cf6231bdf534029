"""Domain error hierarchy.

Every error carries a stable ``code`` string that the CLI prints as
``error: <Code>: <message>`` and the HTTP service returns in JSON bodies.
"""


class CuratorError(Exception):
    """Base class for all domain errors."""

    code = "CuratorError"

    def __init__(self, message: str = ""):
        super().__init__(message or self.code)
        self.message = message or self.code


class UnresolvedReference(CuratorError):
    code = "UnresolvedReference"


class UnknownPhase(CuratorError):
    code = "UnknownPhase"


class KeyNotFound(CuratorError):
    code = "KeyNotFound"


class ActionMismatch(CuratorError):
    code = "ActionMismatch"


class AlreadyInitialized(CuratorError):
    code = "AlreadyInitialized"


class SourceUnavailable(CuratorError):
    code = "SourceUnavailable"


class CorruptObject(CuratorError):
    code = "CorruptObject"


class PathConflict(CuratorError):
    code = "PathConflict"


class PathNotFound(CuratorError):
    code = "PathNotFound"


class UnknownCommit(CuratorError):
    code = "UnknownCommit"


class NothingToCommit(CuratorError):
    code = "NothingToCommit"


class GateNotPassed(CuratorError):
    code = "GateNotPassed"


class DuplicateBranch(CuratorError):
    code = "DuplicateBranch"


class UnknownBranch(CuratorError):
    code = "UnknownBranch"


class UnresolvedConflict(CuratorError):
    code = "UnresolvedConflict"


class ProtectedBranch(CuratorError):
    code = "ProtectedBranch"


class PhaseHasReleases(CuratorError):
    code = "PhaseHasReleases"


class DuplicateTag(CuratorError):
    code = "DuplicateTag"


class EmptyGroup(CuratorError):
    code = "EmptyGroup"


class GroupTooSmall(CuratorError):
    code = "GroupTooSmall"


class MissingBallot(CuratorError):
    code = "MissingBallot"


class QuorumNotMet(CuratorError):
    code = "QuorumNotMet"


class RoundClosed(CuratorError):
    code = "RoundClosed"


class VoterNotInGroup(CuratorError):
    code = "VoterNotInGroup"


class PrefOutOfRange(CuratorError):
    code = "PrefOutOfRange"


class UnknownSubject(CuratorError):
    code = "UnknownSubject"


class UnknownRound(CuratorError):
    code = "UnknownRound"


class UnknownResearcher(CuratorError):
    code = "UnknownResearcher"


class InvalidPhaseConfig(CuratorError):
    code = "InvalidPhaseConfig"


class WrongSubjectKind(CuratorError):
    code = "WrongSubjectKind"


class LastPhase(CuratorError):
    code = "LastPhase"


class ScriptError(CuratorError):
    code = "ScriptError"


class LockHeld(CuratorError):
    code = "LockHeld"
