"""Exception hierarchy shared by all subsystems.

Every error carries a stable machine ``code`` (snake_case) so the HTTP
layer can map exceptions to JSON error bodies without string matching.
"""
from __future__ import annotations


class HexalectError(Exception):
    """Base class; ``code`` is the wire-level error identifier."""

    code = "internal"

    def __init__(self, message: str = ""):
        super().__init__(message or self.__class__.__name__)


# -- corpus store ------------------------------------------------------------

class UnknownFamily(HexalectError):
    code = "unknown_family"


class UnknownLabel(HexalectError):
    code = "unknown_label"


class UnknownGroup(HexalectError):
    code = "unknown_group"


class UnknownSession(HexalectError):
    code = "unknown_session"


class UnknownDivision(HexalectError):
    code = "unknown_division"


class DuplicateGroup(HexalectError):
    code = "duplicate_group"


class DuplicateDialectName(HexalectError):
    code = "duplicate_dialect_name"


class MalformedRecord(HexalectError):
    code = "malformed_record"

    def __init__(self, line_no: int, message: str = ""):
        self.line_no = line_no
        super().__init__(f"line {line_no}: {message}" if message else f"line {line_no}")


class EmptyText(HexalectError):
    code = "empty_text"


class InvalidPayload(HexalectError):
    code = "invalid_payload"


# -- geometry ----------------------------------------------------------------

class DegeneratePolygon(HexalectError):
    code = "degenerate_polygon"


class OutOfBounds(HexalectError):
    code = "out_of_bounds"


class ConflictingEdit(HexalectError):
    code = "conflicting_edit"


# -- classifier --------------------------------------------------------------

class SingleClassCorpus(HexalectError):
    code = "single_class_corpus"


class EmptyTrainingSet(HexalectError):
    code = "empty_training_set"


class EmptyTestSet(HexalectError):
    code = "empty_test_set"


class NoFeasibleModel(HexalectError):
    code = "no_feasible_model"


# -- selection ---------------------------------------------------------------

class NotNormalized(HexalectError):
    code = "not_normalized"


class EmptyInput(HexalectError):
    code = "empty_input"


class NoGroups(HexalectError):
    code = "no_groups"


class ModelLabelMismatch(HexalectError):
    code = "model_label_mismatch"


# -- game engine -------------------------------------------------------------

class WrongStage(HexalectError):
    code = "wrong_stage"


class TurnAlreadyOpen(HexalectError):
    code = "turn_already_open"


class NoOpenTurn(HexalectError):
    code = "no_open_turn"


class AlreadyAnswered(HexalectError):
    code = "already_answered"


class InsufficientData(HexalectError):
    code = "insufficient_data"


class RetrainInProgress(HexalectError):
    code = "retrain_in_progress"
