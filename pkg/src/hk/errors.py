"""Typed error hierarchy for the engine.

Every failure that a caller can act on gets its own class; the CLI maps
them to exit codes and module-qualified messages.
"""

from __future__ import annotations


class HKError(Exception):
    """Base class for all engine errors."""


class ModelError(HKError):
    """A model file or in-memory model violates a structural contract."""


class ParseError(ModelError):
    """Unparseable expression, bad key, or malformed model file."""


class ExactDivisionError(HKError):
    """An exact polynomial division left a remainder."""


class MismatchedModels(HKError):
    """Two objects built over different models were combined."""


class NotStabilized(HKError):
    """Flag iteration hit the step bound before the module stabilized."""


class NoAdaptedFrame(HKError):
    """No adapted frame, or the selector solve left the polynomial ring."""


class PostconditionFailed(HKError):
    """A documented postcondition failed after construction (engine bug guard)."""


class NormalizationFailed(HKError):
    """Input data for the rank-one criterion is not normalized as required."""


class StepTooCoarse(HKError):
    """Numeric transport failed its halved-step self-consistency check."""


class NotCarnot(HKError):
    """The Lie algebra is not graded, or the grading is not Carnot."""


class OracleUnavailable(HKError):
    """The numeric oracle was asked to run on a model without a chart."""
