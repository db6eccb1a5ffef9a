class ValHyperError(Exception):
    """Base class; ``exit_code`` is what the CLI reports."""

    exit_code = 1


class PrecisionError(ValHyperError):
    exit_code = 3


class InsufficientPrecision(PrecisionError):
    pass


class IndistinguishableFromZero(PrecisionError):
    pass


class Undetermined(PrecisionError):
    """A stage-bounded question could not be settled within the budget."""


class ParseError(ValHyperError):
    exit_code = 2

    def __init__(self, msg: str, offset: int | None = None):
        super().__init__(msg if offset is None else f"{msg} at offset {offset}")
        self.offset = offset


class UnknownVariable(ParseError):
    pass


class ZeroDivision(ValHyperError):
    pass


class ElementsFromDifferentHandles(ValHyperError):
    pass


class NotEnumerable(ValHyperError):
    pass


class TNotSubgroup(ValHyperError):
    pass


class NotStringent(ValHyperError):
    def __init__(self, msg: str, witness=None):
        super().__init__(msg)
        self.witness = witness


class FNotField(ValHyperError):
    pass


class NotSurjective(ValHyperError):
    pass


class SegmentsNotIncreasing(ValHyperError):
    pass


class DoublingUnavailable(ValHyperError):
    def __init__(self, msg: str, diagnostic=None):
        super().__init__(msg)
        self.diagnostic = diagnostic


class HypothesisMismatch(ValHyperError):
    pass


class MixedSorts(ValHyperError):
    pass


class NewtonConditionFails(ValHyperError):
    pass


class GuardViolation(ValHyperError):
    """n-ary oplus asked on inputs whose parenthesization may matter."""
