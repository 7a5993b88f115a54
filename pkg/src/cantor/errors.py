"""Exception hierarchy.

Every error carries a stable machine-readable ``code`` that the CLI copies
into its reports, and an ``exit_status`` (1 for bad input, 2 when a
mathematical hypothesis fails).
"""

from __future__ import annotations


class CantorError(Exception):
    code = "INTERNAL"
    exit_status = 1


class SpecParseError(CantorError):
    code = "SPEC_PARSE"


class DigitOutOfRange(CantorError):
    code = "DIGIT_OUT_OF_RANGE"


class SearchExhausted(CantorError):
    code = "SEARCH_EXHAUSTED"
    exit_status = 2


class CapExceeded(CantorError):
    code = "CAP_EXCEEDED"


class StructureViolation(CantorError):
    code = "STRUCTURE_VIOLATION"
    exit_status = 2

    def __init__(self, position: int, message: str | None = None):
        self.position = position
        super().__init__(message or f"block structure broken at coefficient {position}")


class DivergentSpec(CantorError):
    code = "DIVERGENT_SPEC"
    exit_status = 2


class ZeroFactor(CantorError):
    code = "ZERO_FACTOR"
    exit_status = 2


class DomainError(CantorError):
    code = "DOMAIN"


class NoWitness(CantorError):
    code = "NO_WITNESS"
    exit_status = 2


class WitnessInvalid(CantorError):
    code = "WITNESS_INVALID"
    exit_status = 2


class HypothesisViolated(CantorError):
    code = "HYPOTHESIS_VIOLATED"
    exit_status = 2


class DepthTooLarge(CantorError):
    code = "DEPTH_TOO_LARGE"


class AmbiguousComparison(CantorError):
    code = "AMBIGUOUS_COMPARISON"
