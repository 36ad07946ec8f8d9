"""Metric temporal logic over finite timed words, with past-elimination
rewrites, projection machinery, and differential-testing harnesses."""

from mtlkit.core import (
    FULL,
    AlphabetSplit,
    Formula,
    InternalError,
    Interval,
    MtlError,
    PreconditionError,
    TimedWord,
    classify_fragment,
    expand,
    is_future_only,
    is_mitl,
    modal_count,
    node_count,
    propositions_of,
    time_shift,
)

__all__ = [
    "FULL",
    "AlphabetSplit",
    "Formula",
    "InternalError",
    "Interval",
    "MtlError",
    "PreconditionError",
    "TimedWord",
    "classify_fragment",
    "expand",
    "is_future_only",
    "is_mitl",
    "modal_count",
    "node_count",
    "propositions_of",
    "time_shift",
]
