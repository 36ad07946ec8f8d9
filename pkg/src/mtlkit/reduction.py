"""Shared plumbing for the two equisatisfiability reductions.

Both pipelines flatten the input into a skeleton plus past definitions,
replace each definition by a marking construction over fresh
propositions, and return the conjunction together with enough metadata
to rebuild and check witnesses.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

from mtlkit.core import (
    FULL,
    Atom,
    Bottom,
    Formula,
    InternalError,
    Interval,
    Once,
    PreconditionError,
    Since,
    Top,
    classify_fragment,
    propositions_of,
)
from mtlkit.normal_forms import FlatResult, SinceSub, TemporalDefinition

REDUCIBLE = ("U_I_only", "U_I_S_np", "MITL")


@dataclass(frozen=True)
class FreshProp:
    """One proposition a reduction added: its name, its job, and the
    definition it serves (empty for pipeline-level witnesses)."""

    name: str
    role: str
    owner: str = ""


@dataclass(frozen=True)
class DefPart:
    """What the reduction produced for one flattened definition.

    ``kind`` is one of ``bounded`` / ``unbounded`` / ``since`` / ``plain``;
    ``formula`` is the conjunct contributed to the output; ``output`` keeps
    the per-definition elimination record when there is one, and
    ``since_subs`` lists the carry propositions whose values a witness
    builder fills in by recurrence.
    """

    defn: TemporalDefinition
    kind: str
    formula: Formula
    fresh: tuple[FreshProp, ...] = ()
    since_subs: tuple[SinceSub, ...] = ()
    output: Optional[object] = None


@dataclass(frozen=True)
class ReductionResult:
    """Equisatisfiable output formula plus witness-builder metadata."""

    sigma: frozenset[str]
    formula: Formula
    kind: str
    flat: FlatResult
    parts: tuple[DefPart, ...]
    fresh: tuple[FreshProp, ...] = ()

    @property
    def fresh_names(self) -> frozenset[str]:
        return frozenset(p.name for p in self.fresh)


def checked_alphabet(phi: Formula, allowed: tuple[str, ...]) -> frozenset[str]:
    fragment = classify_fragment(phi)
    if fragment not in allowed:
        raise PreconditionError(
            f"fragment {fragment} is outside this reduction (needs one of {allowed})"
        )
    sigma = propositions_of(phi)
    if not sigma:
        raise PreconditionError("reduction needs at least one proposition")
    return sigma


def def_kind(defn: TemporalDefinition) -> str:
    body = defn.body
    if isinstance(body, Once):
        return "bounded" if body.interval.bounded else "unbounded"
    if isinstance(body, Since):
        if body.interval != FULL:
            raise InternalError("timed Since survived interval rewriting")
        return "since"
    return "plain"


def check_drop(drop: frozenset[str], known: tuple[str, ...]) -> frozenset[str]:
    drop = frozenset(drop)
    bad = drop - set(known)
    if bad:
        raise PreconditionError(f"unknown mark names {sorted(bad)}")
    return drop


def past_body(defn: TemporalDefinition) -> tuple[Formula, Interval]:
    body = defn.body
    if not isinstance(body, Once):
        raise PreconditionError("definition body must be a Once; flatten first")
    if not isinstance(body.arg, (Atom, Top, Bottom)):
        raise PreconditionError("definition argument must be atomic; flatten first")
    return body.arg, body.interval
