"""Pointwise evaluation over finite timed words, past-obligation region
classification, and small-scope satisfiability search.

Evaluation is anchored at a position; ``satisfies`` anchors at the first
position.  Until and Since are strict: the witness lies strictly after
(before) the anchor.  Truth vectors are cached per formula node on the word
itself, so repeated queries against one word stay cheap.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterator, Optional

from mtlkit import core
from mtlkit.core import (
    Formula,
    InternalError,
    Interval,
    PreconditionError,
    TimedWord,
)


def _beyond(gap: Fraction, interval: Interval) -> bool:
    if interval.upper == core.INF:
        return False
    if gap > interval.upper:
        return True
    return gap == interval.upper and not interval.right_closed


def _vector(word: TimedWord, phi: Formula) -> list[bool]:
    memo = word._memo
    got = memo.get(phi)
    if got is not None:
        return got
    n = len(word)
    times = word.times
    match phi:
        case core.Atom(name=name):
            out = [name in ev for ev in word.events]
        case core.Top():
            out = [True] * n
        case core.Bottom():
            out = [False] * n
        case core.Not(arg=a):
            out = [not v for v in _vector(word, a)]
        case core.And(left=l, right=r):
            lv, rv = _vector(word, l), _vector(word, r)
            out = [x and y for x, y in zip(lv, rv)]
        case core.Or(left=l, right=r):
            lv, rv = _vector(word, l), _vector(word, r)
            out = [x or y for x, y in zip(lv, rv)]
        case core.Implies(left=l, right=r):
            lv, rv = _vector(word, l), _vector(word, r)
            out = [(not x) or y for x, y in zip(lv, rv)]
        case core.Until(interval=ivl, left=l, right=r):
            lv, rv = _vector(word, l), _vector(word, r)
            out = [_until_at(times, ivl, lv, rv, i) for i in range(n)]
        case core.Since(interval=ivl, left=l, right=r):
            lv, rv = _vector(word, l), _vector(word, r)
            out = [_since_at(times, ivl, lv, rv, i) for i in range(n)]
        case core.WeakUntil(interval=ivl, left=l, right=r):
            lv, rv = _vector(word, l), _vector(word, r)
            strict = [_until_at(times, ivl, lv, rv, i) for i in range(n)]
            zero = ivl.zero_in
            out = [
                (zero and rv[i]) or (lv[i] and strict[i]) for i in range(n)
            ]
        case core.Eventually(interval=ivl, arg=a):
            av = _vector(word, a)
            out = [_eventually_at(times, ivl, av, i) for i in range(n)]
        case core.Always(interval=ivl, arg=a):
            neg = [not v for v in _vector(word, a)]
            out = [not _eventually_at(times, ivl, neg, i) for i in range(n)]
        case core.Once(interval=ivl, arg=a):
            av = _vector(word, a)
            out = [_once_at(times, ivl, av, i) for i in range(n)]
        case core.Historically(interval=ivl, arg=a):
            neg = [not v for v in _vector(word, a)]
            out = [not _once_at(times, ivl, neg, i) for i in range(n)]
        case core.WeakEventually(interval=ivl, arg=a):
            av = _vector(word, a)
            zero = ivl.zero_in
            out = [
                (zero and av[i]) or _eventually_at(times, ivl, av, i)
                for i in range(n)
            ]
        case core.WeakAlways(interval=ivl, arg=a):
            av = _vector(word, a)
            neg = [not v for v in av]
            zero = ivl.zero_in
            out = [
                (av[i] if zero else True)
                and not _eventually_at(times, ivl, neg, i)
                for i in range(n)
            ]
        case core.Next(interval=ivl, arg=a):
            av = _vector(word, a)
            out = [
                i + 1 < n
                and ivl.contains(times[i + 1] - times[i])
                and av[i + 1]
                for i in range(n)
            ]
        case _:
            raise InternalError(f"unknown node {type(phi).__name__}")
    memo[phi] = out
    return out


def _until_at(times, ivl: Interval, lv, rv, i: int) -> bool:
    for j in range(i + 1, len(times)):
        gap = times[j] - times[i]
        if _beyond(gap, ivl):
            return False
        if rv[j] and ivl.contains(gap):
            return True
        if not lv[j]:
            return False
    return False


def _since_at(times, ivl: Interval, lv, rv, i: int) -> bool:
    for j in range(i - 1, -1, -1):
        gap = times[i] - times[j]
        if _beyond(gap, ivl):
            return False
        if rv[j] and ivl.contains(gap):
            return True
        if not lv[j]:
            return False
    return False


def _eventually_at(times, ivl: Interval, av, i: int) -> bool:
    for j in range(i + 1, len(times)):
        gap = times[j] - times[i]
        if _beyond(gap, ivl):
            return False
        if av[j] and ivl.contains(gap):
            return True
    return False


def _once_at(times, ivl: Interval, av, i: int) -> bool:
    for j in range(i - 1, -1, -1):
        gap = times[i] - times[j]
        if _beyond(gap, ivl):
            return False
        if av[j] and ivl.contains(gap):
            return True
    return False


def eval(word: TimedWord, pos: int, phi: Formula) -> bool:
    word._check_pos(pos)
    return _vector(word, phi)[pos - 1]


def satisfies(word: TimedWord, phi: Formula) -> bool:
    return eval(word, 1, phi)


# ---------------------------------------------------------------------------
# Region classification for a failed past obligation P<interval> a.

HOLDS = "HOLDS"
REGION_I = "REGION_I"
REGION_II = "REGION_II"
REGION_III = "REGION_III"


def strict_normalize(interval: Interval) -> Interval:
    """On strictly monotonic words, a strict-past gap is never zero, so a
    closed zero lower bound is interchangeable with an open one.  The open
    form is the canonical one: region geometry reads the brackets."""
    if interval.zero_in:
        return Interval(0, interval.upper, False, interval.right_closed)
    return interval


@dataclass(frozen=True)
class RegionClass:
    tag: str
    pair: Optional[tuple[int, int]] = None


def region_classify(
    word: TimedWord, pos: int, prop: str, interval: Interval
) -> RegionClass:
    """Place position ``pos`` relative to the witnesses of ``P<interval>
    prop``: either the obligation holds, or the position falls in one of
    three failure regions (before the first witness window, after the last
    one, or in the gap zone between two consecutive occurrences of
    ``prop``)."""
    word._check_pos(pos)
    if interval.punctual:
        raise PreconditionError("punctual interval has no region split")
    if not word.strict:
        raise PreconditionError("region split is defined on strict words")
    ivl = strict_normalize(interval)
    times = word.times
    here = times[pos - 1]
    events = word.events
    for j in range(pos - 2, -1, -1):
        gap = here - times[j]
        if _beyond(gap, ivl):
            break
        if prop in events[j] and ivl.contains(gap):
            return RegionClass(HOLDS)
    spots = [j for j in range(len(word)) if prop in events[j]]
    lower, upper = ivl.lower, ivl.upper
    if not spots:
        return RegionClass(REGION_I)
    first_edge = times[spots[0]] + lower
    if (here < first_edge) if ivl.left_closed else (here <= first_edge):
        return RegionClass(REGION_I)
    if upper != core.INF:
        last_edge = times[spots[-1]] + upper
        if (here > last_edge) if ivl.right_closed else (here >= last_edge):
            return RegionClass(REGION_II)
        for j, k in zip(spots, spots[1:]):
            left = times[j] + upper
            right = times[k] + lower
            left_in = not ivl.right_closed
            right_in = not ivl.left_closed
            if (here > left or (left_in and here == left)) and (
                here < right or (right_in and here == right)
            ):
                return RegionClass(REGION_III, (j + 1, k + 1))
    raise InternalError("position escaped the region split")


# ---------------------------------------------------------------------------
# Small-scope satisfiability


def iter_models(
    sigma: frozenset[str],
    max_len: int,
    grid: Fraction,
    horizon: Fraction,
) -> Iterator[TimedWord]:
    """All strict words over ``sigma`` with first timestamp 0, later
    timestamps positive multiples of ``grid`` up to ``horizon``, in
    shortlex order (length, then times, then events)."""
    if not sigma or max_len < 1 or grid <= 0 or horizon < 0:
        raise PreconditionError("bad search scope")
    names = sorted(sigma)
    events = [
        frozenset(combo)
        for size in range(1, len(names) + 1)
        for combo in itertools.combinations(names, size)
    ]
    events.sort(key=lambda ev: tuple(sorted(ev)))
    ticks = []
    step = 1
    while step * grid <= horizon:
        ticks.append(step * grid)
        step += 1
    for length in range(1, max_len + 1):
        for later in itertools.combinations(ticks, length - 1):
            times = (Fraction(0),) + later
            for labelling in itertools.product(events, repeat=length):
                yield TimedWord(tuple(zip(labelling, times)))


def bounded_sat(
    phi: Formula,
    sigma: Optional[frozenset[str]] = None,
    *,
    max_len: int,
    grid,
    horizon,
) -> Optional[TimedWord]:
    """First model of ``phi`` in the ``iter_models`` order, or None when the
    scope holds no model."""
    if sigma is None:
        sigma = core.propositions_of(phi)
    if not sigma:
        raise PreconditionError("satisfiability search needs an alphabet")
    for word in iter_models(frozenset(sigma), max_len, Fraction(grid), Fraction(horizon)):
        if satisfies(word, phi):
            return word
    return None
