"""Extensions and projections of timed words over a split alphabet.

A *simple extension* keeps the base word's domain: every point carries at
least one base proposition, and projecting just erases the extension
props.  An *oversampled behaviour* may add fresh points carrying only
extension props, as long as the word still starts and ends on base
(action) points; projecting deletes the fresh points and erases the
extension props from the rest, reporting where the survivors came from.

Composition goes the other way: two extensions of the same base word are
merged into one.  For simple extensions the merge is pointwise union.  For
oversampled behaviours the action points fuse pairwise and each gap's
fresh points interleave by time; points at equal times may stay separate
(either order) or fuse, so the merge yields a tuple of candidates.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

from mtlkit.core import AlphabetSplit, PreconditionError, TimedWord

_Point = tuple[frozenset, object]


@dataclass(frozen=True)
class ProjectionMap:
    """1-based source positions of the points that survive projection."""

    entries: tuple[int, ...]
    source_length: int

    def __post_init__(self) -> None:
        if not self.entries:
            raise PreconditionError("projection map cannot be empty")
        if any(b <= a for a, b in zip(self.entries, self.entries[1:])):
            raise PreconditionError("projection map must be strictly increasing")
        if self.entries[0] != 1:
            raise PreconditionError("projection map must keep the first point")
        if self.entries[-1] != self.source_length:
            raise PreconditionError("projection map must keep the last point")

    def __len__(self) -> int:
        return len(self.entries)


def _check_props(word: TimedWord, split: AlphabetSplit) -> None:
    stray = word.propositions() - split.full
    if stray:
        raise PreconditionError(f"foreign propositions {sorted(stray)}")


def is_simple_extension(word: TimedWord, split: AlphabetSplit) -> bool:
    _check_props(word, split)
    return all(event & split.sigma for event in word.events)


def simple_project(word: TimedWord, split: AlphabetSplit) -> TimedWord:
    if not is_simple_extension(word, split):
        raise PreconditionError("not a simple extension: a point lost its label")
    return TimedWord(tuple((e - split.ext, t) for e, t in word.points))


def is_oversampled_behaviour(word: TimedWord, split: AlphabetSplit) -> bool:
    _check_props(word, split)
    return bool(word.events[0] & split.sigma) and bool(word.events[-1] & split.sigma)


def oversampled_project(
    word: TimedWord, split: AlphabetSplit
) -> tuple[TimedWord, ProjectionMap]:
    if not is_oversampled_behaviour(word, split):
        raise PreconditionError("not an oversampled behaviour: endpoints must be action points")
    kept = [i for i, e in enumerate(word.events) if e & split.sigma]
    points = tuple((word.events[i] - split.ext, word.times[i]) for i in kept)
    pmap = ProjectionMap(tuple(i + 1 for i in kept), len(word))
    return TimedWord(points), pmap


def _down(word: TimedWord, base: frozenset, erase: frozenset) -> Optional[TimedWord]:
    points = tuple((e - erase, t) for e, t in word.points if e & base)
    if not points:
        return None
    return TimedWord(points)


def _compatible(split1: AlphabetSplit, split2: AlphabetSplit) -> None:
    if split1.sigma != split2.sigma:
        raise PreconditionError("extensions must share the base alphabet")
    if split1.ext & split2.ext:
        raise PreconditionError(
            f"extension alphabets overlap on {sorted(split1.ext & split2.ext)}"
        )


def compose_simple(
    word1: TimedWord,
    split1: AlphabetSplit,
    word2: TimedWord,
    split2: AlphabetSplit,
) -> TimedWord:
    _compatible(split1, split2)
    if not is_simple_extension(word1, split1) or not is_simple_extension(word2, split2):
        raise PreconditionError("compose needs simple extensions")
    if simple_project(word1, split1) != simple_project(word2, split2):
        raise PreconditionError("extensions disagree on the base word")
    return TimedWord(
        tuple((e1 | e2, t) for (e1, t), (e2, _) in zip(word1.points, word2.points))
    )


def _merges(a: list[_Point], b: list[_Point], fuse: bool) -> list[list[_Point]]:
    if not a:
        return [list(b)]
    if not b:
        return [list(a)]
    out = []
    ta, tb = a[0][1], b[0][1]
    if ta <= tb:
        out += [[a[0]] + rest for rest in _merges(a[1:], b, fuse)]
    if tb <= ta:
        out += [[b[0]] + rest for rest in _merges(a, b[1:], fuse)]
    if fuse and ta == tb:
        fused = (a[0][0] | b[0][0], ta)
        out += [[fused] + rest for rest in _merges(a[1:], b[1:], fuse)]
    return out


def compose_oversampled(
    word1: TimedWord,
    split1: AlphabetSplit,
    word2: TimedWord,
    split2: AlphabetSplit,
) -> tuple[TimedWord, ...]:
    """Every join of two oversampled behaviours of one base word.

    Action points pair up in order and fuse.  Fresh points merge by time
    inside each action gap (or before the first and after the last action
    point); equal-time runs of two weakly monotone inputs contribute one
    candidate per interleaving, whereas for strict inputs equal-time points
    fuse, keeping the join strict and unique.  Candidates are checked
    against both inputs by projection.
    """
    _compatible(split1, split2)
    _check_props(word1, split1)
    _check_props(word2, split2)
    acts1 = [i for i, e in enumerate(word1.events) if e & split1.sigma]
    acts2 = [i for i, e in enumerate(word2.events) if e & split2.sigma]
    if not acts1 or not acts2:
        raise PreconditionError("compose needs at least one action point")
    base1 = tuple((word1.events[i] - split1.ext, word1.times[i]) for i in acts1)
    base2 = tuple((word2.events[i] - split2.ext, word2.times[i]) for i in acts2)
    if base1 != base2:
        raise PreconditionError("behaviours disagree on the base word")
    actions: list[_Point] = [
        (word1.events[i] | word2.events[j], word1.times[i])
        for i, j in zip(acts1, acts2)
    ]
    strict_only = word1.strict and word2.strict
    stops1 = acts1 + [len(word1)]
    stops2 = acts2 + [len(word2)]
    prefixes: list[list[_Point]] = [
        lead for lead in _merges(
            list(word1.points[: acts1[0]]), list(word2.points[: acts2[0]]), strict_only
        )
    ]
    for p in range(len(actions)):
        seg1 = list(word1.points[stops1[p] + 1 : stops1[p + 1]])
        seg2 = list(word2.points[stops2[p] + 1 : stops2[p + 1]])
        options = _merges(seg1, seg2, strict_only)
        prefixes = [
            prefix + [actions[p]] + body
            for prefix in prefixes
            for body in options
        ]
    seen = set()
    found = []
    for points in prefixes:
        word = TimedWord(tuple(points))
        if word.points in seen:
            continue
        seen.add(word.points)
        if strict_only and not word.strict:
            continue
        if _down(word, split1.full, split2.ext) != word1:
            continue
        if _down(word, split2.full, split1.ext) != word2:
            continue
        found.append(word)
    found.sort(
        key=lambda w: (
            len(w),
            w.times,
            tuple(tuple(sorted(e)) for e in w.events),
        )
    )
    return tuple(found)
