"""Core objects: intervals, formula AST, timed words, fragment classification.

Formulas are immutable and hash-consed: the factory functions at the bottom of
this module intern every node, so structurally equal formulas are the *same*
object and equality checks are pointer comparisons.  Build formulas through
the factories, not the class constructors.

Timestamps are exact rationals (`fractions.Fraction`).  The only float in the
whole package is the `inf` upper bound of unbounded intervals.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, fields
from fractions import Fraction
from typing import Iterable, Iterator, Union

INF = math.inf

TimeLike = Union[int, str, Fraction]


class MtlError(Exception):
    """Base class for all library errors."""


class PreconditionError(MtlError, ValueError):
    """An operation was called outside its contract (bad input, bad flags)."""


class InternalError(MtlError, RuntimeError):
    """An internal invariant failed; indicates a bug, not a user error."""


# ---------------------------------------------------------------------------
# Intervals


@dataclass(frozen=True)
class Interval:
    """A non-empty interval over the naturals, with an optional infinite
    upper bound.  `upper == inf` forces a right-open interval."""

    lower: int
    upper: Union[int, float]
    left_closed: bool = True
    right_closed: bool = False

    def __post_init__(self) -> None:
        if not isinstance(self.lower, int) or self.lower < 0:
            raise PreconditionError(f"interval lower bound must be a natural: {self.lower!r}")
        if self.upper == INF:
            if self.right_closed:
                raise PreconditionError("an unbounded interval must be right-open")
        elif not isinstance(self.upper, int) or self.upper < 0:
            raise PreconditionError(f"interval upper bound must be a natural or inf: {self.upper!r}")
        if self.upper != INF:
            if self.lower > self.upper:
                raise PreconditionError(f"empty interval: {self}")
            if self.lower == self.upper and not (self.left_closed and self.right_closed):
                raise PreconditionError(f"empty interval: {self}")

    @property
    def bounded(self) -> bool:
        return self.upper != INF

    @property
    def punctual(self) -> bool:
        return self.bounded and self.lower == self.upper

    @property
    def zero_in(self) -> bool:
        return self.lower == 0 and self.left_closed

    def contains(self, value: Union[int, Fraction]) -> bool:
        if self.left_closed:
            if value < self.lower:
                return False
        elif value <= self.lower:
            return False
        if self.upper == INF:
            return True
        if self.right_closed:
            return value <= self.upper
        return value < self.upper

    def __str__(self) -> str:
        lo = "[" if self.left_closed else "("
        hi = "]" if self.right_closed else ")"
        up = "inf" if self.upper == INF else str(self.upper)
        return f"{lo}{self.lower},{up}{hi}"


FULL = Interval(0, INF, True, False)


# ---------------------------------------------------------------------------
# Formula AST
#
# eq=False keeps identity equality; interning makes identity coincide with
# structural equality.  Pattern matching works through __match_args__.


@dataclass(frozen=True, eq=False)
class Formula:
    def __str__(self) -> str:  # late import: the printer lives in syntax
        from mtlkit.syntax import format_formula

        return format_formula(self)


@dataclass(frozen=True, eq=False)
class Atom(Formula):
    name: str


@dataclass(frozen=True, eq=False)
class Top(Formula):
    pass


@dataclass(frozen=True, eq=False)
class Bottom(Formula):
    pass


@dataclass(frozen=True, eq=False)
class Not(Formula):
    arg: Formula


@dataclass(frozen=True, eq=False)
class And(Formula):
    left: Formula
    right: Formula


@dataclass(frozen=True, eq=False)
class Or(Formula):
    left: Formula
    right: Formula


@dataclass(frozen=True, eq=False)
class Implies(Formula):
    left: Formula
    right: Formula


@dataclass(frozen=True, eq=False)
class Until(Formula):
    interval: Interval
    left: Formula
    right: Formula


@dataclass(frozen=True, eq=False)
class Since(Formula):
    interval: Interval
    left: Formula
    right: Formula


@dataclass(frozen=True, eq=False)
class WeakUntil(Formula):
    """Reflexive until: the witness may be the current position."""

    interval: Interval
    left: Formula
    right: Formula


@dataclass(frozen=True, eq=False)
class Eventually(Formula):
    interval: Interval
    arg: Formula


@dataclass(frozen=True, eq=False)
class Always(Formula):
    interval: Interval
    arg: Formula


@dataclass(frozen=True, eq=False)
class Once(Formula):
    """Past eventually (strict past)."""

    interval: Interval
    arg: Formula


@dataclass(frozen=True, eq=False)
class Historically(Formula):
    """Past always (strict past)."""

    interval: Interval
    arg: Formula


@dataclass(frozen=True, eq=False)
class WeakEventually(Formula):
    """Reflexive eventually: counts the current position when 0 is in the
    interval."""

    interval: Interval
    arg: Formula


@dataclass(frozen=True, eq=False)
class WeakAlways(Formula):
    interval: Interval
    arg: Formula


@dataclass(frozen=True, eq=False)
class Next(Formula):
    """Strict next: false U_I arg."""

    interval: Interval
    arg: Formula


_BINARY = (And, Or, Implies, Until, Since, WeakUntil)
_UNARY_TEMPORAL = (Eventually, Always, Once, Historically, WeakEventually, WeakAlways, Next)
_TEMPORAL = (Until, Since, WeakUntil) + _UNARY_TEMPORAL

_pool: dict = {}


def _intern(cls, *args) -> Formula:
    key = (cls, *(id(a) if isinstance(a, Formula) else a for a in args))
    node = _pool.get(key)
    if node is None:
        node = cls(*args)
        _pool[key] = node
    return node


def atom(name: str) -> Formula:
    if not name or not isinstance(name, str):
        raise PreconditionError(f"bad proposition name: {name!r}")
    return _intern(Atom, name)


def top() -> Formula:
    return _intern(Top)


def bottom() -> Formula:
    return _intern(Bottom)


def not_(arg: Formula) -> Formula:
    return _intern(Not, arg)


def and_(left: Formula, right: Formula) -> Formula:
    return _intern(And, left, right)


def or_(left: Formula, right: Formula) -> Formula:
    return _intern(Or, left, right)


def implies(left: Formula, right: Formula) -> Formula:
    return _intern(Implies, left, right)


def iff(left: Formula, right: Formula) -> Formula:
    return and_(implies(left, right), implies(right, left))


def until(left: Formula, right: Formula, interval: Interval = FULL) -> Formula:
    return _intern(Until, interval, left, right)


def since(left: Formula, right: Formula, interval: Interval = FULL) -> Formula:
    return _intern(Since, interval, left, right)


def weak_until(left: Formula, right: Formula, interval: Interval = FULL) -> Formula:
    return _intern(WeakUntil, interval, left, right)


def eventually(arg: Formula, interval: Interval = FULL) -> Formula:
    return _intern(Eventually, interval, arg)


def always(arg: Formula, interval: Interval = FULL) -> Formula:
    return _intern(Always, interval, arg)


def once(arg: Formula, interval: Interval = FULL) -> Formula:
    return _intern(Once, interval, arg)


def historically(arg: Formula, interval: Interval = FULL) -> Formula:
    return _intern(Historically, interval, arg)


def weak_eventually(arg: Formula, interval: Interval = FULL) -> Formula:
    return _intern(WeakEventually, interval, arg)


def weak_always(arg: Formula, interval: Interval = FULL) -> Formula:
    return _intern(WeakAlways, interval, arg)


def next_(arg: Formula, interval: Interval = FULL) -> Formula:
    return _intern(Next, interval, arg)


def conj(parts: Iterable[Formula]) -> Formula:
    """Right-folded conjunction of a non-empty sequence."""
    items = list(parts)
    if not items:
        raise PreconditionError("empty conjunction")
    out = items[-1]
    for part in reversed(items[:-1]):
        out = and_(part, out)
    return out


def disj(parts: Iterable[Formula]) -> Formula:
    items = list(parts)
    if not items:
        raise PreconditionError("empty disjunction")
    out = items[-1]
    for part in reversed(items[:-1]):
        out = or_(part, out)
    return out


def children(phi: Formula) -> tuple[Formula, ...]:
    if isinstance(phi, Not):
        return (phi.arg,)
    if isinstance(phi, _BINARY):
        return (phi.left, phi.right)
    if isinstance(phi, _UNARY_TEMPORAL):
        return (phi.arg,)
    return ()


def subformulas(phi: Formula) -> Iterator[Formula]:
    """Pre-order traversal (root first, left to right)."""
    stack = [phi]
    while stack:
        node = stack.pop()
        yield node
        stack.extend(reversed(children(node)))


_props_memo: dict = {}
_node_count_memo: dict = {}
_modal_count_memo: dict = {}


def propositions_of(phi: Formula) -> frozenset[str]:
    got = _props_memo.get(phi)
    if got is None:
        if isinstance(phi, Atom):
            got = frozenset((phi.name,))
        else:
            got = frozenset().union(*(propositions_of(c) for c in children(phi))) if children(phi) else frozenset()
        _props_memo[phi] = got
    return got


def node_count(phi: Formula) -> int:
    got = _node_count_memo.get(phi)
    if got is None:
        got = 1 + sum(node_count(c) for c in children(phi))
        _node_count_memo[phi] = got
    return got


def modal_count(phi: Formula) -> int:
    """Number of temporal-operator nodes, counted on the unexpanded AST."""
    got = _modal_count_memo.get(phi)
    if got is None:
        got = int(isinstance(phi, _TEMPORAL)) + sum(modal_count(c) for c in children(phi))
        _modal_count_memo[phi] = got
    return got


# ---------------------------------------------------------------------------
# Expansion into the U/S kernel

_expand_memo: dict = {}


def expand(phi: Formula) -> Formula:
    """Rewrite derived temporal operators into the Until/Since kernel,
    keeping the boolean connectives.  Idempotent; each derived operator
    contributes exactly one Until or Since."""
    got = _expand_memo.get(phi)
    if got is not None:
        return got
    match phi:
        case Atom() | Top() | Bottom():
            out = phi
        case Not(arg=a):
            out = not_(expand(a))
        case And(left=l, right=r):
            out = and_(expand(l), expand(r))
        case Or(left=l, right=r):
            out = or_(expand(l), expand(r))
        case Implies(left=l, right=r):
            out = implies(expand(l), expand(r))
        case Until(interval=i, left=l, right=r):
            out = until(expand(l), expand(r), i)
        case Since(interval=i, left=l, right=r):
            out = since(expand(l), expand(r), i)
        case Eventually(interval=i, arg=a):
            out = until(top(), expand(a), i)
        case Once(interval=i, arg=a):
            out = since(top(), expand(a), i)
        case Always(interval=i, arg=a):
            out = not_(until(top(), not_(expand(a)), i))
        case Historically(interval=i, arg=a):
            out = not_(since(top(), not_(expand(a)), i))
        case WeakEventually(interval=i, arg=a):
            body = until(top(), expand(a), i)
            out = or_(expand(a), body) if i.zero_in else body
        case WeakAlways(interval=i, arg=a):
            body = not_(until(top(), not_(expand(a)), i))
            out = and_(expand(a), body) if i.zero_in else body
        case WeakUntil(interval=i, left=l, right=r):
            body = and_(expand(l), until(expand(l), expand(r), i))
            out = or_(expand(r), body) if i.zero_in else body
        case Next(interval=i, arg=a):
            out = until(bottom(), expand(a), i)
        case _:
            raise InternalError(f"unknown node: {phi!r}")
    _expand_memo[phi] = out
    _expand_memo[out] = out
    return out


FRAGMENTS = ("U_I_only", "U_I_S_np", "U_np_S_I", "MITL", "full_MTL")


def classify_fragment(phi: Formula) -> str:
    """Classify by the first matching clause, on the expanded kernel:
    no Since at all; every Since non-punctual; every Until non-punctual;
    no punctual interval anywhere; otherwise full MTL."""
    kernel = expand(phi)
    sinces = [n for n in subformulas(kernel) if isinstance(n, Since)]
    untils = [n for n in subformulas(kernel) if isinstance(n, Until)]
    if not sinces:
        return "U_I_only"
    if all(not n.interval.punctual for n in sinces):
        return "U_I_S_np"
    if all(not n.interval.punctual for n in untils):
        return "U_np_S_I"
    if all(not n.interval.punctual for n in sinces + untils):
        return "MITL"
    return "full_MTL"


def is_mitl(phi: Formula) -> bool:
    """No punctual interval on the expanded tree."""
    return all(
        not n.interval.punctual for n in subformulas(expand(phi)) if isinstance(n, _TEMPORAL)
    )


def is_future_only(phi: Formula) -> bool:
    """No past operator anywhere on the tree."""
    return not any(
        isinstance(n, (Since, Once, Historically)) for n in subformulas(phi)
    )


def fragment_rank(tag: str) -> int:
    if tag == "U_I_only":
        return 0
    if tag in ("U_I_S_np", "U_np_S_I", "MITL"):
        return 1
    if tag == "full_MTL":
        return 2
    raise PreconditionError(f"unknown fragment tag: {tag!r}")


# ---------------------------------------------------------------------------
# Timed words


def _as_time(value: TimeLike) -> Fraction:
    if isinstance(value, Fraction):
        return value
    return Fraction(value)


@dataclass(frozen=True)
class TimedWord:
    """A finite timed word: non-empty event sets with nondecreasing rational
    timestamps.  `strict` is derived: true iff no timestamp repeats."""

    points: tuple[tuple[frozenset[str], Fraction], ...]
    _memo: dict = field(default_factory=dict, compare=False, repr=False, hash=False)

    def __post_init__(self) -> None:
        if not self.points:
            raise PreconditionError("a timed word must have at least one point")
        prev = None
        for event, time in self.points:
            if not isinstance(event, frozenset) or not event:
                raise PreconditionError(f"event sets must be non-empty: {event!r}")
            if not isinstance(time, Fraction) or time < 0:
                raise PreconditionError(f"timestamps must be non-negative rationals: {time!r}")
            if prev is not None and time < prev:
                raise PreconditionError("timestamps must be nondecreasing")
            prev = time

    @classmethod
    def build(cls, pairs: Iterable[tuple[Iterable[str], TimeLike]]) -> "TimedWord":
        return cls(tuple((frozenset(ev), _as_time(t)) for ev, t in pairs))

    def __len__(self) -> int:
        return len(self.points)

    def __iter__(self):
        return iter(self.points)

    @property
    def times(self) -> tuple[Fraction, ...]:
        return tuple(t for _, t in self.points)

    @property
    def events(self) -> tuple[frozenset[str], ...]:
        return tuple(e for e, _ in self.points)

    @property
    def strict(self) -> bool:
        ts = self.times
        return all(ts[i] < ts[i + 1] for i in range(len(ts) - 1))

    def event(self, pos: int) -> frozenset[str]:
        """1-based access."""
        self._check_pos(pos)
        return self.points[pos - 1][0]

    def time(self, pos: int) -> Fraction:
        self._check_pos(pos)
        return self.points[pos - 1][1]

    def _check_pos(self, pos: int) -> None:
        if not 1 <= pos <= len(self.points):
            raise PreconditionError(f"position {pos} out of range 1..{len(self.points)}")

    def propositions(self) -> frozenset[str]:
        return frozenset().union(*self.events)

    def __str__(self) -> str:
        from mtlkit.syntax import format_timed_word

        return format_timed_word(self)


def time_shift(word: TimedWord, delta: TimeLike) -> TimedWord:
    """Shift every timestamp by delta; the first timestamp must stay
    non-negative."""
    d = _as_time(delta)
    if word.times[0] + d < 0:
        raise PreconditionError("time_shift would make the first timestamp negative")
    return TimedWord(tuple((e, t + d) for e, t in word.points))


@dataclass(frozen=True)
class AlphabetSplit:
    """A base alphabet and a disjoint set of fresh propositions."""

    sigma: frozenset[str]
    ext: frozenset[str]

    def __post_init__(self) -> None:
        if not self.sigma:
            raise PreconditionError("the base alphabet must be non-empty")
        if self.sigma & self.ext:
            raise PreconditionError(f"alphabets overlap: {sorted(self.sigma & self.ext)}")

    @property
    def full(self) -> frozenset[str]:
        return self.sigma | self.ext
