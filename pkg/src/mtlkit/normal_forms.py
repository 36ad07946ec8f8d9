"""Normal forms and formula surgery shared by both reduction pipelines.

``flatten`` pulls past-time subformulas out into fresh witness
propositions, leaving a skeleton plus a list of definitions of the form
``Gw (w <-> body)``.  ``enf``/``onf`` relativize a formula to an alphabet
so that models are forced to keep (``enf``) or mark (``onf``) action
points.  ``eliminate_since_def`` turns an untimed Since definition into a
first-order-free recurrence over weak-next steps, and ``rewrite_snp``
splits a non-punctual Since interval into unit pieces whose timing is
expressed with Once/Historically only.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Optional, Sequence

from mtlkit import core, semantics
from mtlkit.core import (
    FULL,
    Atom,
    Bottom,
    Formula,
    Historically,
    Interval,
    Once,
    PreconditionError,
    Since,
    TimedWord,
    Top,
    and_,
    atom,
    bottom,
    conj,
    historically,
    iff,
    implies,
    next_,
    not_,
    once,
    or_,
    propositions_of,
    since,
    weak_always,
)


class FreshNames:
    """Deterministic supply of witness (w1, w2, ...) and auxiliary
    (v1, v2, ...) proposition names.  Colliding with a forbidden name is an
    error rather than a skip, so generated names stay predictable."""

    def __init__(self, forbidden: Iterable[str]) -> None:
        self.forbidden = frozenset(forbidden)
        self._w = 0
        self._v = 0

    def _draw(self, prefix: str, count: int) -> str:
        name = f"{prefix}{count}"
        if name in self.forbidden:
            raise PreconditionError(f"fresh name {name!r} collides with the alphabet")
        return name

    def witness(self) -> str:
        self._w += 1
        return self._draw("w", self._w)

    def aux(self) -> str:
        self._v += 1
        return self._draw("v", self._v)

    def role(self, prefix: str, owner: str) -> str:
        """Marking proposition named after its job and the definition it
        serves, e.g. ``bs_w1``."""
        name = f"{prefix}_{owner}"
        if name in self.forbidden:
            raise PreconditionError(f"fresh name {name!r} collides with the alphabet")
        return name


@dataclass(frozen=True)
class TemporalDefinition:
    """One extracted subformula: the fresh proposition ``witness`` is pinned
    to ``body`` everywhere, as Gw (witness <-> body)."""

    witness: str
    body: Formula

    def __post_init__(self) -> None:
        if self.witness in propositions_of(self.body):
            raise PreconditionError(f"definition of {self.witness!r} mentions itself")

    @property
    def as_formula(self) -> Formula:
        return weak_always(iff(atom(self.witness), self.body))


@dataclass(frozen=True)
class FlatResult:
    skeleton: Formula
    defs: tuple[TemporalDefinition, ...]
    witnesses: tuple[str, ...]

    @property
    def formula(self) -> Formula:
        return conj([self.skeleton, *(d.as_formula for d in self.defs)])


POLICIES = {
    "past_only": (Since, Once, Historically),
    "since_only": (Since,),
    "all": core._TEMPORAL,
}


def _atomic(phi: Formula) -> bool:
    return isinstance(phi, (Atom, Top, Bottom))


def flatten(
    phi: Formula, policy: str = "past_only", fresh: Optional[FreshNames] = None
) -> FlatResult:
    """Extract every subformula matching ``policy`` into a witness
    definition whose operator arguments are atomic.

    Witness names follow the pre-order walk (the outermost extracted
    operator gets w1); the returned definitions are ordered innermost
    first, so each body only mentions the original alphabet and witnesses
    defined earlier in the tuple.  Historically is extracted as the
    negation of a Once definition.  Shared subterms share a witness.
    """
    if policy not in POLICIES:
        raise PreconditionError(f"unknown flatten policy {policy!r}")
    targets = tuple(t for t in POLICIES[policy] if t is not Historically)
    expand_h = Historically in POLICIES[policy]
    if fresh is None:
        fresh = FreshNames(propositions_of(phi))

    def pre(node: Formula) -> Formula:
        if expand_h and isinstance(node, Historically):
            return not_(once(not_(node.arg), node.interval))
        return node

    names: dict[Formula, str] = {}
    stack = [phi]
    while stack:
        node = pre(stack.pop())
        if isinstance(node, targets) and node not in names:
            names[node] = fresh.witness()
        stack.extend(reversed(core.children(node)))

    defs: list[TemporalDefinition] = []
    emitted: set[str] = set()
    rewritten: dict[Formula, Formula] = {}
    aux_names: dict[Formula, str] = {}

    def atomize(sub: Formula) -> Formula:
        got = rewrite(sub)
        if _atomic(got):
            return got
        name = aux_names.get(got)
        if name is None:
            name = fresh.aux()
            aux_names[got] = name
            defs.append(TemporalDefinition(name, got))
        return atom(name)

    def rewrite(node: Formula) -> Formula:
        node = pre(node)
        out = rewritten.get(node)
        if out is not None:
            return out
        if isinstance(node, targets):
            name = names[node]
            if name not in emitted:
                emitted.add(name)
                if isinstance(node, core._UNARY_TEMPORAL):
                    body = _rebuild_unary(node, atomize(node.arg))
                else:
                    body = _rebuild_binary(node, atomize(node.left), atomize(node.right))
                defs.append(TemporalDefinition(name, body))
            out = atom(name)
        else:
            out = _rebuild(node, rewrite)
        rewritten[node] = out
        return out

    skeleton = rewrite(phi)
    return FlatResult(skeleton, tuple(defs), tuple(d.witness for d in defs))


def _rebuild_unary(node: Formula, arg: Formula) -> Formula:
    maker = {
        core.Eventually: core.eventually,
        core.Always: core.always,
        core.Once: once,
        core.Historically: historically,
        core.WeakEventually: core.weak_eventually,
        core.WeakAlways: weak_always,
        core.Next: next_,
    }[type(node)]
    return maker(arg, node.interval)


def _rebuild_binary(node: Formula, left: Formula, right: Formula) -> Formula:
    maker = {
        core.Until: core.until,
        Since: since,
        core.WeakUntil: core.weak_until,
    }[type(node)]
    return maker(left, right, node.interval)


def _rebuild(node: Formula, rec) -> Formula:
    match node:
        case Atom() | Top() | Bottom():
            return node
        case core.Not(arg=a):
            return not_(rec(a))
        case core.And(left=l, right=r):
            return and_(rec(l), rec(r))
        case core.Or(left=l, right=r):
            return or_(rec(l), rec(r))
        case core.Implies(left=l, right=r):
            return implies(rec(l), rec(r))
        case core.Until(interval=i, left=l, right=r):
            return core.until(rec(l), rec(r), i)
        case Since(interval=i, left=l, right=r):
            return since(rec(l), rec(r), i)
        case core.WeakUntil(interval=i, left=l, right=r):
            return core.weak_until(rec(l), rec(r), i)
        case _:
            return _rebuild_unary(node, rec(node.arg))


# ---------------------------------------------------------------------------
# Alphabet relativization


def _act(sigma: Iterable[str]) -> Formula:
    names = sorted(sigma)
    if not names:
        raise PreconditionError("relativization needs a non-empty alphabet")
    return core.disj([atom(n) for n in names])


def enf(phi: Formula, sigma: Iterable[str]) -> Formula:
    """Conjoin the requirement that every point is an action point."""
    return and_(phi, weak_always(_act(sigma)))


def onf(phi: Formula, sigma: Iterable[str]) -> Formula:
    """Relativize ``phi`` to the points labelled by ``sigma``.

    Atoms from ``sigma`` and existential operators are guarded with the
    action disjunct; universal operators only constrain action points.
    Atoms outside ``sigma`` pass through bare.  The shape of the formula
    is preserved node for node.
    """
    act = _act(sigma)
    sigma = frozenset(sigma)

    def walk(node: Formula) -> Formula:
        match node:
            case Atom(name=name):
                return and_(node, act) if name in sigma else node
            case Top() | Bottom():
                return node
            case core.Not(arg=a):
                return not_(walk(a))
            case core.And(left=l, right=r):
                return and_(walk(l), walk(r))
            case core.Or(left=l, right=r):
                return or_(walk(l), walk(r))
            case core.Implies(left=l, right=r):
                return implies(walk(l), walk(r))
            case core.Until(interval=i, left=l, right=r):
                return core.until(implies(act, walk(l)), and_(walk(r), act), i)
            case Since(interval=i, left=l, right=r):
                return since(implies(act, walk(l)), and_(walk(r), act), i)
            case core.WeakUntil(interval=i, left=l, right=r):
                return core.weak_until(implies(act, walk(l)), and_(walk(r), act), i)
            case core.Eventually(interval=i, arg=a):
                return core.eventually(and_(walk(a), act), i)
            case core.Always(interval=i, arg=a):
                return core.always(implies(act, walk(a)), i)
            case Once(interval=i, arg=a):
                return once(and_(walk(a), act), i)
            case Historically(interval=i, arg=a):
                return historically(implies(act, walk(a)), i)
            case core.WeakEventually(interval=i, arg=a):
                return core.weak_eventually(and_(walk(a), act), i)
            case core.WeakAlways(interval=i, arg=a):
                return weak_always(implies(act, walk(a)), i)
            case core.Next(interval=i, arg=a):
                return core.until(not_(act), and_(walk(a), act), i)
            case _:
                raise core.InternalError(f"unknown node {type(node).__name__}")

    last_point = core.always(bottom())
    return and_(walk(phi), and_(act, implies(last_point, act)))


# ---------------------------------------------------------------------------
# Witness marking


def _with_prop(word: TimedWord, name: str, vec: Sequence[bool]) -> TimedWord:
    points = tuple(
        (e | {name}, t) if hit else (e, t) for (e, t), hit in zip(word.points, vec)
    )
    return TimedWord(points)


def mark_witnesses(flat: FlatResult, word: TimedWord) -> TimedWord:
    """Label ``word`` with every definition's witness, innermost first, so
    each body is evaluated on a word that already carries the witnesses it
    mentions.  Base propositions absent from the word are simply false."""
    have = set(word.propositions())
    pending = set(flat.witnesses)
    for defn in flat.defs:
        if defn.witness in have:
            raise PreconditionError(f"word already carries witness {defn.witness!r}")
        missing = propositions_of(defn.body) & pending
        if missing:
            raise PreconditionError(
                f"definition of {defn.witness!r} mentions unmarked {sorted(missing)}"
            )
        vec = semantics._vector(word, defn.body)
        word = _with_prop(word, defn.witness, vec)
        have.add(defn.witness)
        pending.discard(defn.witness)
    return word


# ---------------------------------------------------------------------------
# Untimed Since removal


@dataclass(frozen=True)
class SinceSub:
    """A Since witness scheduled for recurrence marking: name <-> c S f."""

    name: str
    c: Formula
    f: Formula


def _wn(phi: Formula) -> Formula:
    # weak next: vacuously true at the last point
    return or_(core.always(bottom()), next_(phi))


def _nu_clauses(r: Formula, c: Formula, f: Formula) -> list[Formula]:
    return [
        weak_always(implies(f, _wn(r))),
        not_(r),
        weak_always(implies(and_(r, c), _wn(r))),
        weak_always(implies(and_(r, and_(not_(c), not_(f))), _wn(not_(r)))),
        weak_always(implies(and_(not_(r), not_(f)), _wn(not_(r)))),
    ]


def eliminate_since_def(defn: TemporalDefinition) -> Formula:
    """Replace Gw (r <-> c S f) by a step recurrence: r starts false, is
    set after an f-point, survives c-points, and falls otherwise."""
    body = defn.body
    if not isinstance(body, Since) or body.interval != FULL:
        raise PreconditionError("only an untimed Since definition can be eliminated")
    if not (_atomic(body.left) and _atomic(body.right)):
        raise PreconditionError("Since arguments must be atomic; flatten first")
    return conj(_nu_clauses(atom(defn.witness), body.left, body.right))


def mark_since_props(word: TimedWord, subs: Sequence[SinceSub]) -> TimedWord:
    """Label ``word`` with each Since witness by running its recurrence:
    the witness is false at the first point and true at i+1 exactly when f
    held at i or the witness and c both held at i."""
    for sub in subs:
        if sub.name in word.propositions():
            raise PreconditionError(f"word already carries {sub.name!r}")
        cv = semantics._vector(word, sub.c)
        fv = semantics._vector(word, sub.f)
        vec = [False]
        for i in range(len(word) - 1):
            vec.append(fv[i] or (vec[i] and cv[i]))
        word = _with_prop(word, sub.name, vec)
    return word


# ---------------------------------------------------------------------------
# Non-punctual Since intervals


def _since_pieces(interval: Interval) -> list[Interval]:
    l, u = interval.lower, int(interval.upper) if interval.bounded else None
    if u is None:
        return [interval]
    if u == l + 1:
        if interval.left_closed and interval.right_closed:
            return [Interval(l, u, True, False), Interval(l, u, False, True)]
        return [interval]
    pieces = [Interval(t, t + 1, True, False) for t in range(l, u)]
    if not interval.left_closed:
        pieces[0] = Interval(l, l + 1, False, False)
    if interval.right_closed:
        pieces.append(Interval(u - 1, u, False, True))
    return pieces


def _expand_piece(a: Formula, b: Formula, piece: Interval) -> Formula:
    parts = [once(b, piece), since(a, b)]
    # the guard window reaches back l, including l itself when the piece
    # excludes it; at zero there is no strictly-past point to guard
    if piece.lower > 0:
        guard = Interval(0, piece.lower, True, not piece.left_closed)
        parts.append(historically(and_(a, since(a, b)), guard))
    return conj(parts)


def rewrite_snp(phi: Formula) -> Formula:
    """Rewrite every timed Since into untimed Since plus Once/Historically
    bounds, splitting the interval into unit and unbounded pieces first.
    Punctual Since has no such form and is rejected."""

    def walk(node: Formula) -> Formula:
        if isinstance(node, Since):
            if node.interval.punctual:
                raise PreconditionError("punctual Since cannot be rewritten")
            left, right = walk(node.left), walk(node.right)
            if node.interval == FULL:
                return since(left, right)
            return core.disj(
                [_expand_piece(left, right, piece) for piece in _since_pieces(node.interval)]
            )
        return _rebuild(node, walk)

    return walk(phi)
