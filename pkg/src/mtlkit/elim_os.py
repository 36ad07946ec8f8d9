"""Oversampled elimination of past operators.

A flattened definition ``Gw (b <-> P<I> a)`` is replaced by a marking
formula over seven fresh propositions whose models may carry extra
points: an integer grid (``c``), start/end marks on pairs of
consecutive a-points too far apart for the obligation to pass from one
window to the next (``bs``/``be``), explicit window-boundary points
(``beg``/``end``), and grid anchors that tie those boundaries to the
cell of their source (``cbs``/``cbe``).  Between two consecutive
windows the b-free zone is swept by an until-chain from ``beg`` to
``end``.

Everything is wrapped in the marking normal form over the alphabet plus
the fresh propositions, so the added points stay invisible to the
surrounding formula and the construction composes definition by
definition.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional

from mtlkit import core, semantics
from mtlkit.core import (
    INF,
    Formula,
    Interval,
    PreconditionError,
    TimedWord,
    always,
    and_,
    atom,
    bottom,
    conj,
    eventually,
    iff,
    implies,
    next_,
    not_,
    once,
    or_,
    propositions_of,
    since,
    until,
    weak_always,
    weak_eventually,
    weak_until,
)
from mtlkit.normal_forms import (
    FreshNames,
    SinceSub,
    TemporalDefinition,
    _act,
    _nu_clauses,
    flatten,
    onf,
    rewrite_snp,
)
from mtlkit.reduction import (
    REDUCIBLE,
    DefPart,
    FreshProp,
    ReductionResult,
    check_drop,
    checked_alphabet,
    def_kind,
    past_body,
)

OS_CONJUNCTS = (
    "mark_b",
    "mark_first",
    "mark_c",
    "mark_last",
    "mark_jk",
    "mark_begend",
    "mark_notb",
    "mark_cb",
    "mark_l0pin",
)

_ROLES = ("bs", "be", "beg", "end", "c", "cbs", "cbe")


@dataclass(frozen=True)
class OsEliminationOutput:
    """Marking formula for one definition plus the data a witness builder
    needs: the fresh names in role order (bs, be, beg, end, c, cbs, cbe),
    the defined obligation ``b <-> P<interval> a``, and the alphabet the
    marking was relativized to.  The interval carries its canonical
    brackets (a closed zero lower bound is opened)."""

    mark: Formula
    fresh: tuple[str, ...]
    a: Formula
    b: str
    interval: Interval
    sigma: frozenset[str]

    @property
    def l(self) -> int:
        return self.interval.lower

    @property
    def u(self) -> int:
        return int(self.interval.upper)


def _check_alphabet(defn: TemporalDefinition, sigma: frozenset[str]) -> None:
    need = propositions_of(defn.body) | {defn.witness}
    if not need <= sigma:
        raise PreconditionError(
            f"definition mentions {sorted(need - sigma)} outside the alphabet"
        )


def elim_unbounded_past_os(defn: TemporalDefinition, sigma) -> Formula:
    """Replace ``Gw (b <-> P[l,inf) a)`` by an action-relativized formula:
    b is off until the first a-point, where it stays off through the
    window prefix, and every a-point turns b on for good once the lower
    bound has passed."""
    a, ivl = past_body(defn)
    if ivl.bounded:
        raise PreconditionError("bounded window: use elim_bounded_past_os")
    sigma = frozenset(sigma)
    _check_alphabet(defn, sigma)
    ivl = semantics.strict_normalize(ivl)
    act = _act(sigma)
    b = atom(defn.witness)
    lo = ivl.lower
    quiet = implies(act, and_(not_(a), not_(b)))
    if lo == 0:
        tail = not_(b)
    else:
        tail = weak_always(
            implies(act, not_(b)), Interval(0, lo, True, not ivl.left_closed)
        )
    first = or_(weak_always(quiet), weak_until(quiet, and_(and_(a, act), tail)))
    window = Interval(lo, INF, ivl.left_closed, False)
    hold = weak_always(implies(and_(a, act), always(implies(act, b), window)))
    return and_(first, hold)


def _os_parts(
    a: Formula,
    b_name: str,
    ivl: Interval,
    names: tuple[str, ...],
    sigma: frozenset[str],
    s_name: Optional[str],
    drop: frozenset[str],
) -> tuple[list[tuple[str, Formula]], Optional[SinceSub]]:
    """The conjuncts of the marking formula, before relativization.

    ``ivl`` must carry canonical brackets.  With ``s_name`` the untimed
    Since inside the pair detector is replaced by that proposition and the
    matching recurrence input is returned for witness building.
    """
    act = _act(sigma)
    b = atom(b_name)
    bs, be, beg, end, c, cbs, cbe = map(atom, names)
    lo, hi = ivl.lower, int(ivl.upper)
    both_open = not ivl.left_closed and not ivl.right_closed
    a_act = and_(a, act)
    no_a = implies(act, not_(a))
    no_b = implies(act, not_(b))
    parts: list[tuple[str, Formula]] = []

    def emit(name: str, f: Formula) -> None:
        if name not in drop:
            parts.append((name, f))

    # every a-point turns b on throughout its window
    emit("mark_b", weak_always(implies(a_act, always(implies(act, b), ivl))))

    # before the first a-point, and through its window prefix, b is off
    if lo == 0:
        tail = not_(b)
    else:
        tail = weak_always(not_(b), Interval(0, lo, True, not ivl.left_closed))
    fresh_start = and_(not_(a), not_(b))
    emit(
        "mark_first",
        or_(weak_always(fresh_start), weak_until(fresh_start, and_(a, tail))),
    )

    # the c-grid: a point now, then one per unit until time runs out
    cell = Interval(0, 1, True, False)
    c_step = and_(
        always(not_(c), Interval(0, 1, False, False)),
        eventually(c, Interval(0, 1, False, True)),
    )
    c_stop = weak_eventually(always(bottom()), cell)
    emit("mark_c", and_(c, weak_always(implies(c, or_(c_stop, c_step)))))

    # after the final a-point the windows run dry
    win_last = Interval(hi, INF, not ivl.right_closed, False)
    emit(
        "mark_last",
        weak_always(implies(always(not_(a)), always(not_(b), win_last))),
    )

    # bs/be frame pairs of consecutive a-points whose windows do not chain;
    # an open window with a prefix also pairs edge-to-edge gaps, while at
    # lo = 0 the edge case is a lone point handled by the pin below
    pair_gap = Interval(hi - lo, INF, both_open and lo >= 1, False)
    jk_start = iff(bs, and_(a_act, until(no_a, a_act, pair_gap)))
    pair_since = atom(s_name) if s_name else since(no_a, and_(bs, act))
    jk_end = iff(be, and_(a_act, pair_since))
    emit("mark_jk", and_(weak_always(jk_start), weak_always(jk_end)))
    sub = SinceSub(s_name, no_a, and_(bs, act)) if s_name else None

    # each bs demands a beg mark exactly u later (unless time runs out);
    # each be an end mark exactly l later, or on itself when l = 0
    run_out_u = weak_eventually(always(bottom()), Interval(0, hi, True, False))
    beg_there = conj(
        [
            always(not_(beg), Interval(hi, hi + 1, False, False)),
            eventually(beg, Interval(hi, hi + 1, True, False)),
            always(not_(beg), Interval(hi - 1, hi, False, False)),
        ]
    )
    bs_part = weak_always(implies(bs, or_(run_out_u, beg_there)))
    if lo == 0:
        be_part = weak_always(and_(iff(be, end), implies(be, not_(b))))
    else:
        run_out_l = weak_eventually(always(bottom()), Interval(0, lo, True, False))
        end_there = and_(
            eventually(end, Interval(lo - 1, lo, False, True)),
            always(not_(end), Interval(lo, lo + 1, False, False)),
        )
        # the unit just before the true end spot stays clean even when the
        # word runs out: a stray end there would cut the zone sweep short,
        # and the grid cell that could object is the one holding be, which
        # cbe waives; honest ends of other pairs never land there because
        # pair gaps exceed the slack
        no_slip = always(not_(end), Interval(lo - 1, lo, False, False))
        be_part = weak_always(
            implies(be, and_(no_slip, or_(run_out_l, end_there)))
        )
    emit("mark_begend", and_(bs_part, be_part))

    # between beg and the matching end (or forever, when the end mark fell
    # beyond the word) no action point carries b
    closer = and_(end, no_b) if not ivl.left_closed else end
    sweep = or_(
        weak_until(and_(not_(end), no_b), closer),
        weak_always(and_(not_(end), no_b)),
    )
    if ivl.right_closed:
        # the beg point itself may legitimately carry b
        sweep = or_(always(bottom()), next_(sweep))
    emit("mark_notb", weak_always(implies(beg, sweep)))

    # grid anchors: a cell knows whether it contains a bs/be, and a cell
    # without one keeps the matching boundary window clean; no boundary
    # marks before the first window can close
    cb = conj(
        [
            weak_always(iff(cbs, and_(c, weak_eventually(bs, cell)))),
            weak_always(iff(cbe, and_(c, weak_eventually(be, cell)))),
            weak_always(
                implies(
                    and_(c, not_(cbs)),
                    weak_always(not_(beg), Interval(hi, hi + 1, True, False)),
                )
            ),
            weak_always(
                implies(
                    and_(c, not_(cbe)),
                    weak_always(not_(end), Interval(lo, lo + 1, True, False)),
                )
            ),
            weak_always(
                and_(not_(beg), not_(end)), Interval(0, hi, True, False)
            ),
        ]
    )
    emit("mark_cb", cb)

    if lo == 0 and not ivl.right_closed:
        # a pair at gap exactly u leaves an empty zone; pin the window edge
        pin = weak_always(
            implies(
                conj(
                    [
                        a_act,
                        always(no_a, Interval(0, hi, True, False)),
                        eventually(a_act, Interval(0, hi, True, True)),
                    ]
                ),
                always(no_b, Interval(hi, hi, True, True)),
            )
        )
        emit("mark_l0pin", pin)

    return parts, sub


def elim_bounded_past_os(
    defn: TemporalDefinition,
    sigma,
    fresh: FreshNames,
    drop: frozenset[str] = frozenset(),
) -> OsEliminationOutput:
    a, ivl = past_body(defn)
    if ivl.punctual:
        raise PreconditionError("punctual window has no oversampled marking")
    if not ivl.bounded:
        raise PreconditionError("unbounded window: use elim_unbounded_past_os")
    drop = check_drop(drop, OS_CONJUNCTS)
    sigma = frozenset(sigma)
    _check_alphabet(defn, sigma)
    ivl = semantics.strict_normalize(ivl)
    names = tuple(fresh.role(role, defn.witness) for role in _ROLES)
    parts, _ = _os_parts(a, defn.witness, ivl, names, sigma, None, drop)
    mark = onf(conj([f for _, f in parts]), sigma | set(names))
    return OsEliminationOutput(mark, names, a, defn.witness, ivl, sigma)


def oversample_witness(word: TimedWord, out: OsEliminationOutput) -> TimedWord:
    """Extend a model of the relativized definition with the grid and the
    boundary marks, adding points where no point sits yet.  The result
    projects back onto ``word`` by deleting the added points and erasing
    the fresh propositions."""
    if not word.strict:
        raise PreconditionError("oversampling starts from a strict word")
    if word.time(1) != 0:
        raise PreconditionError("oversampling expects the first timestamp at 0")
    stray = word.propositions() - out.sigma
    if stray:
        raise PreconditionError(f"word carries stray propositions {sorted(stray)}")
    defn = TemporalDefinition(out.b, once(out.a, out.interval))
    if not semantics.satisfies(word, onf(defn.as_formula, out.sigma)):
        raise PreconditionError("word is not a model of the definition")

    bs, be, beg, end, c, cbs, cbe = out.fresh
    times = word.times
    last = times[-1]
    pool: dict[Fraction, set[str]] = {t: set(e) for e, t in word.points}

    def put(t: Fraction, name: str) -> None:
        pool.setdefault(t, set()).add(name)

    tick = Fraction(0)
    while tick <= last:
        put(tick, c)
        tick += 1

    hits = semantics._vector(word, out.a)
    spots = [i for i, hit in enumerate(hits) if hit]
    slack = out.u - out.l
    both_open = not out.interval.left_closed and not out.interval.right_closed
    for j, k in zip(spots, spots[1:]):
        gap = times[k] - times[j]
        if gap < slack or (gap == slack and not (both_open and out.l >= 1)):
            continue
        put(times[j], bs)
        put(times[k], be)
        if times[j] + out.u <= last:
            put(times[j] + out.u, beg)
        if times[k] + out.l <= last:
            put(times[k] + out.l, end)
        put(Fraction(math.floor(times[j])), cbs)
        put(Fraction(math.floor(times[k])), cbe)

    return TimedWord(tuple((frozenset(pool[t]), t) for t in sorted(pool)))


def reduce_os(phi: Formula, drop: frozenset[str] = frozenset()) -> ReductionResult:
    """Full pipeline: rewrite timed Since, flatten the past, then replace
    every definition by its marking.  The output is satisfied exactly by
    oversampled extensions of models of ``phi``."""
    sigma = checked_alphabet(phi, REDUCIBLE)
    drop = check_drop(drop, OS_CONJUNCTS)
    fresh = FreshNames(sigma)
    flat = flatten(rewrite_snp(phi), "past_only", fresh)
    ambient = frozenset(sigma | set(flat.witnesses))
    act = _act(ambient)
    conjs = [onf(flat.skeleton, ambient)]
    props = [FreshProp(w, "witness") for w in flat.witnesses]
    if flat.witnesses:
        base = _act(sigma)
        conjs.append(
            conj([weak_always(implies(atom(w), base)) for w in flat.witnesses])
        )
    parts: list[DefPart] = []
    for defn in flat.defs:
        kind = def_kind(defn)
        if kind == "bounded":
            out = elim_bounded_past_os(defn, ambient, fresh, drop=drop)
            s_name = fresh.role("s", defn.witness)
            named, sub = _os_parts(
                out.a, out.b, out.interval, out.fresh, ambient, s_name, drop
            )
            zeta = and_(
                onf(conj([f for _, f in named]), ambient | set(out.fresh)),
                conj(_nu_clauses(atom(s_name), sub.c, sub.f)),
            )
            owned = tuple(
                FreshProp(n, role, defn.witness)
                for n, role in zip(out.fresh, _ROLES)
            ) + (FreshProp(s_name, "since", defn.witness),)
            parts.append(DefPart(defn, kind, zeta, owned, (sub,), out))
        elif kind == "unbounded":
            parts.append(DefPart(defn, kind, elim_unbounded_past_os(defn, ambient)))
        elif kind == "since":
            body = defn.body
            s_name = fresh.role("s", defn.witness)
            sub = SinceSub(s_name, implies(act, body.left), and_(body.right, act))
            pin = weak_always(iff(atom(defn.witness), and_(atom(s_name), act)))
            zeta = and_(conj(_nu_clauses(atom(s_name), sub.c, sub.f)), pin)
            owned = (FreshProp(s_name, "since", defn.witness),)
            parts.append(DefPart(defn, kind, zeta, owned, (sub,)))
        else:
            parts.append(DefPart(defn, kind, onf(defn.as_formula, ambient)))
        conjs.append(parts[-1].formula)
        props.extend(parts[-1].fresh)
    return ReductionResult(
        sigma, conj(conjs), "oversampled", flat, tuple(parts), tuple(props)
    )
