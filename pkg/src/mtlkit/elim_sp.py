"""Simple-projection elimination of past operators.

A flattened definition ``Gw (b <-> P<I> a)`` is replaced by a marking
formula whose models carry only extra labels, never extra points.  Each
a-point gets one of two alternating colour bits; a pair of consecutive
a-points whose windows do not chain gets a depth-indexed start/end mark,
and the no-b zone between the two windows is covered by the
intersection of two colour-matched over-approximations (one measured
from the pair's start, one from its end).  Pairs too far apart for any
window overlap are handled by a separate pair of marks with an
until-chain.  Since no points are added, the construction preserves the
non-punctual fragment.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

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
    conj,
    eventually,
    iff,
    implies,
    not_,
    or_,
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
    eliminate_since_def,
    enf,
    flatten,
    mark_witnesses,
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

SP_CONJUNCTS = (
    "mark_b",
    "mark_first",
    "mark_last",
    "mark_a",
    "mark_xyc",
    "mark_begend_d",
    "mark_succ_inf",
    "mark_notb_c",
    "mark_notb_inf",
    "mark_l0",
)

_SINGLE_ROLES = ("a0", "a1", "x0", "x1", "y0", "y1", "binf1", "binf2")


@dataclass(frozen=True)
class RegionIntervalPair:
    """Two half-open rational intervals over-approximating the no-b zone
    of a close pair, one anchored at the pair's end (``i1``) and one at
    its start (``i2``), together with the zone depth ``d``."""

    i1: tuple[Fraction, Fraction]
    i2: tuple[Fraction, Fraction]
    d: int


def compute_region_pair(tau_j, tau_k, l: int, u: int) -> RegionIntervalPair:
    tau_j, tau_k = Fraction(tau_j), Fraction(tau_k)
    gap = tau_k - tau_j
    if not (u - l < gap <= u):
        raise PreconditionError(f"gap {gap} outside (u-l, u] = ({u - l}, {u}]")
    d = math.ceil(gap) + l - u
    if not 1 <= d <= l:
        raise core.InternalError(f"zone depth {d} escaped [1, {l}]")
    i1 = (tau_k + l - d, tau_k + l)
    i2 = (tau_j + u, tau_j + u + d)
    return RegionIntervalPair(i1, i2, d)


@dataclass(frozen=True)
class SpEliminationOutput:
    """Marking formula for one definition plus the fresh names a witness
    builder fills in: the colour bits, the zone over-approximation marks
    per colour, the far-pair marks, and one (beg, end) pair per zone
    depth.  A depth-0 family appears only for an open-open window, whose
    edge-to-edge pairs leave a single-point zone."""

    mark: Formula
    a: Formula
    b: str
    interval: Interval
    bits: tuple[str, str]
    xs: tuple[str, str]
    ys: tuple[str, str]
    inf: tuple[str, str]
    families: tuple[tuple[int, str, str], ...]

    @property
    def l(self) -> int:
        return self.interval.lower

    @property
    def u(self) -> int:
        return int(self.interval.upper)

    @property
    def fresh(self) -> tuple[str, ...]:
        flat = [*self.bits, *self.xs, *self.ys, *self.inf]
        for _, beg, end in self.families:
            flat += [beg, end]
        return tuple(flat)


def elim_unbounded_past_sp(defn: TemporalDefinition) -> Formula:
    """Replace ``Gw (b <-> P[l,inf) a)`` by an equivalent formula with no
    fresh propositions: b stays off until the first a-point and through
    its window prefix, and every a-point turns b on for good."""
    a, ivl = past_body(defn)
    if ivl.bounded:
        raise PreconditionError("bounded window: use elim_bounded_past_sp")
    ivl = semantics.strict_normalize(ivl)
    b = atom(defn.witness)
    lo = ivl.lower
    hold = or_(
        weak_always(not_(a)),
        weak_always(implies(a, always(b, Interval(lo, INF, ivl.left_closed, False)))),
    )
    if lo == 0:
        head = and_(a, not_(b))
    else:
        head = and_(a, weak_always(not_(b), Interval(0, lo, True, not ivl.left_closed)))
    quiet = and_(not_(a), not_(b))
    first = or_(weak_always(quiet), weak_until(quiet, head))
    return and_(hold, first)


def _sp_parts(
    a: Formula,
    b_name: str,
    ivl: Interval,
    out: SpEliminationOutput,
    s_of: dict,
    drop: frozenset[str],
) -> list[tuple[str, Formula]]:
    """Conjuncts of the marking formula.  ``ivl`` must carry canonical
    brackets.  ``s_of`` maps a family depth (or "inf") to a proposition
    replacing that family's untimed Since, for the recurrence form."""
    b = atom(b_name)
    bits = tuple(map(atom, out.bits))
    xs = tuple(map(atom, out.xs))
    ys = tuple(map(atom, out.ys))
    inf1, inf2 = map(atom, out.inf)
    lo, hi = ivl.lower, int(ivl.upper)
    both_open = not ivl.left_closed and not ivl.right_closed
    parts: list[tuple[str, Formula]] = []

    def emit(name: str, f: Formula) -> None:
        if name not in drop:
            parts.append((name, f))

    # every a-point turns b on throughout its window
    emit("mark_b", weak_always(implies(a, always(b, ivl))))

    # before the first a-point, and through its window prefix, b is off
    if lo == 0:
        tail = not_(b)
    else:
        tail = weak_always(not_(b), Interval(0, lo, True, not ivl.left_closed))
    quiet = and_(not_(a), not_(b))
    emit("mark_first", or_(weak_always(quiet), weak_until(quiet, and_(a, tail))))

    # after the final a-point the windows run dry
    win_last = Interval(hi, INF, not ivl.right_closed, False)
    emit("mark_last", weak_always(implies(always(not_(a)), always(not_(b), win_last))))

    # colour bits: every a-point carries exactly one; the first carries
    # bit 0; the bit flips exactly when the next a-point is too far for
    # the windows to chain
    near = Interval(0, hi - lo, True, not both_open)
    colouring = and_(
        weak_always(iff(or_(bits[0], bits[1]), a)),
        weak_always(or_(not_(bits[0]), not_(bits[1]))),
    )
    start = or_(weak_always(not_(a)), weak_until(not_(a), and_(a, bits[0])))
    steps = []
    for i in (0, 1):
        far = implies(
            and_(bits[i], always(not_(a), near)),
            or_(always(not_(a)), until(not_(a), and_(a, bits[1 - i]))),
        )
        close = implies(
            and_(bits[i], eventually(a, near)),
            until(not_(a), and_(a, bits[i])),
        )
        steps.append(weak_always(and_(far, close)))
    emit("mark_a", conj([colouring, start, *steps]))

    # zone over-approximations, one per family and colour: from the pair
    # start d ahead of the window edge, from the pair end d behind it
    xy = []
    begend = []
    for d, beg_name, end_name in out.families:
        beg_d, end_d = atom(beg_name), atom(end_name)
        depth = max(d, 1)
        x_win = Interval(hi, hi + depth, not ivl.right_closed, not ivl.left_closed)
        y_win = Interval(lo - depth, lo, True, not ivl.left_closed)
        for cbit in (0, 1):
            xy.append(
                weak_always(
                    implies(and_(beg_d, bits[cbit]), always(xs[cbit], x_win))
                )
            )
            xy.append(
                weak_always(
                    implies(and_(end_d, bits[cbit]), weak_always(ys[1 - cbit], y_win))
                )
            )
        if d == 0:
            # edge-to-edge pair: the next a sits at gap exactly u - l
            t = hi - lo - 1
            det = and_(
                until(not_(a), a, Interval(t, t + 1, False, True)),
                always(not_(a), Interval(t, t + 1, False, False)),
            )
        else:
            t = hi - lo + d - 1
            det = until(not_(a), a, Interval(t, t + 1, False, True))
        begend.append(weak_always(iff(beg_d, and_(a, det))))
        chain = atom(s_of[d]) if d in s_of else since(not_(a), beg_d)
        begend.append(weak_always(iff(end_d, and_(a, chain))))
    if xy:
        emit("mark_xyc", conj(xy))
    if begend:
        emit("mark_begend_d", conj(begend))

    # pairs beyond any window overlap
    far_next = until(not_(a), a, Interval(hi, INF, False, False))
    inf_chain = atom(s_of["inf"]) if "inf" in s_of else since(not_(a), inf1)
    emit(
        "mark_succ_inf",
        and_(
            weak_always(iff(inf1, and_(a, far_next))),
            weak_always(iff(inf2, and_(a, inf_chain))),
        ),
    )

    # a colour-matched intersection of the two over-approximations is
    # inside a real zone
    emit(
        "mark_notb_c",
        and_(
            weak_always(implies(and_(xs[0], ys[0]), not_(b))),
            weak_always(implies(and_(xs[1], ys[1]), not_(b))),
        ),
    )

    # for a far pair, b dies out after the start's window and stays off
    # through the end's window prefix
    v = Interval(0, hi, True, ivl.right_closed)
    last_b = weak_always(
        implies(
            and_(inf1, weak_eventually(b, v)),
            weak_eventually(and_(b, until(not_(b), inf2)), v),
        )
    )
    no_b = weak_always(
        implies(
            and_(inf1, weak_always(not_(b), v)),
            and_(not_(b), until(not_(b), inf2)),
        )
    )
    if lo == 0:
        prefix = weak_always(implies(inf2, not_(b)))
    else:
        prefix = weak_always(
            implies(inf2, weak_always(not_(b), Interval(0, lo, True, not ivl.left_closed)))
        )
    emit("mark_notb_inf", conj([last_b, no_b, prefix]))

    if lo == 0 and not ivl.right_closed:
        # a pair at gap exactly u leaves a single non-b point: its end
        pin = weak_always(
            implies(
                conj(
                    [
                        a,
                        always(not_(a), Interval(0, hi, True, False)),
                        eventually(a, Interval(0, hi, True, True)),
                    ]
                ),
                eventually(not_(b), Interval(0, hi, True, True)),
            )
        )
        emit("mark_l0", pin)

    return parts


def elim_bounded_past_sp(
    defn: TemporalDefinition,
    fresh: FreshNames,
    drop: frozenset[str] = frozenset(),
) -> SpEliminationOutput:
    a, ivl = past_body(defn)
    if ivl.punctual:
        raise PreconditionError("punctual window has no simple marking")
    if not ivl.bounded:
        raise PreconditionError("unbounded window: use elim_unbounded_past_sp")
    drop = check_drop(drop, SP_CONJUNCTS)
    ivl = semantics.strict_normalize(ivl)
    w = defn.witness
    singles = tuple(fresh.role(role, w) for role in _SINGLE_ROLES)
    lo = ivl.lower
    both_open = not ivl.left_closed and not ivl.right_closed
    depths = list(range(1, lo + 1))
    if both_open and lo >= 1:
        depths.append(0)
    families = tuple(
        (d, fresh.role(f"beg{d}", w), fresh.role(f"end{d}", w)) for d in depths
    )
    out = SpEliminationOutput(
        mark=core.top(),
        a=a,
        b=w,
        interval=ivl,
        bits=singles[0:2],
        xs=singles[2:4],
        ys=singles[4:6],
        inf=singles[6:8],
        families=families,
    )
    parts = _sp_parts(a, w, ivl, out, {}, drop)
    return SpEliminationOutput(
        conj([f for _, f in parts]), a, w, ivl, out.bits, out.xs, out.ys,
        out.inf, families,
    )


def simple_witness(word: TimedWord, out: SpEliminationOutput) -> TimedWord:
    """Extend a model of the definition with the colour bits and the zone
    marks.  Only labels are added; erasing the fresh propositions gives
    back ``word`` exactly."""
    if not word.strict:
        raise PreconditionError("marking starts from a strict word")
    present = word.propositions()
    clash = present & set(out.fresh)
    if clash:
        raise PreconditionError(f"word already carries {sorted(clash)}")
    defn = TemporalDefinition(out.b, core.once(out.a, out.interval))
    if not semantics.satisfies(word, defn.as_formula):
        raise PreconditionError("word is not a model of the definition")

    times = word.times
    n = len(word)
    marks: dict[str, list[bool]] = {name: [False] * n for name in out.fresh}
    hits = semantics._vector(word, out.a)
    spots = [i for i, hit in enumerate(hits) if hit]
    slack = out.u - out.l
    both_open = not out.interval.left_closed and not out.interval.right_closed
    by_depth = {d: (beg, end) for d, beg, end in out.families}

    bit = 0
    for pos, nxt in zip(spots, [*spots[1:], None]):
        marks[out.bits[bit]][pos] = True
        if nxt is None:
            break
        gap = times[nxt] - times[pos]
        wide = gap >= slack if both_open else gap > slack
        if not wide:
            continue
        if gap <= out.u:
            if gap == slack:
                d = 0
            else:
                d = compute_region_pair(times[pos], times[nxt], out.l, out.u).d
            if d == 0 and out.l == 0:
                # edge-to-edge pair of an open window with no prefix: the
                # zone is the pair's end itself, already unlabelled
                bit = 1 - bit
                continue
            beg_name, end_name = by_depth[d]
            marks[beg_name][pos] = True
            marks[end_name][nxt] = True
            depth = max(d, 1)
            x_win = Interval(
                out.u, out.u + depth,
                not out.interval.right_closed, not out.interval.left_closed,
            )
            y_win = Interval(out.l - depth, out.l, True, not out.interval.left_closed)
            for p in range(n):
                if x_win.contains(times[p] - times[pos]):
                    marks[out.xs[bit]][p] = True
                if y_win.contains(times[p] - times[nxt]):
                    marks[out.ys[bit]][p] = True
        else:
            marks[out.inf[0]][pos] = True
            marks[out.inf[1]][nxt] = True
        bit = 1 - bit

    points = []
    for i, (events, t) in enumerate(word.points):
        extra = {name for name in out.fresh if marks[name][i]}
        points.append((events | extra, t))
    return TimedWord(tuple(points))


def reduce_sp(phi: Formula, drop: frozenset[str] = frozenset()) -> ReductionResult:
    """Full pipeline: rewrite timed Since, flatten the past, then replace
    every definition by its marking.  The output is future-only and is
    satisfied exactly by labellings of models of ``phi``; a non-punctual
    input yields a non-punctual output."""
    sigma = checked_alphabet(phi, REDUCIBLE)
    drop = check_drop(drop, SP_CONJUNCTS)
    fresh = FreshNames(sigma)
    flat = flatten(rewrite_snp(phi), "past_only", fresh)
    conjs = [enf(flat.skeleton, sigma)]
    props = [FreshProp(w, "witness") for w in flat.witnesses]
    parts: list[DefPart] = []
    for defn in flat.defs:
        kind = def_kind(defn)
        if kind == "bounded":
            out = elim_bounded_past_sp(defn, fresh, drop=drop)
            s_of = {d: fresh.role(f"s{d}", defn.witness) for d, _, _ in out.families}
            s_of["inf"] = fresh.role("sinf", defn.witness)
            named = _sp_parts(out.a, out.b, out.interval, out, s_of, drop)
            subs = tuple(
                SinceSub(s_of[d], not_(out.a), atom(beg)) for d, beg, _ in out.families
            ) + (SinceSub(s_of["inf"], not_(out.a), atom(out.inf[0])),)
            zeta = and_(
                conj([f for _, f in named]),
                conj([conj(_nu(sub)) for sub in subs]),
            )
            owned = tuple(
                FreshProp(name, role, defn.witness)
                for name, role in zip(out.fresh, _roles_of(out))
            ) + tuple(FreshProp(s_of[key], "since", defn.witness) for key in s_of)
            parts.append(DefPart(defn, kind, zeta, owned, subs, out))
        elif kind == "unbounded":
            parts.append(DefPart(defn, kind, elim_unbounded_past_sp(defn)))
        elif kind == "since":
            parts.append(DefPart(defn, kind, eliminate_since_def(defn)))
        else:
            parts.append(DefPart(defn, kind, defn.as_formula))
        conjs.append(parts[-1].formula)
        props.extend(parts[-1].fresh)
    return ReductionResult(
        sigma, conj(conjs), "simple", flat, tuple(parts), tuple(props)
    )


def _roles_of(out: SpEliminationOutput) -> list[str]:
    roles = list(_SINGLE_ROLES)
    for d, _, _ in out.families:
        roles += [f"beg{d}", f"end{d}"]
    return roles


def _nu(sub: SinceSub):
    from mtlkit.normal_forms import _nu_clauses

    return _nu_clauses(atom(sub.name), sub.c, sub.f)
