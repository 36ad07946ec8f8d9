"""Flattening, alphabet relativization, Since removal, interval splitting."""

from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from mtlkit.core import (
    FULL,
    And,
    Historically,
    Interval,
    Once,
    PreconditionError,
    Since,
    TimedWord,
    WeakAlways,
    atom,
    and_,
    not_,
    once,
    or_,
    propositions_of,
    since,
    subformulas,
    weak_always,
)
from mtlkit.normal_forms import (
    FlatResult,
    FreshNames,
    SinceSub,
    TemporalDefinition,
    eliminate_since_def,
    enf,
    flatten,
    mark_since_props,
    mark_witnesses,
    onf,
    rewrite_snp,
)
from mtlkit.semantics import eval as mtl_eval
from mtlkit.semantics import satisfies
from mtlkit.syntax import parse_formula, parse_timed_word
from strategies import formulas, intervals, timed_words

BASE = settings(max_examples=100, deadline=None)

PAST = (Since, Once, Historically)


# ------------------------------------------------------------------ flatten


def test_flatten_example():
    flat = flatten(parse_formula("a U[0,3] (c S (P[0,1] d))"))
    assert flat.skeleton is parse_formula("a U[0,3] w1")
    assert flat.witnesses == ("w2", "w1")
    inner, outer = flat.defs
    assert inner == TemporalDefinition("w2", parse_formula("P[0,1] d"))
    assert outer == TemporalDefinition("w1", parse_formula("c S w2"))
    assert flat.formula is parse_formula(
        "(a U[0,3] w1) & (Gw ((w2 -> P[0,1] d) & (P[0,1] d -> w2))"
        " & Gw ((w1 -> (c S w2)) & ((c S w2) -> w1)))"
    )


def test_flatten_shares_subterms():
    phi = parse_formula("(P[0,1] a) U (b & P[0,1] a)")
    flat = flatten(phi)
    assert len(flat.defs) == 1
    assert flat.skeleton is parse_formula("w1 U (b & w1)")


def test_flatten_policies():
    phi = parse_formula("(F[0,1] a) & (P[0,1] b)")
    assert len(flatten(phi, "past_only").defs) == 1
    assert len(flatten(phi, "all").defs) == 2
    assert flatten(phi, "since_only").defs == ()
    with pytest.raises(PreconditionError):
        flatten(phi, "everything")


def test_flatten_historically_becomes_once():
    flat = flatten(parse_formula("H[0,2] a"))
    assert flat.skeleton is not_(atom("w1"))
    # the negated argument is hoisted into an aux definition
    assert flat.defs == (
        TemporalDefinition("v1", not_(atom("a"))),
        TemporalDefinition("w1", parse_formula("P[0,2] v1")),
    )


def test_flatten_nonatomic_args_get_aux_defs():
    flat = flatten(parse_formula("P[0,1] (a U b)"))
    by_name = {d.witness: d.body for d in flat.defs}
    assert by_name["v1"] is parse_formula("a U b")
    assert by_name["w1"] is once(atom("v1"), Interval(0, 1, True, True))
    for defn in flat.defs:
        if isinstance(defn.body, PAST):
            assert all(
                not isinstance(sub, PAST)
                for sub in subformulas(defn.body)
                if sub is not defn.body
            )


@given(formulas(max_leaves=6), timed_words(max_len=5), st.sampled_from(("past_only", "all")))
@BASE
def test_flatten_round_trip_under_marking(phi, w, policy):
    flat = flatten(phi, policy)
    marked = mark_witnesses(flat, w)
    assert satisfies(marked, flat.formula) == satisfies(w, phi)
    for name in flat.witnesses:
        assert name not in propositions_of(phi)


def test_mark_witnesses_rejects_collisions():
    flat = flatten(parse_formula("P a"))
    with pytest.raises(PreconditionError):
        mark_witnesses(flat, parse_timed_word("{a,w1}@0 {a}@1"))


def test_fresh_names():
    fresh = FreshNames(("a", "w2"))
    assert fresh.witness() == "w1"
    with pytest.raises(PreconditionError):
        fresh.witness()
    assert fresh.aux() == "v1"
    assert fresh.role("bs", "w1") == "bs_w1"


# ---------------------------------------------------------- relativization


def test_enf_shape():
    assert enf(atom("a"), ("b", "a")) is and_(
        atom("a"), weak_always(or_(atom("a"), atom("b")))
    )
    with pytest.raises(PreconditionError):
        enf(atom("a"), ())


def test_onf_anchors_on_action_points():
    psi = onf(parse_formula("true"), ("a",))
    assert satisfies(parse_timed_word("{a}@0 {x}@1"), psi)
    assert not satisfies(parse_timed_word("{x}@0 {a}@1"), psi)


def _insert_silent(w: TimedWord, picks) -> TimedWord:
    taken = set(w.times)
    points = list(w.points)
    for tick in picks:
        t = Fraction(tick, 4)
        if t <= w.times[0] or t in taken:
            continue
        taken.add(t)
        points.append((frozenset({"x"}), t))
    points.sort(key=lambda p: p[1])
    return TimedWord(tuple(points))


@given(
    formulas(max_leaves=5, names=("a", "b")),
    timed_words(names=("a", "b"), max_len=4),
    st.lists(st.integers(1, 30), max_size=3),
)
@BASE
def test_onf_ignores_silent_points(phi, w, picks):
    # inserting x-only points never changes the relativized verdict
    ext = _insert_silent(w, picks)
    assert satisfies(ext, onf(phi, ("a", "b"))) == satisfies(w, phi)


# ------------------------------------------------------------ Since removal


def test_eliminate_since_def_preconditions():
    with pytest.raises(PreconditionError):
        eliminate_since_def(TemporalDefinition("r", since(atom("a"), atom("b"), Interval(0, 2))))
    with pytest.raises(PreconditionError):
        eliminate_since_def(TemporalDefinition("r", once(atom("a"))))
    with pytest.raises(PreconditionError):
        eliminate_since_def(
            TemporalDefinition("r", since(and_(atom("a"), atom("b")), atom("c")))
        )


def test_eliminate_since_def_clause_shapes():
    out = eliminate_since_def(TemporalDefinition("r", since(atom("c"), atom("f"))))
    clauses = []
    while isinstance(out, And):
        clauses.append(out.left)
        out = out.right
    clauses.append(out)
    assert len(clauses) == 5
    assert clauses[1] is not_(atom("r"))
    assert all(
        isinstance(c, WeakAlways) for i, c in enumerate(clauses) if i != 1
    )


@given(timed_words(names=("c", "f"), max_len=7))
@BASE
def test_since_recurrence_matches_since(w):
    sub = SinceSub("r", atom("c"), atom("f"))
    marked = mark_since_props(w, [sub])
    target = since(atom("c"), atom("f"))
    for pos in range(1, len(w) + 1):
        assert ("r" in marked.event(pos)) == mtl_eval(w, pos, target)
    defn = TemporalDefinition("r", target)
    assert satisfies(marked, eliminate_since_def(defn))


@given(timed_words(names=("c", "f"), max_len=6), st.data())
@BASE
def test_since_recurrence_pins_the_witness(w, data):
    sub = SinceSub("r", atom("c"), atom("f"))
    marked = mark_since_props(w, [sub])
    clauses = eliminate_since_def(TemporalDefinition("r", since(atom("c"), atom("f"))))
    pos = data.draw(st.integers(0, len(w) - 1))
    ev, t = marked.points[pos]
    flipped = marked.points[:pos] + ((ev ^ {"r"}, t),) + marked.points[pos + 1 :]
    assert not satisfies(TimedWord(flipped), clauses)


def test_mark_since_props_rejects_collision():
    with pytest.raises(PreconditionError):
        mark_since_props(
            parse_timed_word("{r}@0"), [SinceSub("r", atom("a"), atom("b"))]
        )


# ------------------------------------------------------- interval splitting


def test_rewrite_snp_rejects_punctual():
    with pytest.raises(PreconditionError):
        rewrite_snp(since(atom("a"), atom("b"), Interval(1, 1, True, True)))


def test_rewrite_snp_leaves_untimed_since():
    phi = since(atom("a"), atom("b"))
    assert rewrite_snp(phi) is phi


def test_rewrite_snp_output_shape():
    out = rewrite_snp(since(atom("a"), atom("b"), Interval(0, 3)))
    for node in subformulas(out):
        if isinstance(node, Since):
            assert node.interval == FULL


@given(
    st.sampled_from(("a", "b")),
    st.sampled_from(("a", "b")),
    intervals(punctual=False),
    timed_words(names=("a", "b"), max_len=6),
)
@BASE
def test_rewrite_snp_pointwise_equivalent(lname, rname, ivl, w):
    phi = since(atom(lname), atom(rname), ivl)
    out = rewrite_snp(phi)
    for pos in range(1, len(w) + 1):
        assert mtl_eval(w, pos, phi) == mtl_eval(w, pos, out)


@given(formulas(max_leaves=5, punctual=False), timed_words(max_len=5))
@BASE
def test_rewrite_snp_equivalent_in_context(phi, w):
    out = rewrite_snp(phi)
    for pos in range(1, len(w) + 1):
        assert mtl_eval(w, pos, phi) == mtl_eval(w, pos, out)
