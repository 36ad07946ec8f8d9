"""Interval and timed-word invariants, kernel expansion, fragment labels."""

from fractions import Fraction

import pytest
from hypothesis import given, settings

from mtlkit import core
from mtlkit.core import (
    FULL,
    INF,
    Interval,
    MtlError,
    Since,
    TimedWord,
    Until,
    always,
    and_,
    atom,
    bottom,
    children,
    classify_fragment,
    eventually,
    expand,
    fragment_rank,
    is_future_only,
    is_mitl,
    modal_count,
    node_count,
    once,
    propositions_of,
    since,
    subformulas,
    time_shift,
    top,
    until,
)
from mtlkit.semantics import eval as mtl_eval
from mtlkit.syntax import parse_formula

from strategies import formulas, intervals, timed_words

BASE = settings(max_examples=150, deadline=None)


# ---------------------------------------------------------------- intervals


def test_interval_validation():
    with pytest.raises(MtlError):
        Interval(3, 2)
    with pytest.raises(MtlError):
        Interval(1, 1)  # [1,1) is empty; punctual needs both brackets closed
    with pytest.raises(MtlError):
        Interval(0, INF, True, True)  # infinity forces a right-open interval
    with pytest.raises(MtlError):
        Interval(-1, 2)
    with pytest.raises(MtlError):
        Interval(0, Fraction(1, 2))  # bounds live on the naturals


def test_interval_open_unit_is_fine():
    # (2,3) holds no natural but plenty of rationals
    i = Interval(2, 3, False, False)
    assert not i.contains(Fraction(2)) and not i.contains(Fraction(3))
    assert i.contains(Fraction(5, 2))


def test_interval_membership():
    i = Interval(1, 3)  # [1,3)
    assert i.contains(Fraction(1))
    assert i.contains(Fraction(5, 2))
    assert not i.contains(Fraction(3))
    assert Interval(0, 0, True, True).punctual
    assert FULL.contains(Fraction(0)) and not FULL.bounded


def test_zero_in():
    assert Interval(0, 2).zero_in
    assert not Interval(0, 2, False, False).zero_in
    assert not Interval(1, 2).zero_in


@given(intervals())
@BASE
def test_interval_nonempty(i):
    # every generated interval admits a rational point
    if not i.bounded:
        assert i.contains(Fraction(i.lower + 1))
    elif i.punctual:
        assert i.contains(Fraction(i.lower))
    else:
        assert i.contains(Fraction(i.lower + i.upper, 2))


@given(intervals())
@BASE
def test_interval_str_brackets(i):
    text = str(i)
    assert text[0] == ("[" if i.left_closed else "(")
    assert text[-1] == ("]" if i.right_closed else ")")


# -------------------------------------------------------------- timed words


def test_word_accessors():
    w = TimedWord.build([({"a", "b"}, "0.3"), ({"b"}, "0.7"), ({"a"}, "1.1")])
    assert len(w) == 3
    assert w.event(1) == frozenset({"a", "b"})
    assert w.time(3) == Fraction(11, 10)
    assert w.strict
    with pytest.raises(MtlError):
        w.event(0)
    with pytest.raises(MtlError):
        w.time(4)


def test_word_rejects_bad_input():
    with pytest.raises(MtlError):
        TimedWord(())
    with pytest.raises(MtlError):
        TimedWord.build([(set(), "1")])
    with pytest.raises(MtlError):
        TimedWord.build([({"a"}, "-1")])
    with pytest.raises(MtlError):
        TimedWord.build([({"a"}, "2"), ({"b"}, "1")])


def test_weakly_monotone_word():
    w = TimedWord.build([({"a"}, "1"), ({"b"}, "1")])
    assert not w.strict
    assert TimedWord.build([({"a"}, "1"), ({"b"}, "2")]).strict


@given(timed_words())
@BASE
def test_time_shift_preserves_gaps(w):
    shifted = time_shift(w, Fraction(3, 4))
    assert shifted.events == w.events
    assert shifted.times[0] == w.times[0] + Fraction(3, 4)
    for i in range(len(w) - 1):
        assert shifted.times[i + 1] - shifted.times[i] == w.times[i + 1] - w.times[i]


@given(formulas(max_leaves=4), timed_words(max_len=4))
@settings(max_examples=80, deadline=None)
def test_time_shift_eval_invariance(phi, w):
    shifted = time_shift(w, Fraction(5, 4))
    for pos in range(1, len(w) + 1):
        assert mtl_eval(w, pos, phi) == mtl_eval(shifted, pos, phi)


# ----------------------------------------------------------------- formulas


def test_propositions():
    phi = parse_formula("a U[0,3] (c S (P[0,1] d))")
    assert propositions_of(phi) == frozenset({"a", "c", "d"})
    assert node_count(phi) > modal_count(phi) == 3


def test_interning_gives_structural_equality():
    assert atom("a") is atom("a")
    assert and_(atom("a"), top()) is and_(atom("a"), top())
    assert until(atom("a"), atom("b"), Interval(1, 2)) is until(
        atom("a"), atom("b"), Interval(1, 2)
    )


@given(formulas())
@BASE
def test_expand_idempotent(phi):
    kernel = expand(phi)
    assert expand(kernel) is kernel
    derived = (
        "WeakUntil",
        "Eventually",
        "Always",
        "Once",
        "Historically",
        "WeakEventually",
        "WeakAlways",
        "Next",
    )
    for node in subformulas(kernel):
        assert type(node).__name__ not in derived


@given(formulas())
@BASE
def test_expand_preserves_props(phi):
    assert propositions_of(expand(phi)) == propositions_of(phi)


def test_expand_shapes():
    e = expand(eventually(atom("a"), Interval(1, 2)))
    assert isinstance(e, Until) and e.left is top()
    o = expand(once(atom("a"), Interval(1, 2)))
    assert isinstance(o, Since) and o.left is top()


# ---------------------------------------------------------------- fragments


def test_fragment_labels():
    assert classify_fragment(parse_formula("a U[2,3] b")) == "U_I_only"
    assert classify_fragment(parse_formula("a U[0,3] (c S (P[0,1] d))")) == "U_I_S_np"
    assert classify_fragment(parse_formula("(a S[1,1] b) U[0,2) c")) == "U_np_S_I"
    assert classify_fragment(parse_formula("a U[1,1] (b S[2,2] c)")) == "full_MTL"
    assert classify_fragment(parse_formula("a & b")) == "U_I_only"
    # derived future operators stay on the Until side of the kernel
    assert classify_fragment(parse_formula("F[1,1] a")) == "U_I_only"
    assert classify_fragment(parse_formula("G(a -> F[0,1] b)")) == "U_I_only"


def test_fragment_tightest_tag_wins():
    # nothing punctual here, yet the tighter U_I_S_np label applies
    phi = parse_formula("a U[1,3) b & P[0,2) c")
    assert classify_fragment(phi) == "U_I_S_np"
    assert is_mitl(phi)


def test_fragment_rank_orders_by_generality():
    assert fragment_rank("U_I_only") == 0
    assert (
        fragment_rank("U_I_S_np")
        == fragment_rank("U_np_S_I")
        == fragment_rank("MITL")
        == 1
    )
    assert fragment_rank("full_MTL") == 2
    with pytest.raises(MtlError):
        fragment_rank("nonsense")


_REBUILD = {
    "Not": core.not_,
    "And": core.and_,
    "Or": core.or_,
    "Implies": core.implies,
}
_REBUILD_BIN = {"Until": core.until, "Since": core.since, "WeakUntil": core.weak_until}
_REBUILD_UN = {
    "Eventually": core.eventually,
    "Always": core.always,
    "Once": core.once,
    "Historically": core.historically,
    "WeakEventually": core.weak_eventually,
    "WeakAlways": core.weak_always,
    "Next": core.next_,
}


def _replace(phi, target, sub):
    if phi is target:
        return sub
    kids = [_replace(k, target, sub) for k in children(phi)]
    if not kids:
        return phi
    name = type(phi).__name__
    if name in _REBUILD_BIN:
        return _REBUILD_BIN[name](kids[0], kids[1], phi.interval)
    if name in _REBUILD_UN:
        return _REBUILD_UN[name](kids[0], phi.interval)
    return _REBUILD[name](*kids)


@given(formulas(max_leaves=4))
@settings(max_examples=100, deadline=None)
def test_fragment_monotone_under_atom_replacement(phi):
    # pruning any subtree to a fresh atom never coarsens the tag
    before = fragment_rank(classify_fragment(phi))
    for target in set(subformulas(phi)):
        pruned = _replace(phi, target, atom("zz"))
        assert fragment_rank(classify_fragment(pruned)) <= before


def test_future_only_and_mitl():
    assert is_future_only(parse_formula("a U[1,2] b"))
    assert not is_future_only(parse_formula("P[0,1] a"))
    assert not is_future_only(parse_formula("G(a -> H b)"))
    assert is_mitl(parse_formula("a U[1,2) b"))
    assert not is_mitl(parse_formula("F[1,1] a"))


@given(formulas(punctual=False))
@BASE
def test_nonpunctual_trees_are_mitl(phi):
    assert is_mitl(phi)


def test_classify_lemma10_case_i():
    phi = and_(eventually(atom("a"), Interval(1, 2)), always(atom("b"), FULL))
    assert classify_fragment(phi) == "U_I_only"


def test_constructors_reject_bad_intervals():
    with pytest.raises(MtlError):
        until(atom("a"), atom("b"), Interval(3, 2))
    assert since(atom("a"), atom("b"), Interval(0, 0, True, True))
    assert until(bottom(), top(), FULL)
