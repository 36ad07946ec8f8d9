"""Extension predicates, projections, and the two composition operators."""

from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from mtlkit.core import AlphabetSplit, PreconditionError, TimedWord
from mtlkit.projections import (
    ProjectionMap,
    compose_oversampled,
    compose_simple,
    is_oversampled_behaviour,
    is_simple_extension,
    oversampled_project,
    simple_project,
)
from mtlkit.semantics import satisfies
from mtlkit.syntax import parse_timed_word
from strategies import formulas, timed_words

BASE = settings(max_examples=120, deadline=None)

SIGMA = frozenset({"a", "b"})
X1 = frozenset({"c"})
X2 = frozenset({"d"})
S_FULL = AlphabetSplit(SIGMA, X1 | X2)
S_1 = AlphabetSplit(SIGMA, X1)
S_2 = AlphabetSplit(SIGMA, X2)
# erase one extension, keep the other as part of the base
S_DROP2 = AlphabetSplit(SIGMA | X1, X2)
S_DROP1 = AlphabetSplit(SIGMA | X2, X1)


# ----------------------------------------------------------- projection map


def test_projection_map_invariants():
    assert len(ProjectionMap((1, 2, 4), 4)) == 3
    with pytest.raises(PreconditionError):
        ProjectionMap((), 0)
    with pytest.raises(PreconditionError):
        ProjectionMap((1, 1, 4), 4)
    with pytest.raises(PreconditionError):
        ProjectionMap((2, 4), 4)
    with pytest.raises(PreconditionError):
        ProjectionMap((1, 3), 4)


# -------------------------------------------------------- simple extensions


def test_is_simple_extension_examples():
    assert is_simple_extension(parse_timed_word("{a}@0.2 {b,c,d}@0.3 {b,d}@1.1"), S_FULL)
    assert not is_simple_extension(parse_timed_word("{a}@0.2 {c,d}@0.3 {b,d}@1.1"), S_FULL)
    plain = parse_timed_word("{a}@0 {b}@1")
    assert is_simple_extension(plain, AlphabetSplit(SIGMA, frozenset()))
    with pytest.raises(PreconditionError):
        is_simple_extension(parse_timed_word("{a,z}@0"), S_FULL)


def test_simple_project_example():
    split = AlphabetSplit(frozenset({"a", "c"}), frozenset({"b"}))
    word = parse_timed_word("{a,b,c}@0.2 {b,c}@1 {c}@1.3")
    assert simple_project(word, split) == parse_timed_word("{a,c}@0.2 {c}@1 {c}@1.3")


def test_simple_project_identity_and_error():
    plain = parse_timed_word("{a}@0 {b}@1")
    assert simple_project(plain, AlphabetSplit(SIGMA, frozenset())) == plain
    with pytest.raises(PreconditionError):
        simple_project(parse_timed_word("{a}@0 {c}@1"), S_FULL)


@given(timed_words(names=("a", "b", "c", "d"), max_len=6))
@BASE
def test_simple_project_keeps_domain(w):
    if not is_simple_extension(w, S_FULL):
        with pytest.raises(PreconditionError):
            simple_project(w, S_FULL)
        return
    got = simple_project(w, S_FULL)
    assert got.times == w.times
    assert all(e <= SIGMA for e in got.events)


# ---------------------------------------------------- oversampled behaviours


def test_is_oversampled_behaviour_examples():
    assert is_oversampled_behaviour(
        parse_timed_word("{a}@0.2 {c,d}@0.3 {a,b}@0.7 {b,d}@1.1"), S_FULL
    )
    assert not is_oversampled_behaviour(
        parse_timed_word("{a}@0.2 {c,d}@0.3 {c}@1.1"), S_FULL
    )
    assert is_oversampled_behaviour(parse_timed_word("{a}@0"), S_FULL)


def test_oversampled_project_example():
    word = parse_timed_word("{a}@0.2 {a,c}@0.7 {c}@0.9 {b,d}@1.1")
    got, pmap = oversampled_project(word, S_FULL)
    assert got == parse_timed_word("{a}@0.2 {a}@0.7 {b}@1.1")
    assert pmap.entries == (1, 2, 4) and pmap.source_length == 4


def test_oversampled_project_identity():
    plain = parse_timed_word("{a}@0 {b}@1")
    got, pmap = oversampled_project(plain, AlphabetSplit(SIGMA, frozenset()))
    assert got == plain and pmap.entries == (1, 2)
    with pytest.raises(PreconditionError):
        oversampled_project(parse_timed_word("{c}@0 {a}@1"), S_FULL)


# -------------------------------------------------------------- composition


def test_compose_simple_example():
    w1 = parse_timed_word("{a}@0.3 {b,c}@0.8 {b}@1.1")
    w2 = parse_timed_word("{a,d}@0.3 {b,d}@0.8 {b}@1.1")
    assert compose_simple(w1, S_1, w2, S_2) == parse_timed_word(
        "{a,d}@0.3 {b,c,d}@0.8 {b}@1.1"
    )


def test_compose_simple_degenerate_and_errors():
    empty = AlphabetSplit(SIGMA, frozenset())
    plain = parse_timed_word("{a}@0 {b}@1")
    assert compose_simple(plain, empty, plain, empty) == plain
    with pytest.raises(PreconditionError):
        compose_simple(
            parse_timed_word("{a}@0"), S_1, parse_timed_word("{b}@0"), S_2
        )
    with pytest.raises(PreconditionError):
        compose_simple(plain, S_1, plain, AlphabetSplit(SIGMA, X1))


def test_compose_oversampled_interleaving_example():
    r1 = parse_timed_word("{a}@0.1 {c}@0.5")
    r2 = parse_timed_word("#weak {a}@0.1 {d}@0.5 {d}@0.5")
    got = compose_oversampled(r1, AlphabetSplit(frozenset("a"), X1), r2, AlphabetSplit(frozenset("a"), X2))
    assert got == (
        parse_timed_word("#weak {a}@0.1 {c}@0.5 {d}@0.5 {d}@0.5"),
        parse_timed_word("#weak {a}@0.1 {d}@0.5 {c}@0.5 {d}@0.5"),
        parse_timed_word("#weak {a}@0.1 {d}@0.5 {d}@0.5 {c}@0.5"),
    )


def test_compose_oversampled_strict_cases():
    w1 = parse_timed_word("{a}@0 {c}@0.5 {a}@2")
    w2 = parse_timed_word("{a}@0 {d}@1.5 {a}@2")
    assert compose_oversampled(w1, S_1, w2, S_2) == (
        parse_timed_word("{a}@0 {c}@0.5 {d}@1.5 {a}@2"),
    )
    # equal strict timestamps fuse rather than multiply
    tie1 = parse_timed_word("{a}@0 {c}@1 {a}@2")
    tie2 = parse_timed_word("{a}@0 {d}@1 {a}@2")
    assert compose_oversampled(tie1, S_1, tie2, S_2) == (
        parse_timed_word("{a}@0 {c,d}@1 {a}@2"),
    )


def test_compose_oversampled_degenerate_and_errors():
    empty = AlphabetSplit(SIGMA, frozenset())
    plain = parse_timed_word("{a}@0 {b}@1")
    assert compose_oversampled(plain, empty, plain, empty) == (plain,)
    with pytest.raises(PreconditionError):
        compose_oversampled(
            parse_timed_word("{a}@0"), S_1, parse_timed_word("{a}@1"), S_2
        )
    with pytest.raises(PreconditionError):
        compose_oversampled(parse_timed_word("{c}@0"), S_1, parse_timed_word("{d}@0"), S_2)
    with pytest.raises(PreconditionError):
        compose_oversampled(plain, S_1, plain, AlphabetSplit(SIGMA, X1))


# ------------------------------------------------- random extension builders


@st.composite
def simple_extensions(draw):
    base = draw(timed_words(names=("a", "b"), max_len=5))
    extras = draw(
        st.lists(
            st.frozensets(st.sampled_from(("c", "d"))),
            min_size=len(base),
            max_size=len(base),
        )
    )
    return TimedWord(tuple((e | x, t) for (e, t), x in zip(base.points, extras)))


@st.composite
def oversampled_behaviours(draw):
    word = draw(simple_extensions())
    if len(word) > 1:
        lo, hi = int(word.times[0] * 4), int(word.times[-1] * 4)
        taken = {int(t * 4) for t in word.times}
        free = sorted(set(range(lo + 1, hi)) - taken)
        picks = draw(st.lists(st.sampled_from(free), unique=True, max_size=3)) if free else []
        points = list(word.points)
        for tick in picks:
            points.append((frozenset({draw(st.sampled_from(("c", "d")))}), Fraction(tick, 4)))
        points.sort(key=lambda p: p[1])
        word = TimedWord(tuple(points))
    return word


@given(simple_extensions())
@BASE
def test_simple_composition_law(z):
    # a simple extension is recovered from its two half projections
    left = simple_project(z, S_DROP2)
    right = simple_project(z, S_DROP1)
    assert compose_simple(left, S_1, right, S_2) == z


@given(oversampled_behaviours())
@BASE
def test_oversampled_composition_law(rho):
    left, _ = oversampled_project(rho, S_DROP2)
    right, _ = oversampled_project(rho, S_DROP1)
    got = compose_oversampled(left, S_1, right, S_2)
    assert rho in got


@given(formulas(max_leaves=5, names=("a", "b", "c")), simple_extensions())
@BASE
def test_satisfaction_transfer(phi, z):
    # erasing d, which the formula never mentions, cannot change truth
    assert satisfies(z, phi) == satisfies(simple_project(z, S_DROP2), phi)
