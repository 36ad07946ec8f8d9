"""Differential-testing engines for the two reductions, a size reporter,
and the expressiveness separation vectors.

``fuzz_equisat`` drives two seeded test families against a reduction.
Family A is constructive: sample models of the input, build the witness
extension, and require the reduced formula to hold and the projection to
return the model exactly.  Family B probes the converse: mutate honest
extensions (and throw in raw random words), and whenever the reduced
formula still holds, the projection must model the input.  Family B is
what catches a weakened marking, so the mutations lean on witness and
mark bits rather than uniform noise.
"""

from __future__ import annotations

import math
import os
import random
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional

from mtlkit import elim_os, elim_sp, semantics
from mtlkit.core import (
    And,
    AlphabetSplit,
    Formula,
    FULL,
    InternalError,
    Interval,
    MtlError,
    PreconditionError,
    TimedWord,
    and_,
    atom,
    eventually,
    modal_count,
    node_count,
    not_,
    once,
    or_,
    propositions_of,
    subformulas,
    time_shift,
)
from mtlkit.normal_forms import mark_since_props, mark_witnesses
from mtlkit.projections import (
    compose_oversampled,
    compose_simple,
    oversampled_project,
    simple_project,
)
from mtlkit.reduction import ReductionResult
from mtlkit.syntax import format_formula, format_timed_word, parse_formula

CORPUS = (
    "F(a & P[1,2) b)",
    "F(a & P(1,3] b)",
    "F(a & P(1,2) b)",
    "F(a & P[0,2) b)",
    "F(a & P[2,3] b)",
    "F(a & P[1,inf) b)",
    "F(a & P(0,inf) b)",
    "G(a -> P[0,1) b)",
    "a U[0,3] (c S P[0,1) d)",
    "F(a & P[1,2) P[0,1) b)",
    "F[1,1](a & P[1,2) b)",
    "F(a & (a S b))",
    "F(a & (a S[1,3) b))",
    "F(a & (a S(0,2] b))",
    "F(a & !P[1,2) b)",
    "F((a|c) & P[1,2)(b|c))",
    "G[0,4](a -> P[0,2) b)",
    "F(a & P[3,4) b)",
    "F(a & P[1,2) b & P[0,3) c)",
    "(F[2,2] a) & F(c S b)",
    "F(b & P(2,4) c)",
    "Fw(a & P[1,2) b)",
    "F(a & H[0,1) b)",
)

WORKERS_ENV = "MTLKIT_WORKERS"


def reduce_with(phi: Formula, kind: str, drop: frozenset[str] = frozenset()) -> ReductionResult:
    if kind == "simple":
        return elim_sp.reduce_sp(phi, drop=drop)
    if kind == "oversampled":
        return elim_os.reduce_os(phi, drop=drop)
    raise PreconditionError(f"unknown reduction kind {kind!r}")


def extend_model(res: ReductionResult, rho: TimedWord) -> tuple[TimedWord, TimedWord]:
    """Canonical witness extension of a word for a reduction result, and
    the base the extension projects back to (the word itself, moved to
    start at time 0 for the oversampled kind).  The word need not model
    the reduced input; the extension satisfies the reduced formula
    exactly when it does."""
    if res.kind == "oversampled":
        rho = time_shift(rho, -rho.times[0])
    marked = mark_witnesses(res.flat, rho)
    ambient = frozenset(res.sigma) | frozenset(res.flat.witnesses)
    acc, acc_ext = marked, frozenset()
    for part in res.parts:
        if part.kind != "bounded":
            continue
        fresh = frozenset(part.output.fresh)
        if res.kind == "oversampled":
            ext = elim_os.oversample_witness(marked, part.output)
        else:
            ext = elim_sp.simple_witness(marked, part.output)
        if not acc_ext:
            acc = ext
        elif res.kind == "oversampled":
            merged = compose_oversampled(
                acc, AlphabetSplit(ambient, acc_ext), ext, AlphabetSplit(ambient, fresh)
            )
            if len(merged) != 1:
                raise InternalError(
                    f"witness composition produced {len(merged)} candidates"
                )
            acc = merged[0]
        else:
            acc = compose_simple(
                acc, AlphabetSplit(ambient, acc_ext), ext, AlphabetSplit(ambient, fresh)
            )
        acc_ext |= fresh
    subs = [sub for part in res.parts for sub in part.since_subs]
    return mark_since_props(acc, subs), rho


def project_model(res: ReductionResult, word: TimedWord) -> TimedWord:
    split = AlphabetSplit(frozenset(res.sigma), res.fresh_names)
    if res.kind == "oversampled":
        return oversampled_project(word, split)[0]
    return simple_project(word, split)


# ---------------------------------------------------------------------------
# Equisatisfiability fuzzing


@dataclass(frozen=True)
class FuzzReport:
    """Aggregated outcome of one fuzz run.  Counterexamples carry the
    input formula, the offending word, the stage that failed, and a
    diagnostic; rows hold one (trial, family, outcome) record each."""

    trials: int
    constructive_pass: int
    constructive_fail: int
    projection_pass: int
    projection_fail: int
    projection_skipped: int
    counterexamples: tuple[tuple[str, str, str, str], ...]
    rows: tuple[tuple[int, str, str], ...]

    def __post_init__(self) -> None:
        if self.constructive_pass + self.constructive_fail != self.trials:
            raise InternalError("constructive outcomes do not sum to trials")
        if (
            self.projection_pass + self.projection_fail + self.projection_skipped
            != self.trials
        ):
            raise InternalError("projection outcomes do not sum to trials")

    @property
    def failures(self) -> int:
        return self.constructive_fail + self.projection_fail

    def summary_lines(self) -> list[str]:
        lines = [
            f"trials per family: {self.trials}",
            f"constructive: {self.constructive_pass} pass, {self.constructive_fail} fail",
            f"projection: {self.projection_pass} pass, {self.projection_fail} fail, "
            f"{self.projection_skipped} skipped",
        ]
        for formula, word, stage, detail in self.counterexamples[:10]:
            lines.append(f"counterexample [{stage}] {detail}: {word}")
        if len(self.counterexamples) > 10:
            lines.append(f"... {len(self.counterexamples) - 10} more")
        return lines


def _horizon(phi: Formula) -> Fraction:
    best = 2
    for node in subformulas(phi):
        ivl = getattr(node, "interval", None)
        if isinstance(ivl, Interval):
            best = max(best, int(ivl.upper) if ivl.bounded else ivl.lower)
    return Fraction(best + 3)


def _random_word(
    rng: random.Random, names: list[str], max_len: int, horizon: Fraction
) -> Optional[TimedWord]:
    n = rng.randint(1, max_len)
    ticks = [Fraction(k, 4) for k in range(int(horizon * 4) + 1)]
    if n > len(ticks):
        return None
    times = sorted(rng.sample(ticks, n))
    density = min(0.5, 2.5 / len(names))
    points = []
    for t in times:
        event = frozenset(p for p in names if rng.random() < density)
        if not event:
            event = frozenset([rng.choice(names)])
        points.append((event, t))
    return TimedWord(tuple(points))


def model_pool(
    phi: Formula, count: int, seed: int, max_len: int = 5
) -> list[TimedWord]:
    """Deterministic sample of models of ``phi``: the first few in the
    bounded enumeration order, then distinct random grid words filtered
    by satisfaction."""
    sigma = propositions_of(phi)
    if not sigma:
        raise PreconditionError("model sampling needs an alphabet")
    horizon = _horizon(phi)
    pool: list[TimedWord] = []
    seen = set()
    scanned = 0
    for w in semantics.iter_models(frozenset(sigma), 3, Fraction(1, 2), Fraction(4)):
        scanned += 1
        if scanned > 3000 or len(pool) >= max(4, count // 8):
            break
        if semantics.satisfies(w, phi):
            pool.append(w)
            seen.add(w.points)
    rng = random.Random(seed * 1000003 - 1)
    names = sorted(sigma)
    attempts = 0
    while len(pool) < count and attempts < 400 * count:
        attempts += 1
        w = _random_word(rng, names, max_len, horizon)
        if w is None or w.points in seen:
            continue
        if semantics.satisfies(w, phi):
            pool.append(w)
            seen.add(w.points)
    return pool


def _conjuncts(phi: Formula) -> list[Formula]:
    out: list[Formula] = []
    stack = [phi]
    while stack:
        cur = stack.pop()
        if isinstance(cur, And):
            stack.append(cur.right)
            stack.append(cur.left)
        else:
            out.append(cur)
    return out


def _holds(word: TimedWord, conjuncts: list[Formula]) -> bool:
    # short-circuit over the top-level conjunction: most mutants die early
    return all(semantics.eval(word, 1, c) for c in conjuncts)


def _strip_prop(word: TimedWord, name: str) -> Optional[TimedWord]:
    points = tuple(
        (e - {name}, t) for e, t in word.points if e - {name}
    )
    return TimedWord(points) if points else None


def _toggle_prop(word: TimedWord, pos: int, name: str) -> Optional[TimedWord]:
    points = []
    for i, (e, t) in enumerate(word.points):
        if i == pos:
            e = e - {name} if name in e else e | {name}
        if e:
            points.append((e, t))
    return TimedWord(tuple(points)) if points else None


def _violations(word: TimedWord, conjuncts: list[Formula]) -> int:
    return sum(1 for c in conjuncts if not semantics.eval(word, 1, c))


def _climb(
    rng: random.Random,
    res: ReductionResult,
    psi_parts: list[Formula],
    word: TimedWord,
    max_steps: int = 80,
) -> Optional[TimedWord]:
    """Random walk on fresh-prop flips that never increases the number of
    violated conjuncts.  Starting from an honest extension of a word that
    falsifies the input, reaching zero violations means the reduced
    formula holds on a word whose projection is not a model.  Flips that
    would delete a point are refused, so per-conjunct truth can be
    patched by re-evaluating only the conjuncts naming the flipped
    proposition, and repairs tend to sit near earlier flips, so proposals
    favour recently touched positions."""
    names = sorted(res.fresh_names)
    witnesses = sorted(res.flat.witnesses)
    scopes = [propositions_of(c) for c in psi_parts]
    truth = [semantics.eval(word, 1, c) for c in psi_parts]
    bad = truth.count(False)
    if bad == 0:
        return None

    def patch(cand: TimedWord, name: str) -> list[bool]:
        out = list(truth)
        for idx, scope in enumerate(scopes):
            if name in scope:
                out[idx] = semantics.eval(cand, 1, psi_parts[idx])
        return out

    recent: list[int] = []
    fail = next(i for i, t in enumerate(truth) if not t)
    seeds = [
        (p, n)
        for p in range(len(word))
        for n in witnesses
        if n in scopes[fail]
    ]
    rng.shuffle(seeds)
    for pos, name in seeds:
        cand = _toggle_prop(word, pos, name)
        if cand is None or len(cand) != len(word):
            continue
        if semantics.eval(cand, 1, psi_parts[fail]):
            truth = patch(cand, name)
            word, bad = cand, truth.count(False)
            recent = [pos]
            break
    if bad == 0:
        return word

    last = None
    patience = 24
    for _ in range(max_steps):
        # the props worth flipping are almost always the ones the failing
        # conjuncts talk about
        hot = sorted(
            set().union(*(scopes[i] for i, t in enumerate(truth) if not t))
            & set(names)
        )
        if hot and rng.random() < 0.6:
            name = rng.choice(hot)
        elif witnesses and rng.random() < 0.5:
            name = rng.choice(witnesses)
        else:
            name = rng.choice(names)
        if recent and rng.random() < 0.6:
            pos = rng.choice(recent) + rng.randint(-2, 2)
            pos = max(0, min(len(word) - 1, pos))
        else:
            pos = rng.randrange(len(word))
        if (pos, name) == last:
            continue
        cand = _toggle_prop(word, pos, name)
        if cand is None or len(cand) != len(word):
            continue
        cand_truth = patch(cand, name)
        cand_bad = cand_truth.count(False)
        if cand_bad == 0:
            return cand
        if cand_bad > bad:
            continue
        patience = 24 if cand_bad < bad else patience - 1
        word, truth, bad = cand, cand_truth, cand_bad
        recent = ([pos] + recent)[:2]
        last = (pos, name)
        if patience <= 0:
            break
    return None


def _near_miss(
    rng: random.Random, pool: list[TimedWord], sigma: list[str]
) -> Optional[TimedWord]:
    """Perturb one point of a pooled model: nudge its time, delete it, or
    flip one letter.  The result usually keeps the pair gaps of the
    original, so it probes the boundary cases of the zone conjuncts."""
    word = pool[rng.randrange(len(pool))]
    pts = list(word.points)
    i = rng.randrange(len(pts))
    roll = rng.random()
    if roll < 0.5:
        lo = pts[i - 1][1] if i else Fraction(-1)
        hi = pts[i + 1][1] if i + 1 < len(pts) else None
        t = pts[i][1] + Fraction(rng.choice((-5, -4, -3, -2, -1, 1, 2, 3, 4, 5)), 4)
        if t < 0 or t <= lo or (hi is not None and t >= hi):
            return None
        pts[i] = (pts[i][0], t)
        return TimedWord(tuple(pts))
    if roll < 0.75 and len(pts) > 1:
        del pts[i]
        return TimedWord(tuple(pts))
    return _toggle_prop(word, i, rng.choice(sigma))


def _mutant(
    rng: random.Random,
    res: ReductionResult,
    psi_parts: list[Formula],
    phi: Formula,
    pool: list[TimedWord],
    horizon: Fraction,
) -> Optional[TimedWord]:
    every = sorted(res.sigma | set(res.fresh_names))
    pick = rng.random()
    if pick < 0.10 or not pool:
        return _random_word(rng, every, 5, horizon)
    if pick < 0.40:
        # near misses keep the gap geometry of a genuine model, which is
        # where the zone conjuncts have something to say
        if rng.random() < 0.6:
            rho = _near_miss(rng, pool, sorted(res.sigma))
        else:
            rho = _random_word(rng, sorted(res.sigma), 5, horizon)
        if rho is None or semantics.satisfies(rho, phi):
            return None
        try:
            word, _ = extend_model(res, rho)
        except MtlError:
            return None
        return _climb(rng, res, psi_parts, word)
    if pick < 0.65:
        # honest extension of an arbitrary base word, then a few flips:
        # the flips must trip some marking conjunct, so this is the probe
        # that exposes a weakened marking
        rho = _random_word(rng, sorted(res.sigma), 5, horizon)
        if rho is None:
            return None
    else:
        rho = pool[rng.randrange(len(pool))]
    try:
        word, _ = extend_model(res, rho)
    except MtlError:
        return None
    if rng.random() < 0.3:
        word = _strip_prop(word, rng.choice(sorted(res.fresh_names)))
        if word is None:
            return None
    witnesses = sorted(res.flat.witnesses)
    for _ in range(rng.randint(1, 3)):
        # the witness props are the semantic levers, so flip them often
        if witnesses and rng.random() < 0.5:
            name = rng.choice(witnesses)
        else:
            name = rng.choice(every)
        word = _toggle_prop(word, rng.randrange(len(word)), name)
        if word is None:
            return None
    return word


def _to_domain(word: TimedWord, res: ReductionResult) -> Optional[TimedWord]:
    """Clamp a candidate into the projection's sample space: oversampled
    behaviours need action points at both ends, simple extensions
    everywhere.  Interior non-action points are legitimate oversampling."""
    act = [bool(e & res.sigma) for e in word.events]
    if not any(act):
        return None
    if res.kind == "oversampled":
        lo = act.index(True)
        hi = len(act) - 1 - act[::-1].index(True)
        return TimedWord(word.points[lo : hi + 1])
    kept = tuple(p for p, a in zip(word.points, act) if a)
    return TimedWord(kept)


def _trial_block(args) -> list[tuple[int, str, str, Optional[tuple[str, str, str, str]]]]:
    src, kind, trials, seed, drop = args
    phi = parse_formula(src)
    res = reduce_with(phi, kind, frozenset(drop))
    pool = model_pool(phi, min(max(len(trials), 8), 256), seed)
    psi_parts = _conjuncts(res.formula)
    horizon = _horizon(phi)
    rows = []
    for trial in trials:
        # family A: an honest extension of a model must work end to end
        outcome, cex = "pass", None
        if pool:
            rho = pool[trial % len(pool)]
            try:
                ext, base = extend_model(res, rho)
                if not _holds(ext, psi_parts):
                    outcome, cex = "fail", (src, format_timed_word(ext), "reduced-sat",
                                            "extension falsifies the reduced formula")
                elif project_model(res, ext) != base:
                    outcome, cex = "fail", (src, format_timed_word(ext), "project-equal",
                                            "projection differs from the sampled model")
            except MtlError as e:
                outcome, cex = "fail", (src, format_timed_word(rho), "extend", str(e))
        rows.append((trial, "A", outcome, cex))

        # family B: anything satisfying the reduced formula must project
        # to a model
        rng = random.Random((seed * 2 + 1) * 1000003 + trial)
        word = _mutant(rng, res, psi_parts, phi, pool, horizon)
        if word is not None:
            word = _to_domain(word, res)
        if word is None or not _holds(word, psi_parts):
            rows.append((trial, "B", "skip", None))
            continue
        try:
            back = project_model(res, word)
        except MtlError as e:
            rows.append((trial, "B", "fail",
                         (src, format_timed_word(word), "project", str(e))))
            continue
        if semantics.satisfies(back, phi):
            rows.append((trial, "B", "pass", None))
        else:
            rows.append((trial, "B", "fail",
                         (src, format_timed_word(word), "base-model",
                          "reduced formula holds but the projection is not a model")))
    return rows


def fuzz_equisat(
    phi: Formula,
    kind: str,
    budget: int,
    seed: int,
    drop: frozenset[str] = frozenset(),
) -> FuzzReport:
    src = format_formula(phi)
    reduce_with(phi, kind, drop)
    workers = max(1, int(os.environ.get(WORKERS_ENV, "1") or "1"))
    trials = list(range(budget))
    blocks = [trials[k::workers] for k in range(workers) if trials[k::workers]]
    args = [(src, kind, chunk, seed, tuple(sorted(drop))) for chunk in blocks]
    if len(args) > 1:
        with ProcessPoolExecutor(max_workers=len(args)) as pool:
            results = list(pool.map(_trial_block, args))
    else:
        results = [_trial_block(a) for a in args]
    rows = sorted((r for block in results for r in block), key=lambda r: (r[0], r[1]))
    counts = {("A", "pass"): 0, ("A", "fail"): 0,
              ("B", "pass"): 0, ("B", "fail"): 0, ("B", "skip"): 0}
    cexs = []
    for _, family, outcome, cex in rows:
        counts[(family, outcome)] += 1
        if cex is not None:
            cexs.append(cex)
    return FuzzReport(
        trials=budget,
        constructive_pass=counts[("A", "pass")],
        constructive_fail=counts[("A", "fail")],
        projection_pass=counts[("B", "pass")],
        projection_fail=counts[("B", "fail")],
        projection_skipped=counts[("B", "skip")],
        counterexamples=tuple(sorted(cexs)),
        rows=tuple((t, f, o) for t, f, o, _ in rows),
    )


# ---------------------------------------------------------------------------
# Size reporting


@dataclass(frozen=True)
class KindSize:
    modal: int
    nodes: int
    fresh: int


@dataclass(frozen=True)
class SizeReport:
    """Operator and node counts of the input against both reductions,
    measured on the produced syntax trees as written."""

    modal: int
    nodes: int
    sigma: int
    simple: KindSize
    oversampled: KindSize

    def summary_lines(self) -> list[str]:
        return [
            f"input: {self.modal} modal operators, {self.nodes} nodes, |alphabet| {self.sigma}",
            f"simple: {self.simple.modal} modal, {self.simple.nodes} nodes, "
            f"{self.simple.fresh} fresh propositions",
            f"oversampled: {self.oversampled.modal} modal, {self.oversampled.nodes} nodes, "
            f"{self.oversampled.fresh} fresh propositions",
        ]


def size_report(phi: Formula) -> SizeReport:
    sp = elim_sp.reduce_sp(phi)
    osr = elim_os.reduce_os(phi)
    return SizeReport(
        modal=modal_count(phi),
        nodes=node_count(phi),
        sigma=len(propositions_of(phi)),
        simple=KindSize(modal_count(sp.formula), node_count(sp.formula), len(sp.fresh)),
        oversampled=KindSize(
            modal_count(osr.formula), node_count(osr.formula), len(osr.fresh)
        ),
    )


# ---------------------------------------------------------------------------
# Expressiveness separation vectors


def _frac(x) -> Fraction:
    if isinstance(x, float):
        return Fraction(str(x))
    return Fraction(x)


def _word(anchor_first: list[tuple[str, Fraction]]) -> TimedWord:
    points = [(frozenset({"z"}), Fraction(0))]
    points += [(frozenset({p}), t) for p, t in sorted(anchor_first, key=lambda e: e[1])]
    return TimedWord(tuple(points))


def lemma10_vectors(
    case: str,
    n: int,
    delta=None,
    kappa=None,
    epsilon=None,
    i: Optional[int] = None,
) -> tuple[Formula, TimedWord, TimedWord]:
    """A formula and two finite words that agree on one operator family
    and disagree on the formula, witnessing that the family cannot
    express it.  Each word gets a neutral anchor point at time 0 so the
    stated truth values are read at the first position.

    Case "i" separates a timed future diamond from untimed-until logics,
    case "ii" a timed past diamond from untimed-since logics, and case
    "iii" a non-punctual pair from punctual-free until/since.  The
    distinguishing index ``i`` defaults to the middle position.
    """
    if n < 1:
        raise PreconditionError("n must be a positive count")
    a, b = atom("a"), atom("b")
    if case in ("i", "ii"):
        if delta is None or kappa is None:
            raise PreconditionError("cases i and ii need delta and kappa")
        d, k = _frac(delta), _frac(kappa)
        if not 0 < k < d:
            raise PreconditionError("need 0 < kappa < delta")
        if n * d >= 1:
            raise PreconditionError("need n * delta < 1")
        if i is None:
            i = math.ceil(n / 2)
        if not 2 <= i <= n:
            raise PreconditionError("index i must lie in [2, n]")
        w_a = [("a", j * d) for j in range(1, n + 1)] + [("a", i * d - k)]
        a_short = [("a", j * d) for j in range(1, n + 1)]
        b_full = [("b", 1 + j * d) for j in range(1, n + 1)] + [("b", 1 + i * d - k)]
        b_gapped = [e for e in b_full if e[1] != 1 + (i - 1) * d]
        if case == "i":
            phi = eventually(
                and_(a, not_(eventually(or_(a, b), Interval(1, 1, True, True)))),
                Interval(0, 1, False, False),
            )
            return phi, _word(w_a + b_gapped), _word(w_a + b_full)
        phi = eventually(and_(b, not_(once(or_(a, b), Interval(1, 1, True, True)))))
        return phi, _word(w_a + b_full), _word(a_short + b_full)
    if case == "iii":
        if epsilon is None:
            raise PreconditionError("case iii needs epsilon")
        e = _frac(epsilon)
        if e <= 0:
            raise PreconditionError("need epsilon > 0")
        if Fraction(9, 10) + n * e >= Fraction(3, 2):
            raise PreconditionError("need 9/10 + n * epsilon < 3/2")
        if Fraction(1, 2) + n * e >= Fraction(9, 10) + e:
            raise PreconditionError("epsilon blocks overlap the second group")
        two = Interval(1, 2, False, False)
        phi = eventually(and_(a, not_(once(a, two))), two)
        w1 = [("a", Fraction(1, 2) + j * e) for j in range(1, n + 1)]
        w1 += [("a", Fraction(9, 10) + j * e) for j in range(1, n + 1)]
        w2 = [("a", Fraction(8, 5) + j * e) for j in range(1, n + 1)]
        return phi, _word(w1 + [("a", Fraction(3, 2))] + w2), _word(w1 + w2)
    raise PreconditionError(f"unknown case {case!r}")
