"""Concrete syntax: formula parser and printer, timed-word parser and
formatter.

Formula grammar (loosest binding first)::

    formula  := disj
    disj     := conj ('|' conj)*
    conj     := impl ('&' impl)*
    impl     := temporal ('->' impl)?
    temporal := unary (('U'|'S'|'Uw') interval? unary)?
    unary    := '!' unary
              | ('F'|'G'|'P'|'H'|'Fw'|'Gw'|'O') interval? unary
              | 'true' | 'false' | ident | '(' formula ')'
    interval := ('['|'(') nat ',' (nat|'inf') (']'|')')

Note that '->' binds tighter than '&' and '|' and associates to the right.
A missing interval means [0,inf).

Timed words are whitespace-separated points ``{p,q}@time`` where time is a
decimal or ``p/q`` rational, read exactly.  ``//`` starts a comment.  A
``#weak`` directive permits repeated timestamps; without it they are an
error.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

from mtlkit import core
from mtlkit.core import FULL, INF, Formula, Interval, MtlError, TimedWord


class ParseError(MtlError):
    def __init__(self, message: str, offset: int) -> None:
        super().__init__(f"{message} (at offset {offset})")
        self.offset = offset


_KEYWORDS = {"true", "false", "U", "S", "Uw", "F", "G", "P", "H", "Fw", "Gw", "O"}
_UNARY = {
    "F": core.eventually,
    "G": core.always,
    "P": core.once,
    "H": core.historically,
    "Fw": core.weak_eventually,
    "Gw": core.weak_always,
    "O": core.next_,
}
_BINARY = {"U": core.until, "S": core.since, "Uw": core.weak_until}


@dataclass(frozen=True)
class _Token:
    kind: str
    text: str
    offset: int


def _lex_formula(text: str) -> list[_Token]:
    out = []
    i, n = 0, len(text)
    while i < n:
        ch = text[i]
        if ch.isspace():
            i += 1
            continue
        if ch.isalpha() or ch == "_":
            j = i
            while j < n and (text[j].isalnum() or text[j] == "_"):
                j += 1
            word = text[i:j]
            out.append(_Token("KW" if word in _KEYWORDS else "IDENT", word, i))
            i = j
            continue
        if ch.isdigit():
            j = i
            while j < n and text[j].isdigit():
                j += 1
            out.append(_Token("NAT", text[i:j], i))
            i = j
            continue
        if text.startswith("->", i):
            out.append(_Token("ARROW", "->", i))
            i += 2
            continue
        if ch in "()[],|&!":
            out.append(_Token(ch, ch, i))
            i += 1
            continue
        raise ParseError(f"unexpected character {ch!r}", i)
    out.append(_Token("EOF", "", n))
    return out


class _Parser:
    def __init__(self, text: str) -> None:
        self.tokens = _lex_formula(text)
        self.pos = 0

    def peek(self, ahead: int = 0) -> _Token:
        return self.tokens[min(self.pos + ahead, len(self.tokens) - 1)]

    def take(self, kind: str) -> _Token:
        tok = self.peek()
        if tok.kind != kind:
            raise ParseError(f"expected {kind}, found {tok.text or 'end of input'!r}", tok.offset)
        self.pos += 1
        return tok

    def parse(self) -> Formula:
        phi = self.disj()
        tok = self.peek()
        if tok.kind != "EOF":
            raise ParseError(f"trailing input {tok.text!r}", tok.offset)
        return phi

    def disj(self) -> Formula:
        phi = self.conj()
        while self.peek().kind == "|":
            self.pos += 1
            phi = core.or_(phi, self.conj())
        return phi

    def conj(self) -> Formula:
        phi = self.impl()
        while self.peek().kind == "&":
            self.pos += 1
            phi = core.and_(phi, self.impl())
        return phi

    def impl(self) -> Formula:
        phi = self.temporal()
        if self.peek().kind == "ARROW":
            self.pos += 1
            return core.implies(phi, self.impl())
        return phi

    def temporal(self) -> Formula:
        phi = self.unary()
        tok = self.peek()
        if tok.kind == "KW" and tok.text in _BINARY:
            self.pos += 1
            interval = self.interval_opt()
            return _BINARY[tok.text](phi, self.unary(), interval)
        return phi

    def unary(self) -> Formula:
        tok = self.peek()
        if tok.kind == "!":
            self.pos += 1
            return core.not_(self.unary())
        if tok.kind == "KW" and tok.text in _UNARY:
            self.pos += 1
            interval = self.interval_opt()
            return _UNARY[tok.text](self.unary(), interval)
        if tok.kind == "KW" and tok.text == "true":
            self.pos += 1
            return core.top()
        if tok.kind == "KW" and tok.text == "false":
            self.pos += 1
            return core.bottom()
        if tok.kind == "IDENT":
            self.pos += 1
            return core.atom(tok.text)
        if tok.kind == "(":
            self.pos += 1
            phi = self.disj()
            self.take(")")
            return phi
        raise ParseError(f"expected a formula, found {tok.text or 'end of input'!r}", tok.offset)

    def at_interval(self) -> bool:
        tok = self.peek()
        if tok.kind == "[":
            return True
        # '(' opens an interval only when it looks like '( nat ,'
        return tok.kind == "(" and self.peek(1).kind == "NAT" and self.peek(2).kind == ","

    def interval_opt(self) -> Interval:
        if not self.at_interval():
            return FULL
        open_tok = self.take(self.peek().kind)
        left_closed = open_tok.kind == "["
        lower = int(self.take("NAT").text)
        self.take(",")
        tok = self.peek()
        if tok.kind == "NAT":
            self.pos += 1
            upper: int | float = int(tok.text)
        elif tok.kind == "IDENT" and tok.text == "inf":
            self.pos += 1
            upper = INF
        else:
            raise ParseError("expected an interval upper bound", tok.offset)
        close = self.peek()
        if close.kind not in ("]", ")"):
            raise ParseError("expected ']' or ')'", close.offset)
        self.pos += 1
        try:
            return Interval(lower, upper, left_closed, close.kind == "]")
        except MtlError as exc:
            raise ParseError(str(exc), open_tok.offset) from exc


def parse_formula(text: str) -> Formula:
    return _Parser(_strip_comments(text)).parse()


# ---------------------------------------------------------------------------
# Printing.  Levels: | 1, & 2, -> 3, U/S 4, unary 5, atoms 6.

_UNARY_NAMES = {
    core.Eventually: "F",
    core.Always: "G",
    core.Once: "P",
    core.Historically: "H",
    core.WeakEventually: "Fw",
    core.WeakAlways: "Gw",
    core.Next: "O",
}
_BINARY_NAMES = {core.Until: "U", core.Since: "S", core.WeakUntil: "Uw"}


def _fmt(phi: Formula, minimum: int) -> str:
    match phi:
        case core.Atom(name=name):
            text, level = name, 6
        case core.Top():
            text, level = "true", 6
        case core.Bottom():
            text, level = "false", 6
        case core.Not(arg=a):
            text, level = "!" + _fmt(a, 5), 5
        case core.Or(left=l, right=r):
            text, level = f"{_fmt(l, 1)} | {_fmt(r, 2)}", 1
        case core.And(left=l, right=r):
            text, level = f"{_fmt(l, 2)} & {_fmt(r, 3)}", 2
        case core.Implies(left=l, right=r):
            text, level = f"{_fmt(l, 4)} -> {_fmt(r, 3)}", 3
        case core.Until() | core.Since() | core.WeakUntil():
            name = _BINARY_NAMES[type(phi)]
            text = f"{_fmt(phi.left, 5)} {name}{phi.interval} {_fmt(phi.right, 5)}"
            level = 4
        case _:
            name = _UNARY_NAMES[type(phi)]
            shown = "" if phi.interval == FULL else str(phi.interval)
            text, level = f"{name}{shown} {_fmt(phi.arg, 5)}", 5
    if level < minimum:
        return f"({text})"
    return text


def format_formula(phi: Formula) -> str:
    return _fmt(phi, 0)


# ---------------------------------------------------------------------------
# Timed words


def _strip_comments(text: str) -> str:
    # blank the comment instead of cutting it so error offsets stay valid
    out = []
    for line in text.splitlines():
        head, sep, tail = line.partition("//")
        out.append(head + " " * (len(sep) + len(tail)))
    return "\n".join(out)


def _parse_time(text: str, offset: int) -> Fraction:
    try:
        value = Fraction(text)
    except (ValueError, ZeroDivisionError) as exc:
        raise ParseError(f"bad timestamp {text!r}", offset) from exc
    if value < 0:
        raise ParseError(f"negative timestamp {text!r}", offset)
    return value


def parse_timed_word(text: str) -> TimedWord:
    src = _strip_comments(text)
    weak_ok = False
    i, n = 0, len(src)
    points: list[tuple[frozenset[str], Fraction]] = []
    while i < n:
        ch = src[i]
        if ch.isspace():
            i += 1
            continue
        if src.startswith("#weak", i):
            weak_ok = True
            i += 5
            continue
        if ch != "{":
            raise ParseError(f"expected '{{', found {ch!r}", i)
        j = src.find("}", i)
        if j < 0:
            raise ParseError("unterminated event set", i)
        names = [p.strip() for p in src[i + 1 : j].split(",") if p.strip()]
        if not names:
            raise ParseError("empty event set", i)
        for name in names:
            if not (name[0].isalpha() or name[0] == "_") or not all(
                c.isalnum() or c == "_" for c in name
            ):
                raise ParseError(f"bad proposition name {name!r}", i)
        i = j + 1
        if i >= n or src[i] != "@":
            raise ParseError("expected '@time' after event set", i)
        i += 1
        k = i
        while k < n and (src[k].isdigit() or src[k] in "./"):
            k += 1
        if k == i:
            raise ParseError("missing timestamp", i)
        time = _parse_time(src[i:k], i)
        if points and time < points[-1][1]:
            raise ParseError("timestamps must be nondecreasing", i)
        if points and time == points[-1][1] and not weak_ok:
            raise ParseError("repeated timestamp without #weak", i)
        points.append((frozenset(names), time))
        i = k
    if not points:
        raise ParseError("empty timed word", 0)
    return TimedWord(tuple(points))


def _fmt_time(t: Fraction) -> str:
    if t.denominator == 1:
        return str(t.numerator)
    den = t.denominator
    # prefer an exact decimal when the denominator only has factors 2 and 5
    scale = 0
    while den % 2 == 0:
        den //= 2
        scale += 1
    fives = 0
    while den % 5 == 0:
        den //= 5
        fives += 1
    if den == 1:
        digits = max(scale, fives)
        units = t.numerator * 10**digits // t.denominator
        text = str(units).rjust(digits + 1, "0")
        return f"{text[:-digits]}.{text[-digits:]}"
    return f"{t.numerator}/{t.denominator}"


def format_timed_word(word: TimedWord) -> str:
    body = " ".join(
        "{" + ",".join(sorted(event)) + "}@" + _fmt_time(time) for event, time in word.points
    )
    if not word.strict:
        return "#weak " + body
    return body
