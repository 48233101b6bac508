"""Concrete syntax for processes, schedulers and source files.

Processes::

    P ::= P + P | P | P | bang P | new a, b . P
        | l: a . P | l: !a . P | l: tau . P | l: omega . P
        | l: psum { 1/3: P, 2/3: P } | l: (P +_1/3 P)
        | l: { P } | l: c(x) . P | l: !c<v> . P
        | 0 | hole | NAME | ( P )

Prefix binds tightest, then ``new``, then ``bang``, then ``|``, then ``+``.
Labels (``l``, ``l^01``) are optional on prefixes.  A trailing ``. 0`` may be
omitted.  ``omega`` is the success output.

Schedulers::

    S ::= sigma(l) . S | sigma(l1, l2) . S | 0 | S + S + ... | ( S ) | NAME

Source files are ``;``-terminated declarations::

    value c = {v1, v2};
    process P = ...;   context C = ...;   test O = ...;   scheduler S = ...;
    option depth = 8;

``#`` starts a comment.
"""
from __future__ import annotations

import re
from dataclasses import dataclass, field
from fractions import Fraction

from .terms import (
    HOLE, NIL, OMEGA, OMEGA_ACTION, TAU, Action, Bang, Hole, InValue, Label, Nil, OutValue, Par,
    Prefix, Process, ProbSum, Protect, Restrict, SChoice, Scheduler, Sigma, SigmaPair, SNIL, SNil,
    Sum, TermError, count_holes, inp, out,
)
from .values import ValuePassingError, ValueSpec, desugar_value_passing, has_sugar

KEYWORDS = frozenset({
    "psum", "new", "bang", "tau", "omega", "hole", "sigma",
    "process", "scheduler", "context", "test", "value", "option",
})


class ParseError(ValueError):
    def __init__(self, message: str, line: int = 0, col: int = 0):
        self.message = message
        self.line = line
        self.col = col
        where = f"line {line}, column {col}: " if line else ""
        super().__init__(where + message)


_TOKEN = re.compile(r"""
    (?P<ws>[ \t\r\n]+|\#[^\n]*)
  | (?P<name>[A-Za-z_][A-Za-z0-9_]*(?:%[A-Za-z0-9_]+)?)
  | (?P<num>[0-9]+)
  | (?P<op>\+_|[+|.:(){},!^/<>=;])
""", re.VERBOSE)


@dataclass(frozen=True, slots=True)
class Token:
    kind: str       # name, num, op, eof
    text: str
    line: int
    col: int


def tokenize(text: str) -> list[Token]:
    tokens = []
    pos, line, line_start = 0, 1, 0
    n = len(text)
    while pos < n:
        m = _TOKEN.match(text, pos)
        if m is None:
            raise ParseError(f"unexpected character {text[pos]!r}", line, pos - line_start + 1)
        kind = m.lastgroup
        if kind != "ws":
            tokens.append(Token(kind, m.group(), line, pos - line_start + 1))
        chunk = m.group()
        nl = chunk.count("\n")
        if nl:
            line += nl
            line_start = pos + chunk.rfind("\n") + 1
        pos = m.end()
    tokens.append(Token("eof", "", line, pos - line_start + 1))
    return tokens


class _Parser:
    def __init__(self, text: str, env: dict | None = None):
        self.toks = tokenize(text)
        self.i = 0
        self.env = env or {}

    # -- token helpers

    @property
    def tok(self) -> Token:
        return self.toks[self.i]

    def peek(self, k: int = 1) -> Token:
        return self.toks[min(self.i + k, len(self.toks) - 1)]

    def at(self, text: str) -> bool:
        t = self.tok
        return t.kind in ("op", "name", "num") and t.text == text

    def advance(self) -> Token:
        t = self.tok
        self.i += 1
        return t

    def error(self, msg: str, tok: Token | None = None):
        t = tok or self.tok
        raise ParseError(msg, t.line, t.col)

    def expect(self, text: str) -> Token:
        if not self.at(text):
            shown = self.tok.text or "end of input"
            self.error(f"expected {text!r}, found {shown!r}")
        return self.advance()

    def ident(self, what: str = "name") -> str:
        t = self.tok
        if t.kind != "name" or t.text in KEYWORDS:
            self.error(f"expected {what}, found {t.text or 'end of input'!r}")
        self.advance()
        return t.text

    def end(self):
        if self.tok.kind != "eof":
            self.error(f"unexpected {self.tok.text!r}")

    # -- labels and numbers

    def is_label_start(self) -> bool:
        t = self.tok
        if t.kind != "name" or t.text in KEYWORDS or "%" in t.text:
            return False
        nxt = self.peek()
        if nxt.text == ":":
            return True
        return nxt.text == "^" and self.peek(3).text == ":"

    def label(self) -> Label:
        t = self.tok
        atom = self.ident("label")
        if "%" in atom:
            self.error("labels may not contain '%'", t)
        index = ""
        if self.at("^"):
            self.advance()
            b = self.tok
            if b.kind != "num" or b.text.strip("01"):
                self.error("label index must be a bit string")
            index = self.advance().text
        return Label(atom, index)

    def fraction(self) -> Fraction:
        t = self.tok
        if t.kind != "num":
            self.error("expected a rational weight")
        num = int(self.advance().text)
        den = 1
        if self.at("/"):
            self.advance()
            d = self.tok
            if d.kind != "num":
                self.error("expected a denominator")
            den = int(self.advance().text)
            if den == 0:
                self.error("zero denominator", d)
        return Fraction(num, den)

    # -- processes

    def process(self) -> Process:
        left = self.par()
        while self.at("+"):
            self.advance()
            left = Sum(left, self.par())
        return left

    def par(self) -> Process:
        left = self.unary()
        while self.at("|"):
            self.advance()
            left = Par(left, self.unary())
        return left

    def unary(self) -> Process:
        if self.at("bang"):
            self.advance()
            return Bang(self.unary())
        if self.at("new"):
            self.advance()
            chans = [self.channel_name()]
            while self.at(","):
                self.advance()
                chans.append(self.channel_name())
            self.expect(".")
            body = self.unary()
            for c in reversed(chans):
                body = Restrict(c, body)
            return body
        return self.primary()

    def channel_name(self) -> str:
        t = self.tok
        if t.text == "omega":
            self.error("the success channel 'omega' cannot be restricted")
        return self.ident("channel")

    def continuation(self) -> Process:
        if self.at("."):
            self.advance()
            return self.unary()
        return NIL

    def primary(self) -> Process:
        t = self.tok
        if t.kind == "num":
            if t.text != "0":
                self.error(f"unexpected number {t.text!r}")
            self.advance()
            return NIL
        if self.at("hole"):
            self.advance()
            return HOLE
        if self.at("("):
            return self.paren(None)
        if self.is_label_start():
            lab = self.label()
            self.expect(":")
            return self.labeled(lab)
        if t.kind == "name" and t.text not in KEYWORDS and t.text in self.env and self.peek().text != "(":
            self.advance()
            ref = self.env[t.text]
            if not isinstance(ref, Process):
                self.error(f"{t.text!r} is not a process", t)
            return ref
        return self.labeled(None)

    def paren(self, lab: Label | None) -> Process:
        open_tok = self.expect("(")
        first = self.process()
        if self.at("+_"):
            self.advance()
            w_tok = self.tok
            w = self.fraction()
            if not 0 < w < 1:
                self.error("binary probabilistic sum needs a weight strictly between 0 and 1", w_tok)
            second = self.process()
            self.expect(")")
            return ProbSum(lab, ((w, first), (1 - w, second)))
        if lab is not None:
            self.error("a labeled parenthesis must be a probabilistic sum 'P +_p Q'", open_tok)
        self.expect(")")
        return first

    def labeled(self, lab: Label | None) -> Process:
        t = self.tok
        if self.at("psum"):
            self.advance()
            self.expect("{")
            branches = []
            while True:
                w = self.fraction()
                self.expect(":")
                branches.append((w, self.process()))
                if not self.at(","):
                    break
                self.advance()
            self.expect("}")
            total = sum((w for w, _ in branches), Fraction(0))
            if total != 1:
                self.error(f"weights sum to {total}, not 1", t)
            for w, _ in branches:
                if w == 0:
                    self.error("zero weight in probabilistic sum", t)
            return ProbSum(lab, tuple(branches))
        if self.at("("):
            return self.paren(lab)
        if self.at("{"):
            if lab is None:
                self.error("a protected block needs a label")
            self.advance()
            body = self.process()
            self.expect("}")
            return Protect(lab, body)
        if self.at("tau"):
            self.advance()
            return Prefix(lab, TAU, self.continuation())
        if self.at("omega"):
            self.advance()
            return Prefix(lab, OMEGA_ACTION, self.continuation())
        if self.at("!"):
            self.advance()
            if self.at("omega"):
                self.advance()
                return Prefix(lab, OMEGA_ACTION, self.continuation())
            c = self.ident("channel")
            if self.at("<"):
                self.advance()
                v = self.value_name()
                self.expect(">")
                return OutValue(lab, c, v, self.continuation())
            return Prefix(lab, out(c), self.continuation())
        if t.kind == "name" and t.text not in KEYWORDS:
            c = self.advance().text
            if self.at("("):
                self.advance()
                x = self.ident("variable")
                self.expect(")")
                return InValue(lab, c, x, self.continuation())
            return Prefix(lab, inp(c), self.continuation())
        self.error(f"expected a process, found {t.text or 'end of input'!r}")

    def value_name(self) -> str:
        t = self.tok
        if t.kind not in ("name", "num") or t.text in KEYWORDS:
            self.error("expected a value")
        return self.advance().text

    # -- schedulers

    def scheduler(self) -> Scheduler:
        opts = [self.sched_seq()]
        while self.at("+"):
            self.advance()
            opts.append(self.sched_seq())
        return opts[0] if len(opts) == 1 else SChoice(tuple(opts))

    def sched_seq(self) -> Scheduler:
        t = self.tok
        if t.kind == "num":
            if t.text != "0":
                self.error(f"unexpected number {t.text!r}")
            self.advance()
            return SNIL
        if self.at("("):
            self.advance()
            s = self.scheduler()
            self.expect(")")
            return s
        if self.at("sigma"):
            self.advance()
            self.expect("(")
            l1 = self.label()
            l2 = None
            if self.at(","):
                self.advance()
                l2 = self.label()
            self.expect(")")
            cont: Scheduler = SNIL
            if self.at("."):
                self.advance()
                cont = self.sched_seq()
            return Sigma(l1, cont) if l2 is None else SigmaPair(l1, l2, cont)
        if t.kind == "name" and t.text in self.env:
            ref = self.env[t.text]
            if not isinstance(ref, Scheduler):
                self.error(f"{t.text!r} is not a scheduler")
            self.advance()
            return ref
        self.error(f"expected a scheduler, found {t.text or 'end of input'!r}")


# ---------------------------------------------------------------------------
# entry points


def _finish(p: Process, values, at: Token | None = None) -> Process:
    try:
        if values:
            return desugar_value_passing(p, values)
        if has_sugar(p):
            desugar_value_passing(p, {})
    except ValuePassingError as e:
        if at is None:
            raise ParseError(str(e)) from None
        raise ParseError(str(e), at.line, at.col) from None
    return p


def parse_process(text: str, values=None, env: dict | None = None) -> Process:
    """Parse a process; value-passing sugar is expanded using ``values``."""
    ps = _Parser(text, env)
    try:
        p = ps.process()
        ps.end()
    except TermError as e:
        if isinstance(e, ParseError):
            raise
        raise ParseError(str(e), ps.tok.line, ps.tok.col) from None
    if count_holes(p):
        raise ParseError("'hole' is only allowed in contexts")
    return _finish(p, values)


def parse_context(text: str, values=None, env: dict | None = None) -> Process:
    ps = _Parser(text, env)
    p = ps.process()
    ps.end()
    if count_holes(p) != 1:
        raise ParseError(f"a context needs exactly one hole, found {count_holes(p)}")
    return _finish(p, values)


def parse_scheduler(text: str, env: dict | None = None) -> Scheduler:
    ps = _Parser(text, env)
    s = ps.scheduler()
    ps.end()
    return s


def parse_label(text: str) -> Label:
    ps = _Parser(text)
    lab = ps.label()
    ps.end()
    return lab


KINDS = ("process", "context", "test", "scheduler", "value")


@dataclass
class SourceUnit:
    declarations: dict = field(default_factory=dict)   # name -> (kind, value)
    options: dict = field(default_factory=dict)

    def get(self, name: str, *kinds: str):
        try:
            kind, value = self.declarations[name]
        except KeyError:
            raise KeyError(f"no declaration named {name!r}") from None
        if kinds and kind not in kinds:
            raise KeyError(f"{name!r} is a {kind}, expected {' or '.join(kinds)}")
        return value

    def names(self, *kinds: str) -> list[str]:
        return [n for n, (k, _) in self.declarations.items() if not kinds or k in kinds]

    @property
    def values(self) -> dict[str, ValueSpec]:
        return {n: v for n, (k, v) in self.declarations.items() if k == "value"}


def parse_source(text: str) -> SourceUnit:
    unit = SourceUnit()
    ps = _Parser(text)
    env: dict = {}
    ps.env = env
    if ps.tok.kind == "eof":
        ps.error("empty source: expected at least one declaration")
    while ps.tok.kind != "eof":
        kw = ps.tok
        if kw.text not in KINDS + ("option",):
            ps.error(f"expected a declaration keyword, found {kw.text!r}")
        ps.advance()
        name_tok = ps.tok
        name = ps.ident("declaration name")
        ps.expect("=")
        if kw.text == "option":
            v = ps.tok
            if v.kind not in ("name", "num"):
                ps.error("expected an option value")
            ps.advance()
            unit.options[name] = v.text
        else:
            if name in unit.declarations:
                ps.error(f"duplicate declaration {name!r}", name_tok)
            start = ps.tok
            try:
                raw, value = _declaration(ps, kw.text, name, unit)
            except (TermError, ValueError) as e:
                if isinstance(e, ParseError):
                    raise
                raise ParseError(str(e), start.line, start.col) from None
            unit.declarations[name] = (kw.text, value)
            if kw.text != "value":
                env[name] = raw
        ps.expect(";")
    return unit


def _declaration(ps: _Parser, kind: str, name: str, unit: SourceUnit):
    if kind == "value":
        ps.expect("{")
        vals = [ps.value_name()]
        while ps.at(","):
            ps.advance()
            vals.append(ps.value_name())
        ps.expect("}")
        spec = ValueSpec(name, tuple(vals))
        return spec, spec
    if kind == "scheduler":
        s = ps.scheduler()
        return s, s
    start = ps.tok
    p = ps.process()
    holes = count_holes(p)
    if kind == "context" and holes != 1:
        ps.error(f"context {name!r} needs exactly one hole, found {holes}", start)
    if kind != "context" and holes:
        ps.error("'hole' is only allowed in contexts", start)
    # references are substituted before desugaring, so expand the raw term
    return p, _finish(p, unit.values, start)


# ---------------------------------------------------------------------------
# printing

_SUM, _PAR, _UNARY = 0, 1, 2


def format_label(lab: Label) -> str:
    return str(lab)


def format_fraction(w: Fraction) -> str:
    return str(w)


def format_process(p: Process) -> str:
    return _fmt(p, _SUM)


def _level(p: Process) -> int:
    if isinstance(p, Sum):
        return _SUM
    if isinstance(p, Par):
        return _PAR
    return _UNARY


def _fmt(p: Process, need: int) -> str:
    text = _fmt_raw(p)
    if _level(p) < need:
        return f"({text})"
    return text


def _lab(lab: Label | None) -> str:
    return "" if lab is None else f"{lab}: "


def _cont(p: Process) -> str:
    if isinstance(p, Nil):
        return ""
    return " . " + _fmt(p, _UNARY)


def _fmt_raw(p: Process) -> str:
    if isinstance(p, Nil):
        return "0"
    if isinstance(p, Hole):
        return "hole"
    if isinstance(p, Sum):
        return f"{_fmt(p.left, _SUM)} + {_fmt(p.right, _PAR)}"
    if isinstance(p, Par):
        return f"{_fmt(p.left, _PAR)} | {_fmt(p.right, _UNARY)}"
    if isinstance(p, Bang):
        return "bang " + _fmt(p.body, _UNARY)
    if isinstance(p, Restrict):
        return f"new {p.channel} . {_fmt(p.body, _UNARY)}"
    if isinstance(p, Prefix):
        a = p.action
        if a.channel == OMEGA and not a.output:
            raise TermError("input on the success channel has no concrete syntax")
        return f"{_lab(p.label)}{a}{_cont(p.cont)}"
    if isinstance(p, ProbSum):
        inner = ", ".join(f"{w}: {_fmt(q, _SUM)}" for w, q in p.branches)
        return f"{_lab(p.label)}psum {{ {inner} }}"
    if isinstance(p, Protect):
        return f"{p.label}: {{ {_fmt(p.body, _SUM)} }}"
    if isinstance(p, InValue):
        return f"{_lab(p.label)}{p.channel}({p.var}){_cont(p.cont)}"
    if isinstance(p, OutValue):
        return f"{_lab(p.label)}!{p.channel}<{p.value}>{_cont(p.cont)}"
    raise TypeError(f"not a process: {p!r}")


def format_scheduler(s: Scheduler) -> str:
    if isinstance(s, SNil):
        return "0"
    if isinstance(s, (Sigma, SigmaPair)):
        head = f"sigma({s.label})" if isinstance(s, Sigma) else f"sigma({s.first}, {s.second})"
        if isinstance(s.cont, SNil):
            return head
        tail = format_scheduler(s.cont)
        if isinstance(s.cont, SChoice):
            tail = f"({tail})"
        return f"{head} . {tail}"
    if isinstance(s, SChoice):
        parts = []
        for o in s.options:
            t = format_scheduler(o)
            parts.append(f"({t})" if isinstance(o, SChoice) else t)
        return " + ".join(parts)
    raise TypeError(f"not a scheduler: {s!r}")


def format_action(a: Action) -> str:
    return str(a)
