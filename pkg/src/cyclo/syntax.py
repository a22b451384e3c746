"""Terms, formulas, sequents and inductive definition sets.

Everything here is immutable.  Variables and constants are told apart by the
signature only: a bare identifier that is declared as an arity-0 function is a
constant, anything else in term position is a variable.

Textual syntax::

    term     := name | name(term, ..., term)
    formula  := term = term | P(term, ..., term)
    sequent  := formulas |- formulas          (either side may be empty)

Definition files (``.ind``)::

    const s;  fun nx 1;  ordpred Q 1;
    pred TeF 1 { => TeF(e); TeF(nx(x)) => TeF(x); }
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterable, Iterator, Mapping, Union


class DefinitionError(ValueError):
    """Base class for problems found while reading syntax."""


class ParseError(DefinitionError):
    def __init__(self, message: str, line: int = 0, col: int = 0):
        super().__init__(f"{line}:{col}: {message}" if line else message)
        self.line = line
        self.col = col


class ArityMismatch(DefinitionError):
    pass


class UndeclaredSymbol(DefinitionError):
    pass


class DuplicateDeclaration(DefinitionError):
    pass


class NotLinear(ValueError):
    """Raised for a term outside the ``f^n(atom)`` fragment."""


# ---------------------------------------------------------------------------
# terms and formulas


@dataclass(frozen=True)
class Var:
    name: str

    def __str__(self) -> str:
        return self.name


@dataclass(frozen=True)
class App:
    fn: str
    args: tuple = ()

    def __str__(self) -> str:
        return self.text

    @cached_property
    def text(self) -> str:
        if not self.args:
            return self.fn
        return f"{self.fn}({','.join(str(a) for a in self.args)})"

    def __hash__(self) -> int:
        return self._hash

    @cached_property
    def _hash(self) -> int:
        return hash(("App", self.fn, self.args))


Term = Union[Var, App]


@dataclass(frozen=True)
class Eq:
    left: Term
    right: Term

    def __str__(self) -> str:
        return self.text

    @cached_property
    def text(self) -> str:
        return f"{self.left} = {self.right}"

    def __hash__(self) -> int:
        return self._hash

    @cached_property
    def _hash(self) -> int:
        return hash(("Eq", self.left, self.right))


@dataclass(frozen=True)
class Atom:
    pred: str
    args: tuple = ()

    def __str__(self) -> str:
        return self.text

    @cached_property
    def text(self) -> str:
        if not self.args:
            return self.pred
        return f"{self.pred}({','.join(str(a) for a in self.args)})"

    def __hash__(self) -> int:
        return self._hash

    @cached_property
    def _hash(self) -> int:
        return hash(("Atom", self.pred, self.args))


Formula = Union[Eq, Atom]


def formula_key(f: Formula) -> str:
    return str(f)


def _sorted(fs: Iterable[Formula]) -> tuple:
    return tuple(sorted(fs, key=formula_key))


@dataclass(frozen=True)
class Sequent:
    """``ante |- succ`` with both sides as sets."""

    ante: frozenset = frozenset()
    succ: frozenset = frozenset()

    def __post_init__(self):
        object.__setattr__(self, "ante", frozenset(self.ante))
        object.__setattr__(self, "succ", frozenset(self.succ))

    def __str__(self) -> str:
        return self.text

    @cached_property
    def text(self) -> str:
        left = ", ".join(str(f) for f in _sorted(self.ante))
        right = ", ".join(str(f) for f in _sorted(self.succ))
        return f"{left} |- {right}".strip()

    def __hash__(self) -> int:
        return self._hash

    @cached_property
    def _hash(self) -> int:
        return hash((self.ante, self.succ))

    def sorted_ante(self) -> tuple:
        return self._sorted_ante

    def sorted_succ(self) -> tuple:
        return self._sorted_succ

    @cached_property
    def _sorted_ante(self) -> tuple:
        return _sorted(self.ante)

    @cached_property
    def _sorted_succ(self) -> tuple:
        return _sorted(self.succ)


def seq(ante: Iterable[Formula] = (), succ: Iterable[Formula] = ()) -> Sequent:
    return Sequent(frozenset(ante), frozenset(succ))


Substitution = Mapping[str, Term]


# ---------------------------------------------------------------------------
# substitution and free variables


def substitute(target, theta: Substitution):
    """Simultaneous substitution on a term, formula or sequent."""
    if not theta:
        return target
    if isinstance(target, Var):
        return theta.get(target.name, target)
    if isinstance(target, App):
        if not target.args:
            return target
        return App(target.fn, tuple(substitute(a, theta) for a in target.args))
    if isinstance(target, Eq):
        return Eq(substitute(target.left, theta), substitute(target.right, theta))
    if isinstance(target, Atom):
        return Atom(target.pred, tuple(substitute(a, theta) for a in target.args))
    if isinstance(target, Sequent):
        return Sequent(
            frozenset(substitute(f, theta) for f in target.ante),
            frozenset(substitute(f, theta) for f in target.succ),
        )
    if isinstance(target, (frozenset, set)):
        return frozenset(substitute(f, theta) for f in target)
    raise TypeError(f"cannot substitute into {type(target).__name__}")


def _term_vars(t: Term, acc: set) -> None:
    if isinstance(t, Var):
        acc.add(t.name)
    else:
        for a in t.args:
            _term_vars(a, acc)


def free_vars(target) -> frozenset:
    acc: set = set()
    if isinstance(target, (Var, App)):
        _term_vars(target, acc)
    elif isinstance(target, Eq):
        _term_vars(target.left, acc)
        _term_vars(target.right, acc)
    elif isinstance(target, Atom):
        for a in target.args:
            _term_vars(a, acc)
    elif isinstance(target, Sequent):
        for f in target.ante | target.succ:
            acc |= free_vars(f)
    else:
        for f in target:
            acc |= free_vars(f)
    return frozenset(acc)


def terms_of(f: Formula) -> tuple:
    return (f.left, f.right) if isinstance(f, Eq) else f.args


def term_depth(t: Term) -> int:
    if isinstance(t, Var) or not t.args:
        return 0
    return 1 + max(term_depth(a) for a in t.args)


def atom_and_depth(t: Term, unary: str = "nx") -> tuple:
    """Split ``unary^n(a)`` into ``(a, n)`` where ``a`` is a variable or constant."""
    depth = 0
    while isinstance(t, App) and t.fn == unary and len(t.args) == 1:
        t = t.args[0]
        depth += 1
    if isinstance(t, Var) or not t.args:
        return t, depth
    raise NotLinear(f"{t} is not of the form {unary}^n(atom)")


def iterate(fn: str, n: int, t: Term) -> Term:
    for _ in range(n):
        t = App(fn, (t,))
    return t


def subterm_positions(t: Term, target: Term, path: tuple = ()) -> Iterator[tuple]:
    if t == target:
        yield path
    if isinstance(t, App):
        for i, a in enumerate(t.args):
            yield from subterm_positions(a, target, path + (i,))


def replace_at(t: Term, path: tuple, new: Term) -> Term:
    if not path:
        return new
    i = path[0]
    args = list(t.args)
    args[i] = replace_at(args[i], path[1:], new)
    return App(t.fn, tuple(args))


# ---------------------------------------------------------------------------
# signatures and inductive systems


@dataclass(frozen=True)
class Signature:
    functions: dict = field(default_factory=dict)
    ordinary_predicates: dict = field(default_factory=dict)
    inductive_predicates: dict = field(default_factory=dict)

    @property
    def constants(self) -> frozenset:
        return frozenset(n for n, a in self.functions.items() if a == 0)

    def predicate_arity(self, name: str):
        if name in self.inductive_predicates:
            return self.inductive_predicates[name]
        return self.ordinary_predicates.get(name)

    def is_inductive(self, name: str) -> bool:
        return name in self.inductive_predicates

    def __hash__(self):
        return hash(
            (
                tuple(self.functions.items()),
                tuple(self.ordinary_predicates.items()),
                tuple(self.inductive_predicates.items()),
            )
        )


@dataclass(frozen=True)
class Production:
    assumptions: tuple
    conclusion: Atom

    @cached_property
    def variables(self) -> tuple:
        """Variables in order of first occurrence, conclusion first."""
        seen: list = []
        for f in (self.conclusion,) + tuple(self.assumptions):
            for t in terms_of(f):
                acc: list = []
                _ordered_vars(t, acc)
                for v in acc:
                    if v not in seen:
                        seen.append(v)
        return tuple(seen)

    def __str__(self) -> str:
        left = ", ".join(str(a) for a in self.assumptions)
        return f"{left} => {self.conclusion}".strip()


def _ordered_vars(t: Term, acc: list) -> None:
    if isinstance(t, Var):
        acc.append(t.name)
    else:
        for a in t.args:
            _ordered_vars(a, acc)


@dataclass(frozen=True)
class InductiveSystem:
    signature: Signature
    productions: tuple = ()

    def productions_for(self, pred: str) -> list:
        return [p for p in self.productions if p.conclusion.pred == pred]

    def production(self, pred: str, index: int) -> Production:
        prods = self.productions_for(pred)
        if not 0 <= index < len(prods):
            raise IndexError(f"{pred} has no production {index}")
        return prods[index]

    def is_inductive_atom(self, f: Formula) -> bool:
        return isinstance(f, Atom) and self.signature.is_inductive(f.pred)

    def __hash__(self):
        return hash((self.signature, self.productions))


# ---------------------------------------------------------------------------
# lexer / parser

_TOKEN = re.compile(
    r"(?P<ws>[ \t\r]+)|(?P<nl>\n)|(?P<comment>\#[^\n]*)"
    r"|(?P<arrow>=>)|(?P<turnstile>\|-)"
    r"|(?P<num>[0-9]+)|(?P<ident>[A-Za-z_][A-Za-z0-9_']*)"
    r"|(?P<sym>[(),;{}=])"
)


@dataclass
class _Tok:
    kind: str
    value: str
    line: int
    col: int


def _tokenize(text: str) -> list:
    toks = []
    pos, line, line_start = 0, 1, 0
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if not m:
            raise ParseError(f"unexpected character {text[pos]!r}", line, pos - line_start + 1)
        kind = m.lastgroup
        if kind == "nl":
            line += 1
            line_start = m.end()
        elif kind not in ("ws", "comment"):
            toks.append(_Tok(kind, m.group(), line, m.start() - line_start + 1))
        pos = m.end()
    toks.append(_Tok("eof", "", line, pos - line_start + 1))
    return toks


class _Parser:
    def __init__(self, toks: list, signature: Signature | None):
        self.toks = toks
        self.i = 0
        self.sig = signature

    @property
    def tok(self) -> _Tok:
        return self.toks[self.i]

    def error(self, msg: str):
        raise ParseError(msg, self.tok.line, self.tok.col)

    def take(self, kind: str, value: str | None = None) -> _Tok:
        t = self.tok
        if t.kind != kind or (value is not None and t.value != value):
            want = value if value is not None else kind
            self.error(f"expected {want!r}, found {t.value or 'end of input'!r}")
        self.i += 1
        return t

    def at(self, kind: str, value: str | None = None) -> bool:
        t = self.tok
        return t.kind == kind and (value is None or t.value == value)

    def term(self) -> Term:
        name = self.take("ident")
        if self.at("sym", "("):
            self.i += 1
            args = [self.term()]
            while self.at("sym", ","):
                self.i += 1
                args.append(self.term())
            self.take("sym", ")")
            return self._app(name, tuple(args))
        if name.value in self.sig.functions:
            return self._app(name, ())
        return Var(name.value)

    def _app(self, name: _Tok, args: tuple) -> App:
        arity = self.sig.functions.get(name.value)
        if arity is None:
            raise UndeclaredSymbol(f"{name.line}:{name.col}: undeclared function {name.value!r}")
        if arity != len(args):
            raise ArityMismatch(
                f"{name.line}:{name.col}: {name.value} expects {arity} argument(s), got {len(args)}"
            )
        return App(name.value, args)

    def formula(self) -> Formula:
        t = self.tok
        if t.kind == "ident" and self.sig.predicate_arity(t.value) is not None:
            self.i += 1
            args: list = []
            if self.at("sym", "("):
                self.i += 1
                if not self.at("sym", ")"):
                    args.append(self.term())
                    while self.at("sym", ","):
                        self.i += 1
                        args.append(self.term())
                self.take("sym", ")")
            arity = self.sig.predicate_arity(t.value)
            if arity != len(args):
                raise ArityMismatch(
                    f"{t.line}:{t.col}: {t.value} expects {arity} argument(s), got {len(args)}"
                )
            return Atom(t.value, tuple(args))
        left = self.term()
        if not self.at("sym", "="):
            if isinstance(left, (Var, App)) and self.tok.kind in ("sym", "arrow", "turnstile", "eof"):
                name = left.name if isinstance(left, Var) else left.fn
                raise UndeclaredSymbol(f"{t.line}:{t.col}: {name!r} is not a declared predicate")
            self.error("expected '='")
        self.i += 1
        return Eq(left, self.term())

    def formula_list(self, stop: tuple) -> list:
        out: list = []
        if any(self.at(*s) for s in stop):
            return out
        out.append(self.formula())
        while self.at("sym", ","):
            self.i += 1
            out.append(self.formula())
        return out


def parse_term(text: str, signature: Signature) -> Term:
    p = _Parser(_tokenize(text), signature)
    t = p.term()
    p.take("eof")
    return t


def parse_formula(text: str, signature: Signature) -> Formula:
    p = _Parser(_tokenize(text), signature)
    f = p.formula()
    p.take("eof")
    return f


def parse_sequent(text: str, signature: Signature) -> Sequent:
    p = _Parser(_tokenize(text), signature)
    ante = p.formula_list((("turnstile", None),))
    p.take("turnstile")
    succ = p.formula_list((("eof", None),))
    p.take("eof")
    return Sequent(frozenset(ante), frozenset(succ))


def parse_definitions(text: str) -> InductiveSystem:
    """Read a ``.ind`` file into a validated :class:`InductiveSystem`."""
    toks = _tokenize(text)
    functions: dict = {}
    ordpreds: dict = {}
    indpreds: dict = {}
    bodies: list = []  # (pred, token slice)
    declared: set = set()

    def declare(tok: _Tok, table: dict, arity: int):
        if tok.value in declared:
            raise DuplicateDeclaration(f"{tok.line}:{tok.col}: {tok.value!r} declared twice")
        declared.add(tok.value)
        table[tok.value] = arity

    p = _Parser(toks, None)
    while not p.at("eof"):
        kw = p.take("ident")
        if kw.value == "const":
            declare(p.take("ident"), functions, 0)
            p.take("sym", ";")
        elif kw.value in ("fun", "ordpred"):
            name = p.take("ident")
            arity = int(p.take("num").value)
            declare(name, functions if kw.value == "fun" else ordpreds, arity)
            p.take("sym", ";")
        elif kw.value == "pred":
            name = p.take("ident")
            arity = int(p.take("num").value)
            declare(name, indpreds, arity)
            p.take("sym", "{")
            start = p.i
            while not p.at("sym", "}"):
                if p.at("eof"):
                    p.error("unterminated predicate body")
                p.i += 1
            bodies.append((name.value, start, p.i))
            p.take("sym", "}")
        else:
            raise ParseError(f"unknown declaration {kw.value!r}", kw.line, kw.col)

    sig = Signature(functions, ordpreds, indpreds)
    productions: list = []
    for pred, start, end in bodies:
        body = _Parser(toks[start:end] + [_Tok("eof", "", 0, 0)], sig)
        while not body.at("eof"):
            assumptions = body.formula_list((("arrow", None),))
            body.take("arrow")
            concl = body.formula()
            body.take("sym", ";")
            productions.append(_check_production(sig, pred, assumptions, concl))
    return InductiveSystem(sig, tuple(productions))


def _check_production(sig: Signature, pred: str, assumptions: list, concl: Formula) -> Production:
    if not isinstance(concl, Atom) or concl.pred != pred:
        raise DefinitionError(f"production in body of {pred} must conclude {pred}(...), got {concl}")
    for a in assumptions:
        if not isinstance(a, Atom):
            raise DefinitionError(f"assumption {a} of a {pred} production is not a predicate atom")
    ordinary = [a for a in assumptions if not sig.is_inductive(a.pred)]
    inductive = [a for a in assumptions if sig.is_inductive(a.pred)]
    return Production(tuple(ordinary + inductive), concl)


def render_definitions(system: InductiveSystem) -> str:
    sig = system.signature
    lines = []
    for name, arity in sig.functions.items():
        lines.append(f"const {name};" if arity == 0 else f"fun {name} {arity};")
    for name, arity in sig.ordinary_predicates.items():
        lines.append(f"ordpred {name} {arity};")
    for name, arity in sig.inductive_predicates.items():
        prods = system.productions_for(name)
        if not prods:
            lines.append(f"pred {name} {arity} {{ }}")
            continue
        lines.append(f"pred {name} {arity} {{")
        for prod in prods:
            lines.append(f"  {prod};")
        lines.append("}")
    return "\n".join(lines) + "\n"


def render_sequent(s: Sequent) -> str:
    return str(s)
