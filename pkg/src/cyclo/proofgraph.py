"""Finite derivation trees with buds, rule checking and tree-unfolding.

Node addresses are tuples of child indices; ``()`` is the root and the text
form joins the indices with dots (``""`` for the root).

Every rule application carries an explicit witness so that checking a node is
matching, never search:

=============  =============================================================
rule           args
=============  =============================================================
Axiom, EqR,    (none)
Weak, Bud
Cut            ``formula``
Subst          ``theta``: variable -> term
EqLa           ``x``, ``y``, ``t``, ``u``, ``ante``, ``succ`` (templates)
UnfoldRight    ``pred``, ``index``, ``inst``: variable -> term, ``keep``
Case           ``pred``, ``principal``, ``fresh``: one name list per
               production, ``keep``
=============  =============================================================

``keep`` says whether the principal formula is still present in the
premises.  Sequents are sets, so both readings of the rules are admissible.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterable, Optional

from .syntax import (
    Atom,
    Eq,
    Formula,
    InductiveSystem,
    Sequent,
    Term,
    Var,
    free_vars,
    parse_definitions,
    parse_formula,
    parse_sequent,
    parse_term,
    render_definitions,
    substitute,
)

Address = tuple

RULES = ("Axiom", "Weak", "Cut", "Subst", "EqLa", "EqR", "UnfoldRight", "Case", "Bud")


def addr_str(a: Address) -> str:
    return ".".join(str(i) for i in a)


def parse_addr(text: str) -> Address:
    if text == "":
        return ()
    try:
        return tuple(int(p) for p in text.split("."))
    except ValueError as exc:
        raise ValueError(f"bad node address {text!r}") from exc


# ---------------------------------------------------------------------------
# errors


class RuleError(ValueError):
    pass


class WrongChildCount(RuleError):
    pass


class SideConditionFailed(RuleError):
    pass


class FreshnessViolation(RuleError):
    pass


class TemplateMismatch(RuleError):
    pass


class PrincipalMissing(RuleError):
    pass


class NotInductive(RuleError):
    pass


class Unresolvable(LookupError):
    pass


# ---------------------------------------------------------------------------
# rule applications


def _freeze(v):
    if isinstance(v, dict):
        return tuple(sorted((k, _freeze(x)) for k, x in v.items()))
    if isinstance(v, (list, tuple)):
        return tuple(_freeze(x) for x in v)
    return v


@dataclass(frozen=True)
class Rule:
    """A rule name plus its witness arguments (stored hashably)."""

    name: str
    args: tuple = ()

    @staticmethod
    def make(name: str, **args) -> "Rule":
        if name not in RULES:
            raise ValueError(f"unknown rule {name!r}")
        items = []
        for k, v in sorted(args.items()):
            if v is None:
                continue
            if k in ("theta", "inst"):
                v = tuple(sorted(v.items()))
            elif k in ("ante", "succ"):
                v = tuple(sorted(v, key=str))
            elif k == "fresh":
                v = tuple(tuple(names) for names in v)
            items.append((k, v))
        return Rule(name, tuple(items))

    def __hash__(self) -> int:
        return self._hash

    @cached_property
    def _hash(self) -> int:
        return hash((self.name, self.args))

    def get(self, key: str, default=None):
        for k, v in self.args:
            if k == key:
                return v
        return default

    def mapping(self, key: str) -> dict:
        return dict(self.get(key, ()))

    @cached_property
    def label(self) -> str:
        if self.name == "UnfoldRight":
            return f"UnfoldRight({self.get('pred')},{self.get('index')})"
        if self.name == "Case":
            return f"Case({self.get('pred')})"
        return self.name

    def __str__(self) -> str:
        return self.label


@dataclass(frozen=True)
class Node:
    sequent: Sequent
    rule: Rule

    def __hash__(self) -> int:
        return self._hash

    @cached_property
    def _hash(self) -> int:
        return hash((self.sequent, self.rule))


@dataclass(frozen=True)
class PreProof:
    nodes: dict
    companion: dict = field(default_factory=dict)

    def __hash__(self):
        return id(self)

    @property
    def root(self) -> Node:
        return self.nodes[()]

    def children(self, a: Address) -> list:
        out = []
        i = 0
        while a + (i,) in self.nodes:
            out.append(a + (i,))
            i += 1
        return out

    def buds(self) -> list:
        return sorted(a for a, n in self.nodes.items() if n.rule.name == "Bud")

    def inner(self) -> list:
        return sorted(a for a, n in self.nodes.items() if n.rule.name != "Bud")

    def resolve(self, a: Address) -> Address:
        """A bud stands for its companion; other nodes for themselves."""
        if self.nodes[a].rule.name == "Bud":
            return self.companion[a]
        return a

    def successors(self, a: Address) -> list:
        return self.children(self.resolve(a))

    def sequent(self, a: Address) -> Sequent:
        return self.nodes[a].sequent

    def rule(self, a: Address) -> Rule:
        return self.nodes[self.resolve(a)].rule

    def __len__(self) -> int:
        return len(self.nodes)


def tree_path(a: Address, b: Address) -> list:
    """Addresses from ancestor ``a`` down to ``b`` (both included)."""
    if b[: len(a)] != a:
        raise ValueError(f"{addr_str(a)!r} is not an ancestor of {addr_str(b)!r}")
    return [b[:k] for k in range(len(a), len(b) + 1)]


# ---------------------------------------------------------------------------
# rule instances


def case_distinctions(
    system: InductiveSystem,
    gamma: Iterable[Formula],
    principal: Formula,
    delta: Iterable[Formula],
    fresh: list,
) -> list:
    """Premises of ``Case`` on ``gamma, principal |- delta``, in production order."""
    if not system.is_inductive_atom(principal):
        raise NotInductive(f"{principal} is not an inductive atom")
    gamma = frozenset(gamma)
    delta = frozenset(delta)
    prods = system.productions_for(principal.pred)
    if len(fresh) != len(prods):
        raise WrongChildCount(f"Case({principal.pred}) needs {len(prods)} fresh lists, got {len(fresh)}")
    used = free_vars(Sequent(gamma | {principal}, delta))
    out = []
    for prod, names in zip(prods, fresh):
        names = list(names)
        if len(names) != len(prod.variables) or len(set(names)) != len(names):
            raise FreshnessViolation(
                f"production {prod} needs {len(prod.variables)} distinct fresh variables, got {names}"
            )
        for y in names:
            if y in used or y in system.signature.functions:
                raise FreshnessViolation(y)
        theta = {x: Var(y) for x, y in zip(prod.variables, names)}
        head = substitute(prod.conclusion, theta)
        eqs = [Eq(u, t) for u, t in zip(principal.args, head.args)]
        assumptions = [substitute(a, theta) for a in prod.assumptions]
        out.append(Sequent(gamma | frozenset(eqs) | frozenset(assumptions), delta))
    return out


def case_descendants(system: InductiveSystem, rule: Rule, child_index: int) -> list:
    """The instantiated inductive assumptions of one Case branch."""
    principal = rule.get("principal")
    prod = system.productions_for(rule.get("pred"))[child_index]
    names = rule.get("fresh")[child_index]
    theta = {x: Var(y) for x, y in zip(prod.variables, names)}
    return [
        substitute(a, theta) for a in prod.assumptions if system.signature.is_inductive(a.pred)
    ]


def unfold_right_premises(system: InductiveSystem, conclusion: Sequent, rule: Rule) -> list:
    pred, index = rule.get("pred"), rule.get("index")
    if not system.signature.is_inductive(pred):
        raise NotInductive(f"{pred} is not inductive")
    try:
        prod = system.production(pred, index)
    except IndexError as exc:
        raise SideConditionFailed(str(exc)) from exc
    inst = rule.mapping("inst")
    missing = [x for x in prod.variables if x not in inst]
    if missing:
        raise SideConditionFailed(f"instantiation misses {', '.join(missing)}")
    principal = substitute(prod.conclusion, inst)
    if principal not in conclusion.succ:
        raise PrincipalMissing(f"{principal} not in succedent")
    rest = conclusion.succ if rule.get("keep", False) else conclusion.succ - {principal}
    return [Sequent(conclusion.ante, rest | {substitute(a, inst)}) for a in prod.assumptions]


def expected_children(system: InductiveSystem, conclusion: Sequent, rule: Rule, children: list) -> None:
    """Raise a RuleError unless ``children`` are the premises of ``rule``."""
    name = rule.name
    n = len(children)

    def count(k):
        if n != k:
            raise WrongChildCount(f"{rule.label} expects {k} premise(s), got {n}")

    def same(got: list, want: list):
        count(len(want))
        for i, (g, w) in enumerate(zip(got, want)):
            if g != w:
                raise TemplateMismatch(f"premise {i} is {g}, expected {w}")

    if name == "Bud":
        count(0)
    elif name == "Axiom":
        count(0)
        if not conclusion.ante & conclusion.succ:
            raise SideConditionFailed("antecedent and succedent are disjoint")
    elif name == "EqR":
        count(0)
        if not any(isinstance(f, Eq) and f.left == f.right for f in conclusion.succ):
            raise SideConditionFailed("no t = t in succedent")
    elif name == "Weak":
        count(1)
        c = children[0]
        if not (c.ante <= conclusion.ante and c.succ <= conclusion.succ):
            raise SideConditionFailed("premise is not a subsequent of the conclusion")
    elif name == "Cut":
        phi = rule.get("formula")
        if phi is None:
            raise SideConditionFailed("Cut needs a cut formula")
        same(
            children,
            [
                Sequent(conclusion.ante, conclusion.succ | {phi}),
                Sequent(conclusion.ante | {phi}, conclusion.succ),
            ],
        )
    elif name == "Subst":
        count(1)
        theta = rule.mapping("theta")
        if substitute(children[0], theta) != conclusion:
            raise TemplateMismatch("premise under substitution is not the conclusion")
    elif name == "EqLa":
        count(1)
        x, y = rule.get("x"), rule.get("y")
        t, u = rule.get("t"), rule.get("u")
        if x is None or y is None or t is None or u is None or x == y:
            raise SideConditionFailed("EqLa needs distinct x, y and terms t, u")
        ante, succ = frozenset(rule.get("ante", ())), frozenset(rule.get("succ", ()))
        forward = {x: t, y: u}
        swapped = {x: u, y: t}
        eq = Eq(t, u)
        concl = Sequent(substitute(ante, forward) | {eq}, substitute(succ, forward))
        prem = Sequent(substitute(ante, swapped) | {eq}, substitute(succ, swapped))
        if concl != conclusion:
            raise TemplateMismatch(f"templates give conclusion {concl}")
        same(children, [prem])
    elif name == "UnfoldRight":
        same(children, unfold_right_premises(system, conclusion, rule))
    elif name == "Case":
        principal = rule.get("principal")
        if not isinstance(principal, Atom) or principal.pred != rule.get("pred"):
            raise SideConditionFailed("principal does not match the Case predicate")
        if principal not in conclusion.ante:
            raise PrincipalMissing(f"{principal} not in antecedent")
        gamma = conclusion.ante if rule.get("keep", False) else conclusion.ante - {principal}
        same(children, case_distinctions(system, gamma, principal, conclusion.succ, list(rule.get("fresh", ()))))
    else:
        raise RuleError(f"unknown rule {name}")


def check_rule_instance(system: InductiveSystem, node: Node, children: list) -> None:
    expected_children(system, node.sequent, node.rule, list(children))


# ---------------------------------------------------------------------------
# pre-proof validity


@dataclass
class ValidityReport:
    valid: bool
    failures: list  # (address, kind, message)
    cut_free: bool
    cut_nodes: list
    cycle_normal: bool

    def render(self) -> str:
        lines = []
        for a, kind, msg in self.failures:
            lines.append(f"at {addr_str(a) or '<root>'}: {kind}: {msg}")
        return "\n".join(lines)


def is_cycle_normal(p: PreProof) -> bool:
    return all(b[: len(c)] == c and c != b for b, c in p.companion.items())


def check_pre_proof(system: InductiveSystem, p: PreProof) -> ValidityReport:
    failures = []
    nodes = p.nodes
    if () not in nodes:
        failures.append(((), "MissingRoot", "no root node"))
    for a in sorted(nodes):
        if a and a[:-1] not in nodes:
            failures.append((a, "NotPrefixClosed", "parent missing"))
        if a and a[-1] > 0 and a[:-1] + (a[-1] - 1,) not in nodes:
            failures.append((a, "NotSiblingClosed", "left sibling missing"))
    for a in sorted(nodes):
        node = nodes[a]
        kids = p.children(a)
        if node.rule.name == "Bud":
            if kids:
                failures.append((a, "BudNotLeaf", "bud has children"))
            if a not in p.companion:
                failures.append((a, "MissingCompanion", "bud without companion"))
            continue
        try:
            check_rule_instance(system, node, [nodes[k].sequent for k in kids])
        except RuleError as exc:
            failures.append((a, type(exc).__name__, str(exc)))
    for b, c in sorted(p.companion.items()):
        if b not in nodes or nodes[b].rule.name != "Bud":
            failures.append((b, "NotABud", "companion map entry for a non-bud"))
            continue
        if c not in nodes or nodes[c].rule.name == "Bud":
            failures.append((b, "CompanionNotInner", f"companion {addr_str(c)!r} is not an inner node"))
            continue
        if nodes[c].sequent != nodes[b].sequent:
            failures.append((b, "CompanionMismatch", f"sequent differs from companion {addr_str(c)!r}"))
    cuts = sorted(a for a, n in nodes.items() if n.rule.name == "Cut")
    return ValidityReport(not failures, failures, not cuts, cuts, is_cycle_normal(p))


# ---------------------------------------------------------------------------
# the cut-free fragment of the counterexample


FRAGMENT_RULES = {"Weak", "Subst", "EqLa", "UnfoldRight(FsT,0)", "UnfoldRight(FsT,1)", "Case(TeF)", "Bud"}


def _linear_ok(t: Term) -> bool:
    from .syntax import App

    while isinstance(t, App) and t.fn == "nx" and len(t.args) == 1:
        t = t.args[0]
    return isinstance(t, Var) or (isinstance(t, App) and t.fn in ("s", "e") and not t.args)


def sequent_shape_violations(s: Sequent) -> list:
    out = []
    for f in s.sorted_ante():
        if isinstance(f, Eq):
            terms = (f.left, f.right)
        elif f.pred == "TeF":
            terms = f.args
        else:
            out.append(f"antecedent formula {f} is neither an equality nor TeF")
            continue
        out += [f"term {t} is not nx^n of s, e or a variable" for t in terms if not _linear_ok(t)]
    for f in s.sorted_succ():
        if not (isinstance(f, Atom) and f.pred == "FsT"):
            out.append(f"succedent formula {f} is not FsT")
            continue
        out += [f"term {t} is not nx^n of s, e or a variable" for t in f.args if not _linear_ok(t)]
    return out


def fragment_violations(p: PreProof, allow_eqr: bool = True) -> list:
    """Nodes breaking the shape of cut-free proofs of the counterexample."""
    allowed = FRAGMENT_RULES | ({"EqR"} if allow_eqr else set())
    out = []
    for a in sorted(p.nodes):
        node = p.nodes[a]
        for msg in sequent_shape_violations(node.sequent):
            out.append((a, msg))
        if node.rule.label not in allowed:
            out.append((a, f"rule {node.rule.label} outside the fragment"))
    return out


# ---------------------------------------------------------------------------
# tree-unfolding


def resolve_unfolding(p: PreProof, sigma: Address) -> Node:
    """Node of the tree-unfolding at ``sigma``, following the recursive definition."""
    sigma = tuple(sigma)
    seen = set()
    while True:
        node = p.nodes.get(sigma)
        if node is not None and node.rule.name != "Bud":
            return node
        split = None
        for k in range(len(sigma) + 1):
            pre = sigma[:k]
            n = p.nodes.get(pre)
            if n is None:
                break
            if n.rule.name == "Bud":
                split = k
                break
        if split is None or sigma[:split] not in p.companion:
            raise Unresolvable(addr_str(sigma))
        nxt = p.companion[sigma[:split]] + sigma[split:]
        if nxt in seen:
            raise Unresolvable(addr_str(sigma))
        seen.add(nxt)
        sigma = nxt


def unfolding_addresses(p: PreProof, depth: int) -> list:
    """All unfolding addresses of length <= depth, in depth-first order."""
    out = []

    def walk(sigma: Address, here: Address):
        out.append(sigma)
        if len(sigma) >= depth:
            return
        for i, _ in enumerate(p.successors(here)):
            walk(sigma + (i,), p.resolve(here) + (i,))

    walk((), ())
    return out


def unfoldings_equal_to_depth(p1: PreProof, p2: PreProof, depth: int) -> bool:
    memo: dict = {}

    def eq(a: Address, b: Address, d: int) -> bool:
        a, b = p1.resolve(a), p2.resolve(b)
        key = (a, b, d)
        if key in memo:
            return memo[key]
        n1, n2 = p1.nodes[a], p2.nodes[b]
        ok = n1.sequent == n2.sequent and n1.rule.label == n2.rule.label
        if ok and d > 0:
            k1, k2 = p1.children(a), p2.children(b)
            ok = len(k1) == len(k2) and all(eq(x, y, d - 1) for x, y in zip(k1, k2))
        memo[key] = ok
        return ok

    return eq((), (), depth)


# ---------------------------------------------------------------------------
# .cproof files


def _term_json(t) -> str:
    return str(t)


def _rule_args_json(rule: Rule) -> dict:
    out = {}
    for k, v in rule.args:
        if k in ("theta", "inst"):
            out[k] = {name: str(t) for name, t in v}
        elif k in ("ante", "succ"):
            out[k] = [str(f) for f in v]
        elif k == "fresh":
            out[k] = [list(names) for names in v]
        elif k in ("formula", "principal", "t", "u"):
            out[k] = str(v)
        else:
            out[k] = v
    return out


def _rule_from_json(name: str, args: dict, sig) -> Rule:
    kw = {}
    for k, v in args.items():
        if k in ("theta", "inst"):
            kw[k] = {name_: parse_term(t, sig) for name_, t in v.items()}
        elif k in ("ante", "succ"):
            kw[k] = [parse_formula(f, sig) for f in v]
        elif k == "fresh":
            kw[k] = [list(names) for names in v]
        elif k in ("formula", "principal"):
            kw[k] = parse_formula(v, sig)
        elif k in ("t", "u"):
            kw[k] = parse_term(v, sig)
        else:
            kw[k] = v
    return Rule.make(name, **kw)


def proof_to_json(p: PreProof, defs: str) -> dict:
    nodes = {}
    for a in sorted(p.nodes):
        n = p.nodes[a]
        nodes[addr_str(a)] = {
            "seq": {"ante": [str(f) for f in n.sequent.sorted_ante()], "succ": [str(f) for f in n.sequent.sorted_succ()]},
            "rule": n.rule.name,
            "args": _rule_args_json(n.rule),
        }
    buds = {addr_str(b): addr_str(c) for b, c in sorted(p.companion.items())}
    return {"defs": defs, "nodes": nodes, "buds": buds}


def dumps_proof(p: PreProof, defs: str) -> str:
    return json.dumps(proof_to_json(p, defs), sort_keys=True, indent=2, ensure_ascii=False) + "\n"


def proof_from_json(doc: dict, system: InductiveSystem) -> PreProof:
    sig = system.signature
    nodes = {}
    for key, entry in doc["nodes"].items():
        seq = entry["seq"]
        sequent = Sequent(
            frozenset(parse_formula(f, sig) for f in seq.get("ante", [])),
            frozenset(parse_formula(f, sig) for f in seq.get("succ", [])),
        )
        nodes[parse_addr(key)] = Node(sequent, _rule_from_json(entry["rule"], entry.get("args", {}), sig))
    companion = {parse_addr(b): parse_addr(c) for b, c in doc.get("buds", {}).items()}
    return PreProof(nodes, companion)


def load_defs(spec: str, base_dir: Optional[str] = None) -> tuple:
    """``spec`` is a path or inline definition text; returns (system, text)."""
    import os

    if "{" in spec or ";" in spec:
        return parse_definitions(spec), spec
    path = spec if base_dir is None or os.path.isabs(spec) else os.path.join(base_dir, spec)
    if not os.path.exists(path) and os.path.exists(spec):
        path = spec
    with open(path, encoding="utf-8") as fh:
        text = fh.read()
    return parse_definitions(text), text


def load_proof(path: str, system: Optional[InductiveSystem] = None) -> tuple:
    """Read a .cproof file; returns (system, proof, defs field)."""
    import os

    with open(path, encoding="utf-8") as fh:
        doc = json.load(fh)
    if system is None:
        system, _ = load_defs(doc["defs"], os.path.dirname(os.path.abspath(path)))
    return system, proof_from_json(doc, system), doc["defs"]


def inline_defs(system: InductiveSystem) -> str:
    return render_definitions(system)


def sequent_from_text(text: str, system: InductiveSystem) -> Sequent:
    return parse_sequent(text, system.signature)
