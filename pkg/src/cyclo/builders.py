"""Hand-built pre-proofs used as fixtures, in tests and by ``cyclo selftest``."""

from __future__ import annotations

from importlib import resources

from .proofgraph import Node, PreProof, Rule, parse_addr
from .syntax import InductiveSystem, parse_definitions, parse_formula, parse_sequent, parse_term


def fixture_text(name: str) -> str:
    return resources.files("cyclo.fixtures").joinpath(name).read_text(encoding="utf-8")


def fixture_path(name: str) -> str:
    return str(resources.files("cyclo.fixtures").joinpath(name))


def tef_system() -> InductiveSystem:
    return parse_definitions(fixture_text("tef.ind"))


class TreeBuilder:
    """Collects nodes given as ``addr, sequent text, rule, args``."""

    def __init__(self, system: InductiveSystem):
        self.system = system
        self.sig = system.signature
        self.nodes: dict = {}
        self.companion: dict = {}

    def f(self, text: str):
        return parse_formula(text, self.sig)

    def t(self, text: str):
        return parse_term(text, self.sig)

    def node(self, addr: str, seq: str, rule: str, **args) -> "TreeBuilder":
        for k in ("formula", "principal"):
            if isinstance(args.get(k), str):
                args[k] = self.f(args[k])
        for k in ("t", "u"):
            if isinstance(args.get(k), str):
                args[k] = self.t(args[k])
        for k in ("ante", "succ"):
            if k in args:
                args[k] = [self.f(x) for x in args[k]]
        for k in ("theta", "inst"):
            if k in args:
                args[k] = {v: self.t(x) for v, x in args[k].items()}
        self.nodes[parse_addr(addr)] = Node(parse_sequent(seq, self.sig), Rule.make(rule, **args))
        return self

    def bud(self, addr: str, seq: str, companion: str) -> "TreeBuilder":
        self.nodes[parse_addr(addr)] = Node(parse_sequent(seq, self.sig), Rule.make("Bud"))
        self.companion[parse_addr(addr)] = parse_addr(companion)
        return self

    def build(self) -> PreProof:
        return PreProof(dict(self.nodes), dict(self.companion))


def counterexample_proof(system: InductiveSystem | None = None) -> PreProof:
    """The cyclic proof with cuts of ``TeF(s) |- FsT(e)``; companion at 1.1.0."""
    b = TreeBuilder(system or tef_system())
    b.node("", "TeF(s) |- FsT(e)", "Case", pred="TeF", principal="TeF(s)", fresh=[[], ["x"]])
    # left assumption: s = e
    b.node("0", "s = e |- FsT(e)", "EqLa", x="a", y="b", t="s", u="e", ante=[], succ=["FsT(b)"])
    b.node("0.0", "s = e |- FsT(s)", "Weak")
    b.node("0.0.0", "|- FsT(s)", "UnfoldRight", pred="FsT", index=0, inst={})
    # right assumption: cut on FsT(nx x)
    b.node("1", "s = x, TeF(nx(x)) |- FsT(e)", "Cut", formula="FsT(nx(x))")
    b.node("1.0", "s = x, TeF(nx(x)) |- FsT(nx(x)), FsT(e)", "Weak")
    b.node("1.0.0", "s = x |- FsT(nx(x))", "EqLa", x="a", y="b", t="s", u="x", ante=[], succ=["FsT(nx(b))"])
    b.node("1.0.0.0", "s = x |- FsT(nx(s))", "Weak")
    b.node("1.0.0.0.0", "|- FsT(nx(s))", "UnfoldRight", pred="FsT", index=1, inst={"x": "s"})
    b.node("1.0.0.0.0.0", "|- FsT(s)", "UnfoldRight", pred="FsT", index=0, inst={})
    b.node("1.1", "s = x, TeF(nx(x)), FsT(nx(x)) |- FsT(e)", "Weak")
    # the companion
    b.node("1.1.0", "TeF(nx(x)), FsT(nx(x)) |- FsT(e)", "Case", pred="TeF", principal="TeF(nx(x))", fresh=[[], ["y"]])
    b.node(
        "1.1.0.0", "nx(x) = e, FsT(nx(x)) |- FsT(e)", "EqLa",
        x="a", y="b", t="nx(x)", u="e", ante=["FsT(a)"], succ=["FsT(e)"],
    )
    b.node("1.1.0.0.0", "nx(x) = e, FsT(e) |- FsT(e)", "Weak")
    b.node("1.1.0.0.0.0", "FsT(e) |- FsT(e)", "Axiom")
    b.node(
        "1.1.0.1", "nx(x) = y, TeF(nx(y)), FsT(nx(x)) |- FsT(e)", "EqLa",
        x="a", y="b", t="nx(x)", u="y", ante=["TeF(nx(b))", "FsT(nx(x))"], succ=["FsT(e)"],
    )
    b.node("1.1.0.1.0", "nx(x) = y, TeF(nx(nx(x))), FsT(nx(x)) |- FsT(e)", "Weak")
    b.node("1.1.0.1.0.0", "TeF(nx(nx(x))), FsT(nx(x)) |- FsT(e)", "Cut", formula="FsT(nx(nx(x)))")
    b.node("1.1.0.1.0.0.0", "TeF(nx(nx(x))), FsT(nx(x)) |- FsT(nx(nx(x))), FsT(e)", "Weak")
    b.node("1.1.0.1.0.0.0.0", "FsT(nx(x)) |- FsT(nx(nx(x)))", "UnfoldRight", pred="FsT", index=1, inst={"x": "nx(x)"})
    b.node("1.1.0.1.0.0.0.0.0", "FsT(nx(x)) |- FsT(nx(x))", "Axiom")
    b.node("1.1.0.1.0.0.1", "TeF(nx(nx(x))), FsT(nx(x)), FsT(nx(nx(x))) |- FsT(e)", "Weak")
    b.node("1.1.0.1.0.0.1.0", "TeF(nx(nx(x))), FsT(nx(nx(x))) |- FsT(e)", "Subst", theta={"x": "nx(x)"})
    b.bud("1.1.0.1.0.0.1.0.0", "TeF(nx(x)), FsT(nx(x)) |- FsT(e)", "1.1.0")
    return b.build()


COMPANION = parse_addr("1.1.0")
BUD = parse_addr("1.1.0.1.0.0.1.0.0")
# the underlined trace along one traversal of the cycle, companion to bud
UNDERLINED = [
    ("1.1.0", "TeF(nx(x))"),
    ("1.1.0.1", "TeF(nx(y))"),
    ("1.1.0.1.0", "TeF(nx(nx(x)))"),
    ("1.1.0.1.0.0", "TeF(nx(nx(x)))"),
    ("1.1.0.1.0.0.1", "TeF(nx(nx(x)))"),
    ("1.1.0.1.0.0.1.0", "TeF(nx(nx(x)))"),
    ("1.1.0.1.0.0.1.0.0", "TeF(nx(x))"),
]


def weak_loop(system: InductiveSystem | None = None) -> PreProof:
    """Root ``TeF(x) |- FsT(e)`` with a Weak step back to itself; no progress."""
    b = TreeBuilder(system or tef_system())
    b.node("", "TeF(x) |- FsT(e)", "Weak")
    b.bud("0", "TeF(x) |- FsT(e)", "")
    return b.build()


def axiom_only(system: InductiveSystem | None = None) -> PreProof:
    b = TreeBuilder(system or tef_system())
    b.node("", "TeF(x) |- TeF(x)", "Axiom")
    return b.build()


def _left_of_root(b: TreeBuilder, keep: bool) -> None:
    ctx = "TeF(s), " if keep else ""
    b.node("0", f"{ctx}s = e |- FsT(e)", "EqLa", x="a", y="b", t="s", u="e",
           ante=["TeF(s)"] if keep else [], succ=["FsT(b)"])
    b.node("0.0", f"{ctx}s = e |- FsT(s)", "Weak")
    b.node("0.0.0", "|- FsT(s)", "UnfoldRight", pred="FsT", index=0, inst={})


def refute_candidate_plain(system: InductiveSystem | None = None) -> PreProof:
    """Cut-free, cycle-normal, GTC-violating: the right branch forgets the descendant."""
    b = TreeBuilder(system or tef_system())
    b.node("", "TeF(s) |- FsT(e)", "Case", pred="TeF", principal="TeF(s)", fresh=[[], ["y0"]], keep=True)
    _left_of_root(b, keep=True)
    b.node("1", "TeF(s), s = y0, TeF(nx(y0)) |- FsT(e)", "Weak")
    b.bud("1.0", "TeF(s) |- FsT(e)", "")
    return b.build()


def refute_candidate_switching(system: InductiveSystem | None = None) -> PreProof:
    """As above, with a switching point whose left branch returns to the root."""
    b = TreeBuilder(system or tef_system())
    b.node("", "TeF(s) |- FsT(e)", "Case", pred="TeF", principal="TeF(s)", fresh=[[], ["y0"]], keep=True)
    _left_of_root(b, keep=True)
    b.node("1", "TeF(s), s = y0, TeF(nx(y0)) |- FsT(e)", "Weak")
    b.node("1.0", "TeF(s), TeF(nx(y0)) |- FsT(e)", "Case", pred="TeF", principal="TeF(nx(y0))",
           fresh=[[], ["y1"]], keep=True)
    b.node("1.0.0", "TeF(s), TeF(nx(y0)), nx(y0) = e |- FsT(e)", "Weak")
    b.bud("1.0.0.0", "TeF(s) |- FsT(e)", "")
    b.node("1.0.1", "TeF(s), TeF(nx(y0)), nx(y0) = y1, TeF(nx(y1)) |- FsT(e)", "Weak")
    b.node("1.0.1.0", "TeF(s), TeF(nx(y1)) |- FsT(e)", "Subst", theta={"y0": "y1"})
    b.bud("1.0.1.0.0", "TeF(s), TeF(nx(y0)) |- FsT(e)", "1.0")
    return b.build()


def sibling_companion(system: InductiveSystem | None = None) -> PreProof:
    """Bud on branch 1 tied to an inner node on branch 0 (not an ancestor)."""
    b = TreeBuilder(system or tef_system())
    b.node("", "TeF(x) |- FsT(e)", "Case", pred="TeF", principal="TeF(x)", fresh=[[], ["y"]], keep=True)
    b.node("0", "TeF(x), x = e |- FsT(e)", "Weak")
    b.node("0.0", "TeF(x) |- FsT(e)", "Weak")
    b.bud("0.0.0", "TeF(x) |- FsT(e)", "")
    b.node("1", "TeF(x), x = y, TeF(nx(y)) |- FsT(e)", "Weak")
    b.bud("1.0", "TeF(x) |- FsT(e)", "0.0")
    return b.build()
