"""Random generators and small walkers shared by the test modules."""

from __future__ import annotations

import itertools
import random
from collections import Counter

from cyclo.analysis import check_index_transitions, is_left_step, is_switching, is_unfinished_path, rightmost_step
from cyclo.builders import tef_system
from cyclo.congruence import build, chain_oracle, equiv, is_root_like, related
from cyclo.proofgraph import Node, PreProof, Rule, case_distinctions, tree_path
from cyclo.search import atom_rewrites, embeddings
from cyclo.syntax import (
    App,
    Atom,
    Eq,
    Sequent,
    Var,
    atom_and_depth,
    free_vars,
    iterate,
    parse_sequent,
    substitute,
)
from cyclo.trace import enumerate_traces, lasso_from_buds, path_matrix

SYSTEM = tef_system()
SIG = SYSTEM.signature
ATOMS = ("s", "e", "x", "y", "z", "w")

# one line per acceptance criterion, printed in the terminal summary
ACCEPTANCE_LINES: list = []


def atom_term(name: str):
    return App(name) if name in ("s", "e") else Var(name)


def linear(rng: random.Random, atoms=ATOMS, max_depth: int = 3):
    return iterate("nx", rng.randint(0, max_depth), atom_term(rng.choice(atoms)))


def random_gamma(rng: random.Random, n_eqs: int = 4, depth: int = 3, atoms=ATOMS[:4]) -> list:
    return [Eq(linear(rng, atoms, depth), linear(rng, atoms, depth)) for _ in range(rng.randint(0, n_eqs))]


def subterms(t) -> set:
    out = {t}
    if isinstance(t, App):
        for a in t.args:
            out |= subterms(a)
    return out


def sequent_terms(s: Sequent) -> set:
    out = set()
    for f in s.ante | s.succ:
        for t in ((f.left, f.right) if isinstance(f, Eq) else f.args):
            out |= subterms(t)
    return out


def brute_embeddings(source: Sequent, target: Sequent) -> set:
    """Every ``theta`` over FV(source) into subterms of target with source[theta] inside target."""
    vs = sorted(free_vars(source))
    pool = sorted(sequent_terms(target), key=str)
    out = set()
    for combo in itertools.product(pool, repeat=len(vs)):
        theta = dict(zip(vs, combo))
        inst = substitute(source, theta)
        if inst.ante <= target.ante and inst.succ <= target.succ:
            out.add(tuple(sorted(theta.items())))
    return out


# ---------------------------------------------------------------------------
# random pre-proofs


class _Retry(Exception):
    pass


ROOTS = (
    "TeF(x) |- FsT(e)",
    "TeF(x), FsT(e) |- FsT(e)",
    "TeF(x), TeF(z) |- FsT(e)",
    "TeF(nx(x)), x = z |- FsT(e)",
    "TeF(x), TeF(nx(x)) |- FsT(x)",
)


class _Gen:
    def __init__(self, rng: random.Random, max_nodes: int, ancestors_only: bool, fragment: bool):
        self.rng = rng
        self.max_nodes = max_nodes
        self.ancestors_only = ancestors_only
        self.fragment = fragment
        self.nodes: dict = {}
        self.companion: dict = {}
        self.count = 0

    def fresh(self) -> str:
        self.count += 1
        return f"v{self.count}"

    def put(self, addr, seq, rule) -> None:
        if len(self.nodes) >= self.max_nodes:
            raise _Retry
        self.nodes[addr] = Node(seq, rule)

    def close(self, addr, seq) -> bool:
        rng = self.rng
        if self.fragment:
            if Atom("FsT", (App("s"),)) in seq.succ:
                self.put(addr, seq, Rule.make("UnfoldRight", pred="FsT", index=0, inst={}))
                return True
        elif seq.ante & seq.succ and rng.random() < 0.5:
            self.put(addr, seq, Rule.make("Axiom"))
            return True
        if self.close_by_bud(addr, seq):
            return True
        if not self.fragment and seq.ante & seq.succ:
            self.put(addr, seq, Rule.make("Axiom"))
            return True
        return False

    def close_by_bud(self, addr, seq) -> bool:
        rng = self.rng
        if self.ancestors_only:
            targets = [addr[:k] for k in range(len(addr))]
        else:
            targets = [a for a, n in self.nodes.items() if n.rule.name != "Bud"]
        targets = [a for a in targets if a in self.nodes and self.nodes[a].rule.name != "Bud"]
        options = [(comp, theta) for comp in sorted(targets) for theta in embeddings(self.nodes[comp].sequent, seq)]
        if not options:
            return False
        rng.shuffle(options)
        if self.fragment and rng.random() < 0.7:
            # prefer loops that carry a progressing trace
            options.sort(key=lambda o: not self.progresses(addr, seq, *o))
        comp, theta = options[0]
        for a, sq, rule in self.chain(addr, seq, comp, theta):
            self.put(a, sq, rule)
        self.companion[a] = comp
        return True

    def chain(self, addr, seq, comp, theta) -> list:
        target = self.nodes[comp].sequent
        inst = substitute(target, theta)
        out = []
        here = addr
        if inst != seq:
            out.append((here, seq, Rule.make("Weak")))
            here += (0,)
        if inst != target:
            out.append((here, inst, Rule.make("Subst", theta=theta)))
            here += (0,)
        out.append((here, target, Rule.make("Bud")))
        return out

    def progresses(self, addr, seq, comp, theta) -> bool:
        if addr[: len(comp)] != comp:
            return False
        chain = self.chain(addr, seq, comp, theta)
        nodes = dict(self.nodes)
        for a, sq, rule in chain:
            nodes[a] = Node(sq, rule)
        bud = chain[-1][0]
        p = PreProof(nodes, {bud: comp})
        return path_matrix(SYSTEM, p, tree_path(comp, bud)).has_progress_cycle()

    def moves(self, seq):
        out = []
        for f in seq.sorted_ante():
            if isinstance(f, Atom) and f.pred == "TeF":
                out.append(("case", f))
            if isinstance(f, Eq) and f.left != f.right:
                for phi in sorted(seq.ante | seq.succ, key=str):
                    if isinstance(phi, Atom):
                        out.append(("eqla", (f, phi)))
        if len(seq.ante) + len(seq.succ) > 1:
            out.append(("weak", None))
        if free_vars(seq) and not self.fragment:
            out.append(("subst", None))
        if self.fragment:
            for f in seq.sorted_succ():
                if isinstance(f, Atom) and isinstance(f.args[0], App) and f.args[0].fn == "nx":
                    out.append(("fst", f))
        return out

    def expand(self, addr, seq) -> None:
        rng = self.rng
        closing = len(addr) >= 5 or len(self.nodes) >= self.max_nodes - 3
        axiom = not self.fragment and bool(seq.ante & seq.succ)
        if addr and (closing or rng.random() < (0.9 if axiom else 0.35)):
            if self.close(addr, seq):
                return
            if closing:
                raise _Retry
        options = self.moves(seq)
        if not options:
            if self.close(addr, seq):
                return
            raise _Retry
        kind, arg = rng.choice(options)
        if kind == "case":
            y = self.fresh()
            keep = rng.random() < 0.5
            gamma = seq.ante if keep else seq.ante - {arg}
            kids = case_distinctions(SYSTEM, gamma, arg, seq.succ, [[], [y]])
            self.put(addr, seq, Rule.make("Case", pred="TeF", principal=arg, fresh=[[], [y]], keep=keep or None))
        elif kind == "weak":
            items = [("a", f) for f in seq.sorted_ante()] + [("s", f) for f in seq.sorted_succ()]
            drop = set(rng.sample(items, rng.randint(1, len(items) - 1)))
            kids = [Sequent(frozenset(f for f in seq.ante if ("a", f) not in drop),
                            frozenset(f for f in seq.succ if ("s", f) not in drop))]
            self.put(addr, seq, Rule.make("Weak"))
        elif kind == "subst":
            v = rng.choice(sorted(free_vars(seq)))
            w = self.fresh()
            kids = [substitute(seq, {v: Var(w)})]
            self.put(addr, seq, Rule.make("Subst", theta={w: Var(v)}))
        elif kind == "eqla":
            eq, phi = arg
            x, y = self.fresh(), self.fresh()
            hole, old = (Var(y), eq.right) if rng.random() < 0.5 else (Var(x), eq.left)
            tmpls = atom_rewrites(phi, old, hole)
            if not tmpls:
                raise _Retry
            tmpl = rng.choice(tmpls)
            new = substitute(tmpl, {x: eq.right, y: eq.left})
            ante = [f for f in seq.ante if f != eq]
            succ = list(seq.succ)
            if phi in seq.ante:
                ante.append(tmpl)
                kids = [Sequent(seq.ante | {new}, seq.succ)]
            else:
                succ.append(tmpl)
                kids = [Sequent(seq.ante, seq.succ | {new})]
            self.put(addr, seq, Rule.make("EqLa", x=x, y=y, t=eq.left, u=eq.right, ante=ante, succ=succ))
        else:  # unfold FsT(nx t) to FsT(t)
            t = arg.args[0].args[0]
            kids = [Sequent(seq.ante, (seq.succ - {arg}) | {Atom("FsT", (t,))})]
            self.put(addr, seq, Rule.make("UnfoldRight", pred="FsT", index=1, inst={"x": t}))
        for i, kid in enumerate(kids):
            self.expand(addr + (i,), kid)


def random_pre_proof(rng: random.Random, max_nodes: int = 12, ancestors_only: bool = False) -> PreProof:
    """A valid pre-proof of at most ``max_nodes`` nodes over the TeF/FsT system."""
    while True:
        g = _Gen(rng, max_nodes, ancestors_only, fragment=False)
        root = parse_sequent(rng.choice(ROOTS), SIG)
        try:
            g.expand((), root)
        except _Retry:
            continue
        return PreProof(g.nodes, g.companion)


def random_candidate(rng: random.Random, max_nodes: int = 16) -> PreProof:
    """A cut-free, cycle-normal pre-proof of ``TeF(s) |- FsT(e)`` in the fragment."""
    while True:
        g = _Gen(rng, max_nodes, ancestors_only=True, fragment=True)
        try:
            g.expand((), parse_sequent("TeF(s) |- FsT(e)", SIG))
        except _Retry:
            continue
        return PreProof(g.nodes, g.companion)


# ---------------------------------------------------------------------------
# walks through (possibly partial) cyclic trees


_ROOT_LIKE: dict = {}


def root_like(seq: Sequent) -> bool:
    r = _ROOT_LIKE.get(seq)
    if r is None:
        r = _ROOT_LIKE[seq] = is_root_like(seq).is_root_like
    return r


def unfinished_walks(proof: PreProof, start: tuple, max_len: int) -> list:
    """Maximal walks from ``start`` that turn left only at switching points."""
    out = []
    stack = [[start]]
    while stack:
        w = stack.pop()
        nxt = []
        if len(w) < max_len:
            here = w[-1]
            for c in proof.children(proof.resolve(here)):
                if is_left_step(proof, here, c) and not is_switching(proof, here):
                    continue
                nxt.append(w + [c])
        if nxt:
            stack.extend(nxt)
        else:
            out.append(w)
    return out


def bud_cycles(proof: PreProof, start: tuple, max_buds: int) -> list:
    """Bud sequences leading from companion ``start`` back to itself."""
    below: dict = {}
    for b in proof.buds():
        for c in set(proof.companion.values()):
            if b[: len(c)] == c:
                below.setdefault(c, []).append(b)
    out = []

    def go(cur, seq):
        for b in below.get(cur, ()):
            nseq = seq + [b]
            nxt = proof.companion[b]
            if nxt == start:
                out.append(nseq)
            if len(nseq) < max_buds:
                go(nxt, nseq)

    go(start, [])
    return out


def lassos(proof: PreProof, max_buds: int = 3) -> list:
    return [lasso_from_buds(proof, c, buds)
            for c in sorted(set(proof.companion.values()))
            for buds in bud_cycles(proof, c, max_buds)]


def lasso_is_unfinished(proof: PreProof, lasso) -> bool:
    walk = list(lasso.stem) + list(lasso.cycle) + list(lasso.cycle[1:])
    if not root_like(proof.sequent(walk[0])):
        return False
    return all(not is_left_step(proof, a, b) or is_switching(proof, a) for a, b in zip(walk, walk[1:]))


def lasso_turns_right_at_switch(proof: PreProof, lasso) -> bool:
    cyc = lasso.cycle
    return any(is_switching(proof, a) and b == proof.resolve(a) + (1,) for a, b in zip(cyc, cyc[1:]))


def rightmost_end(proof: PreProof, start: tuple, steps: int) -> str:
    """Where the rightmost tree walk from ``start`` stops: bud, open, leaf or limit."""
    here = start
    for _ in range(steps):
        if proof.nodes[here].rule.name == "Bud":
            return "bud"
        nxt = rightmost_step(proof, here)
        if nxt is None:
            return "leaf"
        if nxt not in proof.nodes:
            return "open"
        here = nxt
    return "limit"


def stem_path(lasso) -> list:
    return tree_path((), lasso.cycle[0])


# ---------------------------------------------------------------------------
# congruence lemma instances; each returns (premise held, implication held)


def eqv(gamma, a, b) -> bool:
    return equiv(build(gamma, [a, b]), a, b)


def rel(gamma, a, b) -> bool:
    return related(build(gamma, [a, b]), a, b)


def pick_term(rng: random.Random, gamma, atoms=ATOMS[:5], max_depth: int = 4):
    sides = [t for f in gamma for t in (f.left, f.right)]
    if sides and rng.random() < 0.7:
        a, d = atom_and_depth(rng.choice(sides))
        return iterate("nx", min(max_depth, d + rng.randint(0, 2)), a)
    return linear(rng, atoms, max_depth)


def substitution_case(rng: random.Random) -> tuple:
    gamma = random_gamma(rng, atoms=ATOMS[:5])
    t1, t2 = pick_term(rng, gamma), pick_term(rng, gamma)
    vs = rng.sample(["x", "y", "z"], rng.randint(1, 3))
    theta = {v: linear(rng, ATOMS[:5], 2) for v in vs}
    g2 = [substitute(f, theta) for f in gamma]
    a, b = substitute(t1, theta), substitute(t2, theta)
    premise = eqv(gamma, t1, t2)
    ok = (not premise or eqv(g2, a, b)) and (rel(g2, a, b) or not rel(gamma, t1, t2))
    return premise, ok


def swap_case(rng: random.Random) -> tuple:
    gamma = random_gamma(rng, atoms=ATOMS[:5])
    u1, u2 = linear(rng, ATOMS[:5], 2), linear(rng, ATOMS[:5], 2)
    th1 = {"x": u1, "y": u2}
    th2 = {"x": u2, "y": u1}
    g1 = [substitute(f, th1) for f in gamma] + [Eq(u1, u2)]
    g2 = [substitute(f, th2) for f in gamma] + [Eq(u1, u2)]
    t1, t2 = pick_term(rng, gamma, max_depth=3), pick_term(rng, gamma, max_depth=3)
    a1, b1 = substitute(t1, th1), substitute(t2, th1)
    a2, b2 = substitute(t1, th2), substitute(t2, th2)
    premise = eqv(g2, a2, b2)
    ok = (not premise or eqv(g1, a1, b1)) and (rel(g1, a1, b1) or not rel(g2, a2, b2))
    return premise, ok


def chain_case(rng: random.Random, cap: int = 12) -> tuple:
    """(equiv, chain exists); the lemma says they coincide."""
    gamma = random_gamma(rng)
    t, u = pick_term(rng, gamma, ATOMS[:4]), pick_term(rng, gamma, ATOMS[:4])
    return eqv(gamma, t, u), chain_oracle(gamma, t, u, cap)


def fresh_equation_case(rng: random.Random) -> tuple:
    gamma1 = random_gamma(rng, n_eqs=3, atoms=ATOMS[:4])
    u = linear(rng, ATOMS[:4], 3)
    u2 = iterate("nx", rng.randint(0, 3), Var("w"))
    gamma2 = gamma1 + [Eq(u, u2)]
    t, t2 = pick_term(rng, gamma2, ATOMS[:4]), pick_term(rng, gamma2, ATOMS[:4])
    if "w" in free_vars(t) | free_vars(t2):
        return False, True
    premise = eqv(gamma2, t, t2)
    return premise, not premise or eqv(gamma1, t, t2)


def unrelated_equation_case(rng: random.Random) -> tuple:
    gamma1 = random_gamma(rng, n_eqs=3, atoms=ATOMS[:5])
    u, u2 = linear(rng, ATOMS[:5], 3), linear(rng, ATOMS[:5], 3)
    gamma2 = gamma1 + [Eq(u, u2)]
    t, t2 = pick_term(rng, gamma1), pick_term(rng, gamma1)
    if rel(gamma1, t, u) or rel(gamma1, t, u2):
        return False, True
    premise = eqv(gamma2, t, t2)
    return premise, not premise or eqv(gamma1, t, t2)


# ---------------------------------------------------------------------------
# the lemmas about unfinished paths, checked over a collection of trees


def check_path_lemmas(proofs, walk_len: int = 10, trace_limit: int = 5000) -> tuple:
    """Returns (counts, clause coverage, violations)."""
    counts: Counter = Counter()
    clauses: Counter = Counter()
    bad: list = []
    for p in proofs:
        for a in p.inner():
            if not root_like(p.sequent(a)):
                continue
            counts["root-like starts"] += 1
            for w in unfinished_walks(p, a, walk_len):
                counts["unfinished walks"] += 1
                if not is_unfinished_path(SYSTEM, p, w):
                    bad.append(("walk", p, w))
                if not all(root_like(p.sequent(n)) for n in w):
                    bad.append(("invariant", p, w))
                for tr in enumerate_traces(SYSTEM, p, w, trace_limit):
                    counts["traces"] += 1
                    r = check_index_transitions(SYSTEM, p, w, tr)
                    clauses.update(r.clauses)
                    if not r.ok:
                        bad.append(("index", p, w, tr, r.violation))
            end = rightmost_end(p, a, 4 * len(p))
            counts["rightmost " + end] += 1
            if end == "leaf":
                bad.append(("rightmost", p, a))
        for lasso in lassos(p):
            if not lasso_is_unfinished(p, lasso):
                continue
            counts["unfinished lassos"] += 1
            # the lemma assumes an infinitely progressing trace along the loop
            if path_matrix(SYSTEM, p, lasso.cycle).has_progress_cycle():
                counts["progressing unfinished lassos"] += 1
                if not lasso_turns_right_at_switch(p, lasso):
                    bad.append(("key", p, lasso))
    return counts, clauses, bad


def distinct(proofs) -> list:
    seen = set()
    out = []
    for p in proofs:
        key = (frozenset(p.nodes.items()), frozenset(p.companion.items()))
        if key not in seen:
            seen.add(key)
            out.append(p)
    return out
