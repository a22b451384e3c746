"""Bounded depth-first search for cyclic proofs.

The search builds a derivation tree top-down.  At each open goal it tries, in
order: closing rules (Axiom, EqR, zero-premise right unfoldings), bud
formation against a strict ancestor, right unfolding, one equality rewrite,
case analysis and finally (only when cuts are allowed) a cut on an instance of
a pool formula.  Iterative deepening on the tree height makes the first proof
found a shallowest one.

Bud formation looks for ``theta`` with ``A[theta]`` contained in the goal,
where ``A`` is the sequent of a strict ancestor, and emits Weak (when the goal
is larger), Subst (when ``theta`` moves ``A``) and the bud.  A bud whose own
cycle has no progressing trace is rejected at once; afterwards the partial
derivation is checked against the global trace condition.

Every rule application is sound for set-based sequents.  Rewrites keep the
rewritten formula and case analysis drops its principal, so a branch never
loses information except through the Weak of a bud formation (and, with cuts
enabled, a Weak dropping one equality).
"""

from __future__ import annotations

import itertools
from functools import lru_cache
from dataclasses import dataclass, field
from typing import Callable, Iterator, Optional

from .proofgraph import Node, PreProof, Rule, case_distinctions, sequent_shape_violations, tree_path
from .syntax import (
    App,
    Atom,
    Eq,
    InductiveSystem,
    Sequent,
    Var,
    free_vars,
    substitute,
    term_depth,
)
from .trace import PROGRESS, Matrix, check_gtc, node_edge_matrix, path_matrix


class BoundsTooSmall(ValueError):
    pass


@dataclass
class SearchBounds:
    max_tree_depth: int = 8
    max_term_depth: int = 6
    max_nodes: int = 200
    allow_cut: bool = False
    cut_formula_pool: tuple = ()


@dataclass
class SearchStats:
    goals: int = 0
    depth_reached: int = 0
    bud_candidates: int = 0
    rejected_local: int = 0
    rejected_global: int = 0
    rounds: list = field(default_factory=list)

    def render(self) -> str:
        return (
            f"goals expanded: {self.goals}\n"
            f"deepest goal: {self.depth_reached}\n"
            f"bud candidates: {self.bud_candidates} "
            f"(rejected locally {self.rejected_local}, globally {self.rejected_global})"
        )


@dataclass
class ProofFound:
    proof: PreProof
    stats: SearchStats


@dataclass
class Exhausted:
    bounds: SearchBounds
    stats: SearchStats


# ---------------------------------------------------------------------------
# matching and rewriting helpers


def match(pattern, target, theta: dict) -> Optional[dict]:
    """Extend ``theta`` so that ``pattern[theta] == target``; None if impossible."""
    if isinstance(pattern, Var):
        bound = theta.get(pattern.name)
        if bound is None:
            out = dict(theta)
            out[pattern.name] = target
            return out
        return theta if bound == target else None
    if isinstance(pattern, App):
        if not isinstance(target, App) or pattern.fn != target.fn or len(pattern.args) != len(target.args):
            return None
        for p, t in zip(pattern.args, target.args):
            theta = match(p, t, theta)
            if theta is None:
                return None
        return theta
    if isinstance(pattern, Atom):
        if not isinstance(target, Atom) or pattern.pred != target.pred:
            return None
        return match(App("_", pattern.args), App("_", target.args), theta)
    if isinstance(pattern, Eq):
        if not isinstance(target, Eq):
            return None
        return match(App("_", (pattern.left, pattern.right)), App("_", (target.left, target.right)), theta)
    raise TypeError(pattern)


def _head(f) -> str:
    return "=" if isinstance(f, Eq) else f.pred


@lru_cache(maxsize=200000)
def _could_embed(source: Sequent, target: Sequent) -> bool:
    heads_a = {_head(g) for g in target.ante}
    heads_s = {_head(g) for g in target.succ}
    for f in source.ante:
        if (f not in target.ante) if not free_vars(f) else (_head(f) not in heads_a):
            return False
    for f in source.succ:
        if (f not in target.succ) if not free_vars(f) else (_head(f) not in heads_s):
            return False
    return True


@lru_cache(maxsize=200000)
def embeddings(source: Sequent, target: Sequent, seed: Optional[tuple] = None) -> tuple:
    """All ``theta`` over FV(source) with ``source[theta]`` a subsequent of ``target``.

    ``seed = (f, g)`` additionally requires ``f[theta] == g``.  Patterns are
    matched most-constrained first; a pattern whose variables are all bound
    is a membership test.
    """
    theta0: dict = {}
    if seed is not None:
        theta0 = match(seed[0], seed[1], {})
        if theta0 is None:
            return ()
    ante: dict = {}
    succ: dict = {}
    for g in target.sorted_ante():
        ante.setdefault(_head(g), []).append(g)
    for g in target.sorted_succ():
        succ.setdefault(_head(g), []).append(g)
    items = []
    for f in source.sorted_ante():
        items.append((f, frozenset(free_vars(f)), target.ante, ante.get(_head(f), ())))
    for f in source.sorted_succ():
        items.append((f, frozenset(free_vars(f)), target.succ, succ.get(_head(f), ())))
    out = []

    def go(todo: list, theta: dict):
        best = None
        for n, (f, fv, full, pool) in enumerate(todo):
            if fv.issubset(theta.keys()):
                if substitute(f, theta) not in full:
                    return
                best = n
                break
            score = (-len(fv & theta.keys()), len(pool))
            if best is None or score < best_score:
                best, best_score = n, score
        if best is None:
            out.append(theta)
            return
        f, fv, full, pool = todo[best]
        rest = todo[:best] + todo[best + 1:]
        if fv.issubset(theta.keys()):
            go(rest, theta)
            return
        for g in pool:
            t2 = match(f, g, theta)
            if t2 is not None:
                go(rest, t2)

    go(items, theta0)
    return tuple(out)


def _formula_depth(f) -> int:
    if isinstance(f, Eq):
        return max(term_depth(f.left), term_depth(f.right))
    return max((term_depth(t) for t in f.args), default=0)


def _positions(t, target, path=()):
    if t == target:
        yield path
    if isinstance(t, App):
        for i, a in enumerate(t.args):
            yield from _positions(a, target, path + (i,))


def _replace(t, pos, new):
    if not pos:
        return new
    args = list(t.args)
    args[pos[0]] = _replace(args[pos[0]], pos[1:], new)
    return App(t.fn, tuple(args))


def atom_rewrites(phi: Atom, old, hole: Var) -> list:
    """Templates of ``phi`` with one occurrence of ``old`` replaced by ``hole``."""
    out = []
    for i, arg in enumerate(phi.args):
        for pos in _positions(arg, old):
            args = list(phi.args)
            args[i] = _replace(arg, pos, hole)
            out.append(Atom(phi.pred, tuple(args)))
    return out


def _fresh_name(base: str, used: set) -> str:
    if base not in used:
        return base
    for k in itertools.count(1):
        cand = f"{base}_{k}"
        if cand not in used:
            return cand


# ---------------------------------------------------------------------------
# the search


class _Purity:
    """Tracks whether a failed subtree failed for reasons local to it."""

    __slots__ = ("pure",)

    def __init__(self):
        self.pure = True


class _Search:
    def __init__(self, system: InductiveSystem, bounds: SearchBounds, depth: int, stats: SearchStats,
                 observer: Optional[Callable] = None, allow_eqr: bool = True,
                 snapshot: Optional[Callable] = None):
        self.system = system
        self.snapshot = snapshot
        self.allow_eqr = allow_eqr
        self.bounds = bounds
        self.depth = depth
        self.stats = stats
        self.observer = observer
        self.nodes: dict = {}
        self.companion: dict = {}
        self.prefix: dict = {}
        self.goal_seq: dict = {}
        self.last_case: dict = {}
        self.sig = system.signature

    # -- bookkeeping ---------------------------------------------------------

    def _place(self, addr: tuple, seq: Sequent, rule: Rule) -> None:
        self.nodes[addr] = Node(seq, rule)
        if self.observer is not None:
            self.observer(addr, seq, rule)

    def _remove(self, addrs) -> None:
        for a in addrs:
            self.nodes.pop(a, None)
            self.companion.pop(a, None)

    def partial(self) -> PreProof:
        return PreProof(dict(self.nodes), dict(self.companion))

    # -- goal expansion ------------------------------------------------------

    def solve(self, addr: tuple, seq: Sequent, eq_key, purity: _Purity) -> Iterator[None]:
        self.stats.goals += 1
        self.stats.depth_reached = max(self.stats.depth_reached, len(addr))
        if any(_formula_depth(f) > self.bounds.max_term_depth for f in seq.ante | seq.succ):
            return
        self.last_case[addr] = self._enter(addr, seq)
        for rule in self.closing_rules(seq):
            self._place(addr, seq, rule)
            if self.snapshot is not None:
                self.snapshot(self.partial())
            yield
            self._remove([addr])
        yield from self.bud_formations(addr, seq, purity)
        if len(addr) >= self.depth:
            return
        if len(self.nodes) + 1 >= self.bounds.max_nodes:
            purity.pure = False
            return
        for rule, kids, key in self.expansions(addr, seq, eq_key):
            self._place(addr, seq, rule)
            yield from self.solve_children(addr, kids, key, 0, purity)
            self._remove([addr])

    def solve_children(self, addr: tuple, kids: list, key, i: int, purity: _Purity) -> Iterator[None]:
        if i == len(kids):
            yield
            return
        here = addr + (i,)
        for _ in self.solve(here, kids[i], key if i == 0 else None, purity):
            later = _Purity()
            found = False
            for _ in self.solve_children(addr, kids, key, i + 1, later):
                found = True
                yield
            if not later.pure:
                purity.pure = False
            elif not found:
                break  # the later premises fail whatever this one does
        self._remove([a for a in list(self.nodes) if a[: len(here)] == here])

    def closing_rules(self, seq: Sequent) -> list:
        out = []
        if seq.ante & seq.succ:
            out.append(Rule.make("Axiom"))
        if self.allow_eqr and any(isinstance(f, Eq) and f.left == f.right for f in seq.succ):
            out.append(Rule.make("EqR"))
        for f in seq.sorted_succ():
            if not self.system.is_inductive_atom(f):
                continue
            for i, prod in enumerate(self.system.productions_for(f.pred)):
                if prod.assumptions:
                    continue
                theta = match(prod.conclusion, f, {})
                if theta is not None and set(theta) == set(prod.variables):
                    out.append(Rule.make("UnfoldRight", pred=f.pred, index=i, inst=theta))
        return out

    def _enter(self, addr: tuple, seq: Sequent) -> int:
        """Reset the per-goal caches; return the height of the lowest Case above."""
        self.goal_seq[addr] = seq
        self.prefix[addr] = {}
        if not addr:
            return -1
        parent = addr[:-1]
        return len(parent) if self.nodes[parent].rule.name == "Case" else self.last_case[parent]

    def _prefix(self, k: int, addr: tuple):
        """Matrix of the tree path from ``addr[:k]`` down to ``addr``."""
        memo = self.prefix[addr]
        m = memo.get(k)
        if m is None:
            parent = addr[:-1]
            edge = node_edge_matrix(self.system, self.nodes[parent], addr[-1], self.goal_seq[addr])
            m = edge if k == len(parent) else self._prefix(k, parent).compose(edge)
            memo[k] = m
        return m

    def _candidates(self, anc: tuple, addr: tuple, seq: Sequent) -> list:
        """Substitutions closing a cycle at ``anc`` that may carry progress.

        A progressing cycle must map some atom ``b`` of the ancestor onto an
        atom of the goal that a progressing trace reaches, so the embedding
        search is seeded with such a pair.
        """
        target = self.nodes[anc].sequent
        if not _could_embed(target, seq):
            return []
        m = self._prefix(len(anc), addr)
        hot = sorted({m.cols[j] for _, j, v in m.entries if v == PROGRESS}, key=str)
        found: dict = {}
        for b in m.rows:
            for g in hot:
                for theta in embeddings(target, seq, (b, g)):
                    inst = substitute(target, theta)
                    if inst in found:
                        continue
                    # the cycle matrix: prefix, then goal atom j -> ancestor atom b when b[theta] = j
                    col = {f: j for j, f in enumerate(m.cols)}
                    back = frozenset(
                        (col[substitute(bb, theta)], k, 1)
                        for k, bb in enumerate(m.rows)
                        if substitute(bb, theta) in col
                    )
                    cyc = m.compose(Matrix(m.cols, m.rows, back))
                    found[inst] = theta if cyc.has_progress_cycle() else None
        return sorted(found.items(), key=lambda it: str(it[0]))

    def bud_formations(self, addr: tuple, seq: Sequent, purity: _Purity) -> Iterator[None]:
        last = self.last_case[addr]
        for k in range(last + 1):
            anc = addr[:k]
            target = self.nodes[anc].sequent
            for inst, theta in self._candidates(anc, addr, seq):
                self.stats.bud_candidates += 1
                if theta is None:
                    self.stats.rejected_local += 1
                    continue
                chain = []
                here = addr
                if inst != seq:
                    chain.append((here, seq, Rule.make("Weak")))
                    here = here + (0,)
                if inst != target:
                    chain.append((here, inst, Rule.make("Subst", theta=theta)))
                    here = here + (0,)
                chain.append((here, target, Rule.make("Bud")))
                if len(here) > self.depth:
                    continue
                for a, s, r in chain:
                    self._place(a, s, r)
                self.companion[here] = anc
                placed = [a for a, _, _ in chain]
                proof = self.partial()
                assert path_matrix(self.system, proof, tree_path(anc, here)).has_progress_cycle()
                if not check_gtc(self.system, proof).holds:
                    self.stats.rejected_global += 1
                    purity.pure = False
                    self._remove(placed)
                    continue
                if self.snapshot is not None:
                    self.snapshot(proof)
                yield
                self._remove(placed)

    def expansions(self, addr: tuple, seq: Sequent, eq_key) -> Iterator[tuple]:
        yield from self.unfoldings(seq)
        yield from self.rewrites(seq, eq_key)
        yield from self.cases(addr, seq)
        if self.bounds.allow_cut:
            yield from self.cuts(seq)
            if addr and addr[-1] == 1 and self.nodes[addr[:-1]].rule.name == "Cut":
                yield from self.equality_drops(seq)

    def unfoldings(self, seq: Sequent) -> Iterator[tuple]:
        for f in seq.sorted_succ():
            if not self.system.is_inductive_atom(f):
                continue
            for i, prod in enumerate(self.system.productions_for(f.pred)):
                if not prod.assumptions:
                    continue
                theta = match(prod.conclusion, f, {})
                if theta is None or set(theta) != set(prod.variables):
                    continue  # existential variables are not guessed
                rest = seq.succ - {f}
                kids = [Sequent(seq.ante, rest | {substitute(a, theta)}) for a in prod.assumptions]
                yield Rule.make("UnfoldRight", pred=f.pred, index=i, inst=theta), kids, None

    def rewrites(self, seq: Sequent, eq_key) -> Iterator[tuple]:
        used = {v for v in free_vars(seq)}
        x = _fresh_name("eqa", used)
        y = _fresh_name("eqb", used | {x})
        options = []
        for eq in seq.sorted_ante():
            if not isinstance(eq, Eq) or eq.left == eq.right:
                continue
            t, u = eq.left, eq.right
            for side in ("ante", "succ"):
                pool = seq.ante if side == "ante" else seq.succ
                for phi in sorted(pool, key=str):
                    if not isinstance(phi, Atom):
                        continue
                    # replace u by t (hole y) or t by u (hole x)
                    for hole, old, direction in ((Var(y), u, 0), (Var(x), t, 1)):
                        for tmpl in atom_rewrites(phi, old, hole):
                            new = substitute(tmpl, {x: u, y: t})
                            if new in pool or _formula_depth(new) > self.bounds.max_term_depth:
                                continue
                            key = (str(eq), side, str(phi), direction, str(tmpl))
                            options.append((key, eq, side, tmpl, new))
        options.sort(key=lambda o: o[0])
        for key, eq, side, tmpl, new in options:
            if eq_key is not None and key <= eq_key:
                continue
            ante = [f for f in seq.ante if f != eq]
            succ = list(seq.succ)
            if side == "ante":
                ante.append(tmpl)
                kid = Sequent(seq.ante | {new}, seq.succ)
            else:
                succ.append(tmpl)
                kid = Sequent(seq.ante, seq.succ | {new})
            rule = Rule.make("EqLa", x=x, y=y, t=eq.left, u=eq.right, ante=ante, succ=succ)
            yield rule, [kid], key

    def cases(self, addr: tuple, seq: Sequent) -> Iterator[tuple]:
        used = free_vars(seq)
        for f in seq.sorted_ante():
            if not self.system.is_inductive_atom(f):
                continue
            prods = self.system.productions_for(f.pred)
            fresh = []
            taken = set(used)
            for prod in prods:
                names = []
                for j, _ in enumerate(prod.variables):
                    name = _fresh_name(f"y{len(addr)}" + (f"_{j}" if j else ""), taken)
                    taken.add(name)
                    names.append(name)
                fresh.append(names)
            gamma = seq.ante - {f}
            kids = case_distinctions(self.system, gamma, f, seq.succ, fresh)
            yield Rule.make("Case", pred=f.pred, principal=f, fresh=fresh), kids, None

    def cuts(self, seq: Sequent) -> Iterator[tuple]:
        names = sorted(free_vars(seq))
        seen = set()
        for phi in self.bounds.cut_formula_pool:
            pvars = sorted(free_vars(phi))
            for image in itertools.product(names, repeat=len(pvars)):
                inst = substitute(phi, {v: Var(n) for v, n in zip(pvars, image)})
                if inst in seen or inst in seq.ante or inst in seq.succ:
                    continue
                if _formula_depth(inst) > self.bounds.max_term_depth:
                    continue
                seen.add(inst)
                kids = [Sequent(seq.ante, seq.succ | {inst}), Sequent(seq.ante | {inst}, seq.succ)]
                yield Rule.make("Cut", formula=inst), kids, None

    def equality_drops(self, seq: Sequent) -> Iterator[tuple]:
        for f in seq.sorted_ante():
            if isinstance(f, Eq):
                yield Rule.make("Weak"), [Sequent(seq.ante - {f}, seq.succ)], None


def search(
    system: InductiveSystem,
    goal: Sequent,
    bounds: SearchBounds,
    observer: Optional[Callable] = None,
    snapshot: Optional[Callable] = None,
) -> object:
    """Iterative deepening up to ``bounds.max_tree_depth``.

    ``observer(addr, sequent, rule)`` sees every node placed.  ``snapshot(proof)``
    receives the partial tree after each closing rule and each accepted bud.
    """
    if bounds.max_tree_depth < 0 or bounds.max_term_depth < 0 or bounds.max_nodes < 1:
        raise BoundsTooSmall("bounds must be non-negative and allow at least one node")
    if any(_formula_depth(f) > bounds.max_term_depth for f in goal.ante | goal.succ):
        raise BoundsTooSmall("the goal already exceeds the term-depth bound")
    # EqR lies outside the cut-free fragment of the counterexample
    allow_eqr = bounds.allow_cut or bool(sequent_shape_violations(goal))
    stats = SearchStats()
    for depth in range(bounds.max_tree_depth + 1):
        before = stats.goals
        s = _Search(system, bounds, depth, stats, observer, allow_eqr, snapshot)
        for _ in s.solve((), goal, None, _Purity()):
            return ProofFound(s.partial(), stats)
        stats.rounds.append((depth, stats.goals - before))
    return Exhausted(bounds, stats)


def search_cut_free(system: InductiveSystem, goal: Sequent, bounds: SearchBounds,
                    observer: Optional[Callable] = None, snapshot: Optional[Callable] = None) -> object:
    if bounds.allow_cut:
        bounds = SearchBounds(bounds.max_tree_depth, bounds.max_term_depth, bounds.max_nodes, False, ())
    return search(system, goal, bounds, observer, snapshot)
