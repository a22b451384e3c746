"""Equality reasoning over terms of the shape ``nx^n(a)``.

An equation ``nx^p(a) = nx^q(b)`` lets the term ``nx^(p+k)(a)`` be rewritten
to ``nx^(q+k)(b)`` for every ``k >= 0``.  States of the search are therefore
pairs ``(atom, depth)``; the search is bounded by a shift cap.

Besides the capped search there is an exact procedure based on potentials:
each equation says ``val(b) = val(a) + p - q`` if atoms are read as integers
offset by their depth.  Inside one connected component the equations are
either consistent (the component is "flat") or contain a cycle with a nonzero
net shift.  This gives the aperiodicity certificate for root-like sequents and
an independent check on ``index_of``.
"""

from __future__ import annotations

import os
from collections import deque
from dataclasses import dataclass, field
from itertools import product
from typing import Iterable, Optional, Union

from .syntax import App, Atom, Eq, Formula, NotLinear, Sequent, Term, atom_and_depth, iterate

UNARY = "nx"
BASE = App("s")
END = App("e")


class NonLinearTerm(ValueError):
    pass


class CapExceeded(RuntimeError):
    pass


class OutOfFragment(ValueError):
    pass


def linear(t: Term) -> tuple:
    try:
        return atom_and_depth(t, UNARY)
    except NotLinear as exc:
        raise NonLinearTerm(str(t)) from exc


# ---------------------------------------------------------------------------
# index values


@dataclass(frozen=True)
class Bot:
    def __str__(self) -> str:
        return "bot"


@dataclass(frozen=True)
class Value:
    d: int

    def __str__(self) -> str:
        return str(self.d)


@dataclass(frozen=True)
class Undefined:
    def __str__(self) -> str:
        return "undefined"


IndexValue = Union[Bot, Value, Undefined]


# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Edge:
    a: Term
    p: int
    b: Term
    q: int


@dataclass
class CongruenceIndex:
    atoms: frozenset
    edges: tuple
    component: dict
    shift_cap: int
    fixed_cap: Optional[int] = None
    gamma_depth: int = 0
    _adj: dict = field(default_factory=dict, repr=False)

    def cap_for(self, *terms: Term) -> int:
        """The shift cap, widened if a query is deeper than those seen at build."""
        if self.fixed_cap is not None:
            return self.fixed_cap
        qd = max((linear(t)[1] for t in terms), default=0)
        return max(self.shift_cap, default_cap(self.gamma_depth, qd, len(self.edges)))

    def comp(self, atom: Term):
        return self.component.get(atom, ("solo", str(atom)))


def default_cap(gamma_depth: int, query_depth: int, n_eqs: int) -> int:
    return max(gamma_depth, query_depth) + n_eqs * gamma_depth + 2


def _env_cap() -> Optional[int]:
    raw = os.environ.get("CYCLO_SHIFT_CAP")
    if raw is None or raw == "":
        return None
    return int(raw)


def build(gamma: Iterable[Formula], queries: Iterable[Term] = (), cap: Optional[int] = None) -> CongruenceIndex:
    edges = []
    atoms = set()
    for f in gamma:
        if not isinstance(f, Eq):
            continue
        a, p = linear(f.left)
        b, q = linear(f.right)
        edges.append(Edge(a, p, b, q))
        atoms.update((a, b))
    qdepth = 0
    for t in queries:
        a, d = linear(t)
        atoms.add(a)
        qdepth = max(qdepth, d)
    # union-find over atoms
    parent = {a: a for a in atoms}

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    for e in edges:
        ra, rb = find(e.a), find(e.b)
        if ra != rb:
            parent[ra] = rb
    # deterministic component ids: smallest rendered atom in the class
    groups: dict = {}
    for a in atoms:
        groups.setdefault(find(a), []).append(a)
    component = {}
    for members in groups.values():
        label = min(str(m) for m in members)
        for m in members:
            component[m] = label
    gdepth = max((max(e.p, e.q) for e in edges), default=0)
    fixed = cap if cap is not None else _env_cap()
    shift_cap = fixed if fixed is not None else default_cap(gdepth, qdepth, len(edges))
    adj: dict = {}
    for e in edges:
        adj.setdefault(e.a, []).append((e.p, e.b, e.q))
        adj.setdefault(e.b, []).append((e.q, e.a, e.p))
    return CongruenceIndex(frozenset(atoms), tuple(edges), component, shift_cap, fixed, gdepth, adj)


def _reachable(idx: CongruenceIndex, start: tuple, cap: int) -> set:
    seen = {start}
    queue = deque([start])
    while queue:
        atom, depth = queue.popleft()
        for p, other, q in idx._adj.get(atom, ()):
            if depth < p:
                continue
            nd = depth - p + q
            if nd > cap:
                continue
            st = (other, nd)
            if st not in seen:
                seen.add(st)
                queue.append(st)
    return seen


def equiv(idx: CongruenceIndex, t: Term, u: Term) -> bool:
    ta, td = linear(t)
    ua, ud = linear(u)
    if (ta, td) == (ua, ud):
        return True
    cap = idx.cap_for(t, u)
    # compatibility: nx^k t' ~ nx^k u' whenever t' ~ u'
    k = min(td, ud)
    if k and (ua, ud - k) in _reachable(idx, (ta, td - k), cap):
        return True
    return (ua, ud) in _reachable(idx, (ta, td), cap)


def related(idx: CongruenceIndex, t: Term, u: Term) -> bool:
    ta, _ = linear(t)
    ua, _ = linear(u)
    return ta == ua or idx.comp(ta) == idx.comp(ua)


def index_of(idx: CongruenceIndex, t: Term, base: Term = BASE) -> object:
    if not related(idx, t, base):
        return Bot()
    ta, td = linear(t)
    ba, bd = linear(base)
    cap = idx.cap_for(t, base)
    diffs = set()
    for n in range(cap + 1):
        if td + n > cap:
            break
        reach = _reachable(idx, (ta, td + n), cap)
        for m in range(cap + 1 - bd):
            if (ba, bd + m) in reach:
                diffs.add(m - n)
        if len(diffs) > 1:
            return Undefined()
    if not diffs:
        raise CapExceeded(f"no witness for {t} ~ nx^m {base} within cap {cap}")
    return Value(diffs.pop())


# ---------------------------------------------------------------------------
# potentials: exact reasoning about the atom graph


@dataclass(frozen=True)
class Potentials:
    """Per-atom offsets; ``consistent`` is False for a cycle with net shift."""

    offset: dict
    consistent: dict  # component label -> bool
    witness: dict  # component label -> offending edge (for reports)


def potentials(idx: CongruenceIndex) -> Potentials:
    offset: dict = {}
    consistent: dict = {}
    witness: dict = {}
    for root in sorted(idx.atoms, key=str):
        if root in offset:
            continue
        label = idx.comp(root)
        consistent.setdefault(label, True)
        offset[root] = 0
        stack = [root]
        while stack:
            a = stack.pop()
            for p, b, q in idx._adj.get(a, ()):
                # nx^p a = nx^q b  =>  val(b) = val(a) + p - q
                want = offset[a] + p - q
                if b not in offset:
                    offset[b] = want
                    stack.append(b)
                elif offset[b] != want and consistent[label]:
                    consistent[label] = False
                    witness[label] = (a, p, b, q)
    return Potentials(offset, consistent, witness)


def aperiodic(idx: CongruenceIndex, atom: Term) -> bool:
    if atom not in idx.atoms:
        return True
    pot = potentials(idx)
    return pot.consistent[idx.comp(atom)]


def index_by_potential(idx: CongruenceIndex, t: Term, base: Term = BASE) -> object:
    """Exact index when the base's component is flat; Undefined otherwise."""
    if not related(idx, t, base):
        return Bot()
    ta, td = linear(t)
    ba, bd = linear(base)
    if ta == ba and ta not in idx.atoms:
        return Value(td - bd)
    pot = potentials(idx)
    if not pot.consistent[idx.comp(ba)]:
        return Undefined()
    return Value((pot.offset[ta] + td) - (pot.offset[ba] + bd))


# ---------------------------------------------------------------------------
# root-like sequents


@dataclass(frozen=True)
class RootLikeReport:
    is_root_like: bool
    failed_condition: Optional[int] = None
    witness: tuple = ()

    def render(self) -> str:
        names = {
            1: "s not related to e",
            2: "no FsT(t) with t related to s",
            3: "nx^n s ~ nx^m s implies n = m",
        }
        rows = []
        for i in (1, 2, 3):
            if self.failed_condition is None or i < self.failed_condition:
                status = "pass"
            elif i == self.failed_condition:
                status = "FAIL"
            else:
                status = "skip"
            line = f"condition {i}: {status}  {names[i]}"
            if i == self.failed_condition and self.witness:
                line += "  witness: " + ", ".join(str(w) for w in self.witness)
            rows.append(line)
        return "\n".join(rows)


def check_fragment(sequent: Sequent) -> None:
    for f in sequent.ante:
        if isinstance(f, Eq):
            linear(f.left)
            linear(f.right)
        elif isinstance(f, Atom) and f.pred == "TeF":
            linear(f.args[0])
        else:
            raise OutOfFragment(f"antecedent formula {f} outside the fragment")
    for f in sequent.succ:
        if not (isinstance(f, Atom) and f.pred == "FsT"):
            raise OutOfFragment(f"succedent formula {f} outside the fragment")
        linear(f.args[0])


def is_root_like(sequent: Sequent, system=None) -> RootLikeReport:
    try:
        check_fragment(sequent)
    except NonLinearTerm as exc:
        raise OutOfFragment(str(exc)) from exc
    succ_terms = [f.args[0] for f in sequent.sorted_succ()]
    idx = build(sequent.ante, [BASE, END] + succ_terms)
    if related(idx, BASE, END):
        return RootLikeReport(False, 1, (BASE, END))
    for t in succ_terms:
        if related(idx, t, BASE):
            return RootLikeReport(False, 2, (t,))
    cap = idx.cap_for(BASE)
    for n in range(cap + 1):
        reach = _reachable(idx, (BASE, n), cap)
        for m in range(cap + 1):
            if m != n and (BASE, m) in reach:
                return RootLikeReport(False, 3, (iterate(UNARY, n, BASE), iterate(UNARY, m, BASE)))
    if not aperiodic(idx, BASE):
        pot = potentials(idx)
        return RootLikeReport(False, 3, tuple(pot.witness[idx.comp(BASE)]))
    return RootLikeReport(True)


# ---------------------------------------------------------------------------
# independent oracles


def _gamma_pairs(gamma: Iterable[Formula]) -> list:
    pairs = []
    for f in gamma:
        if isinstance(f, Eq):
            pairs.append((f.left, f.right))
            pairs.append((f.right, f.left))
    return pairs


def _strip(t: Term, prefix: Term) -> Optional[int]:
    """Return n if t is nx^n(prefix)."""
    n = 0
    while t != prefix:
        if isinstance(t, App) and t.fn == UNARY and len(t.args) == 1:
            t = t.args[0]
            n += 1
        else:
            return None
    return n


def _depth(t: Term) -> int:
    n = 0
    while isinstance(t, App) and t.args:
        t = t.args[0]
        n += 1
    return n


def chain_oracle(gamma: Iterable[Formula], t: Term, u: Term, cap: int) -> bool:
    """Breadth-first enumeration of chains over literal instances of [gamma].

    A step rewrites a whole term ``nx^n(l)`` into ``nx^n(r)`` for ``l = r`` in
    gamma (either orientation).  Every term on the chain has depth <= cap.
    """
    pairs = _gamma_pairs(gamma)
    if t == u:
        return True
    seen = {t}
    queue = deque([t])
    while queue:
        cur = queue.popleft()
        for left, right in pairs:
            n = _strip(cur, left)
            if n is None:
                continue
            nxt = iterate(UNARY, n, right)
            if _depth(nxt) > cap or nxt in seen:
                continue
            if nxt == u:
                return True
            seen.add(nxt)
            queue.append(nxt)
    return False


def closure_equiv(gamma: Iterable[Formula], t: Term, u: Term) -> bool:
    """Ground congruence closure over the subterm set; exact and cap-free."""
    terms: set = set()

    def add(x: Term):
        while True:
            terms.add(x)
            if isinstance(x, App) and x.args:
                x = x.args[0]
            else:
                return

    eqs = [(f.left, f.right) for f in gamma if isinstance(f, Eq)]
    for a, b in eqs:
        add(a)
        add(b)
    add(t)
    add(u)
    parent = {x: x for x in terms}

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    for a, b in eqs:
        parent[find(a)] = find(b)
    changed = True
    apps = [x for x in terms if isinstance(x, App) and x.args]
    while changed:
        changed = False
        sig: dict = {}
        for x in apps:
            key = (x.fn, tuple(find(a) for a in x.args))
            if key in sig:
                r1, r2 = find(sig[key]), find(x)
                if r1 != r2:
                    parent[r1] = r2
                    changed = True
            else:
                sig[key] = x
    return find(t) == find(u)


def brute_related(gamma: Iterable[Formula], t: Term, u: Term, bound: int) -> bool:
    gamma = list(gamma)
    return any(
        closure_equiv(gamma, iterate(UNARY, n, t), iterate(UNARY, m, u))
        for n, m in product(range(bound + 1), repeat=2)
    )
