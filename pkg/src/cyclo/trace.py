"""Traces, the global trace condition, and cycle normalization.

A trace follows antecedent inductive atoms along a path.  For one edge of a
derivation the admissible steps form a relation; composing relations along a
path gives a matrix with entries NONE < STEP < PROGRESS.

The global trace condition is decided on the finite graph whose vertices are
companions: for every bud ``b`` and every companion ``c`` above it there is an
edge ``c -> companion(b)`` labelled with the matrix of the tree path from
``c`` to ``b``.  The condition holds iff every idempotent self-loop in the
composition closure of these edges has a progressing diagonal entry.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field
from typing import Iterable, Optional

from .proofgraph import Node, PreProof, Rule, addr_str, case_descendants, tree_path
from .syntax import InductiveSystem, substitute

NONE, STEP, PROGRESS = 0, 1, 2


class InvalidNode(ValueError):
    pass


class TraceError(ValueError):
    def __init__(self, position: int, message: str):
        super().__init__(f"position {position}: {message}")
        self.position = position


# ---------------------------------------------------------------------------
# per-edge relation


@dataclass(frozen=True)
class TraceGraph:
    """Pairs (conclusion atom, premise atom) with a progress flag."""

    pairs: dict

    def progress(self, a, b) -> Optional[bool]:
        v = self.pairs.get((a, b))
        return None if v is None else v == PROGRESS


def inductive_ante(system: InductiveSystem, sequent) -> list:
    return sorted((f for f in sequent.ante if system.is_inductive_atom(f)), key=str)


def edge_relation(system: InductiveSystem, node: Node, child_index: int, child_sequent) -> dict:
    rule = node.rule
    concl = [f for f in node.sequent.ante if system.is_inductive_atom(f)]
    prem = {f for f in child_sequent.ante if system.is_inductive_atom(f)}
    pairs: dict = {}

    def put(a, b, v):
        if pairs.get((a, b), NONE) < v:
            pairs[(a, b)] = v

    if rule.name == "Subst":
        theta = rule.mapping("theta")
        for b in prem:
            a = substitute(b, theta)
            if a in node.sequent.ante:
                put(a, b, STEP)
    elif rule.name == "EqLa":
        x, y, t, u = rule.get("x"), rule.get("y"), rule.get("t"), rule.get("u")
        for phi in rule.get("ante", ()):
            if not system.is_inductive_atom(phi):
                continue
            put(substitute(phi, {x: t, y: u}), substitute(phi, {x: u, y: t}), STEP)
    elif rule.name == "Case":
        principal = rule.get("principal")
        for b in case_descendants(system, rule, child_index):
            put(principal, b, PROGRESS)
        for a in concl:
            if a in prem:
                put(a, a, STEP)
    else:
        for a in concl:
            if a in prem:
                put(a, a, STEP)
    return pairs


def trace_graph(system: InductiveSystem, proof: PreProof, addr: tuple, child_index: int) -> TraceGraph:
    addr = proof.resolve(addr)
    kids = proof.children(addr)
    if not 0 <= child_index < len(kids):
        raise InvalidNode(f"{addr_str(addr)!r} has no child {child_index}")
    node = proof.nodes[addr]
    return TraceGraph(edge_relation(system, node, child_index, proof.nodes[kids[child_index]].sequent))


# ---------------------------------------------------------------------------
# explicit traces


@dataclass(frozen=True)
class TraceOk:
    progress_points: list


def check_path(proof: PreProof, path: list) -> None:
    for i in range(len(path) - 1):
        if path[i + 1] not in proof.successors(path[i]):
            raise TraceError(i + 1, f"{addr_str(path[i + 1])!r} does not follow {addr_str(path[i])!r}")


def verify_trace(system: InductiveSystem, proof: PreProof, path: list, formulas: list) -> TraceOk:
    """Check ``formulas`` is a trace along ``path``; return progress positions."""
    path = [tuple(a) for a in path]
    if len(path) != len(formulas):
        raise TraceError(0, "path and trace differ in length")
    for i, (a, f) in enumerate(zip(path, formulas)):
        if a not in proof.nodes:
            raise TraceError(i, f"no node {addr_str(a)!r}")
        if not system.is_inductive_atom(f) or f not in proof.sequent(a).ante:
            raise TraceError(i, f"{f} is not an antecedent inductive atom of {addr_str(a)!r}")
    check_path(proof, path)
    progress = []
    for i in range(len(path) - 1):
        here = proof.resolve(path[i])
        idx = proof.children(here).index(path[i + 1])
        rel = edge_relation(system, proof.nodes[here], idx, proof.sequent(path[i + 1]))
        v = rel.get((formulas[i], formulas[i + 1]), NONE)
        if v == NONE:
            raise TraceError(i, f"{formulas[i]} -> {formulas[i + 1]} is not a trace step at {addr_str(here)!r}")
        if v == PROGRESS:
            progress.append(i)
    return TraceOk(progress)


# ---------------------------------------------------------------------------
# matrices


@dataclass(frozen=True)
class Matrix:
    """Entries between the atoms of a source sequent and a target sequent."""

    rows: tuple  # source atoms
    cols: tuple  # target atoms
    entries: frozenset  # (i, j, value) with value in {STEP, PROGRESS}

    def compose(self, other: "Matrix") -> "Matrix":
        by_row: dict = {}
        for i, j, v in self.entries:
            by_row.setdefault(j, []).append((i, v))
        best: dict = {}
        for j, k, w in other.entries:
            for i, v in by_row.get(j, ()):
                val = max(v, w)
                if best.get((i, k), NONE) < val:
                    best[(i, k)] = val
        return Matrix(self.rows, other.cols, frozenset((i, k, v) for (i, k), v in best.items()))

    def diagonal_progress(self) -> bool:
        return any(i == j and v == PROGRESS for i, j, v in self.entries)

    def has_progress_cycle(self) -> bool:
        """Some cycle of the square matrix's graph uses a progress edge."""
        adj: dict = {}
        for i, j, _ in self.entries:
            adj.setdefault(i, set()).add(j)
        for i, j, v in self.entries:
            if v != PROGRESS:
                continue
            # is i reachable from j?
            seen, stack = {j}, [j]
            while stack:
                n = stack.pop()
                if n == i:
                    return True
                for m in adj.get(n, ()):
                    if m not in seen:
                        seen.add(m)
                        stack.append(m)
        return False


def identity_matrix(atoms: tuple) -> Matrix:
    return Matrix(atoms, atoms, frozenset((i, i, STEP) for i in range(len(atoms))))


_EDGE_CACHE: dict = {}


def node_edge_matrix(system: InductiveSystem, node: Node, idx: int, child_sequent) -> Matrix:
    key = (id(system), node, idx, child_sequent)
    hit = _EDGE_CACHE.get(key)
    if hit is not None and hit[0] is system:
        return hit[1]
    rows = tuple(inductive_ante(system, node.sequent))
    cols = tuple(inductive_ante(system, child_sequent))
    rel = edge_relation(system, node, idx, child_sequent)
    ri = {f: i for i, f in enumerate(rows)}
    ci = {f: j for j, f in enumerate(cols)}
    entries = frozenset((ri[a], ci[b], v) for (a, b), v in rel.items() if a in ri and b in ci)
    m = Matrix(rows, cols, entries)
    if len(_EDGE_CACHE) > 500000:
        _EDGE_CACHE.clear()
    _EDGE_CACHE[key] = (system, m)
    return m


def edge_matrix(system: InductiveSystem, proof: PreProof, addr: tuple, child: tuple) -> Matrix:
    here = proof.resolve(addr)
    idx = proof.children(here).index(child)
    return node_edge_matrix(system, proof.nodes[here], idx, proof.sequent(child))


def path_matrix(system: InductiveSystem, proof: PreProof, path: list) -> Matrix:
    atoms = tuple(inductive_ante(system, proof.sequent(path[0])))
    m = identity_matrix(atoms)
    for a, b in zip(path, path[1:]):
        m = m.compose(edge_matrix(system, proof, a, b))
    return m


# ---------------------------------------------------------------------------
# the global trace condition


@dataclass(frozen=True)
class Lasso:
    stem: list
    cycle: list

    def render(self) -> str:
        stem = " ".join(addr_str(a) or "<root>" for a in self.stem)
        cyc = " ".join(addr_str(a) or "<root>" for a in self.cycle)
        return f"stem: {stem} / cycle: {cyc}"

    def pumped(self, k: int) -> list:
        return list(self.cycle) + list(self.cycle[1:]) * (k - 1)


@dataclass
class GtcVerdict:
    holds: bool
    lasso: Optional[Lasso] = None
    closure_size: int = 0
    certificate: list = field(default_factory=list)  # idempotent self-loops checked

    def render(self) -> str:
        if self.holds:
            return "GTC: PASS"
        return "GTC: FAIL\n" + self.lasso.render()


def abstract_edges(system: InductiveSystem, proof: PreProof) -> list:
    """(companion c, bud b, matrix of the tree path c..b) for c above b."""
    comps = sorted(set(proof.companion.values()))
    out = []
    for b in proof.buds():
        for c in comps:
            if b[: len(c)] == c and c != b:
                out.append((c, b, path_matrix(system, proof, tree_path(c, b))))
    return out


def check_gtc(system: InductiveSystem, proof: PreProof, max_closure: Optional[int] = None) -> GtcVerdict:
    edges = abstract_edges(system, proof)
    # closure elements: (source companion, target companion, matrix) -> witness bud list
    closure: dict = {}
    queue: deque = deque()
    for c, b, m in edges:
        key = (c, proof.companion[b], m)
        if key not in closure:
            closure[key] = (b,)
            queue.append(key)
    by_source: dict = {}
    for c, b, m in edges:
        by_source.setdefault(c, []).append((b, m))
    while queue:
        key = queue.popleft()
        src, dst, m = key
        for b, em in by_source.get(dst, ()):
            nkey = (src, proof.companion[b], m.compose(em))
            if nkey not in closure:
                closure[nkey] = closure[key] + (b,)
                queue.append(nkey)
                if max_closure is not None and len(closure) > max_closure:
                    raise OverflowError("closure too large")
    checked = []
    for (src, dst, m), buds in sorted(closure.items(), key=lambda kv: (len(kv[1]), kv[1])):
        if src != dst or m.compose(m) != m:
            continue
        checked.append((src, buds))
        if not m.diagonal_progress():
            return GtcVerdict(False, lasso_from_buds(proof, src, buds), len(closure), checked)
    return GtcVerdict(True, None, len(closure), checked)


def lasso_from_buds(proof: PreProof, start: tuple, buds: Iterable) -> Lasso:
    cycle = [start]
    cur = start
    for b in buds:
        cycle += tree_path(cur, b)[1:]
        cur = proof.companion[b]
    return Lasso(tree_path((), start)[:-1], cycle)


def lasso_matrix(system: InductiveSystem, proof: PreProof, lasso: Lasso) -> Matrix:
    return path_matrix(system, proof, lasso.cycle)


# ---------------------------------------------------------------------------
# naive oracle


def naive_gtc_oracle(system: InductiveSystem, proof: PreProof, cycle_length_cap: Optional[int] = None) -> GtcVerdict:
    """Breadth-first enumeration of closed walks, each tested as an infinite repetition."""
    cap = 3 * len(proof) if cycle_length_cap is None else cycle_length_cap
    for start in proof.inner():
        atoms = tuple(inductive_ante(system, proof.sequent(start)))
        init = (start, identity_matrix(atoms))
        parent = {init: None}
        frontier = [init]
        for _ in range(cap):
            nxt = []
            for state in frontier:
                here, m = state
                for child in proof.children(here):
                    nm = m.compose(edge_matrix(system, proof, here, child))
                    node = proof.resolve(child)
                    new = (node, nm)
                    if node == start and not nm.has_progress_cycle():
                        walk = _walk(parent, state) + [child]
                        return GtcVerdict(False, Lasso(tree_path((), start)[:-1], walk))
                    if new not in parent:
                        parent[new] = (state, child)
                        nxt.append(new)
            frontier = nxt
            if not frontier:
                break
    return GtcVerdict(True)


def _walk(parent: dict, state) -> list:
    out = []
    while parent[state] is not None:
        state, child = parent[state]
        out.append(child)
    out.append(state[0])
    return out[::-1]


# ---------------------------------------------------------------------------
# lasso replay


def enumerate_traces(system: InductiveSystem, proof: PreProof, path: list, limit: int = 200000):
    """All traces (formula lists) along ``path``, starting anywhere on its first node."""
    rels = []
    for a, b in zip(path, path[1:]):
        here = proof.resolve(a)
        idx = proof.children(here).index(b)
        rels.append(edge_relation(system, proof.nodes[here], idx, proof.sequent(b)))
    succ = []
    for rel in rels:
        d: dict = {}
        for (x, y), v in rel.items():
            d.setdefault(x, []).append((y, v))
        succ.append(d)
    count = 0
    stack = [[f] for f in inductive_ante(system, proof.sequent(path[0]))]
    while stack:
        tr = stack.pop()
        i = len(tr) - 1
        if i == len(path) - 1:
            count += 1
            if count > limit:
                raise OverflowError("too many traces")
            yield tr
            continue
        for y, _ in succ[i].get(tr[-1], ()):
            stack.append(tr + [y])


def replay_lasso(system: InductiveSystem, proof: PreProof, lasso: Lasso, pumps: int = 3) -> bool:
    """True when no trace over ``pumps`` repetitions returns to the same atom with progress.

    Such a segment could be repeated forever, so its absence confirms the lasso.
    """
    path = lasso.pumped(pumps)
    period = len(lasso.cycle) - 1
    if period <= 0:
        return True
    bounds = [k * period for k in range(pumps + 1)]
    for tr in enumerate_traces(system, proof, path):
        ok = verify_trace(system, proof, path, tr)
        prog = ok.progress_points
        for i, p in enumerate(bounds):
            for q in bounds[i + 1:]:
                if tr[p] == tr[q] and any(p <= k < q for k in prog):
                    return False
    return True


# ---------------------------------------------------------------------------
# cycle normalization


def bisimulation_blocks(proof: PreProof) -> dict:
    """Partition inner nodes by equality of unfolded subtrees."""
    inner = proof.inner()
    block = {}
    keys = {}
    for a in inner:
        n = proof.nodes[a]
        k = (n.sequent, n.rule)
        block[a] = keys.setdefault(k, len(keys))
    while True:
        keys = {}
        new = {}
        for a in inner:
            k = (block[a], tuple(block[proof.resolve(c)] for c in proof.children(a)))
            new[a] = keys.setdefault(k, len(keys))
        if len(set(new.values())) == len(set(block.values())):
            return new
        block = new


def cycle_normalize(proof: PreProof) -> PreProof:
    block = bisimulation_blocks(proof)
    nodes: dict = {}
    companion: dict = {}

    def unfold(src: tuple, at: tuple, stack: dict):
        src = proof.resolve(src)
        blk = block[src]
        if blk in stack:
            nodes[at] = Node(proof.nodes[src].sequent, Rule.make("Bud"))
            companion[at] = stack[blk]
            return
        nodes[at] = proof.nodes[src]
        stack[blk] = at
        for i, c in enumerate(proof.children(src)):
            unfold(c, at + (i,), stack)
        del stack[blk]

    unfold((), (), {})
    return PreProof(nodes, companion)

