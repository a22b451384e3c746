"""Switching points, unfinished and rightmost paths, and the refutation replay.

These operations work on pre-proofs of sequents in the cut-free fragment of
the TeF/FsT system: antecedents hold equalities and TeF atoms, succedents hold
FsT atoms, and every term is ``nx^n`` of ``s``, ``e`` or a variable.

The index of ``TeF(t)`` in a sequent is the unique ``m - n`` with
``nx^n t ~ nx^m s`` (or bot when ``t`` and ``s`` are unrelated).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

from . import congruence as cg
from .congruence import BASE, Bot, OutOfFragment, Value, is_root_like
from .proofgraph import PreProof, addr_str, check_pre_proof, fragment_violations, tree_path
from .syntax import InductiveSystem, Sequent, parse_sequent
from .trace import Lasso, check_path, path_matrix, verify_trace

CASE_TEF = "Case(TeF)"
FST_R1 = "UnfoldRight(FsT,0)"
FST_R2 = "UnfoldRight(FsT,1)"
GOAL = "TeF(s) |- FsT(e)"


class InvalidPath(ValueError):
    pass


class NotCutFree(ValueError):
    pass


class NotCycleNormal(ValueError):
    pass


class WrongRoot(ValueError):
    pass


class ConstructionError(RuntimeError):
    """A step of the replay met a situation the lemmas rule out."""


def index_in(sequent: Sequent, t) -> object:
    idx = cg.build(sequent.ante, [t, BASE])
    return cg.index_of(idx, t, BASE)


def is_switching(proof: PreProof, a: tuple) -> bool:
    a = proof.resolve(a)
    rule = proof.nodes[a].rule
    if rule.label != CASE_TEF:
        return False
    return isinstance(index_in(proof.sequent(a), rule.get("principal").args[0]), Bot)


def switching_points(system: InductiveSystem, proof: PreProof) -> list:
    out = []
    for a in proof.inner():
        seq = proof.sequent(a)
        try:
            cg.check_fragment(seq)
        except cg.NonLinearTerm as exc:
            raise OutOfFragment(str(exc)) from exc
        if is_switching(proof, a):
            out.append(a)
    return out


def is_left_step(proof: PreProof, a: tuple, b: tuple) -> bool:
    here = proof.resolve(a)
    return proof.nodes[here].rule.label == CASE_TEF and b == here + (0,)


def is_unfinished_path(system: InductiveSystem, proof: PreProof, path: list) -> bool:
    path = [tuple(a) for a in path]
    if not path:
        raise InvalidPath("empty path")
    try:
        check_path(proof, path)
    except Exception as exc:
        raise InvalidPath(str(exc)) from exc
    if not is_root_like(proof.sequent(path[0])).is_root_like:
        return False
    for a, b in zip(path, path[1:]):
        if is_left_step(proof, a, b) and not is_switching(proof, a):
            return False
    return True


def rightmost_step(proof: PreProof, a: tuple) -> Optional[tuple]:
    here = proof.resolve(a)
    label = proof.nodes[here].rule.label
    if label == CASE_TEF:
        return here + (1,)
    if label in ("Weak", "Subst", "EqLa", FST_R2):
        return here + (0,)
    if label in ("Axiom", "EqR", FST_R1):
        return None
    raise OutOfFragment(f"rule {label} at {addr_str(here)!r} is outside the fragment")


def rightmost_path(proof: PreProof, start: tuple, max_len: int) -> list:
    path = [tuple(start)]
    while len(path) < max_len:
        nxt = rightmost_step(proof, path[-1])
        if nxt is None:
            break
        path.append(nxt)
    return path


def rightmost_to_bud(proof: PreProof, start: tuple) -> list:
    """Rightmost tree path from ``start`` down to the first bud or leaf rule."""
    path = [tuple(start)]
    while proof.nodes[path[-1]].rule.name != "Bud":
        nxt = rightmost_step(proof, path[-1])
        if nxt is None:
            break
        path.append(nxt)
    return path


# ---------------------------------------------------------------------------
# index transitions


@dataclass
class IndexTransitionReport:
    ok: bool
    indices: list
    unfinished: bool
    violation: Optional[tuple] = None  # (position, clause)
    clauses: list = field(default_factory=list)  # clause applied at each step

    def render(self) -> str:
        lines = [f"unfinished path: {'yes' if self.unfinished else 'no'}"]
        lines.append("indices: " + " ".join(str(d) for d in self.indices))
        lines.append("clauses: " + (" ".join(self.clauses) or "(none)"))
        if self.ok:
            lines.append("transitions: ok")
        else:
            pos, clause = self.violation
            lines.append(f"transitions: violated at position {pos}, clause {clause}")
        return "\n".join(lines)


def check_index_transitions(system: InductiveSystem, proof: PreProof, path: list, trace: list) -> IndexTransitionReport:
    path = [tuple(a) for a in path]
    ok = verify_trace(system, proof, path, trace)
    progress = set(ok.progress_points)
    unfinished = is_unfinished_path(system, proof, path)
    indices = [index_in(proof.sequent(a), tau.args[0]) for a, tau in zip(path, trace)]
    clauses: list = []
    for k in range(len(path) - 1):
        d, d2 = indices[k], indices[k + 1]
        if not isinstance(d, (Bot, Value)):
            return IndexTransitionReport(False, indices, unfinished, (k, "defined"), clauses)
        if isinstance(d, Bot):
            clauses.append("1")
            if not isinstance(d2, Bot):
                return IndexTransitionReport(False, indices, unfinished, (k, "1"), clauses)
            continue
        here = proof.resolve(path[k])
        label = proof.nodes[here].rule.label
        if label in ("Weak", "Subst"):
            clause, good = "2", d2 == d or isinstance(d2, Bot)
        elif label in ("EqLa", FST_R2):
            clause, good = "3", d2 == d
        elif label == CASE_TEF:
            if path[k + 1] == here + (0,):
                clause, good = "4a", d2 == d
            elif k in progress:
                clause, good = "4c", d2 == Value(d.d + 1)
            else:
                clause, good = "4b", d2 == d
        else:
            raise OutOfFragment(f"rule {label} at {addr_str(here)!r} is outside the fragment")
        clauses.append(clause)
        if not good:
            return IndexTransitionReport(False, indices, unfinished, (k, clause), clauses)
    if indices and not isinstance(indices[-1], (Bot, Value)):
        return IndexTransitionReport(False, indices, unfinished, (len(path) - 1, "defined"), clauses)
    return IndexTransitionReport(True, indices, unfinished, None, clauses)


# ---------------------------------------------------------------------------
# the refutation replay


@dataclass
class RefutationReport:
    outcome: str  # ContradictionFound | InputInvalid | GtcFailed
    sigma_tildes: list = field(default_factory=list)
    lasso: Optional[Lasso] = None
    reason: str = ""

    def render(self) -> str:
        pts = " ".join(addr_str(a) or "<root>" for a in self.sigma_tildes) or "(none)"
        lines = [f"outcome: {self.outcome}", f"switching points: {pts}"]
        if self.lasso is not None:
            lines.append(self.lasso.render())
        if self.reason:
            lines.append(f"reason: {self.reason}")
        return "\n".join(lines)


def _only_switching_turn_left(proof: PreProof, target: tuple) -> bool:
    path = tree_path((), target)
    for a, b in zip(path, path[1:]):
        if is_switching(proof, a) != is_left_step(proof, a, b):
            return False
    return True


def refute_cut_free_candidate(system: InductiveSystem, proof: PreProof) -> RefutationReport:
    """Replay the switching-point construction on a claimed cut-free proof of the goal.

    Each round follows the rightmost path from the current start down to a bud
    ``mu`` and looks for the least-height switching point on root..mu whose
    successor is a right assumption.  When none exists the loop
    companion(mu)..mu carries no progressing trace, so the candidate violates
    the trace condition.
    """
    report = check_pre_proof(system, proof)
    if not report.valid:
        return RefutationReport("InputInvalid", reason=report.render())
    if not report.cut_free:
        raise NotCutFree("contains Cut at " + ", ".join(addr_str(a) or "<root>" for a in report.cut_nodes))
    if not report.cycle_normal:
        raise NotCycleNormal("some companion is not an ancestor of its bud")
    if proof.root.sequent != parse_sequent(GOAL, system.signature):
        raise WrongRoot(f"root is {proof.root.sequent}, expected {GOAL}")
    bad = fragment_violations(proof)
    if bad:
        a, msg = bad[0]
        return RefutationReport("InputInvalid", reason=f"at {addr_str(a) or '<root>'}: {msg}")

    tildes: list = []
    start: tuple = ()
    limit = len(proof) + 1
    while len(tildes) < limit:
        down = rightmost_to_bud(proof, start)
        mu = down[-1]
        if proof.nodes[mu].rule.name != "Bud":
            raise ConstructionError(f"rightmost path from {addr_str(start)!r} ends at a leaf rule")
        pi1 = tree_path((), mu)
        comp = proof.companion[mu]
        pi2 = tree_path(comp, mu)
        candidates = [
            a for a, b in zip(pi1, pi1[1:]) if is_switching(proof, a) and b == a + (1,)
        ]
        if not candidates:
            lasso = Lasso(tree_path((), comp)[:-1], pi2)
            if path_matrix(system, proof, pi2).has_progress_cycle():
                raise ConstructionError("loop without right-turning switching point still progresses")
            return RefutationReport("GtcFailed", tildes, lasso)
        nxt = min(candidates, key=len)
        if tildes and len(nxt) <= len(tildes[-1]):
            raise ConstructionError("switching points do not increase in height")
        if not _only_switching_turn_left(proof, nxt):
            raise ConstructionError(f"path to {addr_str(nxt)!r} breaks the switching-point discipline")
        tildes.append(nxt)
        start = nxt + (0,)
    return RefutationReport("ContradictionFound", tildes)
