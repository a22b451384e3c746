"""Command-line front-end: ``cyclo check|normalize|search|analyze|unfold|selftest``.

Exit codes: 0 on success, 1 when the answer is negative (invalid proof, GTC
failure, search exhausted, refutation), 2 on usage or input errors.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from typing import Optional

from . import congruence as cg
from .analysis import (
    ConstructionError,
    InvalidPath,
    NotCutFree,
    NotCycleNormal,
    WrongRoot,
    check_index_transitions,
    refute_cut_free_candidate,
    switching_points,
)
from .builders import fixture_path, fixture_text
from .proofgraph import (
    Unresolvable,
    addr_str,
    check_pre_proof,
    dumps_proof,
    load_defs,
    load_proof,
    parse_addr,
    resolve_unfolding,
    unfolding_addresses,
)
from .search import BoundsTooSmall, Exhausted, SearchBounds, search, search_cut_free
from .syntax import DefinitionError, parse_definitions, parse_formula, parse_sequent, parse_term
from .trace import TraceError, check_gtc, cycle_normalize, naive_gtc_oracle

CAVEAT = (
    "note: Exhausted only means no proof exists within these bounds; "
    "non-provability beyond them is not established by this tool."
)


class UsageError(Exception):
    pass


def _addr(a: tuple) -> str:
    return addr_str(a) or "<root>"


def _out(lines) -> None:
    sys.stdout.write("\n".join(lines) + "\n")


def _load(args) -> tuple:
    """Returns (system, proof, definition text)."""
    if getattr(args, "defs", None):
        system, text = load_defs(args.defs)
        system, proof, _ = load_proof(args.proof, system)
        return system, proof, text
    system, proof, defs = load_proof(args.proof)
    _, text = load_defs(defs, os.path.dirname(os.path.abspath(args.proof)))
    return system, proof, text


def render_tree(proof, addrs=None) -> list:
    lines = []
    for a in addrs if addrs is not None else sorted(proof.nodes):
        node = proof.nodes[a]
        tag = node.rule.label
        if node.rule.name == "Bud":
            tag = f"Bud -> {_addr(proof.companion.get(a, ()))}"
        lines.append(f"{'  ' * len(a)}{_addr(a)}  {node.sequent}  [{tag}]")
    return lines


# ---------------------------------------------------------------------------
# commands


def cmd_check(args) -> int:
    system, proof, _ = _load(args)
    report = check_pre_proof(system, proof)
    buds = len(proof.buds())
    lines = [f"nodes: {len(proof)} ({buds} bud{'s' if buds != 1 else ''})"]
    if report.valid:
        lines.append("validity: valid")
    else:
        lines.append("validity: INVALID")
        lines += ["  " + line for line in report.render().splitlines()]
    if report.cut_free:
        lines.append("cuts: cut-free")
    else:
        lines.append("cuts: contains Cut at " + ", ".join(_addr(a) for a in report.cut_nodes))
    lines.append(f"cycle-normal: {'yes' if report.cycle_normal else 'no'}")
    holds = False
    if report.valid:
        verdict = naive_gtc_oracle(system, proof) if args.gtc == "naive" else check_gtc(system, proof)
        holds = verdict.holds
        lines.append(f"checker: {args.gtc}")
        lines += verdict.render().splitlines()
    summary = ["valid" if report.valid else "invalid"]
    if report.valid:
        summary.append("GTC holds" if holds else "GTC fails")
    summary.append("cut-free" if report.cut_free else "contains Cut")
    lines.append("summary: " + ", ".join(summary))
    ok = report.valid and holds
    if args.require_cut_free and not report.cut_free:
        lines.append("error: cut-free proof required; contains Cut at addresses "
                     + ", ".join(_addr(a) for a in report.cut_nodes))
        ok = False
    _out(lines)
    return 0 if ok else 1


def cmd_normalize(args) -> int:
    # emitted files carry the definitions inline so they load from anywhere
    system, proof, defs = _load(args)
    out = cycle_normalize(proof)
    text = dumps_proof(out, defs)
    if args.out:
        with open(args.out, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
        _out([f"nodes: {len(proof)} -> {len(out)}", f"written: {args.out}"])
    else:
        sys.stdout.write(text)
    return 0


def _pool(text: Optional[str], system) -> tuple:
    if not text:
        return ()
    return tuple(parse_formula(part.strip(), system.signature) for part in text.split(";") if part.strip())


def cmd_search(args) -> int:
    if args.defs:
        system, defs = load_defs(args.defs)
    else:
        defs = fixture_text("tef.ind")
        system = parse_definitions(defs)
    goal = parse_sequent(args.goal, system.signature)
    bounds = SearchBounds(
        max_tree_depth=args.max_depth,
        max_term_depth=args.max_term_depth,
        max_nodes=args.max_nodes,
        allow_cut=args.allow_cut,
        cut_formula_pool=_pool(args.cut_pool, system),
    )
    result = search(system, goal, bounds) if args.allow_cut else search_cut_free(system, goal, bounds)
    lines = [f"goal: {goal}", f"bounds: depth {bounds.max_tree_depth}, term depth {bounds.max_term_depth}, "
             f"nodes {bounds.max_nodes}, cut {'on' if bounds.allow_cut else 'off'}"]
    if isinstance(result, Exhausted):
        lines.append("result: Exhausted")
        lines += result.stats.render().splitlines()
        lines.append(CAVEAT)
        _out(lines)
        return 1
    proof = result.proof
    lines.append(f"result: ProofFound ({len(proof)} nodes)")
    lines += result.stats.render().splitlines()
    lines += render_tree(proof)
    if args.emit:
        with open(args.emit, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(dumps_proof(proof, defs))
        lines.append(f"written: {args.emit}")
    _out(lines)
    return 0


def _sequent_for(args, system):
    if args.sequent:
        return parse_sequent(args.sequent, system.signature)
    if args.proof and args.node is not None:
        _, proof, _ = load_proof(args.proof, system)
        a = parse_addr(args.node)
        if a not in proof.nodes:
            raise UsageError(f"no node {args.node!r}")
        return proof.sequent(a)
    raise UsageError("give --sequent, or --proof with --node")


def cmd_analyze(args) -> int:
    kind = args.report
    if kind in ("index", "rootlike"):
        if args.defs:
            system, _ = load_defs(args.defs)
        elif args.proof:
            system, _, _ = load_proof(args.proof)
        else:
            system = parse_definitions(fixture_text("tef.ind"))
        sequent = _sequent_for(args, system)
        if kind == "rootlike":
            _out([f"sequent: {sequent}", cg.is_root_like(sequent).render()])
            return 0
        if not args.term:
            raise UsageError("--report index needs --term")
        t = parse_term(args.term, system.signature)
        base = parse_term(args.base, system.signature)
        idx = cg.build(sequent.ante, [t, base])
        _out([f"sequent: {sequent}", f"index of {t} relative to {base}: {cg.index_of(idx, t, base)}"])
        return 0
    if not args.proof:
        raise UsageError(f"--report {kind} needs --proof")
    system, proof, _ = _load(args)
    if kind == "switching":
        pts = switching_points(system, proof)
        _out(["switching points: " + (" ".join(_addr(a) for a in pts) if pts else "(none)")])
        return 0
    if kind == "refute":
        try:
            report = refute_cut_free_candidate(system, proof)
        except (NotCutFree, NotCycleNormal, WrongRoot) as exc:
            _out([f"outcome: {type(exc).__name__}", f"reason: {exc}"])
            return 1
        _out([report.render()])
        return 1
    if kind == "index-transitions":
        if not args.path or not args.trace:
            raise UsageError("--report index-transitions needs --path and --trace")
        path = [parse_addr("" if a == "<root>" else a) for a in args.path.split()]
        trace = [parse_formula(f.strip(), system.signature) for f in args.trace.split(";") if f.strip()]
        report = check_index_transitions(system, proof, path, trace)
        _out([report.render()])
        return 0 if report.ok else 1
    raise UsageError(f"unknown report {kind!r}")


def cmd_unfold(args) -> int:
    system, proof, _ = _load(args)
    lines = []
    for sigma in unfolding_addresses(proof, args.depth):
        node = resolve_unfolding(proof, sigma)
        lines.append(f"{'  ' * len(sigma)}{_addr(sigma)}  {node.sequent}  [{node.rule.label}]")
    _out(lines)
    return 0


def cmd_selftest(args) -> int:
    system, proof, _ = load_proof(fixture_path("counterex.cproof"))
    report = check_pre_proof(system, proof)
    verdict = check_gtc(system, proof)
    ok1 = report.valid and verdict.holds and not report.cut_free
    goal = parse_sequent("TeF(s) |- FsT(e)", system.signature)
    result = search_cut_free(system, goal, SearchBounds(args.depth, 6, 10**6))
    ok2 = isinstance(result, Exhausted)
    _out([
        f"fixture check: {'ok' if ok1 else 'FAILED'} (valid {report.valid}, GTC {verdict.holds}, "
        f"cut-free {report.cut_free})",
        f"cut-free search to depth {args.depth}: {'Exhausted' if ok2 else 'ProofFound'} "
        f"({'ok' if ok2 else 'FAILED'})",
        CAVEAT,
    ])
    return 0 if ok1 and ok2 else 1


# ---------------------------------------------------------------------------
# argument parsing


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="cyclo", description="Cyclic proofs for inductive definitions.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("check", help="validate a pre-proof and decide the global trace condition")
    p.add_argument("--defs")
    p.add_argument("--proof", required=True)
    p.add_argument("--gtc", choices=("sizechange", "naive"), default="sizechange")
    p.add_argument("--require-cut-free", action="store_true")
    p.set_defaults(func=cmd_check)

    p = sub.add_parser("normalize", help="make every companion an ancestor of its bud")
    p.add_argument("--defs")
    p.add_argument("--proof", required=True)
    p.add_argument("--out")
    p.set_defaults(func=cmd_normalize)

    p = sub.add_parser("search", help="bounded proof search")
    p.add_argument("--defs")
    p.add_argument("--goal", required=True)
    p.add_argument("--max-depth", type=int, default=8)
    p.add_argument("--max-term-depth", type=int, default=6)
    p.add_argument("--max-nodes", type=int, default=10**6)
    p.add_argument("--allow-cut", action="store_true")
    p.add_argument("--cut-pool", help="cut formulas separated by ';'; variables are instantiated")
    p.add_argument("--emit")
    p.set_defaults(func=cmd_search)

    p = sub.add_parser("analyze", help="reports on fragment proofs and sequents")
    p.add_argument("--defs")
    p.add_argument("--proof")
    p.add_argument(
        "--report", required=True,
        choices=("switching", "refute", "index-transitions", "index", "rootlike"),
    )
    p.add_argument("--sequent")
    p.add_argument("--node")
    p.add_argument("--term")
    p.add_argument("--base", default="s")
    p.add_argument("--path", help="space-separated addresses; <root> for the root")
    p.add_argument("--trace", help="formulas separated by ';'")
    p.set_defaults(func=cmd_analyze)

    p = sub.add_parser("unfold", help="print a prefix of the tree-unfolding")
    p.add_argument("--defs")
    p.add_argument("--proof", required=True)
    p.add_argument("--depth", type=int, default=3)
    p.set_defaults(func=cmd_unfold)

    p = sub.add_parser("selftest", help="check the bundled fixture and run a small search")
    p.add_argument("--depth", type=int, default=6)
    p.set_defaults(func=cmd_selftest)
    return parser


def main(argv: Optional[list] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    for name in ("depth", "max_depth", "max_term_depth", "max_nodes"):
        if getattr(args, name, 0) is not None and getattr(args, name, 0) < 0:
            parser.error(f"--{name.replace('_', '-')} must be non-negative")
    try:
        return args.func(args)
    except (UsageError, DefinitionError, BoundsTooSmall, InvalidPath, TraceError, Unresolvable,
            json.JSONDecodeError, KeyError, OSError, ValueError) as exc:
        sys.stderr.write(f"cyclo: error: {type(exc).__name__}: {exc}\n")
        return 2
    except ConstructionError as exc:
        sys.stderr.write(f"cyclo: internal error: {exc}\n")
        return 1


if __name__ == "__main__":
    sys.exit(main())
