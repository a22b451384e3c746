"""Check the shipped cyclic proof with cuts, then look for a cut-free proof of its root.

    python3 scripts/reproduce.py            # cut-free search to depth 8
    python3 scripts/reproduce.py --depth 10 # takes a few minutes
"""

import argparse
import time

from cyclo.builders import UNDERLINED, fixture_path
from cyclo.cli import render_tree
from cyclo.proofgraph import addr_str, check_pre_proof, load_proof, parse_addr
from cyclo.search import Exhausted, SearchBounds, search, search_cut_free
from cyclo.syntax import parse_formula
from cyclo.trace import check_gtc, verify_trace

POOL = ("TeF(nx(x))", "TeF(nx(nx(x)))", "FsT(nx(x))")


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--depth", type=int, default=8)
    parser.add_argument("--skip-cut-search", action="store_true")
    args = parser.parse_args()

    system, proof, _ = load_proof(fixture_path("counterex.cproof"))
    sig = system.signature
    report = check_pre_proof(system, proof)
    verdict = check_gtc(system, proof)
    path = [parse_addr(a) for a, _ in UNDERLINED]
    trace = [parse_formula(f, sig) for _, f in UNDERLINED]
    progress = verify_trace(system, proof, path, trace).progress_points
    print(f"proof with cuts: {len(proof)} nodes, valid {report.valid}, GTC {verdict.holds}, "
          f"cuts at {', '.join(map(addr_str, report.cut_nodes))}")
    print(f"trace around the cycle progresses at positions {progress}")

    goal = proof.root.sequent
    t0 = time.perf_counter()
    result = search_cut_free(system, goal, SearchBounds(args.depth, 6, 10**7))
    print(f"cut-free search to depth {args.depth}: "
          f"{'Exhausted' if isinstance(result, Exhausted) else 'ProofFound'} "
          f"({result.stats.goals} goals, {time.perf_counter() - t0:.1f}s)")

    if args.skip_cut_search:
        return
    pool = tuple(parse_formula(f, sig) for f in POOL)
    t0 = time.perf_counter()
    found = search(system, goal, SearchBounds(10, 6, 10**7, True, pool))
    if isinstance(found, Exhausted):
        print("search with cuts: Exhausted")
        return
    p = found.proof
    print(f"search with cuts: {len(p)} nodes in {time.perf_counter() - t0:.1f}s, "
          f"valid {check_pre_proof(system, p).valid}, GTC {check_gtc(system, p).holds}")
    for line in render_tree(p):
        print(line)


if __name__ == "__main__":
    main()
