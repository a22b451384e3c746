"""Run the bounded cut-free search at several depths and print per-round statistics.

    python3 scripts/run_search.py --goal "TeF(s) |- FsT(e)" --depths 6 8 10
"""

import argparse
import time

from cyclo.builders import tef_system
from cyclo.search import Exhausted, SearchBounds, search, search_cut_free
from cyclo.syntax import parse_formula, parse_sequent


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--goal", default="TeF(s) |- FsT(e)")
    parser.add_argument("--depths", type=int, nargs="+", default=[6, 8])
    parser.add_argument("--max-term-depth", type=int, default=6)
    parser.add_argument("--cut-pool", help="formulas separated by ';' (enables Cut)")
    args = parser.parse_args()

    system = tef_system()
    goal = parse_sequent(args.goal, system.signature)
    pool = tuple(parse_formula(f.strip(), system.signature)
                 for f in (args.cut_pool or "").split(";") if f.strip())
    for depth in args.depths:
        bounds = SearchBounds(depth, args.max_term_depth, 10**7, bool(pool), pool)
        t0 = time.perf_counter()
        result = search(system, goal, bounds) if pool else search_cut_free(system, goal, bounds)
        secs = time.perf_counter() - t0
        verdict = "Exhausted" if isinstance(result, Exhausted) else f"ProofFound ({len(result.proof)} nodes)"
        print(f"depth {depth}: {verdict} in {secs:.2f}s")
        for line in result.stats.render().splitlines():
            print("  " + line)
        print("  goals per round: " + " ".join(f"{d}:{n}" for d, n in result.stats.rounds))


if __name__ == "__main__":
    main()
