"""Regenerate the .cproof fixtures shipped in src/cyclo/fixtures from the builders."""

import os

from cyclo import builders
from cyclo.proofgraph import check_pre_proof, dumps_proof

HERE = os.path.dirname(os.path.abspath(__file__))
OUT = os.path.join(HERE, "..", "src", "cyclo", "fixtures")

FIXTURES = {
    "counterex.cproof": builders.counterexample_proof,
    "weak_loop.cproof": builders.weak_loop,
    "refute_plain.cproof": builders.refute_candidate_plain,
    "refute_switching.cproof": builders.refute_candidate_switching,
    "sibling_companion.cproof": builders.sibling_companion,
}


def main() -> None:
    system = builders.tef_system()
    for name, make in FIXTURES.items():
        proof = make(system)
        report = check_pre_proof(system, proof)
        if not report.valid:
            raise SystemExit(f"{name}: {report.render()}")
        path = os.path.join(OUT, name)
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(dumps_proof(proof, "tef.ind"))
        print(f"wrote {os.path.relpath(path)} ({len(proof)} nodes)")


if __name__ == "__main__":
    main()
