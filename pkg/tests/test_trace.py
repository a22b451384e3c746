import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from cyclo.builders import (
    COMPANION,
    UNDERLINED,
    TreeBuilder,
    axiom_only,
    refute_candidate_plain,
    refute_candidate_switching,
    sibling_companion,
    weak_loop,
)
from cyclo.proofgraph import (
    case_descendants,
    check_pre_proof,
    is_cycle_normal,
    parse_addr,
    unfoldings_equal_to_depth,
)
from cyclo.syntax import parse_formula
from cyclo.trace import (
    PROGRESS,
    InvalidNode,
    TraceError,
    check_gtc,
    cycle_normalize,
    edge_relation,
    naive_gtc_oracle,
    replay_lasso,
    trace_graph,
    verify_trace,
)
from helpers import SIG, SYSTEM, random_pre_proof


def f(text):
    return parse_formula(text, SIG)


def underlined():
    return [parse_addr(a) for a, _ in UNDERLINED], [f(t) for _, t in UNDERLINED]


def test_case_edge_progresses(counterex):
    g = trace_graph(SYSTEM, counterex, COMPANION, 1)
    assert g.progress(f("TeF(nx(x))"), f("TeF(nx(y))")) is True
    assert g.progress(f("TeF(nx(x))"), f("TeF(nx(x))")) is None
    with pytest.raises(InvalidNode):
        trace_graph(SYSTEM, counterex, COMPANION, 2)


def test_identity_subst_edge():
    b = TreeBuilder(SYSTEM)
    b.node("", "TeF(x), TeF(z) |- FsT(e)", "Subst", theta={})
    b.bud("0", "TeF(x), TeF(z) |- FsT(e)", "")
    p = b.build()
    assert check_pre_proof(SYSTEM, p).valid
    g = trace_graph(SYSTEM, p, (), 0)
    assert g.pairs == {(f("TeF(x)"), f("TeF(x)")): 1, (f("TeF(z)"), f("TeF(z)")): 1}
    assert g.progress(f("TeF(x)"), f("TeF(x)")) is False


def test_case_edge_other_atoms_stay():
    p = refute_candidate_switching()
    g = trace_graph(SYSTEM, p, (1, 0), 1)
    assert g.progress(f("TeF(s)"), f("TeF(s)")) is False
    assert g.progress(f("TeF(nx(y0))"), f("TeF(nx(y1))")) is True
    assert g.progress(f("TeF(nx(y0))"), f("TeF(nx(y0))")) is False


def test_underlined_trace(counterex):
    path, trace = underlined()
    ok = verify_trace(SYSTEM, counterex, path, trace)
    assert ok.progress_points == [0]


def test_underlined_trace_pumped(counterex):
    path, trace = underlined()
    ok = verify_trace(SYSTEM, counterex, path + path[1:] + path[1:], trace + trace[1:] + trace[1:])
    assert len(ok.progress_points) == 3


def test_trace_errors(counterex):
    path, trace = underlined()
    with pytest.raises(TraceError) as exc:
        verify_trace(SYSTEM, counterex, path, [f("FsT(e)")] + trace[1:])
    assert exc.value.position == 0
    with pytest.raises(TraceError):
        verify_trace(SYSTEM, counterex, path[:2], trace[:1])
    with pytest.raises(TraceError):
        verify_trace(SYSTEM, counterex, [(), (1, 1)], [f("TeF(s)"), f("TeF(nx(x))")])


def test_trace_error_at_subst():
    b = TreeBuilder(SYSTEM)
    b.node("", "TeF(s), TeF(nx(z)) |- FsT(e)", "Subst", theta={"x": "s"})
    b.node("0", "TeF(x), TeF(nx(z)) |- FsT(e)", "Weak")
    b.bud("0.0", "TeF(x), TeF(nx(z)) |- FsT(e)", "0")
    p = b.build()
    assert check_pre_proof(SYSTEM, p).valid
    verify_trace(SYSTEM, p, [(), (0,)], [f("TeF(s)"), f("TeF(x)")])
    with pytest.raises(TraceError) as exc:
        verify_trace(SYSTEM, p, [(), (0,)], [f("TeF(s)"), f("TeF(nx(z))")])
    assert exc.value.position == 0


def test_gtc_examples(counterex):
    assert check_gtc(SYSTEM, counterex).holds
    v = check_gtc(SYSTEM, weak_loop())
    assert not v.holds
    assert v.lasso.render() == "stem:  / cycle: <root> 0"
    assert check_gtc(SYSTEM, axiom_only()).holds


def test_naive_oracle_on_fixtures(counterex):
    for p in (counterex, weak_loop(), axiom_only(), refute_candidate_plain(), refute_candidate_switching(),
              sibling_companion()):
        assert check_gtc(SYSTEM, p).holds == naive_gtc_oracle(SYSTEM, p).holds


def test_refute_fixtures_fail_gtc():
    for p in (refute_candidate_plain(), refute_candidate_switching()):
        v = check_gtc(SYSTEM, p)
        assert not v.holds
        assert replay_lasso(SYSTEM, p, v.lasso)


def test_normalize_bud_free():
    p = axiom_only()
    assert cycle_normalize(p) == p


def test_normalize_counterexample(counterex):
    out = cycle_normalize(counterex)
    assert is_cycle_normal(out)
    assert len(out) == len(counterex)
    assert unfoldings_equal_to_depth(counterex, out, 20)


def test_normalize_sibling_companion():
    p = sibling_companion()
    assert not is_cycle_normal(p)
    out = cycle_normalize(p)
    assert check_pre_proof(SYSTEM, out).valid
    assert is_cycle_normal(out)
    assert unfoldings_equal_to_depth(p, out, 20)


# ---------------------------------------------------------------------------
# properties

seeds = st.integers(0, 2**32 - 1)


@given(seeds)
@settings(max_examples=200)
def test_gtc_matches_naive(seed):
    p = random_pre_proof(random.Random(seed))
    fast = check_gtc(SYSTEM, p)
    assert fast.holds == naive_gtc_oracle(SYSTEM, p, 3 * len(p)).holds
    if not fast.holds:
        assert replay_lasso(SYSTEM, p, fast.lasso, 3)


@given(seeds)
@settings(max_examples=100)
def test_normalize_properties(seed):
    p = random_pre_proof(random.Random(seed), max_nodes=10)
    out = cycle_normalize(p)
    assert is_cycle_normal(out)
    assert check_pre_proof(SYSTEM, out).valid
    assert unfoldings_equal_to_depth(p, out, 2 * len(p) + 4)
    if not p.buds():
        assert out == p


@given(seeds)
@settings(max_examples=100)
def test_progress_only_at_case_descendants(seed):
    p = random_pre_proof(random.Random(seed))
    for a in p.inner():
        node = p.nodes[a]
        for i, c in enumerate(p.children(a)):
            for (x, y), v in edge_relation(SYSTEM, node, i, p.sequent(c)).items():
                if v == PROGRESS:
                    assert node.rule.name == "Case"
                    assert x == node.rule.get("principal")
                    assert y in case_descendants(SYSTEM, node.rule, i)
