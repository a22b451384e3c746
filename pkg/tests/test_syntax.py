import pytest
from hypothesis import given
from hypothesis import strategies as st

from helpers import SIG
from cyclo.syntax import (
    App,
    ArityMismatch,
    Atom,
    DuplicateDeclaration,
    Eq,
    NotLinear,
    ParseError,
    Sequent,
    UndeclaredSymbol,
    Var,
    atom_and_depth,
    free_vars,
    iterate,
    parse_definitions,
    parse_formula,
    parse_sequent,
    parse_term,
    render_definitions,
    substitute,
)

NAT = """
const zero;
fun suc 1;
pred N 1 { => N(zero); N(x) => N(suc(x)); }
"""


@pytest.fixture
def sig(system):
    return system.signature


def test_tef_definitions(system):
    sig = system.signature
    assert set(sig.inductive_predicates) == {"TeF", "FsT"}
    assert len(system.productions) == 4
    assert {n for n, a in sig.functions.items() if a == 0} == {"s", "e"}
    assert sig.functions["nx"] == 1
    assert [str(p) for p in system.productions_for("TeF")] == ["=> TeF(e)", "TeF(nx(x)) => TeF(x)"]
    assert [str(p) for p in system.productions_for("FsT")] == ["=> FsT(s)", "FsT(x) => FsT(nx(x))"]


def test_empty_body():
    system = parse_definitions("pred P 1 { }")
    assert system.productions_for("P") == []
    assert system.signature.is_inductive("P")


def test_natural_numbers():
    system = parse_definitions(NAT)
    zero, suc = system.productions_for("N")
    assert zero.assumptions == () and str(zero.conclusion) == "N(zero)"
    assert str(suc) == "N(x) => N(suc(x))"
    assert suc.variables == ("x",)


def test_definitions_round_trip(system):
    text = render_definitions(system)
    again = parse_definitions(text)
    assert again == system
    assert render_definitions(again) == text
    nat = parse_definitions(NAT)
    assert parse_definitions(render_definitions(nat)) == nat


@pytest.mark.parametrize(
    "text, error",
    [
        ("const s; const s;", DuplicateDeclaration),
        ("fun f 1; pred P 1 { => P(f(a, b)); }", ArityMismatch),
        ("pred P 1 { => P(g(a)); }", UndeclaredSymbol),
        ("pred P 1 { => Q(a); }", Exception),
        ("pred P 1 { => P(a) }", ParseError),
        ("pred P 1 { => P(a);", ParseError),
        ("const ;", ParseError),
        ("bogus x;", ParseError),
    ],
)
def test_definition_errors(text, error):
    with pytest.raises(error):
        parse_definitions(text)


def test_parse_error_location():
    with pytest.raises(ParseError) as exc:
        parse_definitions("const s;\nconst e\nfun nx 1;")
    assert exc.value.line == 3


def test_substitute_examples(sig):
    x, y = Var("x"), Var("y")
    assert substitute(parse_formula("TeF(nx(x))", sig), {"x": App("s")}) == parse_formula("TeF(nx(s))", sig)
    assert substitute(Eq(x, y), {"x": y, "y": x}) == Eq(y, x)
    got = substitute(parse_sequent("TeF(x) |- FsT(x)", sig), {"x": App("e")})
    assert got == parse_sequent("TeF(e) |- FsT(e)", sig)


def test_free_vars_examples(sig):
    assert free_vars(parse_formula("TeF(nx(x))", sig)) == {"x"}
    assert free_vars(parse_formula("s = e", sig)) == set()
    assert free_vars(parse_sequent("TeF(x) |- FsT(y)", sig)) == {"x", "y"}


def test_atom_and_depth_examples(sig):
    assert atom_and_depth(parse_term("nx(nx(s))", sig)) == (App("s"), 2)
    assert atom_and_depth(Var("x")) == (Var("x"), 0)
    with pytest.raises(NotLinear):
        atom_and_depth(App("f", (Var("x"), Var("y"))))


def test_constants_are_declared_not_lexical():
    system = parse_definitions("const x; fun nx 1; pred P 1 { => P(x); }")
    (prod,) = system.productions
    assert prod.conclusion.args[0] == App("x")
    assert prod.variables == ()


def test_sequent_empty_sides(sig):
    assert parse_sequent("|-", sig) == Sequent(frozenset(), frozenset())
    assert parse_sequent("|- FsT(s)", sig).ante == frozenset()


# ---------------------------------------------------------------------------
# properties

atoms = st.sampled_from(["s", "e", "x", "y", "z"])


@st.composite
def terms(draw, max_depth=4):
    name = draw(atoms)
    base = App(name) if name in ("s", "e") else Var(name)
    return iterate("nx", draw(st.integers(0, max_depth)), base)


@st.composite
def formulas(draw):
    if draw(st.booleans()):
        return Eq(draw(terms()), draw(terms()))
    return Atom(draw(st.sampled_from(["TeF", "FsT"])), (draw(terms()),))


sequents = st.builds(
    lambda a, s: Sequent(frozenset(a), frozenset(s)),
    st.lists(formulas(), max_size=4),
    st.lists(formulas(), max_size=3),
)
substs = st.dictionaries(st.sampled_from(["x", "y", "z"]), terms(2), max_size=3)


@given(sequents)
def test_sequent_round_trip(s):
    assert parse_sequent(str(s), SIG) == s
    assert str(parse_sequent(str(s), SIG)) == str(s)


@given(st.lists(formulas(), max_size=5), st.randoms())
def test_sequent_set_law(fs, rnd):
    shuffled = list(fs) + list(fs)
    rnd.shuffle(shuffled)
    assert Sequent(frozenset(fs), frozenset()) == Sequent(frozenset(shuffled), frozenset())
    assert str(Sequent(frozenset(fs), frozenset())) == str(Sequent(frozenset(shuffled), frozenset()))


@given(sequents)
def test_identity_substitution(s):
    assert substitute(s, {}) == s
    assert substitute(s, {v: Var(v) for v in free_vars(s)}) == s


@given(sequents, substs, substs)
def test_substitution_composition(s, th1, th2):
    # rename th1's image variables away from th2's domain so composition is plain
    th1 = {k: substitute(v, {n: Var(n + "1") for n in "xyz"}) for k, v in th1.items()}
    composed = {v: substitute(t, th2) for v, t in th1.items()}
    for v, t in th2.items():
        composed.setdefault(v, t)
    assert substitute(substitute(s, th1), th2) == substitute(s, composed)


@given(sequents, substs)
def test_free_vars_after_substitution(s, th):
    expected = set()
    for v in free_vars(s):
        expected |= free_vars(th[v]) if v in th else {v}
    assert free_vars(substitute(s, th)) == expected


@given(st.integers(0, 32), atoms)
def test_atom_and_depth_inverts_iterate(k, name):
    base = App(name) if name in ("s", "e") else Var(name)
    assert atom_and_depth(iterate("nx", k, base)) == (base, k)
