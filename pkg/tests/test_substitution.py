import random

import pytest
from hypothesis import given, settings

from fata.automata import Dfa, eval_dfa, member, product, reachable_states
from fata.decide import subset, subst_subset
from fata.errors import AlphabetMismatch, SubstitutionError
from fata.fixtures import empty_dfa, forest_dfa, parity_dfa, universal_dfa
from fata.forest import node_count, parse_forest, print_forest
from fata.oracle import (
    brute_language,
    brute_subst_apply,
    brute_subst_preimages,
    enumerate_forests,
    has_inner_variable,
    has_preimage_in,
    language_image,
    slices_of,
)
from fata.substitution import (
    ImageConstruction,
    SaturatedSubstitution,
    Substitution,
    combine_inequalities,
    saturate,
    saturated_to_substitution,
    subst_image_nfa,
    subst_preimage_nfa,
    union_as_subst,
)
from gen import finite_value, random_dfa, random_value, seeds

P = parse_forest
A = ("a",)
D = parity_dfa()


def texts(fs):
    return {print_forest(f) for f in fs}


def single(text, letters):
    return forest_dfa(P(text), letters)


def union(*ms):
    out = ms[0]
    for m in ms[1:]:
        out = product(out, m, "union")
    return out


# ---------------------------------------------------------------- values


def test_substitution_checks():
    with pytest.raises(SubstitutionError):
        Substitution(A, {"x": empty_dfa()})
    with pytest.raises(SubstitutionError):
        Substitution(A, {"a": D})
    with pytest.raises(AlphabetMismatch):
        Substitution(A, {"x": parity_dfa(("b",))})
    s = Substitution(A, {"y": D, "x": D})
    assert s.vars == ("y", "x")


# ----------------------------------------------------------------- image


def test_image_examples():
    s = Substitution(("b",), {"x": single("b", ("b",))})
    assert texts(brute_language(subst_image_nfa(single("x", ("b", "x")), s), 5)) == {"b"}
    assert texts(brute_language(subst_image_nfa(single("a", A), Substitution(A, {})), 5)) == {"a"}
    ab = ("a", "b")
    s = Substitution(ab, {"x": union(single("b", ab), single("b(b)", ab))})
    image = subst_image_nfa(single("a(x)", ab + ("x",)), s)
    assert texts(brute_language(image, 5)) == {"a(b)", "a(b(b))"}


def test_image_requires_deterministic_subject():
    from fata.automata import as_nfa

    with pytest.raises(Exception):
        subst_image_nfa(as_nfa(single("x", ("a", "x"))), Substitution(A, {"x": D}))


def image_instance(rng, allow_empty_forest=False):
    letters = ("a",) if rng.random() < 0.5 else ("a", "b")
    variables = ("x",) if len(letters) == 2 or rng.random() < 0.5 else ("x", "y")
    m = random_dfa(rng, letters + variables)
    values = {x: random_value(rng, letters, allow_empty_forest) for x in variables}
    return m, Substitution(letters, values)


@settings(max_examples=15)
@given(seeds())
def test_image_matches_oracle(seed):
    m, sigma = image_instance(random.Random(seed))
    image = subst_image_nfa(m, sigma)
    slices = slices_of(sigma.values, 5)
    assert brute_language(image, 5) == language_image(m, slices, 5)


@settings(max_examples=10)
@given(seeds())
def test_image_with_empty_substitutes(seed):
    rng = random.Random(seed)
    m, sigma = image_instance(rng, allow_empty_forest=True)
    image = subst_image_nfa(m, sigma)
    slices = slices_of(sigma.values, 4)
    # every image the oracle finds is accepted
    for g in brute_language(m, 4):
        if not has_inner_variable(g, sigma.vars):
            for f in brute_subst_apply(g, slices, 4):
                assert member(image, f)
    # every accepted forest has a source of bounded size
    budget = 4 * len(sigma.vars)
    for f in brute_language(image, 4):
        slices = slices_of(sigma.values, node_count(f))
        assert has_preimage_in(f, m, slices, budget), print_forest(f)


def test_image_r_map():
    """Every image f of a source g has a state w with g's value in r(S+w+S)."""
    cases = [
        (D.__class__(("e", "o"), ("a", "x"), D.plus, 0, {"a": (1, 0), "x": (1, 0)}, frozenset({1})),
         Substitution(A, {"x": union(single("a", A), single("a(a)+a", A))})),
        (single("a(x)+x", ("a", "x")), Substitution(A, {"x": D})),
    ]
    for m, sigma in cases:
        con = ImageConstruction(m, sigma)
        image = con.build()
        slices = slices_of(sigma.values, 4)
        for g in enumerate_forests(m.alphabet, 4):
            if has_inner_variable(g, sigma.vars):
                continue
            q = eval_dfa(con.m, g)
            for f in brute_subst_apply(g, slices, 6):
                from fata.automata import eval_nfa

                assert any(q in con.r_closure(con.words[w]) for w in eval_nfa(image, f))


def test_normalizer_is_idempotent():
    con = ImageConstruction(single("x+a(x)", ("a", "x")), Substitution(A, {"x": D}))
    con.build()
    for w in con.words:
        assert con.normalize(w) == w
        assert len([c for c in w if c[0] != "s"]) <= 3


# -------------------------------------------------------------- preimage


def test_preimage_examples():
    s = Substitution(A, {"x": single("a", A)})
    pre = subst_preimage_nfa(D, s)
    for g in enumerate_forests(("a", "x"), 5):
        want = sum(1 for _ in _nodes(g)) % 2 == 1 and not has_inner_variable(g, {"x"})
        assert member(pre, g) == want
    zero = Substitution(A, {"x": forest_dfa((), A)})
    pre = subst_preimage_nfa(D, zero)
    for g in enumerate_forests(("a", "x"), 5):
        stripped_odd = sum(1 for t in _nodes(g) if t.label == "a") % 2 == 1
        assert member(pre, g) == (stripped_odd and not has_inner_variable(g, {"x"}))
    assert brute_language(subst_preimage_nfa(D, Substitution(A, {})), 5) == brute_language(D, 5)
    assert subst_preimage_nfa(D, s).size <= D.size + 1


def _nodes(f):
    for t in f:
        yield t
        yield from _nodes(t.children)


@settings(max_examples=20)
@given(seeds())
def test_preimage_matches_definition(seed):
    rng = random.Random(seed)
    letters = ("a", "b")
    m = random_dfa(rng, letters) if rng.random() < 0.5 else random_dfa(rng, letters)
    sigma = Substitution(letters, {"x": finite_value(rng, letters)})
    pre = subst_preimage_nfa(m, sigma)
    slices = slices_of(sigma.values, 4)
    for g in enumerate_forests(letters + ("x",), 4):
        if has_inner_variable(g, {"x"}):
            assert not member(pre, g)
            continue
        want = any(member(m, f) for f in brute_subst_apply(g, slices))
        assert member(pre, g) == want


# ------------------------------------------------------------ saturation


def test_saturate_examples():
    s = saturate(Substitution(A, {"x": single("a", A)}), D)
    assert s.describe() == {"x": ["o"]}
    assert saturate(Substitution(A, {"x": universal_dfa()}), D).classes["x"] == reachable_states(D)
    assert saturate(Substitution(A, {"x": forest_dfa((), A)}), D).describe() == {"x": ["e"]}


def test_saturated_to_substitution():
    sat = SaturatedSubstitution(D, {"x": frozenset({1})})
    sigma = saturated_to_substitution(sat)
    assert sigma.values["x"].accept == {1} and sigma.values["x"].plus == D.plus
    full = saturated_to_substitution(SaturatedSubstitution(D, {"x": frozenset({0, 1})}))
    assert brute_language(full.values["x"], 4) == set(enumerate_forests(A, 4))
    with pytest.raises(SubstitutionError):
        saturated_to_substitution(SaturatedSubstitution(D, {"x": frozenset()}))
    unreachable = Dfa(("0", "u"), A, ((0, 1), (1, 1)), 0, {"a": (0, 1)}, frozenset())
    with pytest.raises(SubstitutionError):
        saturated_to_substitution(SaturatedSubstitution(unreachable, {"x": frozenset({1})}))


@given(seeds())
def test_saturation_is_monotone_and_round_trips(seed):
    rng = random.Random(seed)
    letters = ("a", "b")
    r = random_dfa(rng, letters)
    sigma = Substitution(letters, {"x": random_value(rng, letters, True), "y": finite_value(rng, letters)})
    sat = saturate(sigma, r)
    for x, sl in slices_of(sigma.values, 4).items():
        assert all(eval_dfa(r, f) in sat.classes[x] for f in sl)
    back = saturate(saturated_to_substitution(sat), r)
    reach = reachable_states(r)
    assert back.classes == {x: t & reach for x, t in sat.classes.items()}


# ----------------------------------------------------------------- union


def test_preimage_oracles_agree():
    rng = random.Random(7)
    for _ in range(20):
        m, sigma = image_instance(rng, allow_empty_forest=True)
        slices = slices_of(sigma.values, 3)
        for f in enumerate_forests(sigma.alphabet, 3):
            pre = brute_subst_preimages(f, slices, 2)
            assert has_preimage_in(f, m, slices, 2) == any(member(m, g) for g in pre)


def test_union_examples():
    m, sigma = union_as_subst([single("a", A)])
    assert member(m, P("a(m1)")) or member(m, P("m1+a(m1)"))
    assert brute_subst_apply(P("a(m1)"), {"m1": {()}}) == {P("a")}
    m2, _ = union_as_subst([D, D])
    assert not member(m2, P("m1+a(m1)+a(m2)"))


@settings(max_examples=10)
@given(seeds())
def test_union_matches_oracle(seed):
    rng = random.Random(seed)
    letters = ("a",)
    ls = [random_dfa(rng, letters) for _ in range(rng.randint(1, 3))]
    m, sigma = union_as_subst(ls)
    want = set().union(*(brute_language(l, 4) for l in ls))
    assert brute_language(subst_image_nfa(m, sigma), 4) == want
    slices = {x: {()} for x in sigma.vars}
    for g in brute_language(m, 6):
        assert all(any(member(l, f) for l in ls) for f in brute_subst_apply(g, slices))


# -------------------------------------------------------- inequalities


def test_combine_examples():
    l, r = combine_inequalities([single("a", A)], [D])
    tagged = brute_language(l, 3)
    assert texts(tagged) == {"i1(a)"}
    yes = (single("a", A), D)
    no = (D, single("a", A))
    l, r = combine_inequalities([yes[0], no[0]], [yes[1], no[1]])
    assert not subset(l, r).verdict
    l, r = combine_inequalities([yes[0], yes[0]], [yes[1], D])
    assert subset(l, r).verdict


@settings(max_examples=20)
@given(seeds())
def test_combine_is_conjunction(seed):
    from fata.automata import extend_alphabet

    rng = random.Random(seed)
    letters = ("a", "x")
    k = rng.randint(1, 3)
    ls = [random_dfa(rng, letters) for _ in range(k)]
    rs = [random_dfa(rng, ("a",)) for _ in range(k)]
    rs_x = [extend_alphabet(r, ["x"]) for r in rs]
    l, r = combine_inequalities(ls, rs_x)
    tags = tuple(a for a in l.alphabet if a not in letters)
    value = random_value(rng, ("a",), True)
    base = ("a",) + tags
    r_base = _drop_letter(r, "x")
    sigma = Substitution(base, {"x": extend_alphabet(value, tags)})
    combined = subst_subset(l, sigma, r_base).verdict
    single_sigma = Substitution(("a",), {"x": value})
    assert combined == all(subst_subset(li, single_sigma, ri).verdict for li, ri in zip(ls, rs))


def _drop_letter(m, letter):
    delta = {a: row for a, row in m.delta.items() if a != letter}
    return type(m)(m.states, tuple(a for a in m.alphabet if a != letter), m.plus, m.neutral, delta, m.accept)
