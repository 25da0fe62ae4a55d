import random

import pytest

from fata.errors import CapExceeded, SubstitutionError
from fata.fixtures import empty_dfa, parity_dfa, universal_dfa
from fata.forest import node_count, parse_forest, print_forest
from fata.oracle import (
    brute_language,
    brute_subst_apply,
    brute_subst_preimages,
    enumerate_forests,
    forest_count,
    forest_values,
)
from fata.automata import evaluate
from gen import random_nfa

P = parse_forest


def texts(fs):
    return [print_forest(f) for f in fs]


def test_enumerate_examples():
    assert texts(enumerate_forests({"a"}, 0)) == ["0"]
    assert texts(enumerate_forests({"a"}, 1)) == ["0", "a"]
    # within a size, forests are ordered by their printed text
    assert texts(enumerate_forests({"a"}, 2)) == ["0", "a", "a(a)", "a+a"]
    assert sorted(texts(enumerate_forests({"a"}, 2))) == sorted(["0", "a", "a+a", "a(a)"])


def reference_count(n):
    """Unlabelled ordered forests with exactly n nodes: the Catalan numbers."""
    c = [1]
    for k in range(1, n + 1):
        c.append(c[-1] * 2 * (2 * k - 1) // (k + 1))
    return c[n]


@pytest.mark.parametrize("n", range(8))
def test_enumeration_counts(n):
    fs = enumerate_forests({"a"}, n)
    assert len(fs) == len(set(fs)) == sum(reference_count(k) for k in range(n + 1))
    assert forest_count(1, n) == len(fs)
    assert all(node_count(f) <= n for f in fs)
    two = enumerate_forests({"a", "b"}, min(n, 5))
    assert len(two) == forest_count(2, min(n, 5))


def test_enumeration_cap():
    with pytest.raises(CapExceeded):
        enumerate_forests({"a", "b", "c"}, 12, cap=1000)
    with pytest.raises(ValueError):
        enumerate_forests(set(), 2)


def test_brute_language_examples():
    assert set(texts(brute_language(universal_dfa(), 1))) == {"0", "a"}
    assert texts(brute_language(parity_dfa(), 2)) == ["a"]
    assert brute_language(empty_dfa(), 5) == set()


def test_forest_values_match_evaluation():
    rng = random.Random(3)
    for _ in range(20):
        m = random_nfa(rng, ("a", "b"))
        for f, v in forest_values(m, 4).items():
            assert v == evaluate(m, f)


def test_subst_apply_examples():
    assert brute_subst_apply(P("x"), {"x": {P("b")}}) == {P("b")}
    assert brute_subst_apply(P("a(x)"), {"x": {P("b"), P("b(b)")}}) == {P("a(b)"), P("a(b(b))")}
    assert brute_subst_apply(P("x+x"), {"x": {(), P("b")}}) == {(), P("b"), P("b+b")}
    assert brute_subst_apply(P("x+x"), {"x": {(), P("b")}}, max_nodes=1) == {(), P("b")}


def test_subst_apply_rejects_inner_variable():
    with pytest.raises(SubstitutionError):
        brute_subst_apply(P("x(a)"), {"x": {P("b")}})


def test_subst_apply_matches_clauses():
    # leaf, a(f) and sum clauses, unfolded by hand
    slices = {"x": {P("b"), P("c+c")}, "y": {()}}
    got = brute_subst_apply(P("a(x+y)+x"), slices)
    inner = [P("b"), P("c+c")]
    want = {P("a(" + print_forest(i) + ")") + j for i in inner for j in inner}
    assert got == want


def test_preimages_invert_apply():
    slices = {"x": {P("a"), ()}}
    f = P("a+b(a)")
    pre = brute_subst_preimages(f, slices, 2)
    assert P("x+b(x)") in pre and P("a+b(a)") in pre and P("x+x+b(a)") in pre
    for g in pre:
        assert f in brute_subst_apply(g, slices)
