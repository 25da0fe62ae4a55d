import random

import pytest
from hypothesis import given

from fata.algebra import dfa_to_algebra, validate_algebra
from fata.automata import Dfa, Nfa, validate
from fata.errors import ValidationError
from fata.fixtures import (
    empty_dfa,
    n1_nfa,
    pair_formula_dfa,
    parity_algebra,
    parity_dfa,
    true_formula_dfa,
    universal_dfa,
    z4_on_z2_algebra,
)
from fata.io import (
    dump_fal,
    dump_fta,
    load_algebra,
    load_automaton,
    load_dfa,
    load_nfa,
    load_subst,
    parse_fal,
    parse_fta,
    parse_sub,
    save_algebra,
    save_automaton,
    save_subst,
    tokenize_line,
)
from fata.substitution import Substitution
from gen import random_dfa, random_nfa, seeds

FIXTURES = [parity_dfa(), universal_dfa(), empty_dfa(), n1_nfa(), true_formula_dfa(), pair_formula_dfa()]


def messages(excinfo):
    return [d.message for d in excinfo.value.diagnostics]


def test_tokenizer():
    assert tokenize_line('plus "0" s  # comment') == ["plus", "0", "s"]
    toks = tokenize_line('delta "a b" "say \\"hi\\""')
    assert toks == ["delta", "a b", 'say "hi"'] and toks[1].quoted


@pytest.mark.parametrize("m", FIXTURES, ids=lambda m: "x".join(m.states[:2]))
def test_fixture_round_trip(m, tmp_path):
    path = tmp_path / "m.fta"
    save_automaton(m, path)
    back = load_automaton(path)
    assert back == m
    assert dump_fta(back) == path.read_text()


@given(seeds())
def test_random_round_trip(seed):
    rng = random.Random(seed)
    letters = ("a", "b c", "#")[: rng.randint(1, 3)]
    m = random_dfa(rng, letters, 5) if rng.random() < 0.5 else random_nfa(rng, letters, 4)
    assert parse_fta(dump_fta(m)) == m
    alg = dfa_to_algebra(random_dfa(rng, letters))
    assert parse_fal(dump_fal(alg)) == alg


def test_algebra_round_trip(tmp_path):
    for alg in (parity_algebra(), z4_on_z2_algebra(), dfa_to_algebra(true_formula_dfa())):
        path = tmp_path / "a.fal"
        save_algebra(alg, path)
        assert load_algebra(path) == alg


def test_load_kinds(tmp_path):
    path = tmp_path / "n.fta"
    save_automaton(n1_nfa(), path)
    assert isinstance(load_nfa(path), Nfa)
    with pytest.raises(ValidationError):
        load_dfa(path)
    save_automaton(parity_dfa(), path)
    assert isinstance(load_dfa(path), Dfa)
    assert isinstance(load_nfa(path), Nfa)


def test_missing_plus_line():
    text = dump_fta(parity_dfa()).replace("plus o e o\n", "")
    with pytest.raises(ValidationError) as e:
        parse_fta(text, "p.fta")
    assert messages(e) == ["missing plus entry for (o, e)"]
    d = e.value.diagnostics[0]
    assert d.file == "p.fta" and tuple(d.tokens) == ("o", "e")
    assert str(d).endswith("[o e]")


def test_duplicate_and_unknown():
    text = dump_fta(parity_dfa()) + "delta a e e\n"
    with pytest.raises(ValidationError) as e:
        parse_fta(text)
    (d,) = e.value.diagnostics
    assert "duplicate" in d.message and d.line == 12
    with pytest.raises(ValidationError) as e:
        parse_fta(dump_fta(parity_dfa()).replace("delta a o e", "delta a o q"))
    assert any("unknown state 'q'" in m for m in messages(e))


def test_monoid_law_violation():
    text = dump_fta(parity_dfa()).replace("plus e o o", "plus e o e")
    with pytest.raises(ValidationError) as e:
        parse_fta(text)
    assert e.value.diagnostics


def test_syntax_error_position():
    with pytest.raises(ValidationError) as e:
        parse_fta('type dfa\nalphabet "a\n')
    assert e.value.diagnostics[0].line == 2


def test_missing_file(tmp_path):
    with pytest.raises(ValidationError) as e:
        load_dfa(tmp_path / "nope.fta")
    assert "cannot read" in messages(e)[0]


def test_sub_round_trip(tmp_path):
    sigma = Substitution(("a",), {"x": parity_dfa(), "y": universal_dfa()})
    path = tmp_path / "s.sub"
    save_subst(sigma, path)
    back = load_subst(path, ("a",))
    assert back.vars == ("x", "y")
    assert back.values == sigma.values


def test_sub_empty_value(tmp_path):
    save_automaton(empty_dfa(), tmp_path / "e.fta")
    (tmp_path / "s.sub").write_text("vars x\nx = e.fta\n")
    with pytest.raises(ValidationError) as e:
        load_subst(tmp_path / "s.sub")
    assert messages(e) == ["value of 'x' has an empty language; substitution values must be nonempty"]
    assert e.value.diagnostics[0].line == 2


def test_sub_diagnostics(tmp_path):
    save_automaton(parity_dfa(), tmp_path / "p.fta")
    with pytest.raises(ValidationError) as e:
        parse_sub("vars x y\nx = p.fta\nx = p.fta\nz = p.fta\n", base_dir=str(tmp_path))
    got = messages(e)
    assert any("duplicate value for 'x'" in m for m in got)
    assert any("'z' is not declared" in m for m in got)
    assert any("no value given for variable 'y'" in m for m in got)


# ------------------------------------------------------------------- fuzz


def mutate(rng, text):
    lines = text.splitlines()
    op = rng.randrange(6)
    i = rng.randrange(len(lines))
    if op == 0:
        del lines[i]
    elif op == 1:
        lines.insert(rng.randrange(len(lines) + 1), lines[i])
    elif op == 2:
        toks = lines[i].split(" ")
        j = rng.randrange(len(toks))
        pool = " ".join(lines).split(" ")
        toks[j] = rng.choice(pool + ['"', "#", "-", "zz", "0", ""])
        lines[i] = " ".join(toks)
    elif op == 3:
        lines[i] = lines[i][: rng.randrange(len(lines[i]) + 1)]
    elif op == 4:
        j, k = rng.randrange(len(lines)), rng.randrange(len(lines))
        a, b = lines[j].split(" "), lines[k].split(" ")
        if len(a) > 1 and len(b) > 1:
            x, y = rng.randrange(1, len(a)), rng.randrange(1, len(b))
            a[x], b[y] = b[y], a[x]
            lines[j], lines[k] = " ".join(a), " ".join(b)
    else:
        lines[i] = lines[i].replace(" ", "", 1)
    return "\n".join(lines) + "\n"


def fuzz_once(rng):
    """Mutate a valid file and load it; returns True when the load was rejected."""
    kind = rng.randrange(3)
    if kind == 2:
        text = dump_fal(dfa_to_algebra(random_dfa(rng, ("a", "b"))))
    else:
        m = random_dfa(rng, ("a", "b")) if kind == 0 else random_nfa(rng, ("a", "b"))
        text = dump_fta(m)
    for _ in range(rng.randint(1, 3)):
        text = mutate(rng, text)
    try:
        if kind == 2:
            value = parse_fal(text)
        else:
            value = parse_fta(text)
    except ValidationError as e:
        assert e.diagnostics
        return True
    if kind == 2:
        assert validate_algebra(value) == []
    else:
        assert validate(value) == []
    return False


def test_fuzz():
    rng = random.Random(2024)
    rejected = sum(fuzz_once(rng) for _ in range(300))
    assert rejected > 150
