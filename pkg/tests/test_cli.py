import io
import random

import pytest

from fata.automata import rename_states, with_accept
from fata.cli import run
from fata.fixtures import empty_dfa, forest_dfa, n1_nfa, parity_algebra, parity_dfa, true_formula_dfa, universal_dfa
from fata.forest import BOOL_SYMBOLS, And, Not, Or, Var, bool_vars, encode_bool, eval_bool, parse_forest
from fata.io import save_algebra, save_automaton, save_subst
from fata.substitution import Substitution
from gen import random_dfa


def fata(*argv):
    out = io.StringIO()
    code = run([str(a) for a in argv], out)
    report = {}
    for line in out.getvalue().splitlines():
        key, _, value = line.partition(": ")
        report.setdefault(key, value)
    return code, report


@pytest.fixture
def files(tmp_path):
    d = parity_dfa()
    paths = {
        "par": d,
        "ren": rename_states(d, ("even", "odd")),
        "all": universal_dfa(),
        "none": empty_dfa(),
        "n1": n1_nfa(),
        "x": forest_dfa(parse_forest("x"), ("a", "x")),
    }
    out = {}
    for name, m in paths.items():
        out[name] = tmp_path / f"{name}.fta"
        save_automaton(m, out[name])
    out["alg"] = tmp_path / "par.fal"
    save_algebra(parity_algebra(), out["alg"])
    out["sub"] = tmp_path / "s.sub"
    save_subst(Substitution(("a",), {"x": with_accept(d, {1})}), out["sub"])
    out["dir"] = tmp_path
    return out


def member(path, forest):
    return fata("member", path, forest)[0] == 0


def test_verdict_examples(files):
    code, rep = fata("empty", files["par"])
    assert code == 1 and rep["witness"] == "a"
    assert member(files["par"], rep["witness"])
    code, rep = fata("equiv", files["par"], files["ren"])
    assert code == 0
    counts = dict(kv.split("=") for kv in rep["counters"].split())
    assert int(counts["unions"]) <= 3 and int(counts["finds"]) <= 1 + 3 * 5
    code, rep = fata("equiv", files["par"], files["all"])
    assert code == 1 and rep["witness"] == "0"
    assert member(files["all"], "0") and not member(files["par"], "0")
    code, rep = fata("subset", files["all"], files["par"])
    assert code == 1 and rep["witness"] == "0"
    assert fata("subset", files["par"], files["all"])[0] == 0
    assert fata("empty", files["none"])[0] == 0
    assert fata("member", files["n1"], "a(a)")[0] == 1


def test_intersection(files):
    code, rep = fata("intersect-empty", files["par"], files["par"])
    assert code == 1 and member(files["par"], rep["witness"])
    code, rep = fata("intersect-empty")
    assert code == 1 and rep["witness"] == "0"


def test_errors_and_caps(files):
    assert fata("empty", files["dir"] / "missing.fta")[0] == 2
    assert fata("equiv", files["par"], files["n1"])[0] in (0, 1)  # Nfa inputs are determinized
    assert fata("member", files["par"], "b")[0] == 2
    assert fata("member", files["par"], "a(")[0] == 2
    assert fata("nosuchcommand")[0] == 2
    bad = files["dir"] / "bad.fta"
    bad.write_text("type dfa\nalphabet a\n")
    assert fata("empty", bad)[0] == 2
    assert fata("validate", bad)[0] == 2
    three = files["dir"] / "three.fta"
    save_automaton(forest_dfa(parse_forest("x+y+z"), ("a", "x", "y", "z")), three)
    assert fata("exists-subst", three, files["par"], "--max-search", "4")[0] == 3
    assert fata("exists-subst", "--mode", "equal-both", files["x"], files["x"])[0] == 2


def test_constructions_validate(files):
    d = files["dir"]
    runs = [
        ("complement", files["par"]),
        ("product", files["par"], files["all"], "--mode", "union"),
        ("product", files["par"], files["ren"]),
        ("determinize", files["n1"]),
        ("invhom", files["par"], "--map", "a=a(a(@))"),
        ("globally", files["par"]),
        ("split-neutral", files["par"]),
        ("subst-image", files["x"], files["sub"]),
        ("subst-preimage", files["par"], files["sub"]),
        ("saturate", files["sub"], files["par"]),
        ("alg2fta", files["alg"]),
        ("fta2alg", files["par"]),
        ("faithful", files["alg"]),
    ]
    for i, argv in enumerate(runs):
        ext = ".sub" if argv[0] == "saturate" else ".fal" if argv[0] in ("fta2alg", "faithful") else ".fta"
        target = d / f"out{i}{ext}"
        code, _ = fata(*argv, "-o", target)
        assert code == 0, argv
        assert fata("validate", target)[0] == 0, argv
    assert fata("union-subst", files["par"], files["all"], "-o", d / "u.fta", "--sub-output", d / "u.sub")[0] == 0
    assert fata("validate", d / "u.fta")[0] == 0 and fata("validate", d / "u.sub")[0] == 0
    code, _ = fata("combine", files["par"], files["all"], files["all"], files["par"],
                   "--out-left", d / "l.fta", "--out-right", d / "r.fta")
    assert code == 0
    assert fata("subset", d / "l.fta", d / "r.fta")[0] == 1


def test_construction_semantics(files):
    d = files["dir"]
    fata("complement", files["par"], "-o", d / "c.fta")
    assert member(d / "c.fta", "0") and not member(d / "c.fta", "a")
    fata("subst-image", files["x"], files["sub"], "-o", d / "img.fta")
    assert fata("equiv", d / "img.fta", files["par"])[0] == 0


def test_given_substitution(files):
    assert fata("subst-subset", files["x"], files["sub"], files["par"])[0] == 0
    assert fata("subst-equal", files["x"], files["sub"], files["par"])[0] == 0
    code, rep = fata("subst-superset", files["x"], files["sub"], files["all"])
    assert code == 1 and rep["witness"] == "0"
    assert fata("subst-subset-both", files["x"], files["sub"], files["x"])[0] == 0


def test_exists_subst(files):
    code, rep = fata("exists-subst", files["x"], files["par"])
    assert code == 0 and rep["class"] == "x = {o}"
    assert fata("exists-subst", files["x"], files["none"])[0] == 1
    assert fata("exists-subst", "--mode", "equal", files["x"], files["par"])[0] == 0


def test_exists_subst_sat(files):
    d = files["dir"]
    r = d / "true.fta"
    save_automaton(true_formula_dfa(), r)
    x, y = Var("x"), Var("y")
    for expr in (And(x, Not(x)), Or(x, Not(x)), And(Or(x, y), Not(y)), And(And(x, y), Not(Or(x, y)))):
        names = bool_vars(expr)
        l = d / "f.fta"
        save_automaton(forest_dfa(encode_bool(expr), BOOL_SYMBOLS + tuple(names)), l)
        sat = any(eval_bool(expr, dict(zip(names, bits))) for bits in _bits(len(names)))
        assert fata("exists-subst", "--jobs", "2", l, r)[0] == (0 if sat else 1)


def _bits(n):
    return [[bool(i >> k & 1) for k in range(n)] for i in range(2 ** n)]


def test_enumerate(files):
    out = io.StringIO()
    assert run(["enumerate", str(files["par"]), "--max-nodes", "3"], out) == 0
    assert out.getvalue().split()[-2:] == ["count:", "6"]
    assert out.getvalue().split()[:-2] == ["a", "a(a(a))", "a(a)+a", "a(a+a)", "a+a(a)", "a+a+a"]
    out = io.StringIO()
    run(["enumerate", "--alphabet", "a", "--max-nodes", "2"], out)
    assert out.getvalue().split()[:-2] == ["0", "a", "a(a)", "a+a"]


def test_witnesses_reverify(tmp_path):
    rng = random.Random(11)
    for i in range(15):
        m1, m2 = random_dfa(rng, ("a", "b")), random_dfa(rng, ("a", "b"))
        p1, p2 = tmp_path / "p1.fta", tmp_path / "p2.fta"
        save_automaton(m1, p1)
        save_automaton(m2, p2)
        code, rep = fata("equiv", p1, p2)
        if code == 1:
            assert member(p1, rep["witness"]) != member(p2, rep["witness"])
        code, rep = fata("subset", p1, p2)
        if code == 1:
            assert member(p1, rep["witness"]) and not member(p2, rep["witness"])
        code, rep = fata("empty", p1)
        if code == 1:
            assert member(p1, rep["witness"])
