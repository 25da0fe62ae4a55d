"""Small named automata used throughout the tests, the CLI and the docs."""

from __future__ import annotations

from .automata import Dfa, Nfa
from .forest import AND, FALSE, NOT, OR, TRUE, Forest, Tree, print_forest


def parity_dfa(letters=("a",)) -> Dfa:
    """Accepts forests with an odd number of nodes (states ``e``, ``o``)."""
    letters = tuple(letters)
    return Dfa(
        states=("e", "o"),
        alphabet=letters,
        plus=((0, 1), (1, 0)),
        neutral=0,
        delta={a: (1, 0) for a in letters},
        accept=frozenset({1}),
    )


def universal_dfa(letters=("a",)) -> Dfa:
    letters = tuple(letters)
    return Dfa(("u",), letters, ((0,),), 0, {a: (0,) for a in letters}, frozenset({0}))


def empty_dfa(letters=("a",)) -> Dfa:
    letters = tuple(letters)
    return Dfa(("u",), letters, ((0,),), 0, {a: (0,) for a in letters}, frozenset())


def n1_nfa() -> Nfa:
    """States ``0, s`` with ``s+s=s``; ``a`` maps ``0`` to ``{s}`` and ``s`` to nothing.

    Its language is the nonempty forests of leaves ``a+...+a``.
    """
    return Nfa(
        states=("0", "s"),
        alphabet=("a",),
        plus=((0, 1), (1, 1)),
        neutral=0,
        delta={"a": (frozenset({1}), frozenset())},
        accept=frozenset({1}),
    )


def forest_dfa(target: Forest, letters) -> Dfa:
    """Dfa accepting exactly the forest ``target``.

    States are the distinct contiguous runs of siblings occurring in the
    target (including the target itself and the empty run), plus a sink.
    Concatenation is defined when the result is again such a run.
    """
    runs: set = {()}

    def collect(f):
        for i in range(len(f)):
            for j in range(i + 1, len(f) + 1):
                runs.add(f[i:j])
        for t in f:
            collect(t.children)

    collect(target)
    ordered = sorted(runs, key=lambda r: (len(repr(r)), repr(r)))
    index = {r: i for i, r in enumerate(ordered)}
    sink = len(ordered)
    n = sink + 1
    plus = []
    for i in range(n):
        row = []
        for j in range(n):
            if i == sink or j == sink:
                row.append(sink)
            else:
                row.append(index.get(ordered[i] + ordered[j], sink))
        plus.append(tuple(row))
    delta = {}
    for a in letters:
        row = []
        for i in range(n):
            if i == sink:
                row.append(sink)
            else:
                row.append(index.get((Tree(a, ordered[i]),), sink))
        delta[a] = tuple(row)
    names = tuple(f"[{print_forest(r)}]" for r in ordered) + ("sink",)
    return Dfa(names, tuple(letters), tuple(plus), index[()], delta, frozenset({index[tuple(target)]}))


def true_formula_dfa() -> Dfa:
    """Encodings of variable-free Boolean formulas that evaluate to true.

    States track a run of at most two well-formed formula values; anything
    else falls into ``bad``.  Leaves ``T``/``F`` are constants, ``not`` needs
    one child and ``and``/``or`` need exactly two.
    """
    names = ["0", "bad", "F", "T", "FF", "FT", "TF", "TT"]
    idx = {s: i for i, s in enumerate(names)}

    def add(p, q):
        if p == "0":
            return q
        if q == "0":
            return p
        if len(p) == 1 and len(q) == 1 and p != "bad" and q != "bad":
            return p + q
        return "bad"

    def step(a, q):
        if a in (TRUE, FALSE):
            return a if q == "0" else "bad"
        if a == NOT:
            return {"T": "F", "F": "T"}.get(q, "bad")
        if q in ("FF", "FT", "TF", "TT"):
            l, r = q[0] == "T", q[1] == "T"
            v = (l and r) if a == AND else (l or r)
            return "T" if v else "F"
        return "bad"

    n = len(names)
    plus = tuple(tuple(idx[add(names[i], names[j])] for j in range(n)) for i in range(n))
    letters = (AND, OR, NOT, TRUE, FALSE)
    delta = {a: tuple(idx[step(a, names[i])] for i in range(n)) for a in letters}
    return Dfa(tuple(names), letters, plus, idx["0"], delta, frozenset({idx["T"]}))


def pair_formula_dfa() -> Dfa:
    """The coarser pair-of-Booleans automaton: (any true, all true) per forest.

    Accepts every forest whose top-level trees all evaluate to true under a
    lenient reading; it does not check arity.
    """
    names = ("ft", "tt", "ff", "tf")  # (or-part, and-part)
    val = {(False, True): 0, (True, True): 1, (False, False): 2, (True, False): 3}
    inv = {v: k for k, v in val.items()}
    n = 4
    plus = tuple(
        tuple(val[(inv[i][0] or inv[j][0], inv[i][1] and inv[j][1])] for j in range(n)) for i in range(n)
    )

    def step(a, q):
        o, c = inv[q]
        if a == TRUE:
            v = True
        elif a == FALSE:
            v = False
        elif a == AND:
            v = c
        elif a == OR:
            v = o
        else:
            v = not o
        return val[(v, v)]

    letters = (AND, OR, NOT, TRUE, FALSE)
    delta = {a: tuple(step(a, q) for q in range(n)) for a in letters}
    return Dfa(names, letters, plus, 0, delta, frozenset({1}))


def parity_algebra(letters=("a",)):
    """H = V = Z2 acting by addition; every letter adds one node."""
    from .algebra import ForestAlgebra

    letters = tuple(letters)
    z2 = ((0, 1), (1, 0))
    return ForestAlgebra(
        h_names=("0", "1"),
        h_plus=z2,
        h_neutral=0,
        v_names=("0", "1"),
        v_times=z2,
        v_neutral=0,
        action=z2,
        inl=(0, 1),
        inr=(0, 1),
        alphabet=letters,
        letter_hom={a: 1 for a in letters},
        accept=frozenset({1}),
    )


def z4_on_z2_algebra(letters=("a",)):
    """V = Z4 acting on H = Z2 through ``v mod 2``; not faithful."""
    from .algebra import ForestAlgebra

    letters = tuple(letters)
    z2 = ((0, 1), (1, 0))
    z4 = tuple(tuple((i + j) % 4 for j in range(4)) for i in range(4))
    return ForestAlgebra(
        h_names=("0", "1"),
        h_plus=z2,
        h_neutral=0,
        v_names=("0", "1", "2", "3"),
        v_times=z4,
        v_neutral=0,
        action=tuple(tuple((v + h) % 2 for h in range(2)) for v in range(4)),
        inl=(0, 1),
        inr=(0, 1),
        alphabet=letters,
        letter_hom={a: 1 for a in letters},
        accept=frozenset({1}),
    )
