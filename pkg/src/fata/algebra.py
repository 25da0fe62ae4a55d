"""Finite forest algebras and their conversions to and from automata.

Vertical elements multiply as functions: ``(u v) . h = u . (v . h)``, so the
product ``u v`` means "first v, then u".
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping

from .automata import Dfa, monoid_diagnostics, require_dfa
from .errors import CapExceeded, UnknownSymbolError
from .forest import HOLE, Context, Forest

DEFAULT_MAX_VERTICAL = 1 << 12


@dataclass(frozen=True)
class ForestAlgebra:
    h_names: tuple
    h_plus: tuple  # h_plus[g][h] = g + h
    h_neutral: int
    v_names: tuple
    v_times: tuple  # v_times[u][v] = u v
    v_neutral: int
    action: tuple  # action[v][h] = v . h
    inl: tuple  # inl[g] acts as h -> g + h
    inr: tuple  # inr[g] acts as h -> h + g
    alphabet: tuple
    letter_hom: Mapping  # letter -> vertical element
    accept: frozenset

    @property
    def h_size(self) -> int:
        return len(self.h_names)

    @property
    def v_size(self) -> int:
        return len(self.v_names)


def validate_algebra(alg: ForestAlgebra) -> list[str]:
    """Check every axiom exhaustively; returns diagnostics, empty when valid."""
    out = []
    nh, nv = alg.h_size, alg.v_size
    out += monoid_diagnostics(alg.h_names, alg.h_plus, alg.h_neutral, "H")
    out += monoid_diagnostics(alg.v_names, alg.v_times, alg.v_neutral, "V")
    if out:
        return out
    if len(alg.action) != nv or any(len(row) != nh for row in alg.action):
        return out + ["action: table must have one row per V element and one column per H element"]
    if any(not 0 <= x < nh for row in alg.action for x in row):
        return out + ["action: value outside H"]
    if len(alg.inl) != nh or len(alg.inr) != nh or any(not 0 <= v < nv for v in alg.inl + alg.inr):
        return out + ["insertion: inl and inr need one V element per H element"]
    H, V = alg.h_names, alg.v_names
    for h in range(nh):
        if alg.action[alg.v_neutral][h] != h:
            out.append(f"action identity: 1 . {H[h]} = {H[alg.action[alg.v_neutral][h]]}, expected {H[h]}")
    for u in range(nv):
        for v in range(nv):
            uv = alg.v_times[u][v]
            for h in range(nh):
                lhs = alg.action[uv][h]
                rhs = alg.action[u][alg.action[v][h]]
                if lhs != rhs:
                    out.append(f"action compatibility: ({V[u]} {V[v]}) . {H[h]} = {H[lhs]} but {V[u]} . ({V[v]} . {H[h]}) = {H[rhs]}")
    for g in range(nh):
        for h in range(nh):
            got = alg.action[alg.inl[g]][h]
            if got != alg.h_plus[g][h]:
                out.append(f"insertion: inl({H[g]}) . {H[h]} = {H[got]}, expected {H[g]}+{H[h]} = {H[alg.h_plus[g][h]]}")
            got = alg.action[alg.inr[g]][h]
            if got != alg.h_plus[h][g]:
                out.append(f"insertion: inr({H[g]}) . {H[h]} = {H[got]}, expected {H[h]}+{H[g]} = {H[alg.h_plus[h][g]]}")
    for a in alg.alphabet:
        v = alg.letter_hom.get(a)
        if v is None or not 0 <= v < nv:
            out.append(f"letter homomorphism: no vertical element for {a!r}")
    for h in alg.accept:
        if not 0 <= h < nh:
            out.append(f"accept: {h} is not an element of H")
    return out


def _hom(alg, label):
    v = alg.letter_hom.get(label)
    if v is None:
        raise UnknownSymbolError(label)
    return v


def eval_algebra(alg: ForestAlgebra, f: Forest) -> int:
    """Image of a forest in H under the homomorphism fixed by ``letter_hom``."""
    acc = alg.h_neutral
    for t in f:
        h = alg.action[_hom(alg, t.label)][eval_algebra(alg, t.children)]
        acc = alg.h_plus[acc][h]
    return acc


def eval_context_algebra(alg: ForestAlgebra, c: Context) -> int:
    """Image of a context in V."""

    def walk(forest):
        before, after, inner = alg.h_neutral, alg.h_neutral, None
        for t in forest:
            if t.label is HOLE:
                inner = alg.v_neutral
                continue
            if _contains_hole(t):
                inner = alg.v_times[_hom(alg, t.label)][walk(t.children)]
                continue
            h = eval_algebra(alg, (t,))
            if inner is None:
                before = alg.h_plus[before][h]
            else:
                after = alg.h_plus[after][h]
        return alg.v_times[alg.v_times[alg.inl[before]][alg.inr[after]]][inner]

    return walk(c.body)


def _contains_hole(t) -> bool:
    return any(s.label is HOLE or _contains_hole(s) for s in t.children)


def algebra_accepts(alg: ForestAlgebra, f: Forest) -> bool:
    return eval_algebra(alg, f) in alg.accept


def faithful_quotient(alg: ForestAlgebra):
    """Quotient of V by ``u ~ v`` iff u and v act identically on H.

    Returns the quotient algebra and the classes, as sorted tuples of old V
    indices in order of their smallest member.  The class of ``u`` becomes
    new element ``i``; each class is named after its first member.
    """
    rows = {}
    cls = []
    for v in range(alg.v_size):
        key = alg.action[v]
        if key not in rows:
            rows[key] = len(rows)
        cls.append(rows[key])
    k = len(rows)
    members = [tuple(v for v in range(alg.v_size) if cls[v] == i) for i in range(k)]
    reps = [m[0] for m in members]
    v_times = tuple(tuple(cls[alg.v_times[reps[i]][reps[j]]] for j in range(k)) for i in range(k))
    action = tuple(alg.action[reps[i]] for i in range(k))
    q = ForestAlgebra(
        h_names=alg.h_names,
        h_plus=alg.h_plus,
        h_neutral=alg.h_neutral,
        v_names=tuple(alg.v_names[r] for r in reps),
        v_times=v_times,
        v_neutral=cls[alg.v_neutral],
        action=action,
        inl=tuple(cls[v] for v in alg.inl),
        inr=tuple(cls[v] for v in alg.inr),
        alphabet=alg.alphabet,
        letter_hom={a: cls[v] for a, v in alg.letter_hom.items()},
        accept=alg.accept,
    )
    return q, tuple(members)


def is_faithful(alg: ForestAlgebra) -> bool:
    return len(set(alg.action)) == alg.v_size


def algebra_to_dfa(alg: ForestAlgebra) -> Dfa:
    delta = {a: tuple(alg.action[alg.letter_hom[a]]) for a in alg.alphabet}
    return Dfa(alg.h_names, tuple(alg.alphabet), alg.h_plus, alg.h_neutral, delta, frozenset(alg.accept))


def dfa_to_algebra(m: Dfa, max_vertical: int = DEFAULT_MAX_VERTICAL) -> ForestAlgebra:
    """Forest algebra whose V is the transformation monoid on the states
    generated by the letter transitions and the maps ``q+.`` and ``.+q``."""
    m = require_dfa(m)
    n = m.size
    ident = tuple(range(n))
    gens = [tuple(m.delta[a]) for a in m.alphabet]
    gens += [tuple(m.plus[q][h] for h in range(n)) for q in range(n)]
    gens += [tuple(m.plus[h][q] for h in range(n)) for q in range(n)]
    elems = [ident]
    index = {ident: 0}
    todo = [ident]
    while todo:
        f = todo.pop()
        for g in gens:
            h = tuple(g[f[i]] for i in range(n))  # g after f
            if h not in index:
                if len(elems) >= max_vertical:
                    raise CapExceeded("vertical monoid elements", max_vertical)
                index[h] = len(elems)
                elems.append(h)
                todo.append(h)
    k = len(elems)
    v_times = tuple(
        tuple(index[tuple(elems[u][elems[v][i]] for i in range(n))] for v in range(k)) for u in range(k)
    )
    return ForestAlgebra(
        h_names=m.states,
        h_plus=m.plus,
        h_neutral=m.neutral,
        v_names=tuple(f"v{i}" for i in range(k)),
        v_times=v_times,
        v_neutral=0,
        action=tuple(elems),
        inl=tuple(index[tuple(m.plus[g][h] for h in range(n))] for g in range(n)),
        inr=tuple(index[tuple(m.plus[h][g] for h in range(n))] for g in range(n)),
        alphabet=m.alphabet,
        letter_hom={a: index[tuple(m.delta[a])] for a in m.alphabet},
        accept=m.accept,
    )
