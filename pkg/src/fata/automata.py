"""Deterministic and nondeterministic forest automata.

A forest automaton is a finite monoid of states ``(Q, +, 0)`` together with a
transition table indexed by letter and state.  States are indices into
``states`` (a tuple of names); tables are dense.  For an :class:`Nfa` the
transition table holds frozensets of indices, while the state monoid stays
deterministic.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass
from itertools import product as cartesian
from typing import Mapping, Union

from .errors import AlphabetMismatch, CapExceeded, NotDeterministic, UnknownSymbolError
from .forest import HOLE, Context, Forest

DEFAULT_MAX_SUBSETS = 1 << 16


@dataclass(frozen=True)
class Dfa:
    states: tuple
    alphabet: tuple
    plus: tuple  # plus[p][q] = p + q
    neutral: int
    delta: Mapping  # delta[a][q] = state
    accept: frozenset

    @property
    def size(self) -> int:
        return len(self.states)

    def index(self, name: str) -> int:
        return self.states.index(name)

    def accepts(self, f: Forest) -> bool:
        return eval_dfa(self, f) in self.accept


@dataclass(frozen=True)
class Nfa:
    states: tuple
    alphabet: tuple
    plus: tuple
    neutral: int
    delta: Mapping  # delta[a][q] = frozenset of states
    accept: frozenset

    @property
    def size(self) -> int:
        return len(self.states)

    def index(self, name: str) -> int:
        return self.states.index(name)

    def accepts(self, f: Forest) -> bool:
        return bool(eval_nfa(self, f) & self.accept)


Automaton = Union[Dfa, Nfa]


def make_dfa(states, alphabet, plus, neutral, delta, accept) -> Dfa:
    """Build a Dfa from name-keyed tables.

    ``plus`` maps (p, q) to a state name, ``delta`` maps (a, q) to a state name.
    """
    states = tuple(states)
    idx = {s: i for i, s in enumerate(states)}
    n = len(states)
    table = tuple(tuple(idx[plus[(states[i], states[j])]] for j in range(n)) for i in range(n))
    trans = {a: tuple(idx[delta[(a, s)]] for s in states) for a in alphabet}
    return Dfa(states, tuple(alphabet), table, idx[neutral], trans, frozenset(idx[s] for s in accept))


def as_nfa(m: Automaton) -> Nfa:
    if isinstance(m, Nfa):
        return m
    delta = {a: tuple(frozenset((q,)) for q in row) for a, row in m.delta.items()}
    return Nfa(m.states, m.alphabet, m.plus, m.neutral, delta, m.accept)


def is_deterministic_shape(m: Nfa) -> bool:
    return all(len(s) == 1 for row in m.delta.values() for s in row)


def nfa_to_dfa_if_singleton(m: Nfa) -> Dfa:
    """Reinterpret an Nfa whose transition sets are all singletons as a Dfa."""
    if not is_deterministic_shape(m):
        raise NotDeterministic("transition sets are not all singletons")
    delta = {a: tuple(next(iter(s)) for s in row) for a, row in m.delta.items()}
    return Dfa(m.states, m.alphabet, m.plus, m.neutral, delta, m.accept)


def require_dfa(m, what="automaton") -> Dfa:
    if not isinstance(m, Dfa):
        raise NotDeterministic(f"{what} must be deterministic")
    return m


# -------------------------------------------------------------- validation


def monoid_diagnostics(names, table, neutral, label="") -> list[str]:
    """Check closure, identity and associativity of a dense monoid table."""
    n = len(names)
    out = []
    if len(set(names)) != n:
        out.append(f"{label}duplicate element names")
    if not 0 <= neutral < n:
        return out + [f"{label}neutral element out of range"]
    if len(table) != n or any(len(row) != n for row in table):
        return out + [f"{label}table is not {n}x{n}"]
    for i in range(n):
        for j in range(n):
            if not 0 <= table[i][j] < n:
                out.append(f"{label}closure: {names[i]} + {names[j]} is not an element")
    if out:
        return out
    e = neutral
    for q in range(n):
        if table[e][q] != q:
            out.append(f"{label}identity law: {names[e]} + {names[q]} = {names[table[e][q]]}, expected {names[q]}")
        if table[q][e] != q:
            out.append(f"{label}identity law: {names[q]} + {names[e]} = {names[table[q][e]]}, expected {names[q]}")
    for p in range(n):
        row = table[p]
        for q in range(n):
            pq = row[q]
            for r in range(n):
                if table[pq][r] != row[table[q][r]]:
                    out.append(
                        f"{label}associativity: ({names[p]} + {names[q]}) + {names[r]} = "
                        f"{names[table[pq][r]]} but {names[p]} + ({names[q]} + {names[r]}) = "
                        f"{names[row[table[q][r]]]}"
                    )
                    if len(out) > 20:
                        return out
    return out


def validate(m: Automaton) -> list[str]:
    """Return a list of diagnostics; empty means valid."""
    out = monoid_diagnostics(m.states, m.plus, m.neutral)
    n = len(m.states)
    if len(set(m.alphabet)) != len(m.alphabet):
        out.append("duplicate letters in alphabet")
    for a in m.alphabet:
        row = m.delta.get(a)
        if row is None:
            out.append(f"totality: no transitions for letter {a}")
            continue
        if len(row) != n:
            out.append(f"totality: transitions for letter {a} cover {len(row)} of {n} states")
            continue
        for q, t in enumerate(row):
            targets = t if isinstance(m, Nfa) else (t,)
            if isinstance(m, Nfa) and not isinstance(t, frozenset):
                out.append(f"transition {a} {m.states[q]} is not a set")
                continue
            for r in targets:
                if not (isinstance(r, int) and 0 <= r < n):
                    out.append(f"transition {a} {m.states[q]} targets unknown state {r!r}")
    extra = set(m.delta) - set(m.alphabet)
    if extra:
        out.append(f"transitions for letters outside the alphabet: {sorted(extra)}")
    if any(not (0 <= q < n) for q in m.accept):
        out.append("accepting set is not a subset of the states")
    return out


# -------------------------------------------------------------- evaluation


def _delta_row(m, label):
    try:
        return m.delta[label]
    except KeyError:
        raise UnknownSymbolError(label) from None


def eval_dfa(m: Dfa, f: Forest) -> int:
    q = m.neutral
    plus = m.plus
    for t in f:
        q = plus[q][_delta_row(m, t.label)[eval_dfa(m, t.children)]]
    return q


def set_sum(plus, ps, qs) -> frozenset:
    return frozenset(plus[p][q] for p in ps for q in qs)


def eval_nfa(m: Nfa, f: Forest) -> frozenset:
    acc = frozenset((m.neutral,))
    for t in f:
        row = _delta_row(m, t.label)
        inner = eval_nfa(m, t.children)
        here = frozenset().union(*(row[q] for q in inner)) if inner else frozenset()
        acc = set_sum(m.plus, acc, here)
    return acc


def evaluate(m: Automaton, f: Forest):
    """Dfa: the state of ``f``.  Nfa: the set of states of ``f``."""
    return eval_dfa(m, f) if isinstance(m, Dfa) else eval_nfa(m, f)


def member(m: Automaton, f: Forest) -> bool:
    return m.accepts(f)


def eval_context(m: Dfa, c: Context, q: int) -> int:
    """Value of context ``c`` with the hole evaluated to state ``q``."""

    def walk(forest):
        acc = m.neutral
        for t in forest:
            if t.label is HOLE:
                v = q
            elif _contains_hole(t.children):
                v = _delta_row(m, t.label)[walk(t.children)]
            else:
                v = _delta_row(m, t.label)[eval_dfa(m, t.children)]
            acc = m.plus[acc][v]
        return acc

    return walk(c.body)


def _contains_hole(f) -> bool:
    return any(t.label is HOLE or _contains_hole(t.children) for t in f)


# -------------------------------------------------------- reachable values


def reachable_states(m: Automaton) -> frozenset:
    """States that are the value (or one of the values) of some forest."""
    nfa = as_nfa(m)
    marked = {nfa.neutral}
    todo = [nfa.neutral]
    while todo:
        q = todo.pop()
        new = set()
        for p in list(marked):
            new.add(nfa.plus[p][q])
            new.add(nfa.plus[q][p])
        for a in nfa.alphabet:
            new |= nfa.delta[a][q]
        for r in new - marked:
            marked.add(r)
            todo.append(r)
    return frozenset(marked)


def nonempty_values(m: Automaton) -> frozenset:
    """States reached by some forest with at least one node."""
    nfa = as_nfa(m)
    reach = reachable_states(nfa)
    marked = set()
    for a in nfa.alphabet:
        for q in reach:
            marked |= nfa.delta[a][q]
    todo = list(marked)
    while todo:
        q = todo.pop()
        for p in list(marked):
            for r in (nfa.plus[p][q], nfa.plus[q][p]):
                if r not in marked:
                    marked.add(r)
                    todo.append(r)
    return frozenset(marked)


# ----------------------------------------------------------- constructions


def _check_same_alphabet(m1, m2):
    if set(m1.alphabet) != set(m2.alphabet):
        raise AlphabetMismatch(f"alphabets differ: {sorted(m1.alphabet)} vs {sorted(m2.alphabet)}")


def _completed(m: Nfa) -> Nfa:
    """Add an absorbing dead state so that every forest has a nonempty value set."""
    if all(row[q] for row in m.delta.values() for q in range(m.size)):
        return m
    n = m.size
    dead = n
    plus = tuple(tuple(m.plus[p]) + (dead,) for p in range(n)) + ((dead,) * (n + 1),)
    delta = {
        a: tuple(row[q] if row[q] else frozenset((dead,)) for q in range(n)) + (frozenset((dead,)),)
        for a, row in m.delta.items()
    }
    return Nfa(m.states + (_fresh("dead", m.states),), m.alphabet, plus, m.neutral, delta, m.accept)


def _fresh(base: str, taken) -> str:
    taken = set(taken)
    name = base
    while name in taken:
        name += "'"
    return name


def product(m1: Automaton, m2: Automaton, mode: str = "intersection") -> Automaton:
    """Componentwise product recognising the union or intersection."""
    if mode not in ("union", "intersection"):
        raise ValueError(f"mode must be 'union' or 'intersection', not {mode!r}")
    _check_same_alphabet(m1, m2)
    det = isinstance(m1, Dfa) and isinstance(m2, Dfa)
    if not det:
        m1, m2 = as_nfa(m1), as_nfa(m2)
        if mode == "union":
            # a run dying in one component must not kill the other
            m1, m2 = _completed(m1), _completed(m2)
    n1, n2 = m1.size, m2.size

    def pair(p, q):
        return p * n2 + q

    states = tuple(f"({a},{b})" for a in m1.states for b in m2.states)
    plus = tuple(
        tuple(pair(m1.plus[p1][q1], m2.plus[p2][q2]) for q1 in range(n1) for q2 in range(n2))
        for p1 in range(n1)
        for p2 in range(n2)
    )
    delta = {}
    for a in m1.alphabet:
        r1, r2 = m1.delta[a], m2.delta[a]
        if det:
            delta[a] = tuple(pair(r1[p1], r2[p2]) for p1 in range(n1) for p2 in range(n2))
        else:
            delta[a] = tuple(
                frozenset(pair(x, y) for x in r1[p1] for y in r2[p2]) for p1 in range(n1) for p2 in range(n2)
            )
    if mode == "intersection":
        accept = frozenset(pair(p, q) for p in m1.accept for q in m2.accept)
    else:
        accept = frozenset(
            pair(p, q) for p in range(n1) for q in range(n2) if p in m1.accept or q in m2.accept
        )
    cls = Dfa if det else Nfa
    return cls(states, tuple(m1.alphabet), plus, pair(m1.neutral, m2.neutral), delta, accept)


def complement(m: Dfa) -> Dfa:
    if not isinstance(m, Dfa):
        raise NotDeterministic("complement requires a deterministic automaton; determinize first")
    return Dfa(m.states, m.alphabet, m.plus, m.neutral, m.delta, frozenset(range(m.size)) - m.accept)


def determinize(m: Automaton, max_subsets: int = DEFAULT_MAX_SUBSETS) -> Dfa:
    """Subset construction over the subsets reachable from {0}."""
    n = as_nfa(m)
    start = frozenset((n.neutral,))
    index = {start: 0}
    subsets = [start]
    plus_rows: list[dict] = [{}]
    delta: dict = {a: {} for a in n.alphabet}
    todo = deque([0])

    def intern(s):
        i = index.get(s)
        if i is None:
            if len(subsets) >= max_subsets:
                raise CapExceeded("number of reachable subsets", max_subsets)
            i = index[s] = len(subsets)
            subsets.append(s)
            plus_rows.append({})
            todo.append(i)
        return i

    while todo:
        i = todo.popleft()
        s = subsets[i]
        for a in n.alphabet:
            row = n.delta[a]
            delta[a][i] = intern(frozenset().union(*(row[q] for q in s)) if s else frozenset())
        for j in range(len(subsets)):
            if j in plus_rows[i] and i in plus_rows[j]:
                continue
            t = subsets[j]
            plus_rows[i][j] = intern(set_sum(n.plus, s, t))
            plus_rows[j][i] = intern(set_sum(n.plus, t, s))
    k = len(subsets)
    plus = tuple(tuple(plus_rows[i][j] for j in range(k)) for i in range(k))
    names = tuple("{" + ",".join(n.states[q] for q in sorted(s)) + "}" for s in subsets)
    trans = {a: tuple(delta[a][i] for i in range(k)) for a in n.alphabet}
    accept = frozenset(i for i, s in enumerate(subsets) if s & n.accept)
    return Dfa(names, n.alphabet, plus, 0, trans, accept)


def inverse_hom(m: Dfa, hom: Mapping[str, Context]) -> Dfa:
    """Automaton for the forests whose image under the letter-to-context map lies in L(m)."""
    m = require_dfa(m)
    for a, c in hom.items():
        if not isinstance(c, Context):
            raise TypeError(f"image of {a!r} must be a Context")
    delta = {a: tuple(eval_context(m, c, q) for q in range(m.size)) for a, c in hom.items()}
    return Dfa(m.states, tuple(hom), m.plus, m.neutral, delta, m.accept)


def globally(m: Dfa) -> Dfa:
    """Forests in L(m) all of whose subtrees have children forests in L(m)."""
    m = require_dfa(m)
    n = m.size
    sink = n
    plus = tuple(tuple(m.plus[p]) + (sink,) for p in range(n)) + ((sink,) * (n + 1),)
    delta = {
        a: tuple(row[q] if q in m.accept else sink for q in range(n)) + (sink,) for a, row in m.delta.items()
    }
    return Dfa(m.states + (_fresh("bot", m.states),), m.alphabet, plus, m.neutral, delta, m.accept)


def split_neutral(m: Automaton, force: bool = False) -> Automaton:
    """Ensure no nonempty forest evaluates to the neutral state.

    Returns ``m`` unchanged when that already holds (and ``force`` is off);
    otherwise adjoins a fresh neutral element and demotes the old one to an
    ordinary state.  Old state indices are kept.
    """
    if not force and m.neutral not in nonempty_values(m):
        return m
    n = m.size
    new = n
    plus = tuple(tuple(m.plus[p]) + (p,) for p in range(n)) + (tuple(range(n)) + (new,),)
    delta = {a: tuple(row) + (row[m.neutral],) for a, row in m.delta.items()}
    accept = m.accept | ({new} if m.neutral in m.accept else set())
    states = m.states + (_fresh(m.states[m.neutral] + "_", m.states),)
    return type(m)(states, m.alphabet, plus, new, delta, frozenset(accept))


# ------------------------------------------------------------- utilities


def relabel_states(m: Automaton, perm) -> Automaton:
    """Permute state indices: old state i becomes new state perm[i]."""
    n = m.size
    inv = [0] * n
    for i, p in enumerate(perm):
        inv[p] = i
    states = tuple(m.states[inv[j]] for j in range(n))
    plus = tuple(tuple(perm[m.plus[inv[i]][inv[j]]] for j in range(n)) for i in range(n))
    if isinstance(m, Dfa):
        delta = {a: tuple(perm[row[inv[j]]] for j in range(n)) for a, row in m.delta.items()}
    else:
        delta = {a: tuple(frozenset(perm[q] for q in row[inv[j]]) for j in range(n)) for a, row in m.delta.items()}
    return type(m)(states, m.alphabet, plus, perm[m.neutral], delta, frozenset(perm[q] for q in m.accept))


def rename_states(m: Automaton, names) -> Automaton:
    names = tuple(names)
    if len(names) != m.size or len(set(names)) != len(names):
        raise ValueError("need one distinct name per state")
    return type(m)(names, m.alphabet, m.plus, m.neutral, m.delta, m.accept)


def with_accept(m: Automaton, accept) -> Automaton:
    return type(m)(m.states, m.alphabet, m.plus, m.neutral, m.delta, frozenset(accept))


def extend_alphabet(m: Automaton, letters, target: str | int | None = None) -> Automaton:
    """Add letters whose transitions all go to ``target`` (default: a fresh absorbing sink)."""
    new = [a for a in letters if a not in m.delta]
    if not new:
        return m
    if target is None:
        n = m.size
        sink = n
        plus = tuple(tuple(m.plus[p]) + (sink,) for p in range(n)) + ((sink,) * (n + 1),)
        if isinstance(m, Dfa):
            delta = {a: tuple(row) + (sink,) for a, row in m.delta.items()}
            delta.update({a: (sink,) * (n + 1) for a in new})
        else:
            delta = {a: tuple(row) + (frozenset((sink,)),) for a, row in m.delta.items()}
            delta.update({a: (frozenset((sink,)),) * (n + 1) for a in new})
        states = m.states + (_fresh("sink", m.states),)
        return type(m)(states, m.alphabet + tuple(new), plus, m.neutral, delta, m.accept)
    t = m.index(target) if isinstance(target, str) else target
    delta = dict(m.delta)
    for a in new:
        delta[a] = (t,) * m.size if isinstance(m, Dfa) else (frozenset((t,)),) * m.size
    return type(m)(m.states, m.alphabet + tuple(new), m.plus, m.neutral, delta, m.accept)


def tuple_states(*ms):
    """All tuples of state indices, in row-major order."""
    return list(cartesian(*(range(m.size) for m in ms)))
