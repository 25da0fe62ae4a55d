"""Relational leaf substitutions and the automata built from them.

A :class:`Substitution` maps each variable to a nonempty recognizable forest
language over the base alphabet.  Applied to a forest whose variables occur
only at leaves, every variable leaf is replaced independently by some member
of its language.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass
from typing import Mapping

from .automata import (
    Dfa,
    Nfa,
    as_nfa,
    reachable_states,
    require_dfa,
    split_neutral,
    with_accept,
    _fresh,
)
from .errors import AlphabetMismatch, CapExceeded, SubstitutionError

DEFAULT_MAX_STATES = 1 << 16
DEFAULT_MAX_STEPS = 10_000


@dataclass(frozen=True)
class Substitution:
    alphabet: tuple
    values: Mapping  # variable -> Nfa over ``alphabet``, in declaration order

    def __post_init__(self):
        from .decide import is_empty

        alphabet = tuple(self.alphabet)
        object.__setattr__(self, "alphabet", alphabet)
        values = {x: as_nfa(v) for x, v in self.values.items()}
        object.__setattr__(self, "values", values)
        for x, v in values.items():
            if x in alphabet:
                raise SubstitutionError(f"variable {x!r} is also a letter of the base alphabet")
            if set(v.alphabet) != set(alphabet):
                raise AlphabetMismatch(
                    f"value of {x!r} is over {sorted(v.alphabet)}, expected {sorted(alphabet)}"
                )
            if is_empty(v).verdict:
                raise SubstitutionError(f"value of {x!r} is the empty language")

    @property
    def vars(self) -> tuple:
        return tuple(self.values)


@dataclass(frozen=True)
class SaturatedSubstitution:
    """Substitution sending ``x`` to all forests whose value in ``subject`` lies in ``classes[x]``."""

    subject: Dfa
    classes: Mapping  # variable -> frozenset of state indices

    def describe(self) -> dict:
        return {x: sorted(self.subject.states[q] for q in t) for x, t in self.classes.items()}


# ------------------------------------------------------------- image NFA

BOT = ("bot",)
_BOT_WORD = (BOT,)


class ImageConstruction:
    """Nondeterministic automaton for the image of L(m) under a substitution.

    States are reduced words over the letters

    * ``("q", i)``     a state of ``m``,
    * ``("v", x, j)``  a state of the automaton for ``sigma(x)``,
    * ``("s", x)``     a marker opening a substitute for ``x``,
    * ``BOT``          failure,

    where adjacent letters from the same automaton are added together.  The
    empty word is the neutral element.  Reduction rules, applied to fixpoint:

    * ``s_x v e p -> (x in m) p`` when ``e`` accepts in ``sigma(x)`` and ``p``
      is not from ``sigma(x)``; ``-> BOT`` when ``e`` rejects;
    * ``s_x p -> (x in m) p`` / ``BOT`` likewise, for the empty substitute;
    * ``p v -> BOT`` when ``v`` is from ``sigma(x)`` and ``p`` is a state
      letter not from ``sigma(x)``;
    * ``BOT`` absorbs everything.

    A trailing ``s_x v`` stays open: the substitute may continue to the right.
    """

    def __init__(self, m: Dfa, sigma: Substitution, max_states=DEFAULT_MAX_STATES, max_steps=DEFAULT_MAX_STEPS):
        m = require_dfa(m, "subject automaton")
        if set(m.alphabet) != set(sigma.alphabet) | set(sigma.vars):
            raise AlphabetMismatch(
                f"subject alphabet {sorted(m.alphabet)} must be the base alphabet plus the variables"
            )
        self.m = split_neutral(m)
        self.sigma = sigma
        self.values = {x: split_neutral(v) for x, v in sigma.values.items()}
        self.letters = tuple(sigma.alphabet)
        self.max_states = max_states
        self.max_steps = max_steps
        self.x_value = {x: self.m.delta[x][self.m.neutral] for x in sigma.vars}
        self._norm_cache: dict = {}
        self._pad_cache: dict = {}
        self._r_cache: dict = {}

    # -- the rewriting system

    def _component(self, letter):
        kind = letter[0]
        if kind == "q":
            return "q"
        if kind == "v":
            return ("v", letter[1])
        return None

    def _merge(self, a, b):
        """Sum of two letters from one automaton, or None for the empty word."""
        if a[0] == "q":
            r = self.m.plus[a[1]][b[1]]
            return None if r == self.m.neutral else ("q", r)
        v = self.values[a[1]]
        r = v.plus[a[2]][b[2]]
        return None if r == v.neutral else ("v", a[1], r)

    def _close(self, x, inner):
        """Replacement for ``s_x inner`` followed by a letter outside sigma(x)."""
        v = self.values[x]
        state = v.neutral if inner is None else inner[2]
        if state in v.accept:
            xv = self.x_value[x]
            return [] if xv == self.m.neutral else [("q", xv)]
        return None

    def normalize(self, word: tuple) -> tuple:
        """Leftmost rewriting to normal form.

        Every rule looks at a window of at most three letters, so after a
        rewrite at position i scanning resumes at i-2.
        """
        hit = self._norm_cache.get(word)
        if hit is not None:
            return hit
        if BOT in word:
            self._norm_cache[word] = _BOT_WORD
            return _BOT_WORD
        w = list(word)
        steps = 0
        i = 0
        while i < len(w) - 1:
            a, b = w[i], w[i + 1]
            ka, kb = a[0], b[0]
            rep = False  # replacement for w[i:i+n], or False when nothing applies
            n = 2
            if ka == kb == "q" or (ka == kb == "v" and a[1] == b[1]):
                r = self._merge(a, b)
                rep = [] if r is None else [r]
            elif kb == "v" and ka != "s":
                rep = None
            elif ka == "s":
                x = a[1]
                if kb == "v" and b[1] == x:
                    if i + 2 < len(w):
                        c = w[i + 2]
                        if not (c[0] == "v" and c[1] == x):
                            rep = self._close(x, b)
                else:
                    rep = self._close(x, None)
                    n = 1
            if rep is False:
                i += 1
                continue
            steps += 1
            if steps > self.max_steps:
                raise CapExceeded("rewriting steps for one word", self.max_steps)
            if rep is None:
                w = [BOT]
                break
            w[i : i + n] = rep
            i = max(0, i - 2)
        out = tuple(w)
        self._norm_cache[word] = out
        return out

    def concat(self, u: tuple, v: tuple) -> tuple:
        if u == _BOT_WORD or v == _BOT_WORD:
            return _BOT_WORD
        return self.normalize(u + v)

    def pad(self, word: tuple) -> frozenset:
        """All reduced words ``s... + word + s...`` with any marker runs on either side."""
        hit = self._pad_cache.get(word)
        if hit is not None:
            return hit
        seen = {word}
        todo = [word]
        markers = [("s", x) for x in self.sigma.vars]
        while todo:
            w = todo.pop()
            if w == _BOT_WORD:
                continue
            for s in markers:
                for nw in (self.normalize((s,) + w), self.normalize(w + (s,))):
                    if nw not in seen:
                        seen.add(nw)
                        todo.append(nw)
        out = frozenset(seen)
        self._pad_cache[word] = out
        return out

    def r(self, word: tuple):
        """State of ``m`` denoted by a complete word, or None for failure.

        Words with an unfinished substitute on the left fail; an open
        substitute on the right is closed.
        """
        if word in self._r_cache:
            return self._r_cache[word]
        w = list(word)
        result = None
        if w == [BOT]:
            pass
        elif not w:
            result = self.m.neutral
        elif w[0][0] == "v":
            pass
        else:
            if len(w) >= 1 and w[-1][0] == "s":
                rep = self._close(w[-1][1], None)
                w = None if rep is None else w[:-1] + rep
            elif len(w) >= 2 and w[-2][0] == "s" and w[-1][0] == "v" and w[-1][1] == w[-2][1]:
                rep = self._close(w[-2][1], w[-1])
                w = None if rep is None else w[:-2] + rep
            if w is not None:
                w = list(self.normalize(tuple(w)))
                if not w:
                    result = self.m.neutral
                elif len(w) == 1 and w[0][0] == "q":
                    result = w[0][1]
        self._r_cache[word] = result
        return result

    def r_closure(self, word: tuple) -> frozenset:
        """States of ``m`` denoted by ``S + word + S``."""
        return frozenset(q for q in (self.r(w) for w in self.pad(word)) if q is not None)

    def step(self, word: tuple, a: str) -> frozenset:
        m = self.m
        direct = {("q", m.delta[a][q]) for q in self.r_closure(word)}
        inner = set()
        if word == ():
            for x, v in self.values.items():
                inner |= {("v", x, j) for j in v.delta[a][v.neutral]}
        elif len(word) == 1 and word[0][0] == "v":
            _, x, i = word[0]
            inner |= {("v", x, j) for j in self.values[x].delta[a][i]}
        out = set()
        for d in direct | inner:
            d = () if d == ("q", m.neutral) else (d,)
            out |= self.pad(d)
        return frozenset(out)

    def accepting(self, word: tuple) -> bool:
        return bool(self.r_closure(word) & self.m.accept)

    # -- assembling the automaton

    def build(self) -> Nfa:
        index = {(): 0}
        words = [()]
        todo = deque([0])
        plus_rows: list = [{}]

        def intern(w):
            i = index.get(w)
            if i is None:
                if len(words) >= self.max_states:
                    raise CapExceeded("image automaton states", self.max_states)
                i = index[w] = len(words)
                words.append(w)
                plus_rows.append({})
                todo.append(i)
            return i

        trans: dict = {a: {} for a in self.letters}
        while todo:
            i = todo.popleft()
            w = words[i]
            for a in self.letters:
                trans[a][i] = frozenset(intern(t) for t in self.step(w, a))
            for j in range(len(words)):
                if j in plus_rows[i] and i in plus_rows[j]:
                    continue
                plus_rows[i][j] = intern(self.concat(w, words[j]))
                plus_rows[j][i] = intern(self.concat(words[j], w))
        k = len(words)
        plus = tuple(tuple(plus_rows[i][j] for j in range(k)) for i in range(k))
        delta = {a: tuple(trans[a][i] for i in range(k)) for a in self.letters}
        accept = frozenset(i for i, w in enumerate(words) if self.accepting(w))
        self.words = tuple(words)
        return Nfa(tuple(self.word_name(w) for w in words), self.letters, plus, 0, delta, accept)

    def word_name(self, w: tuple) -> str:
        if not w:
            return "0"
        parts = []
        for letter in w:
            if letter == BOT:
                parts.append("bot")
            elif letter[0] == "q":
                parts.append(self.m.states[letter[1]])
            elif letter[0] == "v":
                parts.append(f"{letter[1]}:{self.values[letter[1]].states[letter[2]]}")
            else:
                parts.append(f"s_{letter[1]}")
        return "+".join(parts)


def subst_image_nfa(m: Dfa, sigma: Substitution, max_states: int = DEFAULT_MAX_STATES) -> Nfa:
    """Nfa for the image of L(m) under ``sigma``; ``m`` is over base letters plus variables."""
    return ImageConstruction(m, sigma, max_states=max_states).build()


# ---------------------------------------------------------- preimage NFA


def _values_reached(m: Nfa, value: Nfa) -> frozenset:
    """States of ``m`` reached by some forest accepted by ``value``."""
    from .decide import _mark

    def plus(p, q):
        return (m.plus[p[0]][q[0]], value.plus[p[1]][q[1]])

    def step(a, q):
        return [(x, y) for x in m.delta[a][q[0]] for y in value.delta[a][q[1]]]

    found, _ = _mark((m.neutral, value.neutral), m.alphabet, plus, step)
    return frozenset(p for p, q in found if q in value.accept)


def subst_preimage_nfa(m, sigma: Substitution) -> Nfa:
    """Nfa over base letters plus variables for the forests whose image meets L(m).

    A variable leaf nondeterministically takes any value of ``m`` reached by
    a member of its language.  Variables at inner nodes are rejected; when a
    nonempty forest can evaluate to the neutral state, a fresh neutral is
    adjoined first so that leaves are recognisable.
    """
    if set(m.alphabet) != set(sigma.alphabet):
        raise AlphabetMismatch(f"automaton alphabet {sorted(m.alphabet)} differs from {sorted(sigma.alphabet)}")
    base = as_nfa(m)
    reach = {x: _values_reached(base, v) for x, v in sigma.values.items()}
    if sigma.vars:
        # a variable leaf whose substitute is 0 must not look like the empty forest
        force = any(base.neutral in r for r in reach.values())
        base = split_neutral(base, force=force)
    delta = dict(base.delta)
    empty = frozenset()
    for x, r in reach.items():
        delta[x] = tuple(r if q == base.neutral else empty for q in range(base.size))
    return Nfa(base.states, base.alphabet + sigma.vars, base.plus, base.neutral, delta, base.accept)


# ------------------------------------------------------------ saturation


def saturate(sigma: Substitution, r: Dfa) -> SaturatedSubstitution:
    """Classes ``T_x = { f^R : f in sigma(x) }``."""
    r = require_dfa(r, "target automaton")
    if set(r.alphabet) != set(sigma.alphabet):
        raise AlphabetMismatch("substitution values and target must share the base alphabet")
    rn = as_nfa(r)
    classes = {x: _values_reached(rn, v) for x, v in sigma.values.items()}
    return SaturatedSubstitution(r, classes)


def saturated_to_substitution(s: SaturatedSubstitution) -> Substitution:
    reach = reachable_states(s.subject)
    for x, t in s.classes.items():
        if not t & reach:
            raise SubstitutionError(f"class of {x!r} contains no reachable state, so its language is empty")
    values = {x: with_accept(s.subject, t) for x, t in s.classes.items()}
    return Substitution(s.subject.alphabet, values)


# ------------------------------------------------------ union via markers


def union_as_subst(ls, markers=None):
    """Automaton M over letters plus markers and a homomorphic substitution
    with ``sigma(M) = L_1 ∪ ... ∪ L_k``.

    Every node of a forest in L(M) carries a marker ``m_i`` as its leftmost
    child, all with the same ``i``; the substitution erases the markers.
    """
    ls = [require_dfa(m, "union operand") for m in ls]
    if not ls:
        raise ValueError("need at least one language")
    letters = tuple(ls[0].alphabet)
    for m in ls[1:]:
        if set(m.alphabet) != set(letters):
            raise AlphabetMismatch("all operands must share one alphabet")
    k = len(ls)
    if markers is None:
        markers = []
        for i in range(1, k + 1):
            markers.append(_fresh(f"m{i}", set(letters) | set(markers)))
    markers = tuple(markers)
    if set(markers) & set(letters) or len(set(markers)) != k:
        raise ValueError("markers must be fresh and distinct")

    # state layout: 0 neutral, 1 bot, then (q, i) and (q, i') blocks
    names = ["0", "bot"]
    code = {}
    for i, m in enumerate(ls):
        for primed in (False, True):
            for q in range(m.size):
                code[(i, q, primed)] = len(names)
                names.append(f"{m.states[q]}@{i + 1}{chr(39) if primed else ''}")
    n = len(names)
    plus = [[1] * n for _ in range(n)]
    for s in range(n):
        plus[0][s] = s
        plus[s][0] = s
    for (i, p, primed), c in code.items():
        m = ls[i]
        for q in range(m.size):
            for other in (False, True):
                plus[c][code[(i, q, other)]] = code[(i, m.plus[p][q], primed)]
    delta = {}
    for a in letters:
        row = [1] * n
        for (i, q, primed), c in code.items():
            if primed:
                row[c] = code[(i, ls[i].delta[a][q], False)]
        delta[a] = tuple(row)
    for i, mk in enumerate(markers):
        row = [1] * n
        row[0] = code[(i, ls[i].neutral, True)]
        delta[mk] = tuple(row)
    # primed copies accept too: a lone top-level marker stands for the empty forest
    accept = frozenset(c for (i, q, primed), c in code.items() if q in ls[i].accept)
    big = Dfa(tuple(names), letters + markers, tuple(tuple(r) for r in plus), 0, delta, accept)
    zero = Dfa(("z", "n"), letters, ((0, 1), (1, 1)), 0, {a: (1, 1) for a in letters}, frozenset({0}))
    sigma = Substitution(letters, {mk: zero for mk in markers})
    return big, sigma


# --------------------------------------------------- combining inequalities


def _tagged_union(ms, tags, letters) -> Dfa:
    """Dfa for ``{ tag_i(l) : l in L(ms[i]) }`` over ``letters + tags``.

    State 0 is a fresh neutral: a nonempty untagged forest may evaluate to
    the neutral tuple, and must still not combine with a tagged tree.
    """
    from itertools import product as cartesian

    tuples = list(cartesian(*(range(m.size) for m in ms)))
    index = {t: i + 1 for i, t in enumerate(tuples)}
    top = len(tuples) + 1
    bad = top + 1
    n = top + 2

    def add(i, j):
        if i == 0:
            return j
        if j == 0:
            return i
        if i < top and j < top:
            a, b = tuples[i - 1], tuples[j - 1]
            return index[tuple(m.plus[x][y] for m, x, y in zip(ms, a, b))]
        return bad

    plus = tuple(tuple(add(i, j) for j in range(n)) for i in range(n))
    zero = tuple(m.neutral for m in ms)
    current = [zero] + tuples
    delta = {}
    for a in letters:
        delta[a] = tuple(
            index[tuple(m.delta[a][s] for m, s in zip(ms, current[i]))] if i < top else bad for i in range(n)
        )
    for k, tag in enumerate(tags):
        delta[tag] = tuple(
            (top if current[i][k] in ms[k].accept else bad) if i < top else bad for i in range(n)
        )
    names = ("0",) + tuple("(" + ",".join(m.states[s] for m, s in zip(ms, t)) + ")" for t in tuples)
    names += ("tagged", "bad")
    return Dfa(names, tuple(letters) + tuple(tags), plus, 0, delta, frozenset({top}))


def combine_inequalities(ls, rs, tags=None):
    """Single pair (L, R) whose inclusion under any substitution is the
    conjunction of the inclusions ``L_i ⊆ R_i`` under it."""
    ls = [require_dfa(m) for m in ls]
    rs = [require_dfa(m) for m in rs]
    if len(ls) != len(rs) or not ls:
        raise ValueError("need equally many (and at least one) left and right automata")
    letters = tuple(ls[0].alphabet)
    for m in ls + rs:
        if set(m.alphabet) != set(letters):
            raise AlphabetMismatch("all automata must share one alphabet")
    if tags is None:
        tags = []
        for i in range(1, len(ls) + 1):
            tags.append(_fresh(f"i{i}", set(letters) | set(tags)))
    tags = tuple(tags)
    if set(tags) & set(letters) or len(set(tags)) != len(ls):
        raise ValueError("index labels must be fresh and distinct")
    return _tagged_union(ls, tags, letters), _tagged_union(rs, tags, letters)
