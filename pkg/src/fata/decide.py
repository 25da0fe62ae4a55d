"""Decision procedures: emptiness, equivalence, inclusion, membership,
intersection emptiness, and the problems with a given or unknown substitution.
"""

from __future__ import annotations

import heapq
from collections import deque
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from itertools import combinations, product as cartesian
from typing import Any, Optional

from .automata import (
    DEFAULT_MAX_SUBSETS,
    Dfa,
    as_nfa,
    complement,
    determinize,
    member,
    reachable_states,
    require_dfa,
)
from .errors import AlphabetMismatch, CapExceeded, Undecidable
from .forest import Forest, Tree

DEFAULT_MAX_STATES = 1 << 16
DEFAULT_MAX_SEARCH = 1 << 16


@dataclass
class Decision:
    """Answer to a yes/no question, with a verified witness when one exists.

    ``verdict`` is True for "yes" to the question the procedure asks (is the
    language empty, are they equivalent, ...).
    """

    verdict: bool
    witness: Optional[Forest] = None
    counters: dict = field(default_factory=dict)
    marked: Optional[frozenset] = None
    partition: Optional[dict] = None
    certificate: Any = None

    def __bool__(self):
        return self.verdict


class UnionFind:
    """Disjoint sets with union by rank, path compression and operation counters."""

    def __init__(self, n: int):
        self.parent = list(range(n))
        self.rank = [0] * n
        self.unions = 0
        self.finds = 0

    def _root(self, x: int) -> int:
        root = x
        while self.parent[root] != root:
            root = self.parent[root]
        while self.parent[x] != root:
            self.parent[x], x = root, self.parent[x]
        return root

    def find(self, x: int) -> int:
        return self._root(x)

    def same(self, x: int, y: int) -> bool:
        """One logical Find query comparing the classes of ``x`` and ``y``."""
        self.finds += 1
        return self._root(x) == self._root(y)

    def union(self, x: int, y: int) -> None:
        rx, ry = self._root(x), self._root(y)
        if rx == ry:
            return
        self.unions += 1
        if self.rank[rx] < self.rank[ry]:
            rx, ry = ry, rx
        self.parent[ry] = rx
        if self.rank[rx] == self.rank[ry]:
            self.rank[rx] += 1


# ---------------------------------------------------------------- emptiness


def _mark(neutral, letters, plus, step, max_states=None, stop=None):
    """Marking closure of the neutral state under sums and transitions.

    States are finalized in order of the size of their smallest known
    witness, so the recorded forest for each marked state is minimal.
    With ``stop``, marking ends at the first finalized state satisfying it.
    Returns (witness per marked state, number of set-insertion operations).
    """
    found: dict = {}
    order: list = []
    heap = [(0, 0, neutral, ())]
    seq = 1
    ops = 0
    while heap:
        size, _, q, f = heapq.heappop(heap)
        if q in found:
            continue
        found[q] = (size, f)
        order.append(q)
        if stop is not None and stop(q):
            break
        if max_states is not None and len(order) > max_states:
            raise CapExceeded("number of reachable states", max_states)
        for p in order:
            sp, fp = found[p]
            for r, g in ((plus(p, q), fp + f), (plus(q, p), f + fp)):
                ops += 1
                if r not in found:
                    heapq.heappush(heap, (sp + size, seq, r, g))
                    seq += 1
        for a in letters:
            ops += 1
            for r in step(a, q):
                if r not in found:
                    heapq.heappush(heap, (size + 1, seq, r, (Tree(a, f),)))
                    seq += 1
    return {q: found[q][1] for q in order}, ops


def is_empty(m) -> Decision:
    """Emptiness by marking; a minimal witness is returned when nonempty."""
    n = as_nfa(m)
    plus = n.plus
    found, ops = _mark(n.neutral, n.alphabet, lambda p, q: plus[p][q], lambda a, q: n.delta[a][q])
    marked = frozenset(found)
    hits = [q for q in found if q in n.accept]
    counters = {"insertions": ops}
    if not hits:
        return Decision(True, None, counters, marked)
    w = found[hits[0]]
    if not member(m, w):
        raise AssertionError(f"emptiness witness failed to verify: {w!r}")
    return Decision(False, w, counters, marked)


def _lazy_intersection(ms, max_states=DEFAULT_MAX_STATES) -> Decision:
    """Emptiness of the intersection, exploring only reachable product states."""
    ms = [as_nfa(m) for m in ms]
    letters = ms[0].alphabet
    for m in ms[1:]:
        if set(m.alphabet) != set(letters):
            raise AlphabetMismatch("automata must share one alphabet")
    neutral = tuple(m.neutral for m in ms)
    if len(ms) == 2:
        t1, t2 = ms[0].plus, ms[1].plus

        def plus(p, q):
            return (t1[p[0]][q[0]], t2[p[1]][q[1]])

    else:

        def plus(p, q):
            return tuple(m.plus[a][b] for m, a, b in zip(ms, p, q))

    def step(a, q):
        return cartesian(*(m.delta[a][s] for m, s in zip(ms, q)))

    def accepted(q):
        return all(s in m.accept for m, s in zip(ms, q))

    found, ops = _mark(neutral, letters, plus, step, max_states, stop=accepted)
    hits = [q for q in found if accepted(q)]
    counters = {"insertions": ops, "states": len(found)}
    if not hits:
        return Decision(True, None, counters, frozenset(found))
    return Decision(False, found[hits[0]], counters, frozenset(found))


def intersect_empty(ms, max_states: int = DEFAULT_MAX_STATES) -> Decision:
    """Is the intersection of the languages empty?  ``[]`` denotes all forests."""
    ms = list(ms)
    if not ms:
        return Decision(False, ())
    d = _lazy_intersection(ms, max_states)
    if d.witness is not None and not all(member(m, d.witness) for m in ms):
        raise AssertionError("intersection witness failed to verify")
    return d


def subset(m1, m2, max_states: int = DEFAULT_MAX_STATES) -> Decision:
    """Is L(m1) contained in L(m2)?  ``m2`` must be deterministic."""
    m2 = require_dfa(m2, "right-hand automaton")
    if set(m1.alphabet) != set(m2.alphabet):
        raise AlphabetMismatch(f"alphabets differ: {sorted(m1.alphabet)} vs {sorted(m2.alphabet)}")
    d = _lazy_intersection([m1, complement(m2)], max_states)
    if d.witness is not None and not (member(m1, d.witness) and not member(m2, d.witness)):
        raise AssertionError("subset witness failed to verify")
    return d


# -------------------------------------------------------------- equivalence


def equivalent(m1: Dfa, m2: Dfa) -> Decision:
    """Union-find equivalence test for deterministic forest automata.

    Explores triples (p1, p2, w) where w is a forest reaching p1 in ``m1``
    and p2 in ``m2``; merged pairs are combined with every earlier merged
    pair in both orders.
    """
    m1 = require_dfa(m1, "first automaton")
    m2 = require_dfa(m2, "second automaton")
    if set(m1.alphabet) != set(m2.alphabet):
        raise AlphabetMismatch(f"alphabets differ: {sorted(m1.alphabet)} vs {sorted(m2.alphabet)}")
    off = m1.size
    uf = UnionFind(m1.size + m2.size)
    todo = deque([(m1.neutral, m2.neutral, ())])
    merged: list = []
    letters = m1.alphabet
    while todo:
        p1, p2, w = todo.popleft()
        if uf.same(p1, off + p2):
            continue
        if (p1 in m1.accept) != (p2 in m2.accept):
            counters = {"unions": uf.unions, "finds": uf.finds}
            if member(m1, w) == member(m2, w):
                raise AssertionError(f"equivalence witness failed to verify: {w!r}")
            return Decision(False, w, counters)
        uf.union(p1, off + p2)
        merged.append((p1, p2, w))
        for a in letters:
            todo.append((m1.delta[a][p1], m2.delta[a][p2], (Tree(a, w),)))
        for q1, q2, u in merged:
            todo.append((m1.plus[q1][p1], m2.plus[q2][p2], u + w))
            todo.append((m1.plus[p1][q1], m2.plus[p2][q2], w + u))
    partition = {("L", q): uf.find(q) for q in range(m1.size)}
    partition.update({("R", q): uf.find(off + q) for q in range(m2.size)})
    counters = {"unions": uf.unions, "finds": uf.finds}
    return Decision(True, None, counters, partition=partition, certificate=merged)


def congruence_violations(m1: Dfa, m2: Dfa, partition: dict) -> list:
    """Pairs violating the congruence property of a final union-find partition.

    For every cross pair (p1, p2) and (q1, q2) in common classes, the
    successors under each letter and the sums must again share a class.
    """
    classes: dict = {}
    for (side, q), root in partition.items():
        classes.setdefault(root, {"L": [], "R": []})[side].append(q)
    pairs = [(p1, p2) for c in classes.values() for p1 in c["L"] for p2 in c["R"]]
    bad = []
    for p1, p2 in pairs:
        for a in m1.alphabet:
            if partition[("L", m1.delta[a][p1])] != partition[("R", m2.delta[a][p2])]:
                bad.append(("delta", a, p1, p2))
        for q1, q2 in pairs:
            if partition[("L", m1.plus[p1][q1])] != partition[("R", m2.plus[p2][q2])]:
                bad.append(("plus", p1, p2, q1, q2))
    return bad


# ------------------------------------------------------------- membership


def is_member(m, f: Forest) -> bool:
    """Evaluation-based membership; unknown labels raise UnknownSymbolError."""
    return member(m, f)


# ------------------------------------------------------- given substitution


def _subst_signature(l, sigma, r=None):
    from .substitution import Substitution

    if not isinstance(sigma, Substitution):
        raise TypeError("expected a Substitution")
    base = set(sigma.alphabet)
    if set(l.alphabet) != base | set(sigma.vars):
        raise AlphabetMismatch(
            f"left automaton alphabet {sorted(l.alphabet)} must be the base letters plus the variables"
        )
    if r is not None and set(r.alphabet) != base:
        raise AlphabetMismatch(f"right automaton alphabet {sorted(r.alphabet)} must be the base letters")


def subst_subset(l, sigma, r, method: str = "image", max_states: int = DEFAULT_MAX_STATES) -> Decision:
    """Is sigma(L) contained in R?

    ``method="image"`` intersects the image automaton of L with the
    complement of R; the witness is then a forest of sigma(L) outside R.
    ``method="preimage"`` instead intersects L with the preimage of the
    complement of R; its witness is a forest of L with an image outside R.
    Neither route determinizes anything.
    """
    from .substitution import subst_image_nfa, subst_preimage_nfa

    l = require_dfa(l, "left automaton")
    r = require_dfa(r, "right automaton")
    _subst_signature(l, sigma, r)
    if method == "image":
        image = subst_image_nfa(l, sigma, max_states=max_states)
        d = _lazy_intersection([image, complement(r)], max_states)
        if d.witness is not None and not (member(image, d.witness) and not member(r, d.witness)):
            raise AssertionError("substitution witness failed to verify")
        return d
    if method == "preimage":
        pre = subst_preimage_nfa(complement(r), sigma)
        d = _lazy_intersection([l, pre], max_states)
        if d.witness is not None and not (member(l, d.witness) and member(pre, d.witness)):
            raise AssertionError("substitution witness failed to verify")
        return d
    raise ValueError(f"unknown method {method!r}")


def _image_dfa(l, sigma, max_states, max_subsets) -> Dfa:
    from .substitution import subst_image_nfa

    return determinize(subst_image_nfa(l, sigma, max_states=max_states), max_subsets)


def subst_superset(l, sigma, r, max_states=DEFAULT_MAX_STATES, max_subsets=DEFAULT_MAX_SUBSETS) -> Decision:
    """Is R contained in sigma(L)?  Determinizes the image automaton."""
    l = require_dfa(l, "left automaton")
    r = require_dfa(r, "right automaton")
    _subst_signature(l, sigma, r)
    return subset(r, _image_dfa(l, sigma, max_states, max_subsets), max_states)


def subst_equal(l, sigma, r, max_states=DEFAULT_MAX_STATES, max_subsets=DEFAULT_MAX_SUBSETS) -> Decision:
    """Is sigma(L) equal to R?  The witness, if any, lies in exactly one of them."""
    d = subst_subset(l, sigma, r, max_states=max_states)
    if not d.verdict:
        return d
    return subst_superset(l, sigma, r, max_states, max_subsets)


def subst_subset_both(l, sigma, r, max_states=DEFAULT_MAX_STATES, max_subsets=DEFAULT_MAX_SUBSETS) -> Decision:
    """Is sigma(L) contained in sigma(R), with L and R both over letters plus variables?"""
    l = require_dfa(l, "left automaton")
    r = require_dfa(r, "right automaton")
    _subst_signature(l, sigma)
    _subst_signature(r, sigma)
    return subset(_image_dfa(l, sigma, max_states, max_subsets), _image_dfa(r, sigma, max_states, max_subsets), max_states)


# ----------------------------------------------------- unknown substitution


def _variables(l, r) -> tuple:
    extra = set(r.alphabet) - set(l.alphabet)
    if extra:
        raise AlphabetMismatch(f"right automaton uses letters {sorted(extra)} unknown to the left one")
    return tuple(a for a in l.alphabet if a not in set(r.alphabet))


def _candidates(variables, domain, singletons_only):
    """Assignments ordered by total class size, then lexicographically per variable."""
    domain = sorted(domain)
    if singletons_only:
        subsets = [frozenset((q,)) for q in domain]
    else:
        subsets = [frozenset(c) for k in range(1, len(domain) + 1) for c in combinations(domain, k)]
    if not variables:
        return [()]
    combos = list(cartesian(range(len(subsets)), repeat=len(variables)))
    combos.sort(key=lambda c: (sum(len(subsets[i]) for i in c), c))
    return [tuple(subsets[i] for i in c) for c in combos]


def _check_subset(args):
    l, r, variables, classes = args
    from .substitution import SaturatedSubstitution, saturated_to_substitution

    sat = SaturatedSubstitution(r, dict(zip(variables, classes)))
    return subst_subset(l, saturated_to_substitution(sat), r, method="preimage").verdict


def _check_equal(args):
    l, r, variables, classes, max_states, max_subsets = args
    from .substitution import SaturatedSubstitution, saturated_to_substitution

    sat = SaturatedSubstitution(r, dict(zip(variables, classes)))
    sigma = saturated_to_substitution(sat)
    if not subst_subset(l, sigma, r, method="preimage").verdict:
        return False
    return subst_superset(l, sigma, r, max_states, max_subsets).verdict


def _first_hit(check, jobs_args, jobs):
    """Index of the first argument (in order) for which ``check`` holds, or None."""
    if jobs <= 1:
        for i, a in enumerate(jobs_args):
            if check(a):
                return i
        return None
    batch = jobs * 4
    with ProcessPoolExecutor(max_workers=jobs) as pool:
        for start in range(0, len(jobs_args), batch):
            chunk = jobs_args[start : start + batch]
            for i, ok in enumerate(pool.map(check, chunk)):
                if ok:
                    return start + i
    return None


def exists_subst_subset(l, r, max_search: int = DEFAULT_MAX_SEARCH, jobs: int = 1) -> Decision:
    """Is there a substitution sigma with sigma(L) contained in R?

    Only saturated substitutions need to be tried, and since shrinking a
    substitution shrinks its image, only those with one state per variable.
    The certificate is the first satisfying SaturatedSubstitution.
    """
    from .substitution import SaturatedSubstitution

    l = require_dfa(l, "left automaton")
    r = require_dfa(r, "right automaton")
    variables = _variables(l, r)
    domain = reachable_states(r)
    count = len(domain) ** len(variables)
    if count > max_search:
        raise CapExceeded(f"search over {count} candidate substitutions", max_search)
    cands = _candidates(variables, domain, singletons_only=True)
    hit = _first_hit(_check_subset, [(l, r, variables, c) for c in cands], jobs)
    counters = {"candidates": len(cands) if hit is None else hit + 1}
    if hit is None:
        return Decision(False, counters=counters)
    return Decision(True, counters=counters, certificate=SaturatedSubstitution(r, dict(zip(variables, cands[hit]))))


def exists_subst_equal(
    l, r, max_search: int = DEFAULT_MAX_SEARCH, jobs: int = 1,
    max_states: int = DEFAULT_MAX_STATES, max_subsets: int = DEFAULT_MAX_SUBSETS,
) -> Decision:
    """Is there a substitution sigma with sigma(L) equal to R?

    Searches all saturated substitutions by increasing class sizes.
    """
    from .substitution import SaturatedSubstitution

    l = require_dfa(l, "left automaton")
    r = require_dfa(r, "right automaton")
    variables = _variables(l, r)
    domain = reachable_states(r)
    count = (2 ** len(domain) - 1) ** len(variables)
    if count > max_search:
        raise CapExceeded(f"search over {count} candidate substitutions", max_search)
    cands = _candidates(variables, domain, singletons_only=False)
    args = [(l, r, variables, c, max_states, max_subsets) for c in cands]
    hit = _first_hit(_check_equal, args, jobs)
    counters = {"candidates": len(cands) if hit is None else hit + 1}
    if hit is None:
        return Decision(False, counters=counters)
    return Decision(True, counters=counters, certificate=SaturatedSubstitution(r, dict(zip(variables, cands[hit]))))


def exists_subst_equal_both(l, r):
    """Existence of sigma with sigma(L) = sigma(R) is undecidable in general."""
    raise Undecidable("whether some substitution makes sigma(L) equal sigma(R) is undecidable in general")
