"""Brute-force ground truth for tests.

Everything here works by exhaustive enumeration of small forests and direct
application of definitions.  None of it is fast, and none of it shares code
with the constructions it is used to check beyond reading automaton tables.
"""

from __future__ import annotations

from functools import lru_cache
from itertools import product as cartesian

from .automata import Dfa
from .errors import CapExceeded, SubstitutionError
from .forest import Forest, Tree, apply_context, node_count, print_forest

DEFAULT_MAX_FORESTS = 2_000_000


def forest_count(n_letters: int, max_nodes: int) -> int:
    """Number of forests with at most ``max_nodes`` nodes over ``n_letters`` letters."""
    exact = [1]
    for n in range(1, max_nodes + 1):
        # first tree has k nodes: root letter, children forest of k-1 nodes
        exact.append(sum(n_letters * exact[k - 1] * exact[n - k] for k in range(1, n + 1)))
    return sum(exact)


@lru_cache(maxsize=64)
def _by_size(alphabet: tuple, max_nodes: int) -> tuple:
    layers: list[list[Forest]] = [[()]]
    trees: list[list[Tree]] = [[]]
    for n in range(1, max_nodes + 1):
        trees.append([Tree(a, f) for a in alphabet for f in layers[n - 1]])
        layer = []
        for k in range(1, n + 1):
            for t in trees[k]:
                for rest in layers[n - k]:
                    layer.append((t,) + rest)
        layers.append(layer)
    return tuple(tuple(layer) for layer in layers)


def enumerate_forests(alphabet, max_nodes: int, cap: int = DEFAULT_MAX_FORESTS) -> list:
    """All forests with at most ``max_nodes`` nodes, by size then printed form."""
    alphabet = tuple(sorted(set(alphabet)))
    if not alphabet:
        raise ValueError("alphabet must be nonempty")
    if max_nodes < 0:
        raise ValueError("max_nodes must be nonnegative")
    total = forest_count(len(alphabet), max_nodes)
    if total > cap:
        raise CapExceeded(f"enumeration of {total} forests", cap)
    return list(_sorted_forests(alphabet, max_nodes))


@lru_cache(maxsize=16)
def _sorted_forests(alphabet: tuple, max_nodes: int) -> tuple:
    out = []
    for layer in _by_size(alphabet, max_nodes):
        out.extend(sorted(layer, key=print_forest))
    return tuple(out)


def _layers(alphabet, max_nodes, cap=DEFAULT_MAX_FORESTS):
    alphabet = tuple(sorted(set(alphabet)))
    total = forest_count(len(alphabet), max_nodes)
    if total > cap:
        raise CapExceeded(f"enumeration of {total} forests", cap)
    return _by_size(alphabet, max_nodes)


def forest_values(m, max_nodes: int) -> dict:
    """Map every forest up to the bound to its value (state or state set) in ``m``.

    Values are computed bottom-up from the definition: the value of
    ``t + rest`` is the sum of the tree value and the rest's value, and the
    value of ``a(g)`` is the transition of ``a`` on the value of ``g``.
    """
    deterministic = isinstance(m, Dfa)
    plus = m.plus
    values: dict = {(): m.neutral if deterministic else frozenset((m.neutral,))}
    tree_val: dict = {}
    sums: dict = {}

    def set_plus(ps, qs):
        key = (ps, qs)
        r = sums.get(key)
        if r is None:
            r = sums[key] = frozenset(plus[p][q] for p in ps for q in qs)
        return r

    for layer in _layers(m.alphabet, max_nodes):
        for f in layer:
            if not f:
                continue
            t = f[0]
            tv = tree_val.get(t)
            if tv is None:
                cv = values[t.children]
                row = m.delta[t.label]
                if deterministic:
                    tv = row[cv]
                else:
                    tv = frozenset().union(*(row[q] for q in cv)) if cv else frozenset()
                tree_val[t] = tv
            rv = values[f[1:]]
            values[f] = plus[tv][rv] if deterministic else set_plus(tv, rv)
    return values


def brute_language(m, max_nodes: int) -> set:
    """All forests with at most ``max_nodes`` nodes accepted by ``m``."""
    vals = forest_values(m, max_nodes)
    acc = m.accept
    out = set()
    for f, v in vals.items():
        if isinstance(v, frozenset):
            if v & acc:
                out.add(f)
        elif v in acc:
            out.add(f)
    return out


class _Applier:
    """Memoized leaf substitution, with results bucketed by node count."""

    def __init__(self, slices: dict, max_nodes: int | None):
        self.slices = slices
        self.max_nodes = max_nodes
        self.memo: dict = {}
        self.tree_memo: dict = {}
        self.total: dict = {}
        self.buckets = {}
        for x, sl in slices.items():
            b: dict = {}
            for g in sl:
                n = node_count(g)
                if max_nodes is None or n <= max_nodes:
                    b.setdefault(n, set()).add(g)
            self.buckets[x] = b

    def forest(self, g) -> dict:
        hit = self.memo.get(g)
        if hit is not None:
            return hit
        if not g:
            out = {0: {()}}
        else:
            head = self.tree(g[0])
            rest = self.forest(g[1:])
            out = {}
            for i, hs in head.items():
                for j, rs in rest.items():
                    if self.max_nodes is not None and i + j > self.max_nodes:
                        continue
                    bucket = out.setdefault(i + j, set())
                    for h in hs:
                        for r in rs:
                            bucket.add(h + r)
        self.memo[g] = out
        return out

    def tree(self, t) -> dict:
        if t.label in self.slices:
            if t.children:
                raise SubstitutionError(f"variable {t.label!r} at an inner node")
            return self.buckets[t.label]
        hit = self.tree_memo.get(t)
        if hit is not None:
            return hit
        out = {}
        for n, cs in self.forest(t.children).items():
            if self.max_nodes is not None and n + 1 > self.max_nodes:
                continue
            out[n + 1] = {(Tree(t.label, c),) for c in cs}
        self.tree_memo[t] = out
        return out

    def apply(self, f, checked=False) -> set:
        if not checked:
            _check_vars(f, self.slices)
        f = tuple(f)
        out = set()
        for bucket in self.forest(f).values():
            out |= bucket
        return out


def brute_subst_apply(f: Forest, slices: dict, max_nodes: int | None = None) -> set:
    """Apply a leaf substitution with finite per-variable slices.

    Each variable leaf is replaced independently by any member of its slice.
    With ``max_nodes`` set, results larger than the bound are dropped.
    """
    return _Applier(slices, max_nodes).apply(f)


def _check_vars(f, slices):
    for t in f:
        if t.label in slices and t.children:
            raise SubstitutionError(f"variable {t.label!r} at an inner node")
        _check_vars(t.children, slices)


def has_inner_variable(f: Forest, variables) -> bool:
    return any((t.label in variables and t.children) or has_inner_variable(t.children, variables) for t in f)


def brute_subst_preimages(f: Forest, slices: dict, max_inserted: int) -> set:
    """All forests ``g`` over letters and variables with ``f`` in the image of ``g``.

    A variable leaf in ``g`` stands for a contiguous run of sibling trees of
    ``f`` that belongs to its slice; runs may be empty when the slice holds
    the empty forest.  At most ``max_inserted`` empty runs are used, which
    bounds ``|g| <= |f| + max_inserted``.
    """
    variables = sorted(slices)

    @lru_cache(maxsize=None)
    def seq(trees: Forest, budget: int) -> frozenset:
        # returns frozenset of (g, used) with used <= budget
        results = set()
        if not trees:
            results.add(((), 0))
        # empty run mapped to a variable, then continue
        if budget > 0:
            for x in variables:
                if () in slices[x]:
                    for g, used in seq(trees, budget - 1):
                        results.add(((Tree(x, ()),) + g, used + 1))
        for k in range(1, len(trees) + 1):
            head, tail = trees[:k], trees[k:]
            for x in variables:
                if head in slices[x]:
                    for g, used in seq(tail, budget):
                        results.add(((Tree(x, ()),) + g, used))
        if trees:
            t, tail = trees[0], trees[1:]
            if t.label not in slices:
                for c, used_c in seq(t.children, budget):
                    for g, used in seq(tail, budget - used_c):
                        results.add(((Tree(t.label, c),) + g, used_c + used))
        return frozenset(results)

    return {g for g, _ in seq(tuple(f), max_inserted)}


def has_preimage_in(f: Forest, m: Dfa, slices: dict, max_inserted: int) -> bool:
    """Is some ``g`` of ``brute_subst_preimages(f, slices, max_inserted)`` in L(m)?

    Same recursion, but each partial preimage is kept only as its value in
    ``m`` together with the number of empty runs it uses.
    """
    variables = sorted(slices)

    @lru_cache(maxsize=None)
    def seq(trees: Forest, budget: int) -> frozenset:
        # frozenset of (state, used) with used <= budget
        results = set()
        if not trees:
            results.add((m.neutral, 0))
        if budget > 0:
            for x in variables:
                if () in slices[x]:
                    leaf_value = m.delta[x][m.neutral]
                    for q, used in seq(trees, budget - 1):
                        results.add((m.plus[leaf_value][q], used + 1))
        for k in range(1, len(trees) + 1):
            head, tail = trees[:k], trees[k:]
            for x in variables:
                if head in slices[x]:
                    leaf_value = m.delta[x][m.neutral]
                    for q, used in seq(tail, budget):
                        results.add((m.plus[leaf_value][q], used))
        if trees:
            t, tail = trees[0], trees[1:]
            if t.label not in slices:
                for c, used_c in seq(t.children, budget):
                    top = m.delta[t.label][c]
                    for q, used in seq(tail, budget - used_c):
                        results.add((m.plus[top][q], used_c + used))
        return frozenset(results)

    return any(q in m.accept for q, _ in seq(tuple(f), max_inserted))


def language_image(m, slices: dict, max_nodes: int) -> set:
    """Forests of at most ``max_nodes`` nodes in the image of ``L(m)`` under the slices.

    Complete only when no slice contains the empty forest; then every source
    forest is no larger than its images.
    """
    out = set()
    variables = set(slices)
    app = _Applier(slices, max_nodes)
    for g in brute_language(m, max_nodes):
        if has_inner_variable(g, variables):
            continue
        out |= app.apply(g, checked=True)
    return out


def slices_of(values: dict, max_nodes: int) -> dict:
    """Finite slices ``{x: L(values[x]) up to max_nodes}``."""
    return {x: frozenset(brute_language(v, max_nodes)) for x, v in values.items()}


def all_assignments(variables, domain):
    for combo in cartesian(domain, repeat=len(variables)):
        yield dict(zip(variables, combo))


def apply_hom(f: Forest, hom: dict) -> Forest:
    """Image of a forest under the homomorphism sending ``a(g)`` to ``hom[a]`` with ``g`` in the hole."""
    out: tuple = ()
    for t in f:
        out += apply_context(hom[t.label], apply_hom(t.children, hom))
    return out


def in_globally(f: Forest, accepted) -> bool:
    """Is ``f`` accepted, together with the child forest of every node?"""

    def children_ok(g):
        return all(accepted(t.children) and children_ok(t.children) for t in g)

    return accepted(f) and children_ok(f)


def values_by_size(m, max_nodes: int) -> set:
    """Values of all forests with at most ``max_nodes`` nodes, by size.

    Same answer as collecting ``forest_values`` but works on the sets of
    values of each exact size, so it scales to larger bounds.
    """
    deterministic = isinstance(m, Dfa)

    def lift(v):
        return {v} if deterministic else set(v)

    forests = [{m.neutral}]  # forests[n]: values of forests with exactly n nodes
    trees = [set()]  # trees[n]: values of trees with exactly n nodes
    for n in range(1, max_nodes + 1):
        t = set()
        for a in m.alphabet:
            for q in forests[n - 1]:
                t |= lift(m.delta[a][q])
        trees.append(t)
        f = set()
        for k in range(1, n + 1):
            for p in trees[k]:
                for q in forests[n - k]:
                    f.add(m.plus[p][q])
        forests.append(f)
    return set().union(*forests)
