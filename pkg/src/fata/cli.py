"""Command-line front end.

Verdict commands print ``verdict: yes|no`` and exit 0 or 1; construction
commands write their result with ``-o`` (or to stdout) and exit 0.  Bad input
exits 2 with diagnostics on stderr, a hit resource cap exits 3.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from . import algebra, automata, decide, io, oracle, substitution
from .errors import CapExceeded, FataError, Undecidable, ValidationError
from .forest import Context, parse_context, parse_forest, print_forest

EXIT_YES, EXIT_NO, EXIT_ERROR, EXIT_CAP = 0, 1, 2, 3


class _Report:
    def __init__(self, out):
        self.out = out

    def line(self, key, value):
        print(f"{key}: {value}", file=self.out)

    def verdict(self, yes: bool, witness=None, counters=None) -> int:
        self.line("verdict", "yes" if yes else "no")
        if witness is not None:
            self.line("witness", print_forest(witness))
        if counters:
            self.line("counters", " ".join(f"{k}={v}" for k, v in counters.items()))
        return EXIT_YES if yes else EXIT_NO


def _dfa(m, args):
    """Deterministic version of a loaded automaton, determinizing an nfa."""
    if isinstance(m, automata.Dfa):
        return m
    return automata.determinize(m, args.max_subsets)


def _emit_automaton(m, args, rep):
    problems = automata.validate(m)
    if problems:
        raise AssertionError("construction produced an invalid automaton: " + "; ".join(problems))
    text = io.dump_fta(m)
    if args.output:
        Path(args.output).write_text(text, encoding="utf-8")
        rep.line("wrote", args.output)
        rep.line("states", m.size)
    else:
        rep.out.write(text)
    return EXIT_YES


def _emit_algebra(alg, args, rep):
    problems = algebra.validate_algebra(alg)
    if problems:
        raise AssertionError("construction produced an invalid algebra: " + "; ".join(problems))
    text = io.dump_fal(alg)
    if args.output:
        Path(args.output).write_text(text, encoding="utf-8")
        rep.line("wrote", args.output)
    else:
        rep.out.write(text)
    return EXIT_YES


def _state_value(m, v) -> str:
    if isinstance(v, frozenset):
        return "{" + ",".join(m.states[q] for q in sorted(v)) + "}"
    return m.states[v]


# ------------------------------------------------------------------ commands


def cmd_eval(args, rep):
    m = io.load_automaton(args.automaton)
    f = parse_forest(args.forest, m.alphabet)
    if isinstance(f, Context):
        raise FataError("eval takes a forest, not a context")
    rep.line("value", _state_value(m, automata.evaluate(m, f)))
    return EXIT_YES


def cmd_member(args, rep):
    m = io.load_automaton(args.automaton)
    f = parse_forest(args.forest, m.alphabet)
    if isinstance(f, Context):
        raise FataError("member takes a forest, not a context")
    return rep.verdict(decide.is_member(m, f))


def cmd_empty(args, rep):
    d = decide.is_empty(io.load_automaton(args.automaton))
    return rep.verdict(d.verdict, d.witness, d.counters)


def cmd_equiv(args, rep):
    m1 = _dfa(io.load_automaton(args.left), args)
    m2 = _dfa(io.load_automaton(args.right), args)
    d = decide.equivalent(m1, m2)
    return rep.verdict(d.verdict, d.witness, d.counters)


def cmd_subset(args, rep):
    m1 = io.load_automaton(args.left)
    m2 = _dfa(io.load_automaton(args.right), args)
    d = decide.subset(m1, m2, args.max_states)
    return rep.verdict(d.verdict, d.witness)


def cmd_intersect_empty(args, rep):
    ms = [io.load_automaton(p) for p in args.automata]
    d = decide.intersect_empty(ms, args.max_states)
    return rep.verdict(d.verdict, d.witness)


def cmd_complement(args, rep):
    return _emit_automaton(automata.complement(_dfa(io.load_automaton(args.automaton), args)), args, rep)


def cmd_product(args, rep):
    m1, m2 = io.load_automaton(args.left), io.load_automaton(args.right)
    return _emit_automaton(automata.product(m1, m2, args.mode), args, rep)


def cmd_determinize(args, rep):
    return _emit_automaton(automata.determinize(io.load_automaton(args.automaton), args.max_subsets), args, rep)


def cmd_invhom(args, rep):
    m = _dfa(io.load_automaton(args.automaton), args)
    hom = {}
    for item in args.map:
        letter, sep, ctx = item.partition("=")
        if not sep or not letter:
            raise FataError(f"--map expects LETTER=CONTEXT, got {item!r}")
        if letter in hom:
            raise FataError(f"letter {letter!r} mapped twice")
        hom[letter] = parse_context(ctx, m.alphabet)
    if not hom:
        raise FataError("give at least one --map LETTER=CONTEXT")
    return _emit_automaton(automata.inverse_hom(m, hom), args, rep)


def cmd_globally(args, rep):
    return _emit_automaton(automata.globally(_dfa(io.load_automaton(args.automaton), args)), args, rep)


def cmd_split_neutral(args, rep):
    return _emit_automaton(automata.split_neutral(io.load_automaton(args.automaton)), args, rep)


def _base_of(m, variables=None):
    return tuple(a for a in m.alphabet if variables is None or a not in set(variables))


def _load_l_sigma(args):
    """Left automaton over letters plus variables, and the substitution."""
    sigma0 = io.load_subst(args.substitution)
    l = _dfa(io.load_automaton(args.left), args)
    base = _base_of(l, sigma0.vars)
    return l, io.load_subst(args.substitution, base)


def cmd_subst_image(args, rep):
    l, sigma = _load_l_sigma(args)
    return _emit_automaton(substitution.subst_image_nfa(l, sigma, args.max_states), args, rep)


def cmd_subst_preimage(args, rep):
    m = io.load_automaton(args.automaton)
    sigma = io.load_subst(args.substitution, m.alphabet)
    return _emit_automaton(substitution.subst_preimage_nfa(m, sigma), args, rep)


def cmd_saturate(args, rep):
    r = _dfa(io.load_automaton(args.target), args)
    sigma = io.load_subst(args.substitution, r.alphabet)
    sat = substitution.saturate(sigma, r)
    for x, names in sat.describe().items():
        rep.line("class", f"{x} = {{{','.join(names)}}}")
    if args.output:
        io.save_subst(substitution.saturated_to_substitution(sat), args.output)
        rep.line("wrote", args.output)
    return EXIT_YES


def _given(fn):
    def run(args, rep):
        l, sigma = _load_l_sigma(args)
        r = _dfa(io.load_automaton(args.right), args)
        if fn is decide.subst_subset:
            d = fn(l, sigma, r, max_states=args.max_states)
        else:
            d = fn(l, sigma, r, args.max_states, args.max_subsets)
        return rep.verdict(d.verdict, d.witness)

    return run


def cmd_exists_subst(args, rep):
    l = _dfa(io.load_automaton(args.left), args)
    r = _dfa(io.load_automaton(args.right), args)
    if args.mode == "equal-both":
        decide.exists_subst_equal_both(l, r)
    if args.mode == "subset":
        d = decide.exists_subst_subset(l, r, args.max_search, args.jobs)
    else:
        d = decide.exists_subst_equal(l, r, args.max_search, args.jobs, args.max_states, args.max_subsets)
    code = rep.verdict(d.verdict, counters=d.counters)
    if d.certificate is not None:
        for x, names in d.certificate.describe().items():
            rep.line("class", f"{x} = {{{','.join(names)}}}")
        if args.output:
            io.save_subst(substitution.saturated_to_substitution(d.certificate), args.output)
            rep.line("wrote", args.output)
    return code


def cmd_alg2fta(args, rep):
    return _emit_automaton(algebra.algebra_to_dfa(io.load_algebra(args.algebra)), args, rep)


def cmd_fta2alg(args, rep):
    m = _dfa(io.load_automaton(args.automaton), args)
    return _emit_algebra(algebra.dfa_to_algebra(m, args.max_states), args, rep)


def cmd_faithful(args, rep):
    original = io.load_algebra(args.algebra)
    alg, classes = algebra.faithful_quotient(original)
    for c in classes:
        rep.line("class", "{" + ",".join(original.v_names[v] for v in c) + "}")
    return _emit_algebra(alg, args, rep)


def cmd_combine(args, rep):
    paths = args.pairs
    if len(paths) % 2 or not paths:
        raise FataError("combine takes pairs: L1 R1 [L2 R2 ...]")
    ls = [_dfa(io.load_automaton(p), args) for p in paths[0::2]]
    rs = [_dfa(io.load_automaton(p), args) for p in paths[1::2]]
    l, r = substitution.combine_inequalities(ls, rs)
    io.save_automaton(l, args.out_left)
    io.save_automaton(r, args.out_right)
    rep.line("wrote", f"{args.out_left} {args.out_right}")
    return EXIT_YES


def cmd_union_subst(args, rep):
    ls = [_dfa(io.load_automaton(p), args) for p in args.automata]
    m, sigma = substitution.union_as_subst(ls)
    io.save_automaton(m, args.output)
    io.save_subst(sigma, args.sub_output)
    rep.line("wrote", f"{args.output} {args.sub_output}")
    return EXIT_YES


def cmd_enumerate(args, rep):
    if args.automaton:
        m = io.load_automaton(args.automaton)
        accepted = oracle.brute_language(m, args.max_nodes)
        forests = [f for f in oracle.enumerate_forests(m.alphabet, args.max_nodes) if f in accepted]
    else:
        if not args.alphabet:
            raise FataError("give an automaton or --alphabet")
        forests = oracle.enumerate_forests(args.alphabet, args.max_nodes)
    for f in forests:
        print(print_forest(f), file=rep.out)
    rep.line("count", len(forests))
    return EXIT_YES


def cmd_validate(args, rep):
    suffix = Path(args.file).suffix
    if suffix == ".fta":
        io.load_automaton(args.file)
    elif suffix == ".fal":
        io.load_algebra(args.file)
    elif suffix == ".sub":
        io.load_subst(args.file)
    else:
        raise FataError(f"unknown file type {suffix!r}; expected .fta, .fal or .sub")
    rep.line("valid", args.file)
    return EXIT_YES


# ------------------------------------------------------------------ parser


def build_parser() -> argparse.ArgumentParser:
    caps = argparse.ArgumentParser(add_help=False)
    caps.add_argument("--max-states", type=int, default=decide.DEFAULT_MAX_STATES,
                      help="cap on explored product or image states (default %(default)s)")
    caps.add_argument("--max-subsets", type=int, default=automata.DEFAULT_MAX_SUBSETS,
                      help="cap on subsets during determinization (default %(default)s)")
    caps.add_argument("--max-search", type=int, default=decide.DEFAULT_MAX_SEARCH,
                      help="cap on candidate substitutions (default %(default)s)")
    out = argparse.ArgumentParser(add_help=False)
    out.add_argument("-o", "--output", help="write the result here instead of stdout")

    p = argparse.ArgumentParser(prog="fata", description="Forest automata and forest algebras.")
    sub = p.add_subparsers(dest="command", required=True, metavar="COMMAND")

    def add(name, fn, help, parents=(caps,)):
        sp = sub.add_parser(name, help=help, parents=list(parents))
        sp.set_defaults(run=fn)
        return sp

    sp = add("eval", cmd_eval, "value of a forest")
    sp.add_argument("automaton")
    sp.add_argument("forest")
    sp = add("member", cmd_member, "is the forest accepted")
    sp.add_argument("automaton")
    sp.add_argument("forest")
    add("empty", cmd_empty, "is the language empty").add_argument("automaton")
    sp = add("equiv", cmd_equiv, "are two languages equal (union-find test)")
    sp.add_argument("left")
    sp.add_argument("right")
    sp = add("subset", cmd_subset, "is L(left) contained in L(right)")
    sp.add_argument("left")
    sp.add_argument("right")
    add("intersect-empty", cmd_intersect_empty, "is the intersection empty").add_argument("automata", nargs="*")

    add("complement", cmd_complement, "complement", (caps, out)).add_argument("automaton")
    sp = add("product", cmd_product, "union or intersection", (caps, out))
    sp.add_argument("left")
    sp.add_argument("right")
    sp.add_argument("--mode", choices=("union", "intersection"), default="intersection")
    add("determinize", cmd_determinize, "subset construction", (caps, out)).add_argument("automaton")
    sp = add("invhom", cmd_invhom, "inverse homomorphic image", (caps, out))
    sp.add_argument("automaton")
    sp.add_argument("--map", action="append", default=[], metavar="LETTER=CONTEXT",
                    help="image of a source letter, e.g. a='b(@)'; repeat per letter")
    add("globally", cmd_globally, "forests all of whose child forests are in L", (caps, out)).add_argument("automaton")
    add("split-neutral", cmd_split_neutral, "make the neutral state unreachable from nonempty forests",
        (caps, out)).add_argument("automaton")

    sp = add("subst-image", cmd_subst_image, "automaton for sigma(L)", (caps, out))
    sp.add_argument("left")
    sp.add_argument("substitution")
    sp = add("subst-preimage", cmd_subst_preimage, "automaton for the preimage of L under sigma", (caps, out))
    sp.add_argument("automaton")
    sp.add_argument("substitution")
    sp = add("saturate", cmd_saturate, "saturate sigma with respect to R", (caps, out))
    sp.add_argument("substitution")
    sp.add_argument("target")
    for name, fn, help in (
        ("subst-subset", decide.subst_subset, "is sigma(L) contained in R"),
        ("subst-superset", decide.subst_superset, "does sigma(L) contain R"),
        ("subst-equal", decide.subst_equal, "is sigma(L) equal to R"),
        ("subst-subset-both", decide.subst_subset_both, "is sigma(L) contained in sigma(R)"),
    ):
        sp = add(name, _given(fn), help)
        sp.add_argument("left")
        sp.add_argument("substitution")
        sp.add_argument("right")
    sp = add("exists-subst", cmd_exists_subst, "search for a substitution", (caps, out))
    sp.add_argument("left")
    sp.add_argument("right")
    sp.add_argument("--mode", choices=("subset", "equal", "equal-both"), default="subset")
    sp.add_argument("--jobs", type=int, default=1, help="parallel candidate checks (default 1)")

    add("alg2fta", cmd_alg2fta, "automaton of a forest algebra", (caps, out)).add_argument("algebra")
    add("fta2alg", cmd_fta2alg, "forest algebra of a deterministic automaton", (caps, out)).add_argument("automaton")
    add("faithful", cmd_faithful, "faithful quotient of a forest algebra", (caps, out)).add_argument("algebra")
    sp = add("combine", cmd_combine, "merge inclusions L_i <= R_i into one")
    sp.add_argument("pairs", nargs="+", metavar="L_or_R")
    sp.add_argument("--out-left", required=True)
    sp.add_argument("--out-right", required=True)
    sp = add("union-subst", cmd_union_subst, "union as a substitution image")
    sp.add_argument("automata", nargs="+")
    sp.add_argument("-o", "--output", required=True)
    sp.add_argument("--sub-output", required=True)
    sp = add("enumerate", cmd_enumerate, "list small forests, optionally only accepted ones")
    sp.add_argument("automaton", nargs="?")
    sp.add_argument("--alphabet", nargs="+")
    sp.add_argument("--max-nodes", type=int, default=3)
    add("validate", cmd_validate, "check a .fta, .fal or .sub file").add_argument("file")
    return p


def run(argv=None, out=None) -> int:
    out = out or sys.stdout
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return EXIT_ERROR if e.code else EXIT_YES
    rep = _Report(out)
    try:
        return args.run(args, rep)
    except ValidationError as e:
        for d in e.diagnostics:
            print(d, file=sys.stderr)
        return EXIT_ERROR
    except CapExceeded as e:
        print(f"cap exceeded: {e}", file=sys.stderr)
        return EXIT_CAP
    except Undecidable as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_ERROR
    except FataError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_ERROR


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
