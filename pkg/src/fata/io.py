"""Loaders and writers for the ``.fta``, ``.fal`` and ``.sub`` text formats.

All formats are UTF-8, one record per line, with ``#`` starting a comment
outside quotes.  Names follow the forest symbol syntax: bare identifiers, or
double-quoted strings with backslash escapes.  Every table must be given in
full; loaders collect all problems as :class:`Diagnostic` values and raise a
single :class:`ValidationError` instead of returning a partial value.
"""

from __future__ import annotations

import os
from pathlib import Path

from .algebra import ForestAlgebra, validate_algebra
from .automata import Dfa, Nfa, as_nfa, validate
from .errors import Diagnostic, FataError, ForestSyntaxError, ValidationError
from .forest import format_symbol, quote_symbol, read_quoted


class _Tok(str):
    quoted = False


def tokenize_line(line: str) -> list:
    """Split a line into tokens, honouring quotes and ``#`` comments."""
    out = []
    i = 0
    while i < len(line):
        ch = line[i]
        if ch.isspace():
            i += 1
        elif ch == "#":
            break
        elif ch == '"':
            name, i = read_quoted(line, i)
            tok = _Tok(name)
            tok.quoted = True
            out.append(tok)
        else:
            j = i
            while j < len(line) and not line[j].isspace() and line[j] not in '#"':
                j += 1
            out.append(_Tok(line[i:j]))
            i = j
    return out


def _records(text: str, file: str, diags: list) -> list:
    recs = []
    for n, line in enumerate(text.splitlines(), 1):
        try:
            toks = tokenize_line(line)
        except ForestSyntaxError as e:
            diags.append(Diagnostic(file, n, f"bad quoting: {e}"))
            continue
        if toks:
            recs.append((n, toks))
    return recs


def _bare(tok, word) -> bool:
    return tok == word and not getattr(tok, "quoted", False)


class _Schema:
    """Shared bookkeeping for one file: single-use headers, name lookups, tables."""

    def __init__(self, file: str, diags: list):
        self.file = file
        self.diags = diags
        self.headers: dict = {}

    def err(self, line, msg, toks=()):
        self.diags.append(Diagnostic(self.file, line, msg, tuple(str(t) for t in toks)))

    def header(self, key, line, args):
        if key in self.headers:
            self.err(line, f"duplicate '{key}' line (first on line {self.headers[key][0]})", args)
            return
        self.headers[key] = (line, list(args))

    def names(self, key, required=True, nonempty=True):
        if key not in self.headers:
            if required:
                self.err(0, f"missing '{key}' line")
            return None
        line, args = self.headers[key]
        if nonempty and not args:
            self.err(line, f"'{key}' needs at least one name")
            return None
        if len(set(args)) != len(args):
            dup = sorted({a for a in args if args.count(a) > 1})
            self.err(line, f"duplicate names in '{key}'", dup)
            return None
        return [str(a) for a in args]

    def lookup(self, index, name, line, what, toks):
        i = index.get(name)
        if i is None:
            self.err(line, f"unknown {what} {name!r}", toks)
        return i

    def single(self, key, index, what):
        if key not in self.headers:
            self.err(0, f"missing '{key}' line")
            return None
        line, args = self.headers[key]
        if len(args) != 1:
            self.err(line, f"'{key}' takes exactly one {what}", args)
            return None
        return self.lookup(index, args[0], line, what, args)


def _read(path) -> str:
    try:
        return Path(path).read_text(encoding="utf-8")
    except UnicodeDecodeError as e:
        raise ValidationError([Diagnostic(str(path), 0, f"not UTF-8: {e}")]) from None
    except OSError as e:
        raise ValidationError([Diagnostic(str(path), 0, f"cannot read file: {e.strerror or e}")]) from None


# -------------------------------------------------------------------- .fta


def parse_fta(text: str, file: str = "<string>"):
    """Parse automaton text; returns a Dfa or an Nfa according to its ``type`` line."""
    diags: list = []
    s = _Schema(file, diags)
    plus_lines, delta_lines = [], []
    for line, toks in _records(text, file, diags):
        key, args = toks[0], toks[1:]
        if key.quoted:
            s.err(line, "keyword expected", toks)
        elif key in ("type", "alphabet", "states", "neutral", "accept"):
            s.header(str(key), line, args)
        elif key == "plus":
            plus_lines.append((line, args))
        elif key == "delta":
            delta_lines.append((line, args))
        else:
            s.err(line, f"unknown keyword {str(key)!r}", toks)

    kind = None
    if "type" not in s.headers:
        s.err(0, "missing 'type' line")
    else:
        line, args = s.headers["type"]
        if len(args) != 1 or str(args[0]) not in ("dfa", "nfa"):
            s.err(line, "type must be 'dfa' or 'nfa'", args)
        else:
            kind = str(args[0])
    letters = s.names("alphabet")
    states = s.names("states")
    if states and any(_bare(q, "-") for q in s.headers["states"][1]):
        s.err(s.headers["states"][0], "'-' is reserved for the empty set; quote it to use it as a name")
    if letters is None or states is None or kind is None:
        raise ValidationError(diags)
    qi = {q: i for i, q in enumerate(states)}
    ai = {a: i for i, a in enumerate(letters)}
    n = len(states)
    neutral = s.single("neutral", qi, "state")
    accept = set()
    if "accept" not in s.headers:
        s.err(0, "missing 'accept' line (write 'accept' alone for none)")
    else:
        line, args = s.headers["accept"]
        for a in args:
            q = s.lookup(qi, a, line, "state", args)
            if q is not None:
                if q in accept:
                    s.err(line, f"duplicate accepting state {str(a)!r}", args)
                accept.add(q)

    plus: dict = {}
    where: dict = {}
    for line, args in plus_lines:
        if len(args) != 3:
            s.err(line, "plus needs three states: p q r for p+q=r", args)
            continue
        ids = [s.lookup(qi, a, line, "state", args) for a in args]
        if None in ids:
            continue
        key = (ids[0], ids[1])
        if key in plus:
            s.err(line, f"duplicate plus entry for ({args[0]}, {args[1]}) (first on line {where[key]})", args)
            continue
        plus[key] = ids[2]
        where[key] = line
    for p in range(n):
        for q in range(n):
            if (p, q) not in plus:
                s.err(0, f"missing plus entry for ({states[p]}, {states[q]})", (states[p], states[q]))

    delta: dict = {}
    dwhere: dict = {}
    for line, args in delta_lines:
        if len(args) < 3:
            s.err(line, "delta needs a letter, a source state and a target", args)
            continue
        a = s.lookup(ai, args[0], line, "letter", args)
        src = s.lookup(qi, args[1], line, "state", args)
        if a is None or src is None:
            continue
        rest = args[2:]
        if kind == "dfa":
            if len(rest) != 1:
                s.err(line, "a dfa transition has exactly one target", args)
                continue
            tgt = s.lookup(qi, rest[0], line, "state", args)
            if tgt is None:
                continue
        else:
            if len(rest) == 1 and _bare(rest[0], "-"):
                tgt = frozenset()
            else:
                ids = [s.lookup(qi, r, line, "state", args) for r in rest]
                if None in ids:
                    continue
                if len(set(ids)) != len(ids):
                    s.err(line, "duplicate target states", args)
                    continue
                tgt = frozenset(ids)
        key = (letters[a], src)
        if key in delta:
            s.err(line, f"duplicate delta entry for ({args[0]}, {args[1]}) (first on line {dwhere[key]})", args)
            continue
        delta[key] = tgt
        dwhere[key] = line
    for a in letters:
        for q in range(n):
            if (a, q) not in delta:
                s.err(0, f"missing delta entry for ({a}, {states[q]})", (a, states[q]))
    if diags:
        raise ValidationError(diags)

    table = tuple(tuple(plus[(p, q)] for q in range(n)) for p in range(n))
    rows = {a: tuple(delta[(a, q)] for q in range(n)) for a in letters}
    cls = Dfa if kind == "dfa" else Nfa
    m = cls(tuple(states), tuple(letters), table, neutral, rows, frozenset(accept))
    problems = validate(m)
    if problems:
        raise ValidationError([Diagnostic(file, 0, p) for p in problems])
    return m


def _names(xs) -> str:
    return " ".join(format_symbol(x) for x in xs)


def dump_fta(m) -> str:
    kind = "dfa" if isinstance(m, Dfa) else "nfa"
    S = [format_symbol(q) for q in m.states]
    lines = [
        f"type {kind}",
        f"alphabet {_names(m.alphabet)}",
        f"states {' '.join(S)}",
        f"neutral {S[m.neutral]}",
        ("accept " + " ".join(S[q] for q in sorted(m.accept))).rstrip(),
    ]
    n = m.size
    for p in range(n):
        for q in range(n):
            lines.append(f"plus {S[p]} {S[q]} {S[m.plus[p][q]]}")
    for a in m.alphabet:
        fa = format_symbol(a)
        for q, t in enumerate(m.delta[a]):
            if kind == "dfa":
                lines.append(f"delta {fa} {S[q]} {S[t]}")
            else:
                tgt = " ".join(S[r] for r in sorted(t)) or "-"
                lines.append(f"delta {fa} {S[q]} {tgt}")
    return "\n".join(lines) + "\n"


def load_automaton(path):
    return parse_fta(_read(path), str(path))


def load_dfa(path) -> Dfa:
    m = load_automaton(path)
    if not isinstance(m, Dfa):
        raise ValidationError([Diagnostic(str(path), 0, "expected a dfa, found type nfa")])
    return m


def load_nfa(path) -> Nfa:
    return as_nfa(load_automaton(path))


def save_automaton(m, path) -> None:
    Path(path).write_text(dump_fta(m), encoding="utf-8")


save_dfa = save_nfa = save_automaton


# -------------------------------------------------------------------- .fal

_FAL_HEADERS = ("alphabet", "H:", "V:", "neutralH", "neutralV", "accept")
_FAL_TABLES = ("plusH", "timesV", "action", "inl", "inr", "hom")


def parse_fal(text: str, file: str = "<string>") -> ForestAlgebra:
    diags: list = []
    s = _Schema(file, diags)
    tables = {k: [] for k in _FAL_TABLES}
    for line, toks in _records(text, file, diags):
        key, args = toks[0], toks[1:]
        if key.quoted:
            s.err(line, "keyword expected", toks)
        elif key in _FAL_HEADERS:
            s.header(str(key), line, args)
        elif key in tables:
            tables[str(key)].append((line, args))
        else:
            s.err(line, f"unknown keyword {str(key)!r}", toks)
    letters = s.names("alphabet")
    H = s.names("H:")
    V = s.names("V:")
    if letters is None or H is None or V is None:
        raise ValidationError(diags)
    hi = {h: i for i, h in enumerate(H)}
    vi = {v: i for i, v in enumerate(V)}
    ai = {a: i for i, a in enumerate(letters)}
    h0 = s.single("neutralH", hi, "H element")
    v0 = s.single("neutralV", vi, "V element")
    accept = set()
    if "accept" not in s.headers:
        s.err(0, "missing 'accept' line (write 'accept' alone for none)")
    else:
        line, args = s.headers["accept"]
        for a in args:
            h = s.lookup(hi, a, line, "H element", args)
            if h is not None:
                accept.add(h)

    def table(key, kinds, keys):
        """Read records of ``key``; all but the last token form the key."""
        out, where = {}, {}
        for line, args in tables[key]:
            if len(args) != len(kinds):
                s.err(line, f"{key} takes {len(kinds)} arguments", args)
                continue
            ids = [s.lookup(idx, a, line, what, args) for (idx, what, _), a in zip(kinds, args)]
            if None in ids:
                continue
            k = tuple(ids[:-1])
            if k in out:
                s.err(line, f"duplicate {key} entry (first on line {where[k]})", args)
                continue
            out[k] = ids[-1]
            where[k] = line
        for k in keys:
            if k not in out:
                names = [names_of[i] for names_of, i in zip([kd[2] for kd in kinds], k)]
                s.err(0, f"missing {key} entry for ({', '.join(map(str, names))})", names)
        return out

    HK = (hi, "H element", H)
    VK = (vi, "V element", V)
    AK = (ai, "letter", letters)
    nh, nv = len(H), len(V)
    plus = table("plusH", [HK, HK, HK], [(g, h) for g in range(nh) for h in range(nh)])
    times = table("timesV", [VK, VK, VK], [(u, v) for u in range(nv) for v in range(nv)])
    action = table("action", [VK, HK, HK], [(v, h) for v in range(nv) for h in range(nh)])
    inl = table("inl", [HK, VK], [(h,) for h in range(nh)])
    inr = table("inr", [HK, VK], [(h,) for h in range(nh)])
    hom = table("hom", [AK, VK], [(a,) for a in range(len(letters))])
    if diags:
        raise ValidationError(diags)
    alg = ForestAlgebra(
        h_names=tuple(H),
        h_plus=tuple(tuple(plus[(g, h)] for h in range(nh)) for g in range(nh)),
        h_neutral=h0,
        v_names=tuple(V),
        v_times=tuple(tuple(times[(u, v)] for v in range(nv)) for u in range(nv)),
        v_neutral=v0,
        action=tuple(tuple(action[(v, h)] for h in range(nh)) for v in range(nv)),
        inl=tuple(inl[(h,)] for h in range(nh)),
        inr=tuple(inr[(h,)] for h in range(nh)),
        alphabet=tuple(letters),
        letter_hom={letters[a]: hom[(a,)] for a in range(len(letters))},
        accept=frozenset(accept),
    )
    problems = validate_algebra(alg)
    if problems:
        raise ValidationError([Diagnostic(file, 0, p) for p in problems])
    return alg


def dump_fal(alg: ForestAlgebra) -> str:
    H = [format_symbol(h) for h in alg.h_names]
    V = [format_symbol(v) for v in alg.v_names]
    lines = [
        f"alphabet {_names(alg.alphabet)}",
        f"H: {' '.join(H)}",
        f"neutralH {H[alg.h_neutral]}",
        f"V: {' '.join(V)}",
        f"neutralV {V[alg.v_neutral]}",
        ("accept " + " ".join(H[h] for h in sorted(alg.accept))).rstrip(),
    ]
    for g in range(alg.h_size):
        for h in range(alg.h_size):
            lines.append(f"plusH {H[g]} {H[h]} {H[alg.h_plus[g][h]]}")
    for u in range(alg.v_size):
        for v in range(alg.v_size):
            lines.append(f"timesV {V[u]} {V[v]} {V[alg.v_times[u][v]]}")
    for v in range(alg.v_size):
        for h in range(alg.h_size):
            lines.append(f"action {V[v]} {H[h]} {H[alg.action[v][h]]}")
    for h in range(alg.h_size):
        lines.append(f"inl {H[h]} {V[alg.inl[h]]}")
    for h in range(alg.h_size):
        lines.append(f"inr {H[h]} {V[alg.inr[h]]}")
    for a in alg.alphabet:
        lines.append(f"hom {format_symbol(a)} {V[alg.letter_hom[a]]}")
    return "\n".join(lines) + "\n"


def load_algebra(path) -> ForestAlgebra:
    return parse_fal(_read(path), str(path))


def save_algebra(alg: ForestAlgebra, path) -> None:
    Path(path).write_text(dump_fal(alg), encoding="utf-8")


# -------------------------------------------------------------------- .sub


def parse_sub(text: str, file: str = "<string>", base_alphabet=None, base_dir="."):
    """Parse a substitution file; value paths are relative to ``base_dir``."""
    from .decide import is_empty
    from .substitution import Substitution

    diags: list = []
    s = _Schema(file, diags)
    assigns = []
    for line, toks in _records(text, file, diags):
        if _bare(toks[0], "vars"):
            s.header("vars", line, toks[1:])
        elif len(toks) == 3 and _bare(toks[1], "="):
            assigns.append((line, toks))
        else:
            s.err(line, "expected 'vars x ...' or 'x = path'", toks)
    variables = s.names("vars")
    if variables is None:
        raise ValidationError(diags)
    declared = set(variables)
    values: dict = {}
    where: dict = {}
    for line, toks in assigns:
        x, path = str(toks[0]), str(toks[2])
        if x not in declared:
            s.err(line, f"variable {x!r} is not declared in 'vars'", toks)
            continue
        if x in values:
            s.err(line, f"duplicate value for {x!r} (first on line {where[x]})", toks)
            continue
        where[x] = line
        full = path if os.path.isabs(path) else os.path.join(base_dir, path)
        try:
            m = load_automaton(full)
        except ValidationError as e:
            s.err(line, f"value automaton for {x!r} is invalid", toks)
            diags.extend(e.diagnostics)
            continue
        values[x] = m
    for x in variables:
        if x not in values and x not in {str(t[0]) for _, t in assigns}:
            s.err(0, f"no value given for variable {x!r}", (x,))
    if diags:
        raise ValidationError(diags)
    if base_alphabet is None:
        base_alphabet = values[variables[0]].alphabet
    base = tuple(base_alphabet)
    for x in variables:
        v = values[x]
        if x in set(base):
            s.err(where[x], f"variable {x!r} is also a base letter", (x,))
        elif set(v.alphabet) != set(base):
            s.err(where[x], f"value of {x!r} is over {sorted(v.alphabet)}, expected {sorted(base)}", (x,))
        elif is_empty(v).verdict:
            s.err(where[x], f"value of {x!r} has an empty language; substitution values must be nonempty", (x,))
    if diags:
        raise ValidationError(diags)
    try:
        return Substitution(base, {x: values[x] for x in variables})
    except FataError as e:
        raise ValidationError([Diagnostic(file, 0, str(e))]) from None


def load_subst(path, base_alphabet=None):
    return parse_sub(_read(path), str(path), base_alphabet, os.path.dirname(os.path.abspath(path)))


def save_subst(sigma, path, value_paths: dict | None = None) -> None:
    """Write ``sigma`` to ``path``; value automata go next to it unless paths are given."""
    path = Path(path)
    value_paths = dict(value_paths or {})
    lines = [f"vars {_names(sigma.vars)}"]
    for i, x in enumerate(sigma.vars):
        vp = value_paths.get(x)
        if vp is None:
            vp = path.with_name(f"{path.stem}.v{i}.fta")
        vp = Path(vp)
        target = vp if vp.is_absolute() else path.parent / vp
        save_automaton(sigma.values[x], target)
        rel = os.path.relpath(target, path.parent)
        lines.append(f"{format_symbol(x)} = {_path_token(rel)}")
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")


def _path_token(p: str) -> str:
    if p and p not in ("=", "vars") and not any(c.isspace() or c in '#"' for c in p):
        return p
    return quote_symbol(p)
