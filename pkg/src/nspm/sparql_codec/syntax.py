"""Lexing and parsing shared by the text front end and the token decoders.

Three front ends (query text, split-URI token sequences, merged token
sequences) all lower to the same stream of *units*: keywords, braces,
separators, terms and the composite clauses COUNT, FILTER, ORDER BY and
LIMIT.  A single recursive-descent grammar turns units into a
:class:`~nspm.codec.ast.QueryAst`.
"""
import re
from typing import NamedTuple

from .ast import (
    COMPARATORS,
    INTEGER_RE,
    LITERAL_RE,
    LOCAL_NAME_RE,
    PREFIXES,
    VAR_NAME_RE,
    Filter,
    Literal,
    OrderBy,
    PrefixedName,
    QueryAst,
    TriplePattern,
    Variable,
)

MATH_TOKENS = {
    "<": "math_lt",
    ">": "math_gt",
    "=": "math_eq",
    "<=": "math_leq",
    ">=": "math_geq",
    "!=": "math_neq",
}
MATH_OPS = {v: k for k, v in MATH_TOKENS.items()}

CLAUSE_KEYWORDS = frozenset({"select", "ask", "distinct", "where"})
UNMERGED_KEYWORDS = CLAUSE_KEYWORDS | {"filter", "limit", "count", "order", "by", "asc", "desc"}
MERGED_KEYWORDS = CLAUSE_KEYWORDS | {"filter", "limit", "agg_count", "ord_asc", "ord_desc"}
MERGED_STRUCTURE = {"brack_open": "open", "brack_close": "close", "sep_dot": "dot"}
PUNCT = {"{": "open", "}": "close", ".": "dot", "(": "lpar", ")": "rpar"}


class Atom(NamedTuple):
    kind: str
    value: object
    start: int
    end: int


class Unit(NamedTuple):
    kind: str
    value: object
    start: int
    end: int


class GrammarFail(Exception):
    """Internal: parsing stopped at ``index`` (unit or atom index)."""

    def __init__(self, index, expected):
        super().__init__(expected)
        self.index = index
        self.expected = expected


# -- lexers ---------------------------------------------------------------

_TEXT_TOKEN = re.compile(
    r"""
    (?P<ws>\s+)
  | (?P<var>\?[A-Za-z0-9_]+)
  | (?P<pn>[A-Za-z][A-Za-z0-9]*:[A-Za-z0-9_%][A-Za-z0-9_%\-]*)
  | (?P<lit>"[^"\s\\]*"(?:@[A-Za-z]+(?:-[A-Za-z0-9]+)*)?|[+-]?\d+(?:\.\d+)?)
  | (?P<op><=|>=|!=|<|>|=)
  | (?P<punct>[{}().])
  | (?P<word>[A-Za-z_]+)
    """,
    re.VERBOSE,
)


def lex_text(text):
    """Lex SPARQL text into atoms; positions are character offsets."""
    atoms = []
    pos = 0
    while pos < len(text):
        m = _TEXT_TOKEN.match(text, pos)
        if m is None:
            raise GrammarFail(pos, "a SPARQL token")
        kind = m.lastgroup
        lexeme = m.group()
        start, pos = m.start(), m.end()
        if kind == "ws":
            continue
        if kind == "var":
            atoms.append(Atom("var", Variable(lexeme[1:]), start, pos))
        elif kind == "pn":
            prefix, local = lexeme.split(":", 1)
            if prefix not in PREFIXES:
                raise GrammarFail(start, f"a prefix in {{{', '.join(PREFIXES)}}}")
            atoms.append(Atom("pn", PrefixedName(prefix, local), start, pos))
        elif kind == "lit":
            atoms.append(Atom("lit", Literal(lexeme), start, pos))
        elif kind == "op":
            atoms.append(Atom("op", lexeme, start, pos))
        elif kind == "punct":
            atoms.append(Atom(PUNCT[lexeme], lexeme, start, pos))
        else:
            word = lexeme.lower()
            if word not in UNMERGED_KEYWORDS:
                raise GrammarFail(start, "a keyword")
            atoms.append(Atom("kw", word, start, pos))
    return atoms, len(text)


def _lex_merged_token(tok):
    if tok in MERGED_KEYWORDS:
        return "kw", tok
    if tok in MERGED_STRUCTURE:
        return MERGED_STRUCTURE[tok], tok
    if tok in MATH_OPS:
        return "op", MATH_OPS[tok]
    if tok.startswith("var_") and VAR_NAME_RE.match(tok[4:]):
        return "var", Variable(tok[4:])
    prefix, sep, local = tok.partition("_")
    if sep and prefix in PREFIXES and LOCAL_NAME_RE.match(local):
        return "pn", PrefixedName(prefix, local)
    if LITERAL_RE.match(tok):
        return "lit", Literal(tok)
    return None


def _lex_split_token(tok, lowercase_keywords):
    word = tok if lowercase_keywords else tok.lower()
    if word in UNMERGED_KEYWORDS:
        return "kw", word
    if tok in PUNCT:
        return PUNCT[tok], tok
    if tok in COMPARATORS:
        return "op", tok
    if tok.startswith("?") and VAR_NAME_RE.match(tok[1:]):
        return "var", Variable(tok[1:])
    if LITERAL_RE.match(tok):
        return "lit", Literal(tok)
    return None


def lex_tokens(tokens, preset, lenient=False):
    """Lex a token sequence under ``preset``.

    Returns ``(atoms, bad)`` where ``bad`` lists indices of tokens that are
    not part of the preset's lexicon (always empty unless ``lenient``).
    """
    atoms, bad = [], []
    i = 0
    n = len(tokens)
    while i < n:
        tok = tokens[i]
        if preset.merged_tokens:
            lexed = _lex_merged_token(tok)
            width = 1
        elif tok in PREFIXES:
            if i + 1 < n and LOCAL_NAME_RE.match(tokens[i + 1]):
                lexed = ("pn", PrefixedName(tok, tokens[i + 1]))
                width = 2
            else:
                lexed, width = None, 1
        else:
            lexed = _lex_split_token(tok, preset.lowercase_keywords)
            width = 1
        if lexed is None:
            if not lenient:
                raise GrammarFail(i, "a token of preset " + preset.id)
            bad.append(i)
        else:
            atoms.append(Atom(lexed[0], lexed[1], i, i + width))
        i += width
    return atoms, bad


# -- grouping -------------------------------------------------------------

def _is_limit(atom):
    return atom.kind == "lit" and INTEGER_RE.match(atom.value.lexical) and int(atom.value.lexical) > 0


def _match(atoms, i, spec):
    """Match ``spec`` (list of predicates) at ``atoms[i:]``; return failing offset or None."""
    for k, pred in enumerate(spec):
        if i + k >= len(atoms) or not pred(atoms[i + k]):
            return k
    return None


def _kind(*kinds):
    return lambda a: a.kind in kinds


def _kw(*words):
    return lambda a: a.kind == "kw" and a.value in words


def _group_one(atoms, i, merged, bare_order):
    """Group the clause starting at ``atoms[i]``; return (unit, width) or raise."""
    a = atoms[i]
    if a.kind == "kw" and a.value in CLAUSE_KEYWORDS:
        return Unit(a.value, None, a.start, a.end), 1
    if a.kind in ("open", "close", "dot"):
        return Unit(a.kind, None, a.start, a.end), 1
    if a.kind in ("var", "pn", "lit"):
        return Unit("term", a.value, a.start, a.end), 1
    if a.kind != "kw":
        raise GrammarFail(i, "a keyword, brace or term")

    if merged:
        shapes = {
            "agg_count": ([_kind("var")], lambda g: ("count", g[1].value)),
            "ord_asc": ([_kind("var")], lambda g: ("order", OrderBy("ASC", g[1].value))),
            "ord_desc": ([_kind("var")], lambda g: ("order", OrderBy("DESC", g[1].value))),
            "filter": (
                [_kind("var"), _kind("op"), _kind("lit")],
                lambda g: ("filter", Filter(g[1].value, g[2].value, g[3].value)),
            ),
            "limit": ([_is_limit], lambda g: ("limit", int(g[1].value.lexical))),
        }
    else:
        shapes = {
            "count": (
                [_kind("lpar"), _kind("var"), _kind("rpar")],
                lambda g: ("count", g[2].value),
            ),
            "filter": (
                [_kind("lpar"), _kind("var"), _kind("op"), _kind("lit"), _kind("rpar")],
                lambda g: ("filter", Filter(g[2].value, g[3].value, g[4].value)),
            ),
            "limit": ([_is_limit], lambda g: ("limit", int(g[1].value.lexical))),
        }
        if a.value == "order":
            if bare_order and _match(atoms, i + 1, [_kw("by"), _kind("var")]) is None:
                g = atoms[i:i + 3]
                return Unit("order", OrderBy("ASC", g[2].value), a.start, g[-1].end), 3
            spec = [_kw("by"), _kw("asc", "desc"), _kind("lpar"), _kind("var"), _kind("rpar")]
            miss = _match(atoms, i + 1, spec)
            if miss is not None:
                raise GrammarFail(i + 1 + miss, "ORDER BY ASC|DESC(?var)")
            g = atoms[i:i + 6]
            return Unit("order", OrderBy(g[2].value.upper(), g[4].value), a.start, g[-1].end), 6

    if a.value not in shapes:
        raise GrammarFail(i, "a clause keyword")
    spec, build = shapes[a.value]
    miss = _match(atoms, i + 1, spec)
    if miss is not None:
        raise GrammarFail(i + 1 + miss, f"a complete {a.value} clause")
    g = atoms[i:i + 1 + len(spec)]
    kind, value = build(g)
    return Unit(kind, value, a.start, g[-1].end), len(g)


def group_atoms(atoms, merged, bare_order=False, lenient=False):
    """Group atoms into units.

    In lenient mode a clause that fails to group loses its head atom and
    grouping resumes at the next atom; the dropped atoms are returned.
    """
    units, dropped = [], []
    i = 0
    while i < len(atoms):
        try:
            unit, width = _group_one(atoms, i, merged, bare_order)
        except GrammarFail:
            if not lenient:
                raise
            dropped.append(atoms[i])
            i += 1
            continue
        units.append(unit)
        i += width
    return units, dropped


# -- grammar --------------------------------------------------------------

def parse_units(units):
    """Parse a unit stream into a QueryAst (raises GrammarFail on unit index)."""
    n = len(units)
    i = 0

    def kind_at(j):
        return units[j].kind if j < n else None

    def expect(kind, what):
        nonlocal i
        if kind_at(i) != kind:
            raise GrammarFail(i, what)
        i += 1

    uses = []  # (variable, unit index) pairs checked against the patterns
    projection = []
    distinct = False
    count_var = None

    form = kind_at(i)
    if form not in ("select", "ask"):
        raise GrammarFail(i, "SELECT or ASK")
    i += 1
    if form == "select":
        if kind_at(i) == "distinct":
            distinct = True
            i += 1
        if kind_at(i) == "count":
            count_var = units[i].value
            uses.append((count_var, i))
            i += 1
        else:
            while kind_at(i) == "term" and isinstance(units[i].value, Variable):
                projection.append(units[i].value)
                uses.append((units[i].value, i))
                i += 1
            if not projection:
                raise GrammarFail(i, "a projected variable or COUNT")
    expect("where", "WHERE")
    expect("open", "{")

    patterns = []
    while True:
        terms = []
        for position in ("subject", "predicate", "object"):
            if kind_at(i) != "term":
                raise GrammarFail(i, f"a triple {position}")
            term = units[i].value
            if isinstance(term, Literal) and position != "object":
                raise GrammarFail(i, f"a non-literal {position}")
            terms.append(term)
            i += 1
        patterns.append(TriplePattern(*terms))
        if kind_at(i) == "dot":
            i += 1
            continue
        break

    filters = []
    while kind_at(i) == "filter":
        filters.append(units[i].value)
        uses.append((units[i].value.variable, i))
        i += 1
    expect("close", "}")

    order = limit = None
    if form == "select":
        if kind_at(i) == "order":
            order = units[i].value
            uses.append((order.variable, i))
            i += 1
        if kind_at(i) == "limit":
            limit = units[i].value
            i += 1
    if i != n:
        raise GrammarFail(i, "end of query")

    bound = {t for p in patterns for t in p if isinstance(t, Variable)}
    for var, j in uses:
        if var not in bound:
            raise GrammarFail(j, f"a variable bound in the patterns (not {var})")

    return QueryAst(
        form=form.upper(),
        patterns=tuple(patterns),
        projection=tuple(projection),
        distinct=distinct,
        count_var=count_var,
        filters=tuple(filters),
        order=order,
        limit=limit,
    )
