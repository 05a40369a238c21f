"""Public codec operations: parse, print, encode, decode, tokenize."""
import re

from ..exceptions import DecodeError, EmptyQuestion, SparqlSyntaxError, UnsupportedConstruct
from .ast import PrefixedName, Variable, ast_problems
from .presets import get_preset
from .syntax import (
    MATH_TOKENS,
    GrammarFail,
    group_atoms,
    lex_text,
    lex_tokens,
    parse_units,
)


def parse_sparql(text):
    """Parse query text in the supported subset into a :class:`QueryAst`.

    Keywords are case-insensitive; ``ORDER BY ?x`` is read as ascending.
    Raises :class:`SparqlSyntaxError` with a character offset.
    """
    try:
        atoms, end = lex_text(text)
    except GrammarFail as exc:
        raise SparqlSyntaxError(exc.index, exc.expected, text[exc.index:exc.index + 10]) from None

    def at(index):
        if index < len(atoms):
            return atoms[index].start, text[atoms[index].start:atoms[index].end]
        return end, None

    try:
        units, _ = group_atoms(atoms, merged=False, bare_order=True)
    except GrammarFail as exc:
        pos, found = at(exc.index)
        raise SparqlSyntaxError(pos, exc.expected, found) from None
    try:
        return parse_units(units)
    except GrammarFail as exc:
        if exc.index < len(units):
            u = units[exc.index]
            raise SparqlSyntaxError(u.start, exc.expected, text[u.start:u.end]) from None
        raise SparqlSyntaxError(end, exc.expected) from None


def _term_text(term):
    return str(term)


def print_sparql(ast):
    """Canonical query text: upper-case keywords and single spaces."""
    parts = [ast.form]
    if ast.distinct:
        parts.append("DISTINCT")
    if ast.count_var is not None:
        parts.append(f"COUNT({ast.count_var})")
    parts.extend(str(v) for v in ast.projection)
    body = " . ".join(" ".join(_term_text(t) for t in p) for p in ast.patterns)
    for flt in ast.filters:
        body += f" FILTER({flt.variable} {flt.op} {flt.literal})"
    parts.append("WHERE { " + body + " }")
    if ast.order is not None:
        parts.append(f"ORDER BY {ast.order.direction}({ast.order.variable})")
    if ast.limit is not None:
        parts.append(f"LIMIT {ast.limit}")
    return " ".join(parts)


def _term_tokens(term, preset):
    if isinstance(term, Variable):
        return ["var_" + term.name] if preset.merged_tokens else ["?" + term.name]
    if isinstance(term, PrefixedName):
        if preset.merged_tokens:
            return [f"{term.prefix}_{term.local}"]
        return [term.prefix, term.local]
    return [term.lexical]


def encode_query(ast, preset):
    """Encode an AST as a token list under ``preset``."""
    preset = get_preset(preset)
    problems = ast_problems(ast)
    if problems:
        raise UnsupportedConstruct("; ".join(problems))
    merged = preset.merged_tokens
    var = lambda v: _term_tokens(v, preset)  # noqa: E731

    out = [ast.form.lower()]
    if ast.distinct:
        out.append("distinct")
    if ast.count_var is not None:
        out += ["agg_count", *var(ast.count_var)] if merged else ["count", "(", *var(ast.count_var), ")"]
    for v in ast.projection:
        out += var(v)
    out += ["where", preset.open_token]
    for k, pattern in enumerate(ast.patterns):
        if k:
            out.append(preset.sep_token)
        for term in pattern:
            out += _term_tokens(term, preset)
    for flt in ast.filters:
        if merged:
            out += ["filter", *var(flt.variable), MATH_TOKENS[flt.op], flt.literal.lexical]
        else:
            out += ["filter", "(", *var(flt.variable), flt.op, flt.literal.lexical, ")"]
    out.append(preset.close_token)
    if ast.order is not None:
        direction = ast.order.direction.lower()
        if merged:
            out += ["ord_" + direction, *var(ast.order.variable)]
        else:
            out += ["order", "by", direction, "(", *var(ast.order.variable), ")"]
    if ast.limit is not None:
        out += ["limit", str(ast.limit)]
    return out


def read_sequence(line, preset=None):
    """Split a serialized sequence line into tokens.

    Presets with the whitespace fix collapse runs of whitespace; older
    presets treat a doubled space as an empty (illegal) token.
    """
    preset = get_preset(preset) if preset is not None else None
    line = line.rstrip("\n")
    if preset is None or preset.whitespace_fix:
        return line.split()
    tokens = line.strip(" ").split(" ") if line.strip(" ") else []
    for pos, tok in enumerate(tokens):
        if not tok or any(c.isspace() for c in tok):
            raise DecodeError(pos, tok, "empty token (repeated whitespace)")
    return tokens


def decode_sequence(tokens, preset):
    """Decode a token list (or a serialized line) back into a QueryAst."""
    preset = get_preset(preset)
    if isinstance(tokens, str):
        tokens = read_sequence(tokens, preset)
    tokens = list(tokens)
    if not tokens:
        raise DecodeError(0, None, "empty sequence")

    def token_at(pos):
        return tokens[pos] if pos < len(tokens) else None

    try:
        atoms, _ = lex_tokens(tokens, preset)
    except GrammarFail as exc:
        raise DecodeError(exc.index, token_at(exc.index), exc.expected) from None
    try:
        units, _ = group_atoms(atoms, merged=preset.merged_tokens)
    except GrammarFail as exc:
        pos = atoms[exc.index].start if exc.index < len(atoms) else len(tokens)
        raise DecodeError(pos, token_at(pos), exc.expected) from None
    try:
        return parse_units(units)
    except GrammarFail as exc:
        pos = units[exc.index].start if exc.index < len(units) else len(tokens)
        raise DecodeError(pos, token_at(pos), "expected " + exc.expected) from None


_NL_STRIP = re.compile("[?!.,'\"]")


def tokenize_nl(text):
    """Lower-case, strip ``?!.,'"`` and split on whitespace."""
    tokens = _NL_STRIP.sub("", text.lower()).split()
    if not tokens:
        raise EmptyQuestion(f"no token survives in {text!r}")
    return tokens
