"""SPARQL subset codec: text <-> AST <-> token sequences."""
from sklearn.base import BaseEstimator, TransformerMixin

from .ast import (
    COMPARATORS,
    PREFIXES,
    Filter,
    Literal,
    OrderBy,
    PrefixedName,
    QueryAst,
    TriplePattern,
    Variable,
    ast_problems,
)
from .core import (
    decode_sequence,
    encode_query,
    parse_sparql,
    print_sparql,
    read_sequence,
    tokenize_nl,
)
from .presets import PRESETS, CodecPreset, get_preset


def canonicalize(text):
    """Canonical text of a query, via parse then print."""
    return print_sparql(parse_sparql(text))


class SparqlEncoder(TransformerMixin, BaseEstimator):
    """Stateless transformer from SPARQL strings to token lists.

    ``inverse_transform`` maps token lists back to canonical SPARQL text.
    """

    def __init__(self, preset="v3"):
        self.preset = preset

    def fit(self, X=None, y=None):
        self.preset_ = get_preset(self.preset)
        return self

    def transform(self, X):
        preset = get_preset(self.preset)
        return [encode_query(parse_sparql(q), preset) for q in X]

    def inverse_transform(self, X):
        preset = get_preset(self.preset)
        return [print_sparql(decode_sequence(t, preset)) for t in X]


__all__ = [
    "COMPARATORS", "PREFIXES", "PRESETS", "CodecPreset", "Filter", "Literal",
    "OrderBy", "PrefixedName", "QueryAst", "SparqlEncoder", "TriplePattern",
    "Variable", "ast_problems", "canonicalize", "decode_sequence",
    "encode_query", "get_preset", "parse_sparql", "print_sparql",
    "read_sequence", "tokenize_nl",
]
