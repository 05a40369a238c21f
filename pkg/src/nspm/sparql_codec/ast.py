"""Query AST for the supported SPARQL subset.

The subset is SELECT/ASK over a basic graph pattern with optional
FILTER comparisons, one ORDER BY key, LIMIT and a single COUNT
aggregate.  Prefixed names are restricted to a closed set of prefixes.
"""
import re
from dataclasses import dataclass
from typing import Optional, Tuple, Union

PREFIXES = {
    "dbr": "http://dbpedia.org/resource/",
    "dbo": "http://dbpedia.org/ontology/",
    "dbp": "http://dbpedia.org/property/",
    "rdf": "http://www.w3.org/1999/02/22-rdf-syntax-ns#",
    "rdfs": "http://www.w3.org/2000/01/rdf-schema#",
    "foaf": "http://xmlns.com/foaf/0.1/",
}

COMPARATORS = ("<", ">", "=", "<=", ">=", "!=")

VAR_NAME_RE = re.compile(r"[A-Za-z0-9_]+\Z")
LOCAL_NAME_RE = re.compile(r"[A-Za-z0-9_%][A-Za-z0-9_%\-]*\Z")
LITERAL_RE = re.compile(
    r'(?:[+-]?\d+(?:\.\d+)?|"[^"\s\\]*"(?:@[A-Za-z]+(?:-[A-Za-z0-9]+)*)?)\Z'
)
INTEGER_RE = re.compile(r"\d+\Z")


@dataclass(frozen=True)
class Variable:
    name: str

    def __str__(self):
        return "?" + self.name


@dataclass(frozen=True)
class PrefixedName:
    prefix: str
    local: str

    def __str__(self):
        return f"{self.prefix}:{self.local}"

    @property
    def iri(self):
        return PREFIXES[self.prefix] + self.local


@dataclass(frozen=True)
class Literal:
    lexical: str

    def __str__(self):
        return self.lexical


Term = Union[Variable, PrefixedName, Literal]


@dataclass(frozen=True)
class TriplePattern:
    subject: Term
    predicate: Term
    object: Term

    def __iter__(self):
        return iter((self.subject, self.predicate, self.object))


@dataclass(frozen=True)
class Filter:
    variable: Variable
    op: str
    literal: Literal


@dataclass(frozen=True)
class OrderBy:
    direction: str  # ASC | DESC
    variable: Variable


@dataclass(frozen=True)
class QueryAst:
    form: str  # SELECT | ASK
    patterns: Tuple[TriplePattern, ...]
    projection: Tuple[Variable, ...] = ()
    distinct: bool = False
    count_var: Optional[Variable] = None
    filters: Tuple[Filter, ...] = ()
    order: Optional[OrderBy] = None
    limit: Optional[int] = None

    def pattern_variables(self):
        return {t for p in self.patterns for t in p if isinstance(t, Variable)}

    def prefixed_names(self):
        return [t for p in self.patterns for t in p if isinstance(t, PrefixedName)]


def check_term(term, position):
    """Return a problem description for a malformed term, else None."""
    if isinstance(term, Variable):
        if not VAR_NAME_RE.match(term.name):
            return f"bad variable name {term.name!r}"
    elif isinstance(term, PrefixedName):
        if term.prefix not in PREFIXES:
            return f"unknown prefix {term.prefix!r}"
        if not LOCAL_NAME_RE.match(term.local):
            return f"bad local name {term.local!r}"
    elif isinstance(term, Literal):
        if position != "object":
            return f"literal in {position} position"
        if not LITERAL_RE.match(term.lexical):
            return f"bad literal {term.lexical!r}"
    else:
        return f"not a term: {term!r}"
    return None


def ast_problems(ast):
    """List every invariant violation of ``ast`` (empty when valid)."""
    problems = []
    if ast.form not in ("SELECT", "ASK"):
        problems.append(f"unknown form {ast.form!r}")
    if not ast.patterns:
        problems.append("no triple patterns")
    for pattern in ast.patterns:
        for term, position in zip(pattern, ("subject", "predicate", "object")):
            problem = check_term(term, position)
            if problem:
                problems.append(problem)
    bound = ast.pattern_variables()
    used = list(ast.projection)
    if ast.form == "ASK":
        if ast.projection or ast.count_var or ast.distinct or ast.order or ast.limit is not None:
            problems.append("ASK takes no projection or solution modifiers")
    elif bool(ast.projection) == (ast.count_var is not None):
        problems.append("SELECT needs either a projection or COUNT, not both")
    if ast.count_var is not None:
        used.append(ast.count_var)
    for flt in ast.filters:
        if flt.op not in COMPARATORS:
            problems.append(f"bad comparator {flt.op!r}")
        if not LITERAL_RE.match(flt.literal.lexical):
            problems.append(f"bad literal {flt.literal.lexical!r}")
        used.append(flt.variable)
    if ast.order is not None:
        if ast.order.direction not in ("ASC", "DESC"):
            problems.append(f"bad order direction {ast.order.direction!r}")
        used.append(ast.order.variable)
    if ast.limit is not None and (not isinstance(ast.limit, int) or ast.limit < 1):
        problems.append("LIMIT must be a positive integer")
    for var in used:
        if var not in bound:
            problems.append(f"variable {var} does not occur in the patterns")
    return problems
