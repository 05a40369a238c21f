"""Random valid query ASTs for round-trip and fuzz tests."""
import random
import string

from nspm.sparql_codec import (
    COMPARATORS,
    PREFIXES,
    Filter,
    Literal,
    OrderBy,
    PrefixedName,
    QueryAst,
    TriplePattern,
    Variable,
)

_LOCAL_HEAD = string.ascii_letters + string.digits + "_%"
_LOCAL_TAIL = _LOCAL_HEAD + "-"
_VAR_CHARS = string.ascii_letters + string.digits + "_"


def _local(rng):
    return rng.choice(_LOCAL_HEAD) + "".join(rng.choice(_LOCAL_TAIL) for _ in range(rng.randint(0, 10)))


def _var(rng):
    return Variable("".join(rng.choice(_VAR_CHARS) for _ in range(rng.randint(1, 4))))


def _name(rng):
    return PrefixedName(rng.choice(sorted(PREFIXES)), _local(rng))


def _literal(rng):
    kind = rng.randrange(4)
    if kind == 0:
        return Literal(str(rng.randint(-500, 10_000)))
    if kind == 1:
        return Literal(f"{rng.randint(0, 99)}.{rng.randint(0, 99)}")
    text = "".join(rng.choice(string.ascii_letters + "_-") for _ in range(rng.randint(0, 6)))
    return Literal(f'"{text}"' + ("@en" if kind == 3 else ""))


def random_ast(rng=None, require_name=False):
    """A query satisfying every AST invariant, drawn from ``rng``."""
    rng = rng or random.Random()
    pool = [_var(rng) for _ in range(rng.randint(1, 3))]
    patterns = []
    for _ in range(rng.randint(1, 3)):
        s = rng.choice(pool) if rng.random() < 0.5 else _name(rng)
        p = rng.choice(pool) if rng.random() < 0.15 else _name(rng)
        r = rng.random()
        o = rng.choice(pool) if r < 0.45 else (_literal(rng) if r < 0.6 else _name(rng))
        patterns.append(TriplePattern(s, p, o))
    if require_name and not any(isinstance(t, PrefixedName) for pat in patterns for t in pat):
        patterns[0] = TriplePattern(patterns[0].subject, _name(rng), patterns[0].object)
    bound = sorted({t for pat in patterns for t in pat if isinstance(t, Variable)}, key=lambda v: v.name)
    if not bound:
        patterns[0] = TriplePattern(pool[0], patterns[0].predicate, patterns[0].object)
        bound = [pool[0]]
    filters = tuple(
        Filter(rng.choice(bound), rng.choice(COMPARATORS), _literal(rng))
        for _ in range(rng.choice((0, 0, 1, 2)))
    )
    if rng.random() < 0.25:
        return QueryAst("ASK", tuple(patterns), filters=filters)
    count = rng.choice(bound) if rng.random() < 0.2 else None
    projection = () if count else tuple(rng.sample(bound, rng.randint(1, len(bound))))
    order = OrderBy(rng.choice(("ASC", "DESC")), rng.choice(bound)) if rng.random() < 0.3 else None
    limit = rng.randint(1, 100) if rng.random() < 0.3 else None
    return QueryAst("SELECT", tuple(patterns), projection, rng.random() < 0.2, count, filters, order, limit)
