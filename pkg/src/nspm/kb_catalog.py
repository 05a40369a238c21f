"""N-Triples ingestion and the ranked entity catalog.

Entities are ranked by degree (in + out) over the ingested triples, with
ties broken by ascending URI.  An external ranking file can override the
computed order.
"""
import logging
import re
from collections import Counter, defaultdict
from dataclasses import dataclass
from typing import Dict, FrozenSet, NamedTuple, Optional, Tuple, Union

from .exceptions import BadRank, EmptyCatalog, MalformedLine, UnknownEntity

log = logging.getLogger(__name__)

RDF_TYPE = "http://www.w3.org/1999/02/22-rdf-syntax-ns#type"
RDFS_LABEL = "http://www.w3.org/2000/01/rdf-schema#label"


@dataclass(frozen=True)
class IRI:
    value: str

    def __str__(self):
        return f"<{self.value}>"


@dataclass(frozen=True)
class BlankNode:
    label: str

    def __str__(self):
        return f"_:{self.label}"


@dataclass(frozen=True)
class RDFLiteral:
    lexical: str
    language: Optional[str] = None
    datatype: Optional[str] = None

    def __str__(self):
        out = '"' + escape_literal(self.lexical) + '"'
        if self.language:
            out += "@" + self.language
        elif self.datatype:
            out += f"^^<{self.datatype}>"
        return out


class Triple(NamedTuple):
    subject: Union[IRI, BlankNode]
    predicate: IRI
    object: Union[IRI, BlankNode, RDFLiteral]

    def to_ntriples(self):
        return f"{self.subject} {self.predicate} {self.object} ."


class TripleList(list):
    """A list of triples that remembers how many lines were skipped."""

    skipped = 0


_IRI = r"<([A-Za-z][A-Za-z0-9+.\-]*:[^<>\"{}|^`\\\s]*)>"
_BNODE = r"_:([A-Za-z0-9_][A-Za-z0-9_.\-]*)"
_LITERAL = r'"((?:[^"\\\n\r]|\\.)*)"(?:@([A-Za-z]+(?:-[A-Za-z0-9]+)*)|\^\^' + _IRI + r")?"
_STATEMENT = re.compile(
    rf"\s*(?:{_IRI}|{_BNODE})\s+{_IRI}\s*(?:{_IRI}|{_BNODE}|{_LITERAL})\s*\.\s*(?:#.*)?\Z"
)
_ESCAPE = re.compile(r"\\(?:u([0-9A-Fa-f]{4})|U([0-9A-Fa-f]{8})|(.))")
_SIMPLE_ESCAPES = {"t": "\t", "b": "\b", "n": "\n", "r": "\r", "f": "\f", '"': '"', "'": "'", "\\": "\\"}


def _unescape(text, line_no, line):
    def sub(m):
        if m.group(1) or m.group(2):
            return chr(int(m.group(1) or m.group(2), 16))
        try:
            return _SIMPLE_ESCAPES[m.group(3)]
        except KeyError:
            raise MalformedLine(line_no, line) from None

    return _ESCAPE.sub(sub, text)


def escape_literal(text):
    return (
        text.replace("\\", "\\\\")
        .replace('"', '\\"')
        .replace("\n", "\\n")
        .replace("\r", "\\r")
        .replace("\t", "\\t")
    )


def parse_line(line, line_no):
    """Parse one statement line; returns None for blank and comment lines."""
    stripped = line.strip()
    if not stripped or stripped.startswith("#"):
        return None
    m = _STATEMENT.match(line.rstrip("\r\n"))
    if m is None:
        raise MalformedLine(line_no, line)
    s_iri, s_bn, pred, o_iri, o_bn, lexical, lang, dtype = m.groups()
    subject = IRI(s_iri) if s_iri is not None else BlankNode(s_bn)
    if o_iri is not None:
        obj = IRI(o_iri)
    elif o_bn is not None:
        obj = BlankNode(o_bn)
    else:
        obj = RDFLiteral(_unescape(lexical, line_no, line), lang, dtype)
    return Triple(subject, IRI(pred), obj)


def parse_ntriples(source, lenient=False):
    """Parse N-Triples from a string or an iterable of lines.

    With ``lenient`` malformed lines are skipped; the count is stored on
    the returned list's ``skipped`` attribute.
    """
    # str.splitlines would also break on form feeds and other separators
    lines = source.split("\n") if isinstance(source, str) else source
    triples = TripleList()
    for line_no, line in enumerate(lines, start=1):
        try:
            triple = parse_line(line, line_no)
        except MalformedLine:
            if not lenient:
                raise
            triples.skipped += 1
            continue
        if triple is not None:
            triples.append(triple)
    if triples.skipped:
        log.warning("skipped %d malformed N-Triples lines", triples.skipped)
    return triples


def serialize_ntriples(triples):
    return "".join(t.to_ntriples() + "\n" for t in triples)


@dataclass(frozen=True)
class EntityRecord:
    uri: str
    labels: Tuple[str, ...]
    classes: FrozenSet[str]
    rank: int

    @property
    def label(self):
        return self.labels[0]


class EntityCatalog:
    """Immutable mapping of entity URI to :class:`EntityRecord`."""

    def __init__(self, records):
        self.entities: Dict[str, EntityRecord] = {r.uri: r for r in records}
        if len(self.entities) != len(records):
            raise ValueError("duplicate entity URIs")
        index = defaultdict(list)
        for r in self.entities.values():
            for cls in r.classes:
                index[cls].append(r)
        self.class_index: Dict[str, Tuple[str, ...]] = {
            cls: tuple(r.uri for r in sorted(members, key=lambda r: (r.rank, r.uri)))
            for cls, members in sorted(index.items())
        }

    def __len__(self):
        return len(self.entities)

    def __iter__(self):
        return iter(self.ranked())

    def __getitem__(self, uri):
        return self.entities[uri]

    def __contains__(self, uri):
        return uri in self.entities

    def ranked(self):
        return sorted(self.entities.values(), key=lambda r: (r.rank, r.uri))

    def of_class(self, class_iri):
        return [self.entities[u] for u in self.class_index.get(class_iri, ())]

    def ranks(self):
        return {uri: r.rank for uri, r in self.entities.items()}

    def with_ranks(self, ranks):
        return EntityCatalog([
            EntityRecord(r.uri, r.labels, r.classes, ranks[r.uri]) for r in self.entities.values()
        ])

    def to_tsv(self):
        lines = [
            f"{r.uri}\t{r.rank}\t{r.label}\t{';'.join(sorted(r.classes))}\n" for r in self.ranked()
        ]
        return "".join(lines)


def read_catalog_tsv(source):
    """Read a catalog previously written by :meth:`EntityCatalog.to_tsv`."""
    lines = source.splitlines() if isinstance(source, str) else source
    records = []
    for line_no, line in enumerate(lines, start=1):
        line = line.rstrip("\n")
        if not line or line.startswith("#"):
            continue
        fields = line.split("\t")
        if len(fields) != 4:
            raise MalformedLine(line_no, line)
        uri, rank, label, classes = fields
        records.append(EntityRecord(uri, (label,), frozenset(c for c in classes.split(";") if c), _parse_rank(rank)))
    if not records:
        raise EmptyCatalog("catalog file holds no entities")
    return EntityCatalog(records)


def rank_by_degree(triples, entity_uris):
    """Dense ranks by descending degree, ties by ascending URI."""
    entity_uris = set(entity_uris)
    if not entity_uris:
        raise ValueError("rank_by_degree needs at least one entity")
    degree = Counter()
    for s, _, o in triples:
        if isinstance(s, IRI) and s.value in entity_uris:
            degree[s.value] += 1
        if isinstance(o, IRI) and o.value in entity_uris:
            degree[o.value] += 1
    order = sorted(entity_uris, key=lambda u: (-degree[u], u))
    return {uri: rank for rank, uri in enumerate(order, start=1)}


def _label_key(lit):
    lang = (lit.language or "").lower()
    if lang == "en" or lang.startswith("en-"):
        pref = 0
    elif not lit.language:
        pref = 1
    else:
        pref = 2
    return pref, lit.lexical.strip()


def build_catalog(triples, label_predicate=RDFS_LABEL, type_predicate=RDF_TYPE,
                  target_class=None, entity_uris=None):
    """Collect labelled entities (optionally of one class) and rank them."""
    labels = defaultdict(set)
    classes = defaultdict(set)
    for s, p, o in triples:
        if not isinstance(s, IRI):
            continue
        if p.value == label_predicate and isinstance(o, RDFLiteral) and o.lexical.strip():
            labels[s.value].add(o)
        elif p.value == type_predicate and isinstance(o, IRI):
            classes[s.value].add(o.value)

    wanted = set(entity_uris) if entity_uris is not None else None
    candidates = [
        uri for uri in labels
        if (target_class is None or target_class in classes[uri])
        and (wanted is None or uri in wanted)
    ]
    if not candidates:
        raise EmptyCatalog(f"no labelled entity qualifies (class {target_class})")

    ranks = rank_by_degree(triples, candidates)
    records = []
    for uri in candidates:
        ordered = []
        for lit in sorted(labels[uri], key=_label_key):
            text = lit.lexical.strip()
            if text not in ordered:
                ordered.append(text)
        records.append(EntityRecord(uri, tuple(ordered), frozenset(classes[uri]), ranks[uri]))
    return EntityCatalog(records)


def _parse_rank(text):
    try:
        rank = int(text.strip())
    except ValueError:
        raise BadRank(f"rank {text!r} is not an integer") from None
    if rank < 1:
        raise BadRank(f"rank {rank} is not positive")
    return rank


def load_ranking(source, catalog, strict=False):
    """Override catalog ranks with a ``uri<TAB>rank`` file.

    Listed entities come first in file-rank order, unlisted ones follow in
    their previous order; the result is re-densified to 1..N.
    """
    lines = source.splitlines() if isinstance(source, str) else source
    listed = {}
    for line_no, line in enumerate(lines, start=1):
        line = line.rstrip("\r\n")
        if not line.strip() or line.lstrip().startswith("#"):
            continue
        fields = line.split("\t")
        if len(fields) != 2:
            raise BadRank(f"line {line_no}: expected uri<TAB>rank")
        uri, rank = fields[0].strip(), _parse_rank(fields[1])
        if uri not in catalog:
            if strict:
                raise UnknownEntity(uri)
            log.info("ranking file mentions unknown entity %s", uri)
            continue
        listed[uri] = rank
    head = sorted(listed, key=lambda u: (listed[u], u))
    tail = [r.uri for r in catalog.ranked() if r.uri not in listed]
    return catalog.with_ranks({uri: k for k, uri in enumerate(head + tail, start=1)})
