"""Dataset generator: templates x ranked entities -> aligned pairs.

An entity of rank ``r`` is emitted ``max(1, round(K / r))`` times per
template slot, so prominent entities dominate their surface forms.
"""
import json
import logging
import os
import random
import re
from dataclasses import dataclass
from typing import Dict, Optional, Tuple
from urllib.parse import quote

from ._io import atomic_write_text, read_text
from .exceptions import BadPattern, NoEligibleEntities, PlaceholderMismatch, TooSmall
from .sparql_codec import PREFIXES, PrefixedName, encode_query, get_preset, parse_sparql, tokenize_nl
from .sparql_codec.ast import LOCAL_NAME_RE
from .sparql_codec.core import _term_tokens

log = logging.getLogger(__name__)

PLACEHOLDER_RE = re.compile(r"<([A-Z])>")
DIRECT = "direct"


@dataclass(frozen=True)
class QueryTemplate:
    id: str
    nl_pattern: str
    sparql_pattern: str
    placeholder_classes: Dict[str, str]

    @property
    def placeholders(self):
        return sorted(self.placeholder_classes)


@dataclass(frozen=True)
class EncodedPair:
    nl: Tuple[str, ...]
    query: Tuple[str, ...]
    template_id: str
    entity_uris: Tuple[str, ...] = ()

    @property
    def nl_text(self):
        return " ".join(self.nl)

    @property
    def query_text(self):
        return " ".join(self.query)


@dataclass
class GeneratorConfig:
    preset: str = "v3"
    allow_multi_placeholder: bool = True
    direct_translations: bool = False
    top_entity_count: int = 10
    max_pairs: Optional[int] = None
    seed: int = 0

    def __post_init__(self):
        get_preset(self.preset)
        if self.top_entity_count < 1:
            raise ValueError("top_entity_count must be >= 1")
        if self.max_pairs is not None and self.max_pairs < 1:
            raise ValueError("max_pairs must be positive")
        if self.preset == "v4" and not self.direct_translations:
            raise ValueError("preset v4 implies direct_translations")


def expand_iri(text):
    text = text.strip()
    if text.startswith("<") and text.endswith(">"):
        return text[1:-1]
    prefix, sep, local = text.partition(":")
    if sep and prefix in PREFIXES:
        return PREFIXES[prefix] + local
    return text


def to_prefixed_name(uri):
    """Shorten ``uri`` to a prefixed name of the closed prefix set, or None."""
    for prefix, ns in sorted(PREFIXES.items(), key=lambda kv: -len(kv[1])):
        if uri.startswith(ns):
            local = quote(uri[len(ns):], safe="_-%")
            if LOCAL_NAME_RE.match(local):
                return PrefixedName(prefix, local)
            return None
    return None


def _probe(sparql_pattern, placeholders):
    text = sparql_pattern
    for ph in placeholders:
        text = text.replace(f"<{ph}>", f"dbr:Probe_{ph}")
    return parse_sparql(text)


def parse_templates(source):
    """Read ``id<TAB>classes<TAB>nl_pattern<TAB>sparql_pattern`` rows."""
    lines = source.splitlines() if isinstance(source, str) else source
    templates = []
    for line in lines:
        line = line.rstrip("\r\n")
        if not line.strip() or line.startswith("#"):
            continue
        fields = line.split("\t")
        if len(fields) != 4:
            raise BadPattern(fields[0] if fields else "?", "expected 4 tab-separated columns")
        tid, classes, nl, sparql = (f.strip() for f in fields)
        nl_ph = set(PLACEHOLDER_RE.findall(nl))
        sq_ph = set(PLACEHOLDER_RE.findall(sparql))
        if nl_ph != sq_ph:
            raise PlaceholderMismatch(tid, f"{sorted(nl_ph)} vs {sorted(sq_ph)}")
        if not 1 <= len(nl_ph) <= 2:
            raise BadPattern(tid, f"{len(nl_ph)} placeholders (need 1 or 2)")
        class_list = [c for c in classes.split(";") if c.strip()]
        if len(class_list) != len(nl_ph):
            raise BadPattern(tid, f"{len(class_list)} classes for {len(nl_ph)} placeholders")
        placeholders = sorted(nl_ph)
        try:
            _probe(sparql, placeholders)
        except ValueError as exc:
            raise BadPattern(tid, str(exc)) from None
        templates.append(QueryTemplate(
            tid, nl, sparql, {ph: expand_iri(c) for ph, c in zip(placeholders, class_list)}
        ))
    return templates


def entity_frequency(rank, K):
    """Copies of a rank-``rank`` entity: round(K / rank), at least one."""
    if rank < 1 or K < 1:
        raise ValueError("rank and K must be positive")
    return max(1, (2 * K + rank) // (2 * rank))


def _render(template, bindings, preset):
    nl = template.nl_pattern
    sparql = template.sparql_pattern
    for ph, (record, pn) in bindings.items():
        nl = nl.replace(f"<{ph}>", record.label)
        sparql = sparql.replace(f"<{ph}>", str(pn))
    return tokenize_nl(nl), encode_query(parse_sparql(sparql), preset)


def _eligible(template, placeholder, catalog):
    cls = template.placeholder_classes[placeholder]
    out = []
    for record in catalog.of_class(cls):
        pn = to_prefixed_name(record.uri)
        if pn is not None:
            out.append((record, pn))
    if not out:
        raise NoEligibleEntities(template.id, cls)
    return out


def instantiate(templates, catalog, config):
    """Expand every template over its class-eligible entities."""
    preset = get_preset(config.preset)
    pairs = []
    skipped = 0
    for template in templates:
        placeholders = template.placeholders
        if len(placeholders) == 2 and not config.allow_multi_placeholder:
            skipped += 1
            continue
        slot_a = _eligible(template, placeholders[0], catalog)
        slot_b = _eligible(template, placeholders[1], catalog) if len(placeholders) == 2 else None
        cycle = 0
        for record, pn in slot_a:
            for _ in range(entity_frequency(record.rank, config.top_entity_count)):
                bindings = {placeholders[0]: (record, pn)}
                if slot_b is not None:
                    other = slot_b[cycle % len(slot_b)]
                    cycle += 1
                    if other[0].uri == record.uri and len(slot_b) > 1:
                        other = slot_b[cycle % len(slot_b)]
                        cycle += 1
                    bindings[placeholders[1]] = other
                nl, query = _render(template, bindings, preset)
                uris = tuple(bindings[ph][0].uri for ph in placeholders)
                pairs.append(EncodedPair(tuple(nl), tuple(query), template.id, uris))
    if skipped:
        log.info("skipped %d multi-placeholder templates", skipped)
    random.Random(config.seed).shuffle(pairs)
    if config.max_pairs is not None:
        pairs = pairs[:config.max_pairs]
    return pairs


def direct_translations(catalog, preset):
    """One ``label -> entity token`` pair per catalog entity."""
    preset = get_preset(preset)
    if not preset.merged_tokens:
        raise ValueError(f"direct translations need merged entity tokens, not preset {preset.id}")
    pairs = []
    skipped = 0
    for record in catalog.ranked():
        pn = to_prefixed_name(record.uri)
        try:
            nl = tokenize_nl(record.label)
        except ValueError:
            nl = None
        if pn is None or nl is None:
            skipped += 1
            continue
        pairs.append(EncodedPair(tuple(nl), tuple(_term_tokens(pn, preset)), DIRECT, (record.uri,)))
    if skipped:
        log.info("skipped %d entities without a usable label or name", skipped)
    return pairs


def split_indices(pairs, ratios=(80, 10, 10), seed=0):
    """Index lists for train/dev/test, grouping identical questions.

    Sizes count distinct questions: floor(N * ratio / 100) for dev and
    test, the remainder for train.  Train keeps every copy of its
    questions; dev and test keep the first pair of each question.
    """
    if len(ratios) != 3 or any(r < 0 for r in ratios) or sum(ratios) != 100:
        raise ValueError(f"ratios must be three non-negative numbers summing to 100, got {ratios}")
    groups = {}
    for i, pair in enumerate(pairs):
        groups.setdefault(pair.nl_text, []).append(i)
    keys = list(groups)
    random.Random(seed).shuffle(keys)
    n = len(keys)
    n_dev = n * ratios[1] // 100
    n_test = n * ratios[2] // 100
    n_train = n - n_dev - n_test
    for name, size, ratio in zip(("train", "dev", "test"), (n_train, n_dev, n_test), ratios):
        if ratio > 0 and size == 0:
            raise TooSmall(f"{name} partition would be empty ({n} distinct questions)")
    train_keys = set(keys[:n_train])
    dev_keys = keys[n_train:n_train + n_dev]
    test_keys = keys[n_train + n_dev:]
    train = [i for i, p in enumerate(pairs) if p.nl_text in train_keys]
    dev = sorted(groups[k][0] for k in dev_keys)
    test = sorted(groups[k][0] for k in test_keys)
    return train, dev, test


def split_dataset(pairs, ratios=(80, 10, 10), seed=0):
    return tuple([pairs[i] for i in idx] for idx in split_indices(pairs, ratios, seed))


# -- dataset directory ---------------------------------------------------------

SPLIT_NAMES = ("train", "dev", "test")


def write_dataset(directory, pairs, splits=None):
    """Write ``data.nl``, ``data.ql``, ``meta.jsonl`` and optional split indices."""
    atomic_write_text(os.path.join(directory, "data.nl"), "".join(p.nl_text + "\n" for p in pairs))
    atomic_write_text(os.path.join(directory, "data.ql"), "".join(p.query_text + "\n" for p in pairs))
    meta = "".join(
        json.dumps({"template_id": p.template_id, "entity_uris": list(p.entity_uris)}) + "\n"
        for p in pairs
    )
    atomic_write_text(os.path.join(directory, "meta.jsonl"), meta)
    if splits is not None:
        write_splits(directory, splits)


def write_splits(directory, splits):
    for name, idx in zip(SPLIT_NAMES, splits):
        atomic_write_text(os.path.join(directory, f"split.{name}.idx"), "".join(f"{i}\n" for i in idx))


def read_dataset(directory):
    """Return ``(pairs, splits)``; ``splits`` is None when no index files exist."""
    nl = read_text(os.path.join(directory, "data.nl")).splitlines()
    ql = read_text(os.path.join(directory, "data.ql")).splitlines()
    meta_path = os.path.join(directory, "meta.jsonl")
    meta = [json.loads(line) for line in read_text(meta_path).splitlines()] if os.path.exists(meta_path) else []
    if len(nl) != len(ql) or (meta and len(meta) != len(nl)):
        raise ValueError(f"{directory}: data.nl, data.ql and meta.jsonl are not line-aligned")
    pairs = []
    for k, (q, s) in enumerate(zip(nl, ql)):
        m = meta[k] if meta else {"template_id": "", "entity_uris": []}
        pairs.append(EncodedPair(tuple(q.split()), tuple(s.split()), m["template_id"], tuple(m["entity_uris"])))
    paths = [os.path.join(directory, f"split.{name}.idx") for name in SPLIT_NAMES]
    if not all(os.path.exists(p) for p in paths):
        return pairs, None
    splits = tuple([int(x) for x in read_text(p).split()] for p in paths)
    return pairs, splits
