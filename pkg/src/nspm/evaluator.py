"""Corpus BLEU, exact-match accuracy and evaluation reports."""
import json
import math
from collections import Counter
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Tuple

from .exceptions import LengthMismatch


def _ngrams(tokens, n):
    return Counter(tuple(tokens[i:i + n]) for i in range(len(tokens) - n + 1))


def bleu_corpus(candidates, references, max_n=4):
    """Corpus-level BLEU-4 with uniform weights and no smoothing.

    One reference per candidate.  Any zero n-gram precision gives 0.
    """
    if len(candidates) != len(references):
        raise LengthMismatch(f"{len(candidates)} candidates vs {len(references)} references")
    if not candidates:
        raise ValueError("bleu_corpus needs at least one pair")
    matches = [0] * max_n
    totals = [0] * max_n
    c_len = r_len = 0
    for cand, ref in zip(candidates, references):
        cand, ref = list(cand), list(ref)
        c_len += len(cand)
        r_len += len(ref)
        for n in range(1, max_n + 1):
            cn, rn = _ngrams(cand, n), _ngrams(ref, n)
            matches[n - 1] += sum(min(c, rn[g]) for g, c in cn.items())
            totals[n - 1] += max(len(cand) - n + 1, 0)
    if c_len == 0 or any(m == 0 for m in matches):
        return 0.0
    log_p = sum(math.log(m / t) for m, t in zip(matches, totals)) / max_n
    bp = 1.0 if c_len > r_len else math.exp(1.0 - r_len / c_len)
    return min(1.0, bp * math.exp(log_p))


def _canonical(query):
    from .sparql_codec import canonicalize

    if query is None:
        return None
    try:
        return canonicalize(query)
    except ValueError:
        return None


def exact_match_accuracy(predictions, golds):
    """Fraction of predictions whose canonical query text equals the gold's.

    ``None`` or unparseable predictions count as mismatches.
    """
    if len(predictions) != len(golds):
        raise LengthMismatch(f"{len(predictions)} predictions vs {len(golds)} golds")
    if not golds:
        raise ValueError("exact_match_accuracy needs at least one pair")
    hits = 0
    for pred, gold in zip(predictions, golds):
        canon = _canonical(pred)
        hits += canon is not None and canon == _canonical(gold)
    return hits / len(golds)


ERROR_CLASSES = ("oov", "entity_collision_suspect", "structural")


@dataclass(frozen=True)
class ExampleResult:
    question: Tuple[str, ...]
    gold: Tuple[str, ...]
    predicted: Tuple[str, ...]
    sparql: Optional[str]
    match: bool
    repairs: int
    error_class: Optional[str] = None


@dataclass
class EvalReport:
    bleu: float
    accuracy: float
    n: int
    per_example: List[ExampleResult] = field(default_factory=list)
    errors_by_class: Dict[str, int] = field(default_factory=dict)
    preset: Optional[str] = None

    def __post_init__(self):
        if self.n < 1:
            raise ValueError("a report needs at least one example")
        if not 0.0 <= self.bleu <= 1.0 or not 0.0 <= self.accuracy <= 1.0:
            raise ValueError("bleu and accuracy must lie in [0, 1]")

    def to_dict(self):
        return {
            "preset": self.preset,
            "n": self.n,
            "bleu": self.bleu,
            "accuracy": self.accuracy,
            "accuracy_kind": "syntactic (canonical query string match)",
            "errors_by_class": dict(self.errors_by_class),
            "examples": [
                {
                    "question": " ".join(e.question),
                    "gold": " ".join(e.gold),
                    "predicted": " ".join(e.predicted),
                    "sparql": e.sparql,
                    "match": e.match,
                    "repairs": e.repairs,
                    "error_class": e.error_class,
                }
                for e in self.per_example
            ],
        }

    def to_json(self):
        return json.dumps(self.to_dict(), indent=2) + "\n"


def _entity_positions(tokens, preset):
    if preset.merged_tokens:
        return {i for i, t in enumerate(tokens) if t.startswith("dbr_")}
    return {i + 1 for i, t in enumerate(tokens[:-1]) if t == "dbr"}


def classify_error(question, predicted, gold, preset, source_vocab=None):
    """Bucket a mismatch as ``oov``, ``entity_collision_suspect`` or ``structural``."""
    if "<unk>" in predicted or (source_vocab is not None and any(t not in source_vocab for t in question)):
        return "oov"
    if len(predicted) == len(gold):
        diff = {i for i, (p, g) in enumerate(zip(predicted, gold)) if p != g}
        ents = _entity_positions(gold, preset) & _entity_positions(predicted, preset)
        if diff and diff <= ents:
            return "entity_collision_suspect"
    return "structural"


def evaluate(model, test_pairs, preset, max_len=60, predictions=None):
    """Translate, interpret and score ``(question, gold_query)`` token pairs.

    BLEU is computed on the raw predicted token sequences, accuracy on
    canonical query strings after interpretation.
    """
    from .interpreter import interpret
    from .learner.training import translate_batch
    from .sparql_codec import decode_sequence, get_preset, print_sparql

    preset = get_preset(preset)
    pairs = [(tuple(q), tuple(g)) for q, g in test_pairs]
    if not pairs:
        raise ValueError("evaluate needs a non-empty test set")
    if predictions is None:
        predictions = translate_batch(model, [list(q) for q, _ in pairs], max_len)
    bleu = bleu_corpus(predictions, [list(g) for _, g in pairs])
    results = []
    counts = Counter({c: 0 for c in ERROR_CLASSES})
    source_vocab = model.source_vocab if model is not None else None
    for (question, gold), pred in zip(pairs, predictions):
        pred = tuple(pred)
        gold_text = print_sparql(decode_sequence(list(gold), preset))
        try:
            sparql, report = interpret(list(pred), preset)
            repairs = len(report.actions)
        except ValueError:
            sparql, repairs = None, 0
        match = sparql is not None and sparql == gold_text
        error = None
        if not match:
            error = "structural" if sparql is None else classify_error(question, pred, gold, preset, source_vocab)
            counts[error] += 1
        results.append(ExampleResult(question, gold, pred, sparql, match, repairs, error))
    accuracy = sum(r.match for r in results) / len(results)
    return EvalReport(bleu, accuracy, len(results), results, dict(counts), preset.id)


def _percent(x):
    return "-" if x is None else f"{100.0 * x:.2f}%"


def _runtime(seconds):
    if seconds is None:
        return "-"
    seconds = int(round(seconds))
    return f"{seconds // 3600}h{seconds % 3600 // 60:02d}:{seconds % 60:02d}"


def format_table(rows):
    """Plain-text table with one row per encoding.

    ``rows`` are dicts with keys encoding, bleu, accuracy, runtime
    (seconds), convergence (epoch) and optionally description,
    mean_query_length and error.
    """
    with_len = any("mean_query_length" in r for r in rows)
    header = ["Encoding", "Description", "Test BLEU", "Accuracy", "Runtime", "Convergence"]
    if with_len:
        header.append("Query length")
    body = []
    for r in rows:
        if r.get("error"):
            cells = [r["encoding"], r.get("description", ""), "failed", r["error"], "-", "-"]
        else:
            conv = r.get("convergence")
            cells = [
                r["encoding"], r.get("description", ""), _percent(r.get("bleu")), _percent(r.get("accuracy")),
                _runtime(r.get("runtime")), "-" if conv is None else str(conv),
            ]
        if with_len:
            n = r.get("mean_query_length")
            cells.append("-" if n is None else f"{n:.2f}")
        body.append(cells)
    widths = [max(len(str(x)) for x in col) for col in zip(header, *body)]

    def line(cells):
        return "  ".join(str(c).ljust(w) for c, w in zip(cells, widths)).rstrip()

    out = [line(header), line(["-" * w for w in widths])]
    out += [line(b) for b in body]
    return "\n".join(out) + "\n"
