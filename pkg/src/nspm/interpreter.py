"""Rule-based reconstruction of SPARQL from raw learner output.

Repairs run in a fixed order and only ever delete tokens or insert the
structural tokens ``where``, the opening brace and the closing brace:

0. truncate at an end-of-sequence marker;
1. drop UNK and tokens outside the preset's lexicon;
2. drop tokens that cannot form a clause (e.g. a dangling ``agg_count``),
   and everything before the first ``select``/``ask``;
3. insert a missing ``where`` / opening brace;
4. balance braces;
5. prune incomplete triples, misplaced clauses and unbound variables.

The output of a repair always decodes, and repairing it again is a no-op.
"""
import json
from dataclasses import dataclass
from typing import List, Optional, Tuple

from .exceptions import Unrepairable
from .sparql_codec import decode_sequence, get_preset, print_sparql
from .sparql_codec.ast import Literal, Variable
from .sparql_codec.syntax import Unit, group_atoms, lex_tokens

EOS_TOKENS = frozenset({"</s>", "<eos>"})
UNK_TOKENS = frozenset({"<unk>", "<pad>", "<s>"})


@dataclass(frozen=True)
class RepairAction:
    kind: str  # DroppedUnknown | PrunedFragment | BalancedBracket | InsertedKeyword | TruncatedAfterEOS
    op: str  # drop | insert | truncate
    pos: int
    token: Optional[str] = None

    def __str__(self):
        if self.kind == "BalancedBracket":
            side = "open" if self.token in ("{", "brack_open") else "close"
            return f"BalancedBracket({side},{self.pos})"
        if self.kind == "TruncatedAfterEOS":
            return f"TruncatedAfterEOS({self.pos})"
        return f"{self.kind}({self.token},{self.pos})"


@dataclass(frozen=True)
class RepairReport:
    actions: Tuple[RepairAction, ...]
    repaired: Tuple[str, ...]

    def to_json(self):
        return json.dumps({"actions": [str(a) for a in self.actions], "repaired": " ".join(self.repaired)})


def apply_actions(tokens, actions):
    """Replay repair actions on ``tokens`` (used to audit reports)."""
    seq = list(tokens)
    for a in actions:
        if a.op == "truncate":
            del seq[a.pos:]
        elif a.op == "drop":
            if seq[a.pos] != a.token:
                raise ValueError(f"action {a} does not match token {seq[a.pos]!r}")
            del seq[a.pos]
        else:
            seq.insert(a.pos, a.token)
    return seq


class _Editor:
    """A sequence of units, each carrying its raw tokens, that logs edits."""

    def __init__(self, items, actions):
        self.items = items  # list of (Unit, [raw tokens])
        self.actions = actions

    def offset(self, k):
        return sum(len(raw) for _, raw in self.items[:k])

    def kind(self, k):
        return self.items[k][0].kind

    def drop(self, k, kind):
        pos = self.offset(k)
        for tok in self.items[k][1]:
            self.actions.append(RepairAction(kind, "drop", pos, tok))
        del self.items[k]

    def drop_many(self, indices, kind):
        for shift, k in enumerate(sorted(set(indices))):
            self.drop(k - shift, kind)

    def insert(self, k, unit_kind, token, kind):
        self.actions.append(RepairAction(kind, "insert", self.offset(k), token))
        self.items.insert(k, (Unit(unit_kind, None, -1, -1), [token]))

    def find(self, kind, start=0, stop=None):
        stop = len(self.items) if stop is None else stop
        for k in range(start, stop):
            if self.kind(k) == kind:
                return k
        return None

    def tokens(self):
        return [tok for _, raw in self.items for tok in raw]


def _drop_positions(seq, positions, kind, actions):
    for shift, pos in enumerate(sorted(positions)):
        actions.append(RepairAction(kind, "drop", pos - shift, seq[pos]))
    keep = set(positions)
    return [t for i, t in enumerate(seq) if i not in keep]


def _lexical_pass(seq, preset, vocabulary, actions):
    while True:
        bad = [i for i, t in enumerate(seq)
               if t in UNK_TOKENS or (vocabulary is not None and t not in vocabulary)]
        if not bad:
            _, bad = lex_tokens(seq, preset, lenient=True)
        if not bad:
            return seq
        seq = _drop_positions(seq, bad, "DroppedUnknown", actions)


def _unit_pass(seq, preset, actions):
    """Group into clauses, dropping atoms that cannot start one."""
    while True:
        atoms, _ = lex_tokens(seq, preset)
        units, dropped = group_atoms(atoms, merged=preset.merged_tokens, lenient=True)
        if not dropped:
            return [(u, seq[u.start:u.end]) for u in units]
        positions = [p for a in dropped for p in range(a.start, a.end)]
        seq = _drop_positions(seq, positions, "PrunedFragment", actions)


def _head_end(ed, form_k):
    k = form_k + 1
    if ed.kind(form_k) == "select":
        while k < len(ed.items) and (
            ed.kind(k) in ("distinct", "count")
            or (ed.kind(k) == "term" and isinstance(ed.items[k][0].value, Variable))
        ):
            k += 1
    return k


def _prune_body(ed, open_k, close_k):
    """Return (indices to drop, kept triple term indices) inside the braces."""
    drop = []
    triples = []
    cur = []
    pending_dot = None
    filters = []
    for k in range(open_k + 1, close_k):
        unit = ed.items[k][0]
        if unit.kind == "term":
            if len(cur) == 3:
                drop.append(k)
            elif isinstance(unit.value, Literal) and len(cur) < 2:
                drop.append(k)
            else:
                cur.append(k)
        elif unit.kind == "dot":
            if len(cur) == 3:
                triples.append(cur)
                cur = []
                pending_dot = k
            else:
                drop.extend(cur)
                cur = []
                drop.append(k)
        elif unit.kind == "filter":
            filters.append(k)
        else:
            drop.append(k)
    if len(cur) == 3:
        triples.append(cur)
        pending_dot = None
    else:
        drop.extend(cur)
        if pending_dot is not None:
            drop.append(pending_dot)
    kept_terms = [k for t in triples for k in t]
    last_term = max(kept_terms) if kept_terms else None
    for k in filters:
        if last_term is None or k < last_term:
            drop.append(k)
    return drop, triples


def repair_sequence(tokens, preset, vocabulary=None):
    """Repair a raw token sequence; raises :class:`Unrepairable`."""
    preset = get_preset(preset)
    seq = list(tokens)
    actions: List[RepairAction] = []

    eos = next((i for i, t in enumerate(seq) if t in EOS_TOKENS), None)
    if eos is not None:
        actions.append(RepairAction("TruncatedAfterEOS", "truncate", eos))
        seq = seq[:eos]

    seq = _lexical_pass(seq, preset, vocabulary, actions)
    ed = _Editor(_unit_pass(seq, preset, actions), actions)

    form_k = next((k for k in range(len(ed.items)) if ed.kind(k) in ("select", "ask")), None)
    if form_k is None:
        raise Unrepairable("no query form token (select/ask) survives")
    ed.drop_many(range(form_k), "PrunedFragment")
    form = ed.kind(0)

    # where / opening brace
    where_k = ed.find("where", 1)
    if where_k is None:
        open_k = ed.find("open", 1)
        at = open_k if open_k is not None else _head_end(ed, 0)
        ed.insert(at, "where", "where", "InsertedKeyword")
        where_k = at
    if ed.find("open", where_k + 1) is None:
        ed.insert(where_k + 1, "open", preset.open_token, "InsertedKeyword")
    open_k = ed.find("open", where_k + 1)

    # braces
    extra = [k for k in range(len(ed.items)) if ed.kind(k) == "open" and k != open_k]
    extra += [k for k in range(open_k) if ed.kind(k) == "close"]
    close_k = ed.find("close", open_k + 1)
    if close_k is not None:
        extra += [k for k in range(close_k + 1, len(ed.items)) if ed.kind(k) == "close"]
    ed.drop_many(extra, "BalancedBracket")
    open_k = ed.find("open")
    close_k = ed.find("close", open_k + 1)
    if close_k is None:
        end = next((k for k in range(open_k + 1, len(ed.items)) if ed.kind(k) in ("order", "limit")),
                   len(ed.items))
        ed.insert(end, "close", preset.close_token, "BalancedBracket")
        close_k = end
    where_k = ed.find("where")

    # structural pruning
    drop = []
    seen = set()
    has_proj = False
    for k in range(1, where_k):
        kind = ed.kind(k)
        value = ed.items[k][0].value
        if form == "ask":
            drop.append(k)
        elif kind == "distinct" and not seen:
            seen.add("distinct")
        elif kind == "count" and "count" not in seen and not has_proj:
            seen.update(("distinct", "count"))
        elif kind == "term" and isinstance(value, Variable) and "count" not in seen:
            seen.add("distinct")
            has_proj = True
        else:
            drop.append(k)
    drop += [k for k in range(where_k + 1, open_k)]
    body_drop, triples = _prune_body(ed, open_k, close_k)
    drop += body_drop
    tail_seen = set()
    for k in range(close_k + 1, len(ed.items)):
        kind = ed.kind(k)
        if form == "select" and kind == "order" and not tail_seen:
            tail_seen.add("order")
        elif form == "select" and kind == "limit" and "limit" not in tail_seen:
            tail_seen.update(("order", "limit"))
        else:
            drop.append(k)
    if not triples:
        raise Unrepairable("no complete triple pattern survives")

    bound = {ed.items[k][0].value for t in triples for k in t
             if isinstance(ed.items[k][0].value, Variable)}
    dropped = set(drop)
    for k in range(len(ed.items)):
        if k in dropped:
            continue
        unit = ed.items[k][0]
        var = None
        if unit.kind == "term" and k < where_k:
            var = unit.value
        elif unit.kind == "count":
            var = unit.value
        elif unit.kind == "filter":
            var = unit.value.variable
        elif unit.kind == "order":
            var = unit.value.variable
        if var is not None and var not in bound:
            drop.append(k)
    dropped = set(drop)
    if form == "select" and not any(
        ed.kind(k) in ("count", "term") for k in range(1, where_k) if k not in dropped
    ):
        raise Unrepairable("no projected variable survives")
    ed.drop_many(drop, "PrunedFragment")
    return RepairReport(tuple(actions), tuple(ed.tokens()))


def interpret(tokens, preset, vocabulary=None):
    """Repair, decode and print: returns ``(sparql, report)``."""
    preset = get_preset(preset)
    report = repair_sequence(tokens, preset, vocabulary)
    ast = decode_sequence(list(report.repaired), preset)
    return print_sparql(ast), report
