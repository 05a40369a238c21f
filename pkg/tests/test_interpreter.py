import random

import pytest
from hypothesis import given, settings, strategies as st
from querygen import random_ast

from nspm.exceptions import Unrepairable
from nspm.interpreter import apply_actions, interpret, repair_sequence
from nspm.sparql_codec import encode_query, parse_sparql, print_sparql

GOLD = "select var_x where brack_open dbr_Inception dbo_director var_x brack_close"
CANON = "SELECT ?x WHERE { dbr:Inception dbo:director ?x }"

V3_LEXICON = ["select", "ask", "distinct", "where", "brack_open", "brack_close", "sep_dot", "filter", "limit",
              "agg_count", "ord_asc", "ord_desc", "var_x", "var_y", "dbr_Inception", "dbr_Heat", "dbo_director",
              "dbo_starring", "rdf_type", "dbo_Film", "math_gt", "math_leq", "7200", "3", "<unk>", "</s>"]


def kinds(report):
    return [a.kind for a in report.actions]


def test_appends_closing_brace():
    report = repair_sequence("select var_a where brack_open dbr_Inception dbo_director var_a".split(), "v3")
    assert " ".join(report.repaired) == "select var_a where brack_open dbr_Inception dbo_director var_a brack_close"
    assert kinds(report) == ["BalancedBracket"]


def test_valid_sequence_untouched():
    report = repair_sequence(GOLD.split(), "v3")
    assert report.actions == () and " ".join(report.repaired) == GOLD


def test_no_query_form():
    with pytest.raises(Unrepairable):
        repair_sequence(["brack_open", "brack_close"], "v3")


def test_empty_sequence():
    with pytest.raises(Unrepairable):
        interpret([], "v3")


def test_interpret_gold():
    sparql, report = interpret(GOLD.split(), "v3")
    assert sparql == CANON and not report.actions


def test_unk_inside_pattern_is_dropped_and_pruned():
    tokens = "select var_x where brack_open dbr_Inception dbo_director var_x sep_dot var_x <unk> dbo_starring brack_close".split()
    sparql, report = interpret(tokens, "v3")
    assert sparql == CANON
    assert kinds(report)[0] == "DroppedUnknown"
    assert "PrunedFragment" in kinds(report)
    assert apply_actions(tokens, report.actions) == list(report.repaired)


def test_inserts_open_brace_after_where():
    tokens = "select var_x where dbr_Inception dbo_director var_x brack_close".split()
    sparql, report = interpret(tokens, "v3")
    assert sparql == CANON
    assert [str(a) for a in report.actions] == ["InsertedKeyword(brack_open,3)"]


def test_drops_unmatched_close():
    tokens = GOLD.split() + ["brack_close"]
    sparql, report = interpret(tokens, "v3")
    assert sparql == CANON and kinds(report) == ["BalancedBracket"]


def test_truncates_after_eos():
    tokens = GOLD.split() + ["</s>", "dbr_Heat", "brack_close"]
    sparql, report = interpret(tokens, "v3")
    assert sparql == CANON and kinds(report) == ["TruncatedAfterEOS"]


def test_split_preset_repairs():
    tokens = "select ?x where { dbr Inception dbo director ?x".split()
    sparql, report = interpret(tokens, "v1")
    assert sparql == CANON and kinds(report) == ["BalancedBracket"]


def test_never_invents_entities():
    tokens = "select var_x where brack_open dbr_Inception dbo_director brack_close".split()
    with pytest.raises(Unrepairable):
        interpret(tokens, "v3")


def test_report_json_is_one_line():
    _, report = interpret("select var_a where brack_open dbr_Inception dbo_director var_a".split(), "v3")
    line = report.to_json()
    assert "\n" not in line and "BalancedBracket(close,7)" in line


def check_invariants(tokens, preset):
    try:
        sparql, report = interpret(tokens, preset)
    except Unrepairable:
        return None
    assert print_sparql(parse_sparql(sparql)) == sparql
    assert apply_actions(tokens, report.actions) == list(report.repaired)
    assert repair_sequence(list(report.repaired), preset).actions == ()
    return sparql


@settings(max_examples=400, deadline=None)
@given(st.lists(st.sampled_from(V3_LEXICON), max_size=25))
def test_totality_random_v3(tokens):
    check_invariants(tokens, "v3")


@settings(max_examples=300, deadline=None)
@given(st.integers(0, 2**32), st.sampled_from(["v1", "v1.1", "v2.1", "v3"]), st.data())
def test_totality_mutated(seed, preset, data):
    rng = random.Random(seed)
    tokens = encode_query(random_ast(rng), preset)
    for _ in range(rng.randint(1, 4)):
        k = rng.randrange(len(tokens) + 1)
        op = rng.random()
        if op < 0.5 and tokens:
            del tokens[min(k, len(tokens) - 1)]
        else:
            tokens.insert(k, rng.choice(tokens + ["<unk>", "</s>"]))
    check_invariants(tokens, preset)


@settings(max_examples=200, deadline=None)
@given(st.integers(0, 2**32), st.sampled_from(["v1", "v1.1", "v2.1", "v3"]))
def test_conservative_on_valid(seed, preset):
    ast = random_ast(random.Random(seed))
    tokens = encode_query(ast, preset)
    sparql, report = interpret(tokens, preset)
    assert report.actions == () and sparql == print_sparql(ast)
