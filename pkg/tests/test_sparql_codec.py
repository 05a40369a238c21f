import random

import pytest
from hypothesis import given, settings, strategies as st
from querygen import random_ast

from nspm.exceptions import DecodeError, EmptyQuestion, SparqlSyntaxError, UnknownPreset, UnsupportedConstruct
from nspm.sparql_codec import (
    PRESETS,
    PrefixedName,
    QueryAst,
    SparqlEncoder,
    TriplePattern,
    Variable,
    canonicalize,
    decode_sequence,
    encode_query,
    get_preset,
    parse_sparql,
    print_sparql,
    read_sequence,
    tokenize_nl,
)

INCEPTION = "SELECT ?a WHERE { dbr:Inception dbo:director ?a }"
INCEPTION_V3 = "select var_a where brack_open dbr_Inception dbo_director var_a brack_close"
INCEPTION_V1 = "select ?a where { dbr Inception dbo director ?a }"
ASK_FILM = "ASK WHERE { dbr:Inception rdf:type dbo:Film }"
RICH = "SELECT DISTINCT COUNT(?a) WHERE { ?a dbo:runtime ?r . ?a rdf:type dbo:Film FILTER(?r >= 120) } ORDER BY DESC(?r) LIMIT 5"

asts = st.integers(0, 2**32).map(lambda seed: random_ast(random.Random(seed)))


def test_parse_select():
    ast = parse_sparql(INCEPTION)
    assert ast.form == "SELECT"
    assert ast.projection == (Variable("a"),)
    assert ast.patterns == (TriplePattern(PrefixedName("dbr", "Inception"), PrefixedName("dbo", "director"), Variable("a")),)


def test_parse_ask():
    ast = parse_sparql(ASK_FILM)
    assert ast.form == "ASK" and len(ast.patterns) == 1 and ast.projection == ()


@pytest.mark.parametrize("text", [
    "SELECT ?a WHERE { ?a dbo:director ?b } UNION { }",
    "SELECT ?a WHERE { ?a dbo:director ?b OPTIONAL { ?b dbo:x ?c } }",
    "SELECT ?a WHERE { ?a dbo:director/dbo:spouse ?b }",
    "SELECT ?a WHERE { { SELECT ?a WHERE { ?a dbo:x ?b } } }",
    "SELECT ?a WHERE { <http://dbpedia.org/resource/X> dbo:director ?a }",
    "SELECT ?a WHERE { ex:X dbo:director ?a }",
    "SELECT ?a WHERE { }",
    "SELECT ?z WHERE { ?a dbo:director ?b }",
    "SELECT ?a WHERE { ?a dbo:director ?b } LIMIT 0",
])
def test_outside_subset_is_syntax_error(text):
    with pytest.raises(SparqlSyntaxError) as err:
        parse_sparql(text)
    assert err.value.position >= 0


def test_syntax_error_position():
    with pytest.raises(SparqlSyntaxError) as err:
        parse_sparql("SELECT ?a WHERE { ?a dbo:director ?b } UNION { }")
    assert err.value.position == len("SELECT ?a WHERE { ?a dbo:director ?b } ")


def test_keywords_case_insensitive_and_whitespace_free():
    assert canonicalize("select  ?a\nwhere{dbr:Inception dbo:director ?a}") == INCEPTION


def test_print_canonical():
    assert print_sparql(parse_sparql(INCEPTION)) == INCEPTION
    assert print_sparql(parse_sparql(ASK_FILM)) == ASK_FILM
    assert print_sparql(parse_sparql(RICH)) == RICH


def test_encode_v3_and_v1():
    ast = parse_sparql(INCEPTION)
    v3 = encode_query(ast, "v3")
    v1 = encode_query(ast, "v1")
    assert " ".join(v3) == INCEPTION_V3
    assert " ".join(v1) == INCEPTION_V1
    assert len(v3) == 8 and len(v1) == 10


def test_encode_modifiers():
    ast = parse_sparql(RICH)
    assert " ".join(encode_query(ast, "v3")) == (
        "select distinct agg_count var_a where brack_open var_a dbo_runtime var_r sep_dot "
        "var_a rdf_type dbo_Film filter var_r math_geq 120 brack_close ord_desc var_r limit 5")
    assert " ".join(encode_query(ast, "v2.1")) == (
        "select distinct count ( ?a ) where { ?a dbo runtime ?r . ?a rdf type dbo Film "
        "filter ( ?r >= 120 ) } order by desc ( ?r ) limit 5")


@pytest.mark.parametrize("op,token", [("<", "math_lt"), (">", "math_gt"), ("=", "math_eq"),
                                      ("<=", "math_leq"), (">=", "math_geq"), ("!=", "math_neq")])
def test_filter_comparator_tokens(op, token):
    ast = parse_sparql(f"SELECT ?a WHERE {{ ?a dbo:runtime ?r FILTER(?r {op} 7) }}")
    assert encode_query(ast, "v3")[-4:] == ["var_r", token, "7", "brack_close"]
    assert op in encode_query(ast, "v1.1")


def test_decode_v3_example():
    assert decode_sequence(INCEPTION_V3.split(), "v3") == parse_sparql(INCEPTION)


def test_decode_empty():
    with pytest.raises(DecodeError) as err:
        decode_sequence([], "v3")
    assert err.value.position == 0 and err.value.token is None


def test_decode_impossible_transition():
    with pytest.raises(DecodeError) as err:
        decode_sequence("select var_a brack_close".split(), "v3")
    assert (err.value.position, err.value.token) == (2, "brack_close")


@pytest.mark.parametrize("preset,seq", [
    ("v3", "select var_a where brack_open dbr_Inception dbo_director var_a brack_close limit"),
    ("v3", "select var_a where brack_open dbr_Inception dbo_director var_a brack_close brack_close"),
    ("v3", "select var_b where brack_open dbr_Inception dbo_director var_a brack_close"),
    ("v3", "select var_a where brack_open dbr Inception dbo_director var_a brack_close"),
    ("v1", "select ?a where { dbr_Inception dbo director ?a }"),
    ("v1.1", "select ?a where { dbr Inception dbo director ?a"),
])
def test_decode_rejects(preset, seq):
    with pytest.raises(DecodeError):
        decode_sequence(seq.split(), preset)


def test_keyword_case_consistency():
    upper = "SELECT ?a WHERE { dbr Inception dbo director ?a }".split()
    assert decode_sequence(upper, "v1") == parse_sparql(INCEPTION)
    with pytest.raises(DecodeError):
        decode_sequence(upper, "v1.1")


def test_split_lookahead_allows_keyword_like_local_names():
    ast = parse_sparql("SELECT ?a WHERE { dbr:where dbo:select ?a }")
    for preset in PRESETS:
        assert decode_sequence(encode_query(ast, preset), preset) == ast


def test_whitespace_fix_only_on_later_presets():
    line = "select  var_a where brack_open dbr_Inception dbo_director var_a brack_close"
    assert read_sequence(line, "v3") == INCEPTION_V3.split()
    v1_line = "select ?a  where { dbr Inception dbo director ?a }"
    assert read_sequence(v1_line, "v2.1") == INCEPTION_V1.split()
    for preset in ("v1", "v1.1"):
        with pytest.raises(DecodeError):
            read_sequence(v1_line, preset)


def test_encode_rejects_invalid_ast():
    bad = QueryAst("SELECT", (TriplePattern(Variable("a"), PrefixedName("dbo", "x"), Variable("b")),), (Variable("z"),))
    with pytest.raises(UnsupportedConstruct):
        encode_query(bad, "v3")


def test_unknown_preset():
    with pytest.raises(UnknownPreset):
        get_preset("v9")


@pytest.mark.parametrize("text,expected", [
    ("Where is Inception located in?", "where is inception located in"),
    ("Who  directed   Inception", "who directed inception"),
    ('"It\'s" Alive!', "its alive"),
])
def test_tokenize_nl(text, expected):
    assert " ".join(tokenize_nl(text)) == expected


@pytest.mark.parametrize("text", ["???", "", "  .,!  "])
def test_tokenize_nl_empty(text):
    with pytest.raises(EmptyQuestion):
        tokenize_nl(text)


@settings(max_examples=300, deadline=None)
@given(asts, st.sampled_from(sorted(PRESETS)))
def test_round_trip(ast, preset):
    tokens = encode_query(ast, preset)
    assert decode_sequence(tokens, preset) == ast
    assert all(tok and not any(c.isspace() for c in tok) for tok in tokens)
    assert read_sequence(" ".join(tokens), preset) == tokens


@settings(max_examples=300, deadline=None)
@given(asts)
def test_parse_print_identity(ast):
    text = print_sparql(ast)
    assert parse_sparql(text) == ast
    assert print_sparql(parse_sparql(text)) == text


@settings(max_examples=300, deadline=None)
@given(asts)
def test_v3_never_longer(ast):
    v1, v3 = encode_query(ast, "v1"), encode_query(ast, "v3")
    assert len(v3) <= len(v1)
    if ast.prefixed_names():
        assert len(v3) < len(v1)


def test_v4_matches_v3():
    rng = random.Random(5)
    for _ in range(50):
        ast = random_ast(rng)
        assert encode_query(ast, "v4") == encode_query(ast, "v3")


def test_encoder_estimator():
    enc = SparqlEncoder(preset="v3").fit()
    assert enc.get_params() == {"preset": "v3"}
    tokens = enc.transform([INCEPTION, ASK_FILM])
    assert " ".join(tokens[0]) == INCEPTION_V3
    assert enc.inverse_transform(tokens) == [INCEPTION, ASK_FILM]
    assert enc.set_params(preset="v1").transform([INCEPTION]) == [INCEPTION_V1.split()]
