import pytest
from hypothesis import given, settings, strategies as st

from smt_programs import MALFORMED, VALID
from smtpcfg.errors import SMTSyntaxError
from smtpcfg.grammar import smt_grammar
from smtpcfg.parser import Node, extract_rule_applications, parse_program, parse_source
from smtpcfg.tokens import tokenize


def rule_ids(src):
    return [a.rule_id for a in extract_rule_applications(parse_source(src))]


def internal_nodes(node):
    if not isinstance(node, Node):
        return 0
    return 1 + sum(internal_nodes(c) for c in node.children)


def test_check_sat_derivation():
    apps = extract_rule_applications(parse_source("(check-sat)"))
    assert [a.rule_id for a in apps] == [0, 18, 1]
    assert [a.depth for a in apps] == [0, 1, 1]


def test_assert_true_rules():
    g = smt_grammar()
    ids = rule_ids("(assert true)")
    for lhs, rhs in [("Command", '"(" "assert" Term ")"'), ("Term", "QualIdentifier"), ("QualIdentifier", "SYMBOL")]:
        assert g.rule_id(lhs, rhs) in ids


def test_empty_form_fails_at_second_token():
    with pytest.raises(SMTSyntaxError) as exc:
        parse_source("( )")
    # token_index is 0-based: the second token
    assert exc.value.token_index + 1 == 2
    assert "found ')'" in str(exc.value)
    assert str(exc.value).startswith("1:3:")


def test_empty_script_single_application():
    apps = extract_rule_applications(parse_source(""))
    assert [(a.rule_id, a.depth) for a in apps] == [(1, 0)]


def test_application_count_equals_internal_nodes():
    tree = parse_source("(assert (> x 1))")
    apps = extract_rule_applications(tree)
    assert len(apps) == internal_nodes(tree.root) == 11


def test_depths_consistent_with_tree():
    tree = parse_source("(assert (and p (or q r)))")
    apps = extract_rule_applications(tree)
    expected = []

    def walk(n, d):
        if isinstance(n, Node):
            expected.append((n.rule_id, d))
            for c in n.children:
                walk(c, d + 1)

    walk(tree.root, 0)
    assert [(a.rule_id, a.depth) for a in apps] == expected


def test_spans_are_half_open_and_nested():
    tree = parse_source("(declare-const x Int)\n(check-sat)")
    for a in extract_rule_applications(tree):
        assert 0 <= a.span[0] <= a.span[1] <= len(tree.tokens)
    assert extract_rule_applications(tree)[0].span == (0, len(tree.tokens))


def test_children_match_rule_rhs():
    g = smt_grammar()

    def check(n):
        if isinstance(n, Node):
            rhs = g.rules[n.rule_id].rhs
            assert len(rhs) == len(n.children)
            for sym, c in zip(rhs, n.children):
                if g.is_nonterminal(sym):
                    assert isinstance(c, Node) and c.nonterminal == sym
                else:
                    assert c.token.terminal == sym
                check(c)

    for src in VALID:
        check(parse_source(src).root)


def test_unknown_command_is_generic_form():
    g = smt_grammar()
    assert g.rule_id("Command", "GenericForm") in rule_ids("(check-sat-assuming (p))")


@pytest.mark.parametrize("src", VALID)
def test_round_trip_yield(src):
    toks = tokenize(src)
    tree = parse_program(toks, "p")
    assert tree.yield_tokens() == toks


@pytest.mark.parametrize("src", MALFORMED)
def test_malformed_positioned(src):
    with pytest.raises(SMTSyntaxError) as exc:
        parse_source(src)
    e = exc.value
    assert e.line >= 1 and e.column >= 1 and e.expected


def test_determinism():
    src = VALID[40]
    assert rule_ids(src) == rule_ids(src)


_TERMS = st.recursive(
    st.sampled_from(["x", "y", "1", "2.5", "true"]),
    lambda kids: st.tuples(st.sampled_from(["+", "and", "f", "="]), st.lists(kids, min_size=1, max_size=3)).map(
        lambda t: f"({t[0]} {' '.join(t[1])})"
    ),
    max_leaves=12,
)


@settings(max_examples=150, deadline=None)
@given(st.lists(_TERMS, min_size=1, max_size=4))
def test_generated_programs_round_trip(terms):
    src = "\n".join(f"(assert {t})" for t in terms) + "\n(check-sat)"
    toks = tokenize(src)
    tree = parse_program(toks)
    assert tree.yield_tokens() == toks
    apps = extract_rule_applications(tree)
    assert len(apps) == internal_nodes(tree.root)
    assert all(0 <= a.rule_id < smt_grammar().num_rules for a in apps)
