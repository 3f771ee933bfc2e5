import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from mshot.errors import (
    DuplicateParamError,
    NonGroundTermError,
    ParseError,
    UnsafeVariableError,
)
from mshot.syntax import (
    Atom,
    AtomLiteral,
    ChoiceHead,
    Comparison,
    ConstDef,
    ExternalDecl,
    Function,
    Integer,
    Interval,
    Minimize,
    Rule,
    ScriptBlock,
    ShowSig,
    Symbol,
    Variable,
    check_safety,
    parse_program,
    parse_term,
    program_str,
)


def subprogram_map(text):
    return {sub.key: sub for sub in parse_program(text)}


def test_subprogram_split():
    defs = subprogram_map("a(1). #program acid(k). b(k). #program base. a(2).")
    base = defs[("base", 0)]
    acid = defs[("acid", 1)]
    assert [str(s) for s in base.statements] == ["a(1).", "a(2)."]
    assert [str(s) for s in acid.statements] == ["b(k)."]
    assert acid.params == ("k",)


def test_empty_input_yields_empty_base():
    defs = parse_program("")
    assert len(defs) == 1
    assert defs[0].name == "base"
    assert defs[0].params == ()
    assert defs[0].statements == []


def test_external_with_condition():
    defs = subprogram_map("#external p(X,Y) : q(X,Z), r(Z,Y).")
    (stmt,) = defs[("base", 0)].statements
    assert isinstance(stmt, ExternalDecl)
    assert stmt.atom == Atom("p", (Variable("X"), Variable("Y")))
    assert [str(l) for l in stmt.condition] == ["q(X,Z)", "r(Z,Y)"]


def test_same_name_blocks_concatenate():
    defs = subprogram_map("#program p(k). a(k). #program p(j). b(j).")
    p = defs[("p", 1)]
    # the second block's parameter is rewritten to the first spelling
    assert [str(s) for s in p.statements] == ["a(k).", "b(k)."]


def test_duplicate_param_rejected():
    with pytest.raises(DuplicateParamError):
        parse_program("#program p(k,k). a(k).")


def test_comments_and_whitespace():
    defs = subprogram_map("% header\na(1). % trailing\n% full line\n a(2).")
    assert len(defs[("base", 0)].statements) == 2


def test_choice_head():
    defs = subprogram_map("1 { move(D,P) : disk(D), peg(P) } 1 :- go.")
    (rule,) = defs[("base", 0)].statements
    assert isinstance(rule.head, ChoiceHead)
    assert rule.head.lower == 1 and rule.head.upper == 1
    (elem,) = rule.head.elements
    assert elem.atom.name == "move"
    assert len(elem.condition) == 2


def test_weak_constraint_normalizes_to_minimize():
    defs = subprogram_map(":~ move(X,Y). [3@2,X,Y]")
    (stmt,) = defs[("base", 0)].statements
    assert isinstance(stmt, Minimize)
    (elem,) = stmt.elements
    assert elem.weight == Integer(3)
    assert elem.priority == Integer(2)
    assert elem.has_priority
    assert elem.rest == (Variable("X"), Variable("Y"))
    assert [str(l) for l in elem.condition] == ["move(X,Y)"]


def test_minimize_priority_defaults_to_zero():
    defs = subprogram_map("#minimize{ C : cost(C) }.")
    (stmt,) = defs[("base", 0)].statements
    (elem,) = stmt.elements
    assert elem.priority == Integer(0)
    assert not elem.has_priority
    assert elem.tuple_terms() == (Variable("C"),)


def test_show_const_script():
    defs = subprogram_map(
        '#show move/3. #const n=3. #script(python) def main(prg): pass #end.'
    )
    stmts = defs[("base", 0)].statements
    assert isinstance(stmts[0], ShowSig) and stmts[0].name == "move" and stmts[0].arity == 3
    assert isinstance(stmts[1], ConstDef) and stmts[1].value == Integer(3)
    assert isinstance(stmts[2], ScriptBlock) and "main" in stmts[2].text


def test_negated_comparison_normalized():
    defs = subprogram_map("p :- q(X), not X < 3.")
    (rule,) = defs[("base", 0)].statements
    cmp_ = rule.body[1]
    assert isinstance(cmp_, Comparison)
    assert cmp_.op == ">="


def test_arithmetic_precedence():
    defs = subprogram_map("p(1+2*3).")
    (rule,) = defs[("base", 0)].statements
    term = rule.head.args[0]
    assert str(term) == "(1+(2*3))"


def test_interval_binds_looser_than_plus():
    defs = subprogram_map("p(1..n+1).")
    (rule,) = defs[("base", 0)].statements
    assert isinstance(rule.head.args[0], Interval)


@pytest.mark.parametrize(
    "text,needle",
    [
        ("a | b.", "unexpected"),
        ("a ; b.", "disjunctive"),
        ("-a.", "classical negation"),
        ("p :- -q.", "classical negation"),
        ("p :- 2 { a; b }.", "aggregates"),
        ("p :- { a }.", "aggregates"),
        ("#maximize{ 1 : a }.", "unsupported directive"),
        ("#include \"other.lp\".", "unsupported directive"),
        ("p :- not not q.", "double default negation"),
        ("p(X) :- q(X", "expected"),
        ("p(X)", "expected"),
    ],
)
def test_rejections_are_positioned(text, needle):
    with pytest.raises(ParseError) as err:
        parse_program(text)
    assert needle in str(err.value)
    assert err.value.line >= 1 and err.value.column >= 1


# -- parse_term --------------------------------------------------------------

def test_parse_term_integer():
    assert parse_term("42") == Integer(42)


def test_parse_term_function():
    assert parse_term("f(a,3)") == Function("f", (Symbol("a"), Integer(3)))


def test_parse_term_rejects_variables():
    with pytest.raises(NonGroundTermError):
        parse_term("X")
    with pytest.raises(NonGroundTermError):
        parse_term("f(a,Y)")


def test_parse_term_negative():
    assert parse_term("-7") == Integer(-7)


# -- safety ---------------------------------------------------------------------

def first_rule(text):
    return subprogram_map(text)[("base", 0)].statements[0]


def test_safety_positive_binding():
    check_safety(first_rule("p(X) :- q(X)."))


def test_safety_negative_literal_binds_nothing():
    with pytest.raises(UnsafeVariableError) as err:
        check_safety(first_rule("p(X) :- not q(X)."))
    assert err.value.variable == "X"


def test_safety_assignment_comparison():
    check_safety(first_rule("p(X) :- q(Y), X = Y + 1."))


def test_safety_assignment_chain():
    check_safety(first_rule("p(X) :- q(Y), X = Z, Z = Y + 1."))


def test_safety_comparison_does_not_bind():
    with pytest.raises(UnsafeVariableError):
        check_safety(first_rule("p(X) :- q(Y), X < Y."))


def test_safety_choice_element_condition_binds():
    check_safety(first_rule("1 { move(D,P) : disk(D), peg(P) } 1."))


def test_safety_choice_element_unbound():
    with pytest.raises(UnsafeVariableError):
        check_safety(first_rule("{ move(D,P) : disk(D) }."))


def test_safety_reports_first_offender_in_source_order():
    with pytest.raises(UnsafeVariableError) as err:
        check_safety(first_rule("p(A,B) :- not q(A), not r(B)."))
    assert err.value.variable == "A"


# -- round trips -------------------------------------------------------------------

CORPUS = [
    "a(1). #program acid(k). b(k). #program base. a(2).",
    "#external p(X,Y) : q(X,Z), r(Z,Y).",
    "p(X) :- q(X), X < 3 .",
    "1 { m(D,P) : d(D), p(P) } 1 :- step(T), not done(T).",
    "#minimize{ W@P,X,Y : move(X,Y,W,P) ; 1@2 : extra }.",
    ":~ move(X). [1@1,X]",
    "#show move/3. #const n=3.",
    'str("hi \\"there\\"").',
    "p(-3). q(1..5). r(X) :- q(X), X = 2 + -1.",
    "p(_,_) :- q(_).",
    "#script(lua) whatever text #end.",
]


@pytest.mark.parametrize("text", CORPUS)
def test_round_trip(text):
    first = parse_program(text)
    printed = program_str(first)
    second = parse_program(printed)
    assert [(d.key, d.statements) for d in first] == [
        (d.key, d.statements) for d in second
    ]


def test_round_trip_toh_files():
    import pathlib

    for name in ("tohI.lp", "tohE.lp"):
        text = (pathlib.Path(__file__).parent.parent / "demos" / "toh" / name).read_text()
        first = parse_program(text)
        second = parse_program(program_str(first))
        assert [(d.key, d.statements) for d in first] == [
            (d.key, d.statements) for d in second
        ]


def test_statement_partition():
    text = "a. #program p. b. c. #program q(x). d(x). #program p. e."
    defs = parse_program(text)
    total = sum(len(d.statements) for d in defs)
    assert total == 5
    by_key = {d.key: [str(s) for s in d.statements] for d in defs}
    assert by_key[("p", 0)] == ["b.", "c.", "e."]


@settings(max_examples=300, deadline=None)
@given(st.text(max_size=200))
def test_parse_is_total(text):
    try:
        parse_program(text)
    except ParseError:
        pass


@settings(max_examples=150, deadline=None)
@given(
    st.text(
        alphabet=st.sampled_from(list("abcXY()..,:-{};#%123 \n\"=<>!+-*/@_")),
        max_size=120,
    )
)
def test_parse_is_total_punctuation_heavy(text):
    try:
        parse_program(text)
    except ParseError:
        pass
