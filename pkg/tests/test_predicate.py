from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from ast_gen import bool_nodes
from qfrac.predicate import (
    Compare,
    LiteralOverflowError,
    Num,
    OracleTable,
    PredicateAst,
    PredicateSyntaxError,
    PredicateTypeError,
    Var,
    build_oracle_table,
    eval_many,
    eval_predicate,
    exact_fraction,
    parse_predicate,
    pretty_print,
)

GOLDEN = [
    ("x*x mod 16 == 1", "Eq(Mod(Mul(x,x),16),1)"),
    ("0 == 0", "Eq(0,0)"),
    ("x", "Ne(x,0)"),
    ("x + 1 * 2 == 3", "Eq(Add(x,Mul(1,2)),3)"),
    ("x - 1 - 2 == 0", "Eq(Sub(Sub(x,1),2),0)"),
    ("x & 1 == 0", "Eq(BitAnd(x,1),0)"),
    ("x | 1 ^ 2 & 3 == 0", "Eq(BitOr(x,BitXor(1,BitAnd(2,3))),0)"),
    ("x << 1 + 1 == 8", "Eq(Shl(x,Add(1,1)),8)"),
    ("x >> 2 < 3", "Lt(Shr(x,2),3)"),
    ("x < 4 && x != 2", "And(Lt(x,4),Ne(x,2))"),
    ("x < 4 || x > 10 && x != 12", "Or(Lt(x,4),And(Gt(x,10),Ne(x,12)))"),
    ("!(x == 3)", "Not(Eq(x,3))"),
    ("!(x == 3) && !(x == 4)", "And(Not(Eq(x,3)),Not(Eq(x,4)))"),
    ("(x < 4 || x > 10) && x != 12", "And(Or(Lt(x,4),Gt(x,10)),Ne(x,12))"),
    ("0x10 == x", "Eq(16,x)"),
    ("0xFFFFFFFFFFFFFFFF == x", "Eq(18446744073709551615,x)"),
    ("x mod 3 mod 2 == 1", "Eq(Mod(Mod(x,3),2),1)"),
    ("x * (x + 1) >= 6", "Ge(Mul(x,Add(x,1)),6)"),
    ("x <= 7", "Le(x,7)"),
    ("x & 3", "Ne(BitAnd(x,3),0)"),
    ("(x)", "Ne(x,0)"),
    ("((x == 1))", "Eq(x,1)"),
    ("x ^ x == 0", "Eq(BitXor(x,x),0)"),
    ("1 + 2 << 3 == x", "Eq(Shl(Add(1,2),3),x)"),
    ("x & 1 | x & 2 == 3", "Eq(BitOr(BitAnd(x,1),BitAnd(x,2)),3)"),
    ("x == 1 || x == 2 || x == 3", "Or(Or(Eq(x,1),Eq(x,2)),Eq(x,3))"),
    ("x > 1 && x < 5 && x != 3", "And(And(Gt(x,1),Lt(x,5)),Ne(x,3))"),
    ("!(x < 2 || x > 5)", "Not(Or(Lt(x,2),Gt(x,5)))"),
    ("  x\t*\n2 ==8 ", "Eq(Mul(x,2),8)"),
    ("x - 1 >= 0x0a", "Ge(Sub(x,1),10)"),
]

# (text, error class, byte offset)
REJECTIONS = [
    ("x == (", PredicateSyntaxError, 5),
    ("x ==", PredicateSyntaxError, 2),
    ("", PredicateSyntaxError, 0),
    ("x == 1)", PredicateSyntaxError, 6),
    ("x $ 1", PredicateSyntaxError, 2),
    ("y == 1", PredicateSyntaxError, 0),
    ("x == 18446744073709551616", LiteralOverflowError, 5),
    ("x == 0x", PredicateSyntaxError, 5),
    ("1 < 2 < 3", PredicateSyntaxError, 6),
    ("x + (x == 1)", PredicateTypeError, 2),
    ("!x", PredicateTypeError, 0),
    ("x == 1 && 2", PredicateTypeError, 7),
    ("(x == 1) == (x == 2)", PredicateTypeError, 9),
    ("x * * 2", PredicateSyntaxError, 4),
    ("x == 1 && (x < 2", PredicateSyntaxError, 15),
]


@pytest.mark.parametrize("text,term", GOLDEN)
def test_golden_parse(text, term):
    assert parse_predicate(text, 4).term() == term


@pytest.mark.parametrize("text,err,offset", REJECTIONS)
def test_rejections(text, err, offset):
    with pytest.raises(err) as info:
        parse_predicate(text, 4)
    assert info.value.offset == offset


def test_syntax_error_reports_expected_tokens():
    with pytest.raises(PredicateSyntaxError) as info:
        parse_predicate("x == (", 4)
    assert info.value.expected == {"!", "(", "integer", "x"}

    with pytest.raises(PredicateSyntaxError) as info:
        parse_predicate("1 < 2 < 3", 4)
    assert {"&&", "||", "end of input", "+", "mod"} <= info.value.expected
    assert "<" not in info.value.expected


def test_literal_overflow_is_a_syntax_error():
    assert issubclass(LiteralOverflowError, PredicateSyntaxError)
    assert parse_predicate("x == 18446744073709551615", 4).term() == "Eq(x,18446744073709551615)"


@pytest.mark.parametrize("width", [0, 25, -1])
def test_width_out_of_range(width):
    with pytest.raises(ValueError):
        parse_predicate("x == 1", width)


def test_eval_examples():
    ast = parse_predicate("x*x mod 16 == 1", 4)
    assert eval_predicate(ast, 7) == 1
    assert eval_predicate(ast, 2) == 0
    always = parse_predicate("0 == 0", 4)
    assert all(eval_predicate(always, x) == 1 for x in range(16))
    with pytest.raises(ValueError):
        eval_predicate(ast, 16)


@pytest.mark.parametrize(
    "text",
    [
        "x - 1 == 18446744073709551615",  # subtraction wraps
        "0xFFFFFFFFFFFFFFFF * 2 == 0xFFFFFFFFFFFFFFFE",
        "0xFFFFFFFFFFFFFFFF + 2 == 1",
        "7 mod 0 == 7",
        "1 << 64 == 0",
        "1 << 63 == 0x8000000000000000",
        "0xFFFFFFFFFFFFFFFF >> 64 == 0",
        "0xFFFFFFFFFFFFFFFF >> 63 == 1",
        "1 << 0xFFFFFFFFFFFFFFFF == 0",
    ],
)
def test_uint64_semantics_at_zero(text):
    ast = parse_predicate(text, 4)
    assert eval_predicate(ast, 0) == 1
    assert bool(eval_many(ast, [0])[0])


def test_oracle_table_examples():
    table = build_oracle_table(parse_predicate("x*x mod 16 == 1", 4))
    assert table.solution_count == 4
    assert table.solutions.tolist() == [1, 7, 9, 15]
    assert exact_fraction(table) == Fraction(1, 4)
    assert build_oracle_table(parse_predicate("0 == 0", 4)).solution_count == 16
    none = build_oracle_table(parse_predicate("0 == 1", 4))
    assert none.solution_count == 0
    assert exact_fraction(none) == 0
    assert exact_fraction(build_oracle_table(parse_predicate("0 == 0", 4))) == 1


def test_mod_zero_returns_left_operand_everywhere():
    table = build_oracle_table(parse_predicate("x mod 0 == x", 6))
    assert table.solution_count == 64


def test_oracle_table_rejects_bad_fields():
    with pytest.raises(ValueError):
        OracleTable(3, np.zeros(7, dtype=bool), 0)
    with pytest.raises(ValueError):
        OracleTable(3, np.ones(8, dtype=bool), 3)
    table = OracleTable.from_bits([0, 1, 1, 0])
    assert table.width == 2 and table.solution_count == 2
    with pytest.raises(ValueError):
        table.bits[0] = True


def test_ast_root_must_be_boolean():
    with pytest.raises(PredicateTypeError):
        PredicateAst(Var(), 4)
    PredicateAst(Compare("==", Var(), Num(1)), 4)


@settings(max_examples=300, deadline=None)
@given(bool_nodes)
def test_round_trip(root):
    ast = PredicateAst(root, 8)
    assert parse_predicate(pretty_print(ast), 8) == ast


@settings(max_examples=150, deadline=None)
@given(bool_nodes, st.integers(1, 7))
def test_table_agrees_with_scalar_eval(root, width):
    ast = PredicateAst(root, width)
    table = build_oracle_table(ast)
    expected = [eval_predicate(ast, x) for x in range(1 << width)]
    assert table.bits.astype(int).tolist() == expected
    assert int(np.count_nonzero(table.bits)) == table.solution_count


@settings(max_examples=60, deadline=None)
@given(bool_nodes, st.integers(1, 12))
def test_constant_predicates_are_all_or_nothing(root, width):
    ast = PredicateAst(root, width)
    if ast.uses_x:
        return
    s = build_oracle_table(ast).solution_count
    assert s in (0, 1 << width)
