import random
from decimal import Decimal
from fractions import Fraction

import pytest

from verifact.arithmetic import (
    BinOp,
    ExpressionParseError,
    Neg,
    Num,
    Pi,
    compare_decimals,
    eval_arithmetic,
    eval_float,
    parse_arithmetic,
    to_text,
)
from verifact.models import MathCalc


# --- independent exact-rational oracle ------------------------------------

def frac_eval(node):
    """Exact evaluation over rationals; supports + - * / and integer powers."""
    if isinstance(node, Num):
        return Fraction(node.literal)
    if isinstance(node, Neg):
        return -frac_eval(node.operand)
    if isinstance(node, BinOp):
        left, right = frac_eval(node.left), frac_eval(node.right)
        if node.op == "+":
            return left + right
        if node.op == "-":
            return left - right
        if node.op == "*":
            return left * right
        if node.op == "/":
            return left / right
        if node.op == "^" and right.denominator == 1:
            return left ** right.numerator
    raise ValueError(f"oracle cannot evaluate {node!r}")


def frac_round_away(value: Fraction, places: int) -> Fraction:
    """Round a rational to `places` decimals, ties away from zero."""
    magnitude = abs(value) * 10**places
    whole = magnitude.numerator // magnitude.denominator
    if magnitude - whole >= Fraction(1, 2):
        whole += 1
    signed = whole if value >= 0 else -whole
    return Fraction(signed, 10**places)


def oracle_matched(calculation: str, answer: str) -> bool:
    calc = parse_arithmetic(calculation)
    ans = parse_arithmetic(answer)
    literal = answer.lstrip("-$ ").replace(",", "")
    places = compare_decimals(literal)
    return frac_round_away(frac_eval(calc.ast), places) == frac_round_away(
        frac_eval(ans.ast), places
    )


# --- parsing and normalization ---------------------------------------------

def test_parse_currency_and_x_multiplication():
    expr = parse_arithmetic("20/100 x $10884297.00")
    assert expr.ast == BinOp(
        "*", BinOp("/", Num("20"), Num("100")), Num("10884297.00")
    )


def test_parse_pi_and_right_assoc_power():
    expr = parse_arithmetic("π * 5^2")
    assert expr.ast == BinOp("*", Pi(), BinOp("^", Num("5"), Num("2")))
    tower = parse_arithmetic("2^3^2")
    assert eval_float(tower.ast) == 512.0


def test_parse_free_variable_rejected():
    with pytest.raises(ExpressionParseError):
        parse_arithmetic("5x + 3")


def test_parse_unbalanced_parens_rejected():
    with pytest.raises(ExpressionParseError):
        parse_arithmetic("(1 + 2")


def test_percent_after_numeral():
    expr = parse_arithmetic("20% * 45")
    assert eval_float(expr.ast) == pytest.approx(9.0)
    with pytest.raises(ExpressionParseError):
        parse_arithmetic("% 20")


def test_unicode_minus_and_times():
    expr = parse_arithmetic("45 − 9")
    assert eval_float(expr.ast) == 36.0
    expr = parse_arithmetic("23 × 4319216")
    assert eval_float(expr.ast) == 23 * 4319216


def test_unary_minus_binds_looser_than_power():
    assert eval_float(parse_arithmetic("-2^2").ast) == -4.0
    assert eval_float(parse_arithmetic("2^-1").ast) == 0.5


def test_double_star_power():
    assert eval_float(parse_arithmetic("5**2").ast) == 25.0


# --- pretty-print round trip -----------------------------------------------

def _random_tree(rng: random.Random, depth: int):
    if depth == 0 or rng.random() < 0.3:
        if rng.random() < 0.1:
            return Pi()
        digits = rng.randint(1, 6)
        literal = str(rng.randint(0, 10**digits - 1))
        if rng.random() < 0.5:
            literal += "." + "".join(rng.choice("0123456789") for _ in range(rng.randint(1, 4)))
        return Num(literal)
    if rng.random() < 0.15:
        return Neg(_random_tree(rng, depth - 1))
    op = rng.choice(["+", "-", "*", "/", "^"])
    return BinOp(op, _random_tree(rng, depth - 1), _random_tree(rng, depth - 1))


def test_to_text_reparses_to_identical_tree():
    rng = random.Random(20240)
    for _ in range(500):
        tree = _random_tree(rng, 4)
        text = to_text(tree)
        assert parse_arithmetic(text).ast == tree, text


# --- evaluator against pinned cases ----------------------------------------

@pytest.mark.parametrize(
    "calculation,answer,expected",
    [
        ("30 / 3", "10", True),
        ("0.20 * 45", "9", True),
        ("23 * 4319216", "99305768", False),
        ("20/100 x $10884297.00", "2176859.40", True),
        ("60444034 / 12", "5037002.83", True),
        ("10 / 2", "5", True),
        ("π * 5^2", "78.54", True),
        ("45 - 9", "36", True),
    ],
)
def test_eval_arithmetic_pinned(calculation, answer, expected):
    result = eval_arithmetic(MathCalc(calculation=calculation, calculated_answer=answer))
    assert result.matched is expected


def test_eval_arithmetic_division_by_zero():
    result = eval_arithmetic(MathCalc(calculation="1 / 0", calculated_answer="0"))
    assert result.matched is False


def test_eval_arithmetic_rejects_non_numeral_answer():
    with pytest.raises(ExpressionParseError):
        eval_arithmetic(MathCalc(calculation="1 + 1", calculated_answer="1 + 1"))


def test_eval_arithmetic_overflow():
    result = eval_arithmetic(
        MathCalc(calculation="9999999 ^ 9999999", calculated_answer="1")
    )
    assert result.matched is False


# --- randomized agreement with the exact-rational oracle --------------------

def _random_rational_expression(rng: random.Random):
    """Expression over decimal literals with + - * /; returns (text, Fraction).

    Literal magnitudes and the final value are constrained so binary
    floating point stays far from decimal rounding boundaries relative to
    the comparison precision.
    """
    def literal() -> str:
        int_digits = rng.randint(1, 4)
        frac_digits = rng.randint(0, 3)
        whole = str(rng.randint(1, 10**int_digits - 1))
        if frac_digits:
            return whole + "." + "".join(rng.choice("0123456789") for _ in range(frac_digits))
        return whole

    ops = rng.randint(1, 4)
    text = literal()
    for _ in range(ops):
        op = rng.choice(["+", "-", "*", "/"])
        rhs = literal()
        if op == "/" and Fraction(rhs) == 0:
            rhs = "7"
        if rng.random() < 0.3:
            text = f"({text}) {op} {rhs}"
        else:
            text = f"{text} {op} {rhs}"
    return text


def _near_tie_boundary(value: Fraction, places: int) -> bool:
    """True when value*10^places sits within 1e-2 of a half-integer, where
    accumulated float error could flip the rounding direction."""
    scaled = value * 10**places
    frac_part = scaled - (scaled.numerator // scaled.denominator)
    return abs(frac_part - Fraction(1, 2)) < Fraction(1, 100)


def test_eval_agrees_with_rational_oracle_10k():
    rng = random.Random(991)
    checked = 0
    while checked < 10_000:
        text = _random_rational_expression(rng)
        expr = parse_arithmetic(text)
        value = frac_eval(expr.ast)
        if abs(value) > 10**8:
            continue
        places = rng.randint(0, 4)
        if rng.random() < 0.5:
            # answer = exact value rounded to `places`
            answer_frac = frac_round_away(value, places)
        else:
            # deliberate mismatch well clear of the rounding granularity
            offset = Fraction(rng.randint(2, 9), 1) * Fraction(1, 10**places)
            answer_frac = frac_round_away(value, places) + offset
        answer_text = str(
            Decimal(answer_frac.numerator) / Decimal(answer_frac.denominator)
        )
        if "E" in answer_text or "e" in answer_text:
            continue
        # the effective comparison precision comes from the printed literal
        effective = compare_decimals(answer_text.lstrip("-"))
        if _near_tie_boundary(value, effective):
            continue
        result = eval_arithmetic(MathCalc(calculation=text, calculated_answer=answer_text))
        expected = oracle_matched(text, answer_text)
        assert result.matched == expected, (text, answer_text)
        checked += 1
