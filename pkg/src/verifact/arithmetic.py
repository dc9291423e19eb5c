"""Deterministic checking of extracted arithmetic steps.

Expressions as found in model solutions ("20/100 x $10884297.00",
"π * 5^2") are normalized, parsed with standard precedence, evaluated in
binary floating point, and compared against the stated answer after
rounding both sides to the answer's printed decimal precision (capped at
7 places, ties away from zero).
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from decimal import Decimal, InvalidOperation, ROUND_HALF_UP
from typing import Optional, Union

from .models import ArithmeticResult, MathCalc

logger = logging.getLogger(__name__)

MAX_COMPARE_DECIMALS = 7


class ExpressionParseError(ValueError):
    """Raised when text cannot be read as a closed-form numeric expression."""


@dataclass(frozen=True)
class Num:
    literal: str

    @property
    def value(self) -> float:
        return float(self.literal)


@dataclass(frozen=True)
class Pi:
    pass


@dataclass(frozen=True)
class Neg:
    operand: "Node"


@dataclass(frozen=True)
class BinOp:
    op: str  # one of + - * / ^
    left: "Node"
    right: "Node"


Node = Union[Num, Pi, Neg, BinOp]


@dataclass(frozen=True)
class ArithmeticExpr:
    normalized_text: str
    ast: Node


_MUL_ALIASES = {"×", "·"}  # × ·
_MINUS_ALIASES = {"−"}  # −


def _tokenize(raw: str) -> list[tuple[str, str]]:
    """Produce (kind, text) tokens; kind in {num, pi, op, lparen, rparen}.

    Normalization happens here: currency/grouping characters are dropped,
    multiplication and minus aliases are mapped, 'x'/'X' between numeric or
    parenthesis tokens becomes multiplication, a '%' directly after a
    numeral becomes a division by 100, and '**' becomes '^'.
    """
    tokens: list[tuple[str, str]] = []
    i = 0
    n = len(raw)

    def prev_is_value() -> bool:
        return bool(tokens) and tokens[-1][0] in ("num", "pi", "rparen")

    def next_starts_value(j: int) -> bool:
        while j < n and (raw[j].isspace() or raw[j] in "$,"):
            j += 1
        if j >= n:
            return False
        ch = raw[j]
        if ch.isdigit() or ch == "." or ch == "(" or ch == "π":
            return True
        return raw[j : j + 2].lower() == "pi" and not raw[j + 2 : j + 3].isalnum()

    while i < n:
        ch = raw[i]
        if ch.isspace() or ch in "$,":
            i += 1
            continue
        if ch in _MINUS_ALIASES:
            tokens.append(("op", "-"))
            i += 1
            continue
        if ch in _MUL_ALIASES:
            tokens.append(("op", "*"))
            i += 1
            continue
        if raw.startswith("**", i):
            tokens.append(("op", "^"))
            i += 2
            continue
        if ch in "+-*/^":
            tokens.append(("op", ch))
            i += 1
            continue
        if ch == "(":
            tokens.append(("lparen", ch))
            i += 1
            continue
        if ch == ")":
            tokens.append(("rparen", ch))
            i += 1
            continue
        if ch == "%":
            if tokens and tokens[-1][0] == "num":
                tokens.append(("op", "/"))
                tokens.append(("num", "100"))
                i += 1
                continue
            raise ExpressionParseError("'%' is only supported directly after a numeral")
        if ch == "π":  # π
            tokens.append(("pi", "pi"))
            i += 1
            continue
        if ch.isdigit() or ch == ".":
            j = i
            seen_dot = False
            while j < n and (raw[j].isdigit() or (raw[j] == "." and not seen_dot) or raw[j] == ","):
                if raw[j] == ".":
                    seen_dot = True
                j += 1
            literal = raw[i:j].replace(",", "")
            if literal in (".",):
                raise ExpressionParseError(f"bad numeric literal at position {i}")
            tokens.append(("num", literal))
            i = j
            continue
        if ch in ("x", "X") and prev_is_value() and next_starts_value(i + 1):
            tokens.append(("op", "*"))
            i += 1
            continue
        if ch.isalpha():
            j = i
            while j < n and raw[j].isalpha():
                j += 1
            word = raw[i:j]
            if word.lower() == "pi":
                tokens.append(("pi", "pi"))
                i = j
                continue
            raise ExpressionParseError(f"free variable or unknown word: {word!r}")
        raise ExpressionParseError(f"unexpected character {ch!r} at position {i}")
    return tokens


class _Parser:
    """Recursive descent with precedence ^ > unary- > * / > + -; ^ right-associative."""

    def __init__(self, tokens: list[tuple[str, str]]):
        self.tokens = tokens
        self.pos = 0

    def peek(self) -> Optional[tuple[str, str]]:
        return self.tokens[self.pos] if self.pos < len(self.tokens) else None

    def take(self) -> tuple[str, str]:
        tok = self.peek()
        if tok is None:
            raise ExpressionParseError("unexpected end of expression")
        self.pos += 1
        return tok

    def parse(self) -> Node:
        node = self.expr()
        if self.peek() is not None:
            raise ExpressionParseError(f"trailing input at token {self.peek()!r}")
        return node

    def expr(self) -> Node:
        node = self.term()
        while (tok := self.peek()) is not None and tok[0] == "op" and tok[1] in "+-":
            self.take()
            node = BinOp(tok[1], node, self.term())
        return node

    def term(self) -> Node:
        node = self.unary()
        while (tok := self.peek()) and tok[0] == "op" and tok[1] in "*/":
            self.take()
            node = BinOp(tok[1], node, self.unary())
        return node

    def unary(self) -> Node:
        tok = self.peek()
        if tok == ("op", "-"):
            self.take()
            return Neg(self.unary())
        if tok == ("op", "+"):
            self.take()
            return self.unary()
        return self.power()

    def power(self) -> Node:
        base = self.atom()
        if self.peek() == ("op", "^"):
            self.take()
            return BinOp("^", base, self.unary())
        return base

    def atom(self) -> Node:
        kind, text = self.take()
        if kind == "num":
            return Num(text)
        if kind == "pi":
            return Pi()
        if kind == "lparen":
            node = self.expr()
            if self.peek() != ("rparen", ")"):
                raise ExpressionParseError("unbalanced parentheses")
            self.take()
            return node
        raise ExpressionParseError(f"unexpected token {text!r}")


def to_text(node: Node) -> str:
    """Render an AST back to parseable text (minimal parentheses)."""

    def render(n: Node, parent_prec: int, right_side: bool) -> str:
        if isinstance(n, Num):
            return n.literal
        if isinstance(n, Pi):
            return "pi"
        if isinstance(n, Neg):
            inner = render(n.operand, 3, False)
            text = f"-{inner}"
            return f"({text})" if parent_prec > 3 or (parent_prec == 3 and right_side) else text
        prec = {"+": 1, "-": 1, "*": 2, "/": 2, "^": 4}[n.op]
        left = render(n.left, prec, False)
        right = render(n.right, prec + (0 if n.op == "^" else 1), True)
        if n.op == "^":
            # right-associative: parenthesize a left operand that is itself a power
            if isinstance(n.left, (BinOp, Neg)):
                left = f"({left})"
            text = f"{left} ^ {right}"
        else:
            text = f"{left} {n.op} {right}"
        needs = parent_prec > prec or (parent_prec == prec and right_side)
        return f"({text})" if needs else text

    return render(node, 0, False)


def parse_arithmetic(raw: str) -> ArithmeticExpr:
    """Normalize and parse; raises ExpressionParseError on residual letters,
    unbalanced parentheses, or anything else that is not a closed expression."""
    tokens = _tokenize(raw)
    if not tokens:
        raise ExpressionParseError("empty expression")
    ast = _Parser(tokens).parse()
    return ArithmeticExpr(normalized_text=to_text(ast), ast=ast)


def eval_float(node: Node) -> float:
    if isinstance(node, Num):
        return node.value
    if isinstance(node, Pi):
        return math.pi
    if isinstance(node, Neg):
        return -eval_float(node.operand)
    left = eval_float(node.left)
    right = eval_float(node.right)
    if node.op == "+":
        return left + right
    if node.op == "-":
        return left - right
    if node.op == "*":
        return left * right
    if node.op == "/":
        return left / right
    if node.op == "^":
        return left**right
    raise ValueError(f"unknown operator {node.op!r}")


def answer_literal(expr: ArithmeticExpr) -> Optional[str]:
    """The bare numeral behind an answer expression, or None if it is not one."""
    node = expr.ast
    if isinstance(node, Neg) and isinstance(node.operand, Num):
        return "-" + node.operand.literal
    if isinstance(node, Num):
        return node.literal
    return None


def decimal_places(literal: str) -> int:
    if "." in literal:
        return len(literal.split(".", 1)[1])
    return 0


def round_away(value: float, places: int) -> Decimal:
    """Round a float to `places` decimals with ties away from zero."""
    return Decimal(value).quantize(Decimal(1).scaleb(-places), rounding=ROUND_HALF_UP)


def compare_decimals(answer_literal_text: str) -> int:
    return min(MAX_COMPARE_DECIMALS, decimal_places(answer_literal_text))


def eval_arithmetic(claim: MathCalc) -> ArithmeticResult:
    """Evaluate the claim's calculation and compare to its stated answer.

    Raises ExpressionParseError when either side cannot be parsed or the
    answer is not a bare numeral (callers fall back to the LLM-snippet
    backend or flag the claim). Numeric failures (division by zero,
    overflow) yield matched=False.
    """
    calc = parse_arithmetic(claim.calculation)
    answer_expr = parse_arithmetic(claim.calculated_answer)
    literal = answer_literal(answer_expr)
    if literal is None:
        raise ExpressionParseError(
            f"calculated answer is not a bare numeral: {claim.calculated_answer!r}"
        )
    places = compare_decimals(literal.lstrip("-"))
    try:
        value = eval_float(calc.ast)
        stated = eval_float(answer_expr.ast)
        matched = round_away(value, places) == round_away(stated, places)
    except (ZeroDivisionError, OverflowError, InvalidOperation, ValueError) as exc:
        logger.warning("arithmetic evaluation failed for %r: %s", claim.calculation, exc)
        matched = False
    if not isinstance(matched, bool):  # Decimal comparison returns bool, keep mypy honest
        matched = bool(matched)
    return ArithmeticResult(claim_id=claim.id, matched=matched)
