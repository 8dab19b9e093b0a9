"""
Parser for the plain-text rational expression grammar used by metric files.

    expr   := term (('+' | '-') term)*
    term   := unary (('*' | '/') unary)*
    unary  := ('+' | '-') unary | power
    power  := atom ('^' atom)?
    atom   := INTEGER | NAME | '(' expr ')'

Rational literals are written as quotients of integers (3/5). An exponent is an
atom that evaluates to a nonnegative integer constant, e.g. ^2, ^delta or
^(delta^2) with delta bound to a constant.
"""

import re
from typing import Dict, List, NamedTuple, Optional

from .errors import ExactAlgebraError, ExpressionParseError
from .exact_algebra import FIELD, VARIABLES, RatFunc, arith, evaluate, format_rat, rat

_ORIGIN = (rat(0), rat(0))


class Token(NamedTuple):
    kind: str
    text: str
    column: int


_TOKEN_SPEC = [
    ("INTEGER", r"\d+"),
    ("NAME", r"[A-Za-z_][A-Za-z_0-9]*"),
    ("OP", r"[-+*/^()]"),
    ("SPACE", r"\s+"),
]
_TOKEN_RE = re.compile("|".join(f"(?P<{name}>{pattern})" for name, pattern in _TOKEN_SPEC))


def tokenize(text: str, line: int = 1, column_offset: int = 0) -> List[Token]:
    tokens = []
    position = 0
    while position < len(text):
        match = _TOKEN_RE.match(text, position)
        if not match:
            raise ExpressionParseError(
                f"Unexpected character {text[position]!r}", line, column_offset + position + 1
            )
        kind = match.lastgroup
        if kind != "SPACE":
            tokens.append(Token(kind, match.group(), column_offset + position + 1))
        position = match.end()
    tokens.append(Token("END", "", column_offset + len(text) + 1))
    return tokens


class ExpressionParser:
    """Recursive-descent parser producing exact rational functions."""

    def __init__(
        self,
        text: str,
        variables: Optional[Dict[str, RatFunc]] = None,
        line: int = 1,
        column_offset: int = 0,
    ):
        self.variables = VARIABLES if variables is None else variables
        self.line = line
        self.tokens = tokenize(text, line, column_offset)
        self.position = 0

    def _peek(self) -> Token:
        return self.tokens[self.position]

    def _advance(self) -> Token:
        token = self.tokens[self.position]
        self.position += 1
        return token

    def _error(self, message: str, token: Optional[Token] = None) -> ExpressionParseError:
        token = token or self._peek()
        return ExpressionParseError(message, self.line, token.column)

    def parse(self) -> RatFunc:
        result = self._expr()
        if self._peek().kind != "END":
            raise self._error(f"Unexpected token {self._peek().text!r}")
        return result

    def _expr(self) -> RatFunc:
        result = self._term()
        while self._peek().text in ("+", "-"):
            op = self._advance().text
            result = arith(result, self._term(), "add" if op == "+" else "sub")
        return result

    def _term(self) -> RatFunc:
        result = self._unary()
        while self._peek().text in ("*", "/"):
            token = self._advance()
            operand = self._unary()
            try:
                result = arith(result, operand, "mul" if token.text == "*" else "div")
            except ExactAlgebraError as e:
                raise self._error(str(e), token) from e
        return result

    def _unary(self) -> RatFunc:
        if self._peek().text == "-":
            self._advance()
            return -self._unary()
        if self._peek().text == "+":
            self._advance()
            return self._unary()
        return self._power()

    def _power(self) -> RatFunc:
        base = self._atom()
        if self._peek().text == "^":
            self._advance()
            token = self._peek()
            exponent = self._atom()
            if not (exponent.numer.is_ground and exponent.denom.is_ground):
                raise self._error("Exponent must be a constant", token)
            value = evaluate(exponent, _ORIGIN)
            if value.denominator != 1 or value < 0:
                raise self._error(f"Exponent must be a nonnegative integer, got {format_rat(value)}", token)
            base = base ** int(value.numerator)
        return base

    def _atom(self) -> RatFunc:
        token = self._advance()
        if token.kind == "INTEGER":
            return FIELD(int(token.text))
        if token.kind == "NAME":
            if token.text not in self.variables:
                raise self._error(f"Unknown variable {token.text!r}", token)
            return self.variables[token.text]
        if token.text == "(":
            inner = self._expr()
            closing = self._advance()
            if closing.text != ")":
                raise self._error("Expected ')'", closing)
            return inner
        raise self._error(f"Unexpected token {token.text!r}" if token.text else "Unexpected end of expression", token)


def parse_expression(
    text: str,
    variables: Optional[Dict[str, RatFunc]] = None,
    line: int = 1,
    column_offset: int = 0,
) -> RatFunc:
    """
    Parse an expression into a canonical rational function.

    Args:
        text: Expression source
        variables: Map of identifier to rational function (default: x and y)
        line: Line number for error messages
        column_offset: Column of the first character minus one

    Raises:
        ExpressionParseError: with line and column of the offending token
    """
    return ExpressionParser(text, variables, line, column_offset).parse()
