"""Small arithmetic expression language for distance formulas and self-maps.

Grammar (one grammar everywhere: space files, CLI flags, instance builders)::

    expr    := term (('+' | '-') term)*
    term    := factor (('*' | '/') factor)*
    factor  := '-' factor | power
    power   := primary ('^' factor)?          # right-associative
    primary := NUMBER | VARIABLE | FUNC '(' args ')' | '(' expr ')'

Functions: sqrt, abs, exp, ln (one argument), min, max (two arguments), and
``if(a RELOP b, then, else)`` with RELOP one of < <= > >= == !=.

Unary minus binds looser than '^', so ``-2^2`` is ``-(2^2) = -4``.
Numbers accept decimal and scientific notation.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Mapping, Union

import numpy as np

__all__ = [
    "Expr",
    "Num",
    "Var",
    "Neg",
    "BinOp",
    "Call",
    "Cond",
    "ExprError",
    "ExprSyntaxError",
    "UnknownVariableError",
    "UnknownFunctionError",
    "ArityError",
    "EvalError",
    "parse",
    "evaluate",
    "to_source",
    "free_variables",
]


class ExprError(Exception):
    """Base class for all expression errors."""

    def __init__(self, message: str, byte_offset: int | None = None):
        self.byte_offset = byte_offset
        if byte_offset is not None:
            message = f"{message} (at byte {byte_offset})"
        super().__init__(message)


class ExprSyntaxError(ExprError):
    pass


class UnknownVariableError(ExprError):
    pass


class UnknownFunctionError(ExprError):
    pass


class ArityError(ExprError):
    pass


class EvalError(ExprError):
    """Evaluation failure: division by zero, domain error, non-finite result."""


# --------------------------------------------------------------------------
# AST
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class Num:
    value: float


@dataclass(frozen=True)
class Var:
    name: str


@dataclass(frozen=True)
class Neg:
    operand: "Expr"


@dataclass(frozen=True)
class BinOp:
    op: str  # one of + - * / ^
    left: "Expr"
    right: "Expr"


@dataclass(frozen=True)
class Call:
    func: str
    args: tuple["Expr", ...]


@dataclass(frozen=True)
class Cond:
    relop: str  # one of < <= > >= == !=
    lhs: "Expr"
    rhs: "Expr"
    then: "Expr"
    orelse: "Expr"


Expr = Union[Num, Var, Neg, BinOp, Call, Cond]

FUNCTION_ARITY = {"sqrt": 1, "abs": 1, "exp": 1, "ln": 1, "min": 2, "max": 2}
RELOPS = ("<=", ">=", "==", "!=", "<", ">")


# --------------------------------------------------------------------------
# Tokenizer
# --------------------------------------------------------------------------

_SINGLE = set("+-*/^(),")


def _byte_offset(source: str, pos: int) -> int:
    return len(source[:pos].encode("utf-8"))


class _Tokenizer:
    def __init__(self, source: str):
        self.source = source
        self.pos = 0
        self.tokens: list[tuple[str, str, int]] = []  # (kind, text, char pos)
        self._scan()
        self.index = 0

    def _scan(self) -> None:
        src = self.source
        i = 0
        n = len(src)
        while i < n:
            c = src[i]
            if c.isspace():
                i += 1
                continue
            if c in _SINGLE:
                self.tokens.append(("op", c, i))
                i += 1
                continue
            two = src[i : i + 2]
            if two in ("<=", ">=", "==", "!="):
                self.tokens.append(("relop", two, i))
                i += 2
                continue
            if c in "<>":
                self.tokens.append(("relop", c, i))
                i += 1
                continue
            if c.isdigit() or (c == "." and i + 1 < n and src[i + 1].isdigit()):
                j = i
                while j < n and src[j].isdigit():
                    j += 1
                if j < n and src[j] == ".":
                    j += 1
                    while j < n and src[j].isdigit():
                        j += 1
                if j < n and src[j] in "eE":
                    k = j + 1
                    if k < n and src[k] in "+-":
                        k += 1
                    if k < n and src[k].isdigit():
                        j = k
                        while j < n and src[j].isdigit():
                            j += 1
                    else:
                        raise ExprSyntaxError(
                            "malformed exponent", _byte_offset(src, j)
                        )
                self.tokens.append(("number", src[i:j], i))
                i = j
                continue
            if c.isalpha() or c == "_":
                j = i
                while j < n and (src[j].isalnum() or src[j] == "_"):
                    j += 1
                self.tokens.append(("name", src[i:j], i))
                i = j
                continue
            raise ExprSyntaxError(
                f"unexpected character {c!r}", _byte_offset(src, i)
            )
        self.tokens.append(("eof", "", n))

    def peek(self) -> tuple[str, str, int]:
        return self.tokens[self.index]

    def next(self) -> tuple[str, str, int]:
        tok = self.tokens[self.index]
        if tok[0] != "eof":
            self.index += 1
        return tok


# --------------------------------------------------------------------------
# Parser
# --------------------------------------------------------------------------

class _Parser:
    def __init__(self, source: str, allowed_vars: frozenset[str]):
        self.source = source
        self.allowed = allowed_vars
        self.toks = _Tokenizer(source)

    def _offset(self, pos: int) -> int:
        return _byte_offset(self.source, pos)

    def _error(self, message: str, pos: int) -> ExprSyntaxError:
        return ExprSyntaxError(message, self._offset(pos))

    def _expect(self, text: str) -> None:
        kind, tok, pos = self.toks.next()
        if tok != text:
            shown = tok if tok else "end of input"
            raise self._error(f"expected {text!r}, found {shown}", pos)

    def parse(self) -> Expr:
        node = self.expr()
        kind, tok, pos = self.toks.peek()
        if kind != "eof":
            raise self._error(f"unexpected trailing input {tok!r}", pos)
        return node

    def expr(self) -> Expr:
        node = self.term()
        while True:
            kind, tok, _ = self.toks.peek()
            if kind == "op" and tok in "+-":
                self.toks.next()
                node = BinOp(tok, node, self.term())
            else:
                return node

    def term(self) -> Expr:
        node = self.factor()
        while True:
            kind, tok, _ = self.toks.peek()
            if kind == "op" and tok in "*/":
                self.toks.next()
                node = BinOp(tok, node, self.factor())
            else:
                return node

    def factor(self) -> Expr:
        kind, tok, _ = self.toks.peek()
        if kind == "op" and tok == "-":
            self.toks.next()
            return Neg(self.factor())
        return self.power()

    def power(self) -> Expr:
        node = self.primary()
        kind, tok, _ = self.toks.peek()
        if kind == "op" and tok == "^":
            self.toks.next()
            return BinOp("^", node, self.factor())
        return node

    def primary(self) -> Expr:
        kind, tok, pos = self.toks.next()
        if kind == "number":
            return Num(float(tok))
        if kind == "op" and tok == "(":
            node = self.expr()
            self._expect(")")
            return node
        if kind == "name":
            nxt_kind, nxt_tok, _ = self.toks.peek()
            if nxt_kind == "op" and nxt_tok == "(":
                return self._call(tok, pos)
            if tok not in self.allowed:
                raise UnknownVariableError(
                    f"unknown variable {tok!r} (allowed: "
                    f"{', '.join(sorted(self.allowed)) or 'none'})",
                    self._offset(pos),
                )
            return Var(tok)
        shown = tok if tok else "end of input"
        raise self._error(f"unexpected {shown}", pos)

    def _call(self, func: str, pos: int) -> Expr:
        self._expect("(")
        if func == "if":
            cond_lhs = self.expr()
            kind, tok, rpos = self.toks.next()
            if kind != "relop":
                shown = tok if tok else "end of input"
                raise self._error(
                    f"expected a relational operator in if(...), found {shown}",
                    rpos,
                )
            cond_rhs = self.expr()
            self._expect(",")
            then = self.expr()
            self._expect(",")
            orelse = self.expr()
            self._expect(")")
            return Cond(tok, cond_lhs, cond_rhs, then, orelse)
        if func not in FUNCTION_ARITY:
            raise UnknownFunctionError(
                f"unknown function {func!r}", self._offset(pos)
            )
        args = [self.expr()]
        while True:
            kind, tok, _ = self.toks.peek()
            if kind == "op" and tok == ",":
                self.toks.next()
                args.append(self.expr())
            else:
                break
        self._expect(")")
        expected = FUNCTION_ARITY[func]
        if len(args) != expected:
            raise ArityError(
                f"{func} takes {expected} argument(s), got {len(args)}",
                self._offset(pos),
            )
        return Call(func, tuple(args))


def parse(source: str, allowed_vars: set[str] | frozenset[str]) -> Expr:
    """Parse ``source`` into an AST; only names in ``allowed_vars`` may appear."""
    return _Parser(source, frozenset(allowed_vars)).parse()


# --------------------------------------------------------------------------
# Printer
# --------------------------------------------------------------------------

_LEVEL_SUM, _LEVEL_PROD, _LEVEL_UNARY, _LEVEL_POWER, _LEVEL_ATOM = 1, 2, 3, 4, 5


def _level(node: Expr) -> int:
    if isinstance(node, (Num, Var, Call, Cond)):
        return _LEVEL_ATOM
    if isinstance(node, Neg):
        return _LEVEL_UNARY
    return {"+": _LEVEL_SUM, "-": _LEVEL_SUM, "*": _LEVEL_PROD,
            "/": _LEVEL_PROD, "^": _LEVEL_POWER}[node.op]


def _render(node: Expr, parent_level: int) -> str:
    own = _level(node)
    if isinstance(node, Num):
        text = repr(node.value)
    elif isinstance(node, Var):
        text = node.name
    elif isinstance(node, Neg):
        text = "-" + _render(node.operand, _LEVEL_UNARY)
    elif isinstance(node, Call):
        text = f"{node.func}({', '.join(_render(a, 0) for a in node.args)})"
    elif isinstance(node, Cond):
        text = (
            f"if({_render(node.lhs, 0)} {node.relop} {_render(node.rhs, 0)}, "
            f"{_render(node.then, 0)}, {_render(node.orelse, 0)})"
        )
    else:
        if node.op == "^":
            # left operand of '^' must be a primary; exponent may be a factor
            text = f"{_render(node.left, _LEVEL_ATOM)} ^ {_render(node.right, _LEVEL_UNARY)}"
        else:
            # left-associative: the right operand needs one level more binding
            text = (
                f"{_render(node.left, own)} {node.op} "
                f"{_render(node.right, own + 1)}"
            )
    if own < parent_level:
        return f"({text})"
    return text


def to_source(node: Expr) -> str:
    """Render the AST back to source; ``parse(to_source(e))`` is structurally ``e``."""
    return _render(node, 0)


def free_variables(node: Expr) -> frozenset[str]:
    if isinstance(node, Var):
        return frozenset((node.name,))
    if isinstance(node, Num):
        return frozenset()
    if isinstance(node, Neg):
        return free_variables(node.operand)
    if isinstance(node, BinOp):
        return free_variables(node.left) | free_variables(node.right)
    if isinstance(node, Call):
        out: frozenset[str] = frozenset()
        for a in node.args:
            out |= free_variables(a)
        return out
    out = frozenset()
    for part in (node.lhs, node.rhs, node.then, node.orelse):
        out |= free_variables(part)
    return out


# --------------------------------------------------------------------------
# Evaluator
# --------------------------------------------------------------------------

Value = Union[float, np.ndarray]

_RELOP_FN = {
    "<": lambda a, b: a < b,
    "<=": lambda a, b: a <= b,
    ">": lambda a, b: a > b,
    ">=": lambda a, b: a >= b,
    "==": lambda a, b: a == b,
    "!=": lambda a, b: a != b,
}


def _is_array(v) -> bool:
    return isinstance(v, np.ndarray) and v.ndim > 0


def _eval(node: Expr, ctx: Mapping[str, Value], array_mode: bool) -> Value:
    if isinstance(node, Num):
        return node.value
    if isinstance(node, Var):
        try:
            return ctx[node.name]
        except KeyError:
            raise EvalError(f"unbound variable {node.name!r}") from None
    if isinstance(node, Neg):
        return -_eval(node.operand, ctx, array_mode)
    if isinstance(node, BinOp):
        a = _eval(node.left, ctx, array_mode)
        b = _eval(node.right, ctx, array_mode)
        return _binop(node, a, b, array_mode)
    if isinstance(node, Call):
        args = [_eval(arg, ctx, array_mode) for arg in node.args]
        return _call(node, args, array_mode)
    # Cond
    if array_mode:
        c = _RELOP_FN[node.relop](
            _eval(node.lhs, ctx, array_mode), _eval(node.rhs, ctx, array_mode)
        )
        return np.where(
            c, _eval(node.then, ctx, array_mode), _eval(node.orelse, ctx, array_mode)
        )
    c = _RELOP_FN[node.relop](
        _eval(node.lhs, ctx, array_mode), _eval(node.rhs, ctx, array_mode)
    )
    branch = node.then if c else node.orelse
    return _eval(branch, ctx, array_mode)


def _check_scalar(v, node: Expr) -> float:
    v = float(v)
    if not math.isfinite(v):
        raise EvalError(f"non-finite result in {to_source(node)!r}")
    return v


def _binop(node: BinOp, a: Value, b: Value, array_mode: bool) -> Value:
    op = node.op
    if array_mode:
        if op == "+":
            return a + b
        if op == "-":
            return a - b
        if op == "*":
            return a * b
        if op == "/":
            return a / b
        return np.power(a, b)
    if op == "/":
        if b == 0.0:
            raise EvalError(f"division by zero in {to_source(node)!r}")
        return _check_scalar(a / b, node)
    if op == "^":
        if a < 0.0 and b != math.floor(b):
            raise EvalError(
                f"fractional power of a negative base in {to_source(node)!r}"
            )
        if a == 0.0 and b < 0.0:
            raise EvalError(f"zero raised to a negative power in {to_source(node)!r}")
        return _check_scalar(np.power(np.float64(a), np.float64(b)), node)
    if op == "+":
        return _check_scalar(a + b, node)
    if op == "-":
        return _check_scalar(a - b, node)
    return _check_scalar(a * b, node)


def _call(node: Call, args: list[Value], array_mode: bool) -> Value:
    fn = node.func
    if array_mode:
        if fn == "sqrt":
            return np.sqrt(args[0])
        if fn == "abs":
            return np.abs(args[0])
        if fn == "exp":
            return np.exp(args[0])
        if fn == "ln":
            return np.log(args[0])
        if fn == "min":
            return np.minimum(args[0], args[1])
        return np.maximum(args[0], args[1])
    if fn == "sqrt":
        if args[0] < 0.0:
            raise EvalError(f"sqrt of a negative value in {to_source(node)!r}")
        return _check_scalar(np.sqrt(np.float64(args[0])), node)
    if fn == "ln":
        if args[0] <= 0.0:
            raise EvalError(f"ln of a non-positive value in {to_source(node)!r}")
        return _check_scalar(np.log(np.float64(args[0])), node)
    if fn == "exp":
        return _check_scalar(np.exp(np.float64(args[0])), node)
    if fn == "abs":
        return abs(args[0])
    if fn == "min":
        return min(args[0], args[1])
    return max(args[0], args[1])


def evaluate(node: Expr, bindings: Mapping[str, Value]) -> Value:
    """Evaluate the AST under the given variable bindings.

    Scalar bindings give a float, evaluate conditionals lazily (exactly one
    branch), and raise :class:`EvalError` at the offending subexpression for
    division by zero, domain errors, or non-finite results.  If any binding
    is a numpy array the whole tree is evaluated elementwise (conditionals
    via ``np.where``, so both branches are computed) and a single finiteness
    check is applied to the result.
    """
    array_mode = any(_is_array(v) for v in bindings.values())
    if not array_mode:
        with np.errstate(all="ignore"):
            result = _eval(node, bindings, False)
        return _check_scalar(result, node)
    with np.errstate(all="ignore"):
        result = _eval(node, bindings, True)
    result = np.asarray(result, dtype=np.float64)
    if not np.all(np.isfinite(result)):
        bad = np.argwhere(~np.isfinite(result))[0]
        raise EvalError(
            f"non-finite result in {to_source(node)!r} at sample index "
            f"{tuple(int(i) for i in bad)}"
        )
    return result
