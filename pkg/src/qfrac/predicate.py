"""Condition language over a single k-bit unsigned variable ``x``.

Grammar, loosest binding first::

    expr    := orB
    orB     := andB {"||" andB}
    andB    := cmp {"&&" cmp}
    cmp     := bor [("=="|"!="|"<"|"<="|">"|">=") bor]
    bor     := bxor {"|" bxor}
    bxor    := band {"^" band}
    band    := shift {"&" shift}
    shift   := add {("<<"|">>") add}
    add     := mul {("+"|"-") mul}
    mul     := unary {("*"|"mod") unary}
    unary   := ["!"] atom
    atom    := "x" | decimal | "0x" hex | "(" expr ")"

Arithmetic is unsigned 64-bit with wraparound, ``a mod 0 == a`` and shifts by
64 or more give 0, so every predicate is a total function of ``x``. A
predicate whose top level is arithmetic is read as ``expr != 0``.
"""
from __future__ import annotations

import re
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property

import numpy as np

from ._validation import check_width

MASK64 = (1 << 64) - 1

ARITH_OPS = ("+", "-", "*", "mod", "&", "|", "^", "<<", ">>")
COMPARE_OPS = ("==", "!=", "<", "<=", ">", ">=")
LOGIC_OPS = ("&&", "||")

TERM_NAMES = {
    "+": "Add", "-": "Sub", "*": "Mul", "mod": "Mod",
    "&": "BitAnd", "|": "BitOr", "^": "BitXor", "<<": "Shl", ">>": "Shr",
    "==": "Eq", "!=": "Ne", "<": "Lt", "<=": "Le", ">": "Gt", ">=": "Ge",
    "&&": "And", "||": "Or",
}

# Binding strength used by the pretty-printer; higher binds tighter.
_LEVEL = {
    "||": 1, "&&": 2,
    "==": 3, "!=": 3, "<": 3, "<=": 3, ">": 3, ">=": 3,
    "|": 4, "^": 5, "&": 6, "<<": 7, ">>": 7, "+": 8, "-": 8, "*": 9, "mod": 9,
}
_ATOM_LEVEL = 10


class PredicateError(ValueError):
    """Base class for rejected predicate text; ``offset`` is a byte offset."""

    def __init__(self, message: str, offset: int):
        super().__init__(f"{message} (at byte offset {offset})")
        self.offset = offset


class PredicateSyntaxError(PredicateError):
    def __init__(self, message: str, offset: int, expected=()):
        self.expected = frozenset(expected)
        if self.expected:
            message = f"{message}; expected one of: {', '.join(sorted(self.expected))}"
        super().__init__(message, offset)


class LiteralOverflowError(PredicateSyntaxError):
    pass


class PredicateTypeError(PredicateError):
    pass


# -- AST ---------------------------------------------------------------------
# Source positions are kept for diagnostics only and never take part in
# equality, so a reparsed tree compares equal to the one it was printed from.


@dataclass(frozen=True)
class Num:
    value: int
    pos: int = field(default=-1, compare=False, repr=False)


@dataclass(frozen=True)
class Var:
    pos: int = field(default=-1, compare=False, repr=False)


@dataclass(frozen=True)
class Arith:
    op: str
    left: object
    right: object
    pos: int = field(default=-1, compare=False, repr=False)


@dataclass(frozen=True)
class Compare:
    op: str
    left: object
    right: object
    pos: int = field(default=-1, compare=False, repr=False)


@dataclass(frozen=True)
class Logic:
    op: str
    left: object
    right: object
    pos: int = field(default=-1, compare=False, repr=False)


@dataclass(frozen=True)
class Not:
    operand: object
    pos: int = field(default=-1, compare=False, repr=False)


def is_boolean(node) -> bool:
    return isinstance(node, (Compare, Logic, Not))


@dataclass(frozen=True)
class PredicateAst:
    """A parsed condition together with the register width it ranges over."""

    root: object
    width: int

    def __post_init__(self):
        check_width(self.width)
        if not is_boolean(self.root):
            raise PredicateTypeError("predicate root must be boolean", getattr(self.root, "pos", -1))

    def __str__(self) -> str:
        return pretty_print(self)

    def term(self) -> str:
        return to_term(self.root)

    @property
    def uses_x(self) -> bool:
        return _uses_x(self.root)


def _uses_x(node) -> bool:
    if isinstance(node, Var):
        return True
    if isinstance(node, Num):
        return False
    if isinstance(node, Not):
        return _uses_x(node.operand)
    return _uses_x(node.left) or _uses_x(node.right)


def to_term(node) -> str:
    """Compact constructor notation, e.g. ``Eq(Mod(Mul(x,x),16),1)``."""
    if isinstance(node, PredicateAst):
        node = node.root
    if isinstance(node, Var):
        return "x"
    if isinstance(node, Num):
        return str(node.value)
    if isinstance(node, Not):
        return f"Not({to_term(node.operand)})"
    return f"{TERM_NAMES[node.op]}({to_term(node.left)},{to_term(node.right)})"


def _level(node) -> int:
    if isinstance(node, (Num, Var)):
        return _ATOM_LEVEL
    if isinstance(node, Not):
        return _ATOM_LEVEL
    return _LEVEL[node.op]


def _fmt(node, min_level: int) -> str:
    if isinstance(node, Var):
        text = "x"
    elif isinstance(node, Num):
        text = str(node.value)
    elif isinstance(node, Not):
        text = "!" + _fmt(node.operand, _ATOM_LEVEL + 1)
    else:
        lvl = _LEVEL[node.op]
        if isinstance(node, Compare):
            # non-associative: both sides sit one level tighter
            left = _fmt(node.left, lvl + 1)
        else:
            left = _fmt(node.left, lvl)
        text = f"{left} {node.op} {_fmt(node.right, lvl + 1)}"
    if _level(node) < min_level:
        return f"({text})"
    return text


def pretty_print(ast) -> str:
    """Render with the minimum parentheses that reparse to the same tree."""
    root = ast.root if isinstance(ast, PredicateAst) else ast
    return _fmt(root, 0)


# -- lexer ---------------------------------------------------------------------

_TOKEN_RE = re.compile(
    r"""
    (?P<ws>[ \t\r\n]+)
  | (?P<hex>0[xX][0-9A-Za-z_]*)
  | (?P<dec>[0-9][0-9A-Za-z_]*)
  | (?P<ident>[A-Za-z_][A-Za-z0-9_]*)
  | (?P<op>\|\||&&|==|!=|<=|>=|<<|>>|[<>|^&+\-*!()])
    """,
    re.VERBOSE,
)

_EOF = "end of input"
_INT = "integer"


@dataclass(frozen=True)
class _Token:
    kind: str  # operator text, "x", "mod", _INT or _EOF
    text: str
    offset: int
    value: int = 0


def _tokenize(text: str) -> list[_Token]:
    tokens = []
    i = 0
    byte_off = 0
    while i < len(text):
        m = _TOKEN_RE.match(text, i)
        if m is None:
            raise PredicateSyntaxError(f"unexpected character {text[i]!r}", byte_off)
        kind = m.lastgroup
        lexeme = m.group()
        if kind == "hex":
            digits = lexeme[2:]
            if not digits or not re.fullmatch(r"[0-9A-Fa-f]+", digits):
                raise PredicateSyntaxError(f"malformed hex literal {lexeme!r}", byte_off)
            value = int(digits, 16)
        elif kind == "dec":
            if not lexeme.isdigit():
                raise PredicateSyntaxError(f"malformed integer literal {lexeme!r}", byte_off)
            value = int(lexeme)
        if kind in ("hex", "dec"):
            if value > MASK64:
                raise LiteralOverflowError(f"literal {lexeme} does not fit in 64 bits", byte_off)
            tokens.append(_Token(_INT, lexeme, byte_off, value))
        elif kind == "ident":
            if lexeme not in ("x", "mod"):
                raise PredicateSyntaxError(f"unknown identifier {lexeme!r}", byte_off)
            tokens.append(_Token(lexeme, lexeme, byte_off))
        elif kind == "op":
            tokens.append(_Token(lexeme, lexeme, byte_off))
        i = m.end()
        byte_off += len(lexeme.encode("utf-8"))
    tokens.append(_Token(_EOF, "", byte_off))
    return tokens


# -- parser ----------------------------------------------------------------------


class _Parser:
    def __init__(self, text: str):
        self.tokens = _tokenize(text)
        self.i = 0
        # tokens tried at the current position, for error messages
        self.expected: set[str] = set()

    @property
    def tok(self) -> _Token:
        return self.tokens[self.i]

    def advance(self) -> _Token:
        tok = self.tokens[self.i]
        self.i += 1
        self.expected = set()
        return tok

    def accept(self, kinds) -> _Token | None:
        if self.tok.kind in kinds:
            return self.advance()
        self.expected.update(kinds)
        return None

    def fail(self):
        tok = self.tok
        if tok.kind == _EOF:
            # Report incomplete input at the last token read.
            offset = self.tokens[self.i - 1].offset if self.i else 0
            raise PredicateSyntaxError("unexpected end of input", offset, self.expected)
        raise PredicateSyntaxError(f"unexpected token {tok.text!r}", tok.offset, self.expected)

    # Each level returns a node; type rules are enforced as nodes are built.

    def parse(self):
        node = self.or_b()
        if self.tok.kind != _EOF:
            self.expected.add(_EOF)
            self.fail()
        if not is_boolean(node):
            node = Compare("!=", node, Num(0), pos=getattr(node, "pos", 0))
        return node

    def _logic_chain(self, op, sub):
        node = sub()
        while (tok := self.accept((op,))) is not None:
            right = sub()
            for side in (node, right):
                if not is_boolean(side):
                    raise PredicateTypeError(f"operand of '{op}' must be boolean", tok.offset)
            node = Logic(op, node, right, pos=tok.offset)
        return node

    def or_b(self):
        return self._logic_chain("||", self.and_b)

    def and_b(self):
        return self._logic_chain("&&", self.cmp)

    def cmp(self):
        node = self.bor()
        tok = self.accept(COMPARE_OPS)
        if tok is not None:
            right = self.bor()
            for side in (node, right):
                if is_boolean(side):
                    raise PredicateTypeError(f"operand of '{tok.kind}' must be arithmetic", tok.offset)
            node = Compare(tok.kind, node, right, pos=tok.offset)
        return node

    def _arith_chain(self, ops, sub):
        node = sub()
        while (tok := self.accept(ops)) is not None:
            right = sub()
            for side in (node, right):
                if is_boolean(side):
                    raise PredicateTypeError(f"operand of '{tok.kind}' must be arithmetic", tok.offset)
            node = Arith(tok.kind, node, right, pos=tok.offset)
        return node

    def bor(self):
        return self._arith_chain(("|",), self.bxor)

    def bxor(self):
        return self._arith_chain(("^",), self.band)

    def band(self):
        return self._arith_chain(("&",), self.shift)

    def shift(self):
        return self._arith_chain(("<<", ">>"), self.add)

    def add(self):
        return self._arith_chain(("+", "-"), self.mul)

    def mul(self):
        return self._arith_chain(("*", "mod"), self.unary)

    def unary(self):
        tok = self.accept(("!",))
        node = self.atom()
        if tok is None:
            return node
        if not is_boolean(node):
            raise PredicateTypeError("operand of '!' must be boolean", tok.offset)
        return Not(node, pos=tok.offset)

    def atom(self):
        tok = self.accept(("x", _INT, "("))
        if tok is None:
            self.fail()
        if tok.kind == "x":
            return Var(pos=tok.offset)
        if tok.kind == _INT:
            return Num(tok.value, pos=tok.offset)
        node = self.or_b()
        if self.accept((")",)) is None:
            self.fail()
        return node


def parse_predicate(text: str, width: int) -> PredicateAst:
    """Parse ``text`` into a typed predicate over ``width``-bit ``x``.

    Raises PredicateSyntaxError (with ``offset`` and ``expected``),
    PredicateTypeError, or LiteralOverflowError.
    """
    width = check_width(width)
    if not isinstance(text, str):
        raise TypeError("predicate text must be a string")
    return PredicateAst(_Parser(text).parse(), width)


# -- evaluation ----------------------------------------------------------------


def _eval_scalar(node, x: int) -> int | bool:
    if isinstance(node, Var):
        return x
    if isinstance(node, Num):
        return node.value
    if isinstance(node, Not):
        return not _eval_scalar(node.operand, x)
    if isinstance(node, Logic):
        left = _eval_scalar(node.left, x)
        if node.op == "&&":
            return left and _eval_scalar(node.right, x)
        return left or _eval_scalar(node.right, x)
    a = _eval_scalar(node.left, x)
    b = _eval_scalar(node.right, x)
    op = node.op
    if isinstance(node, Compare):
        return {
            "==": a == b, "!=": a != b, "<": a < b,
            "<=": a <= b, ">": a > b, ">=": a >= b,
        }[op]
    if op == "+":
        return (a + b) & MASK64
    if op == "-":
        return (a - b) & MASK64
    if op == "*":
        return (a * b) & MASK64
    if op == "mod":
        return a if b == 0 else a % b
    if op == "&":
        return a & b
    if op == "|":
        return a | b
    if op == "^":
        return a ^ b
    if op == "<<":
        return 0 if b >= 64 else (a << b) & MASK64
    if op == ">>":
        return 0 if b >= 64 else a >> b
    raise AssertionError(f"unknown operator {op!r}")


def eval_predicate(ast: PredicateAst, x: int) -> int:
    """The indicator bit y(x): 1 when the condition holds at ``x``."""
    x = int(x)
    if not 0 <= x < (1 << ast.width):
        raise ValueError(f"x={x} out of range for width {ast.width}")
    return int(bool(_eval_scalar(ast.root, x)))


_U64 = np.uint64


def _eval_array(node, xs: np.ndarray):
    if isinstance(node, Var):
        return xs
    if isinstance(node, Num):
        return _U64(node.value)
    if isinstance(node, Not):
        return np.logical_not(_eval_array(node.operand, xs))
    a = _eval_array(node.left, xs)
    b = _eval_array(node.right, xs)
    op = node.op
    if op == "&&":
        return np.logical_and(a, b)
    if op == "||":
        return np.logical_or(a, b)
    if op == "==":
        return np.equal(a, b)
    if op == "!=":
        return np.not_equal(a, b)
    if op == "<":
        return np.less(a, b)
    if op == "<=":
        return np.less_equal(a, b)
    if op == ">":
        return np.greater(a, b)
    if op == ">=":
        return np.greater_equal(a, b)
    a, b = np.asarray(a, dtype=np.uint64), np.asarray(b, dtype=np.uint64)
    if op == "+":
        return np.add(a, b)
    if op == "-":
        return np.subtract(a, b)
    if op == "*":
        return np.multiply(a, b)
    if op == "mod":
        zero = b == 0
        return np.where(zero, a, np.remainder(a, np.where(zero, _U64(1), b)))
    if op == "&":
        return np.bitwise_and(a, b)
    if op == "|":
        return np.bitwise_or(a, b)
    if op == "^":
        return np.bitwise_xor(a, b)
    # shift counts >= 64 are undefined in C, so mask them and zero the result
    big = b >= _U64(64)
    safe = np.bitwise_and(b, _U64(63))
    if op == "<<":
        return np.where(big, _U64(0), np.left_shift(a, safe))
    if op == ">>":
        return np.where(big, _U64(0), np.right_shift(a, safe))
    raise AssertionError(f"unknown operator {op!r}")


def eval_many(ast: PredicateAst, xs) -> np.ndarray:
    """Vectorised indicator for an array of inputs (bool array)."""
    xs = np.asarray(xs, dtype=np.uint64) & _U64((1 << ast.width) - 1)
    with np.errstate(all="ignore"):
        out = _eval_array(ast.root, xs)
    return np.broadcast_to(np.asarray(out, dtype=bool), xs.shape).copy()


# -- oracle tables ---------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class OracleTable:
    """Truth table of y(x) for every x in ``[0, 2**width)``."""

    width: int
    bits: np.ndarray
    solution_count: int

    def __post_init__(self):
        check_width(self.width)
        bits = np.asarray(self.bits, dtype=bool)
        if bits.shape != (1 << self.width,):
            raise ValueError(f"bits must have {1 << self.width} entries, got shape {bits.shape}")
        if int(np.count_nonzero(bits)) != self.solution_count:
            raise ValueError("solution_count does not match the number of set bits")
        bits = bits.copy()
        bits.flags.writeable = False
        object.__setattr__(self, "bits", bits)
        object.__setattr__(self, "solution_count", int(self.solution_count))

    @classmethod
    def from_bits(cls, bits, width: int | None = None) -> OracleTable:
        bits = np.asarray(bits, dtype=bool)
        if width is None:
            width = int(bits.size).bit_length() - 1
        return cls(width, bits, int(np.count_nonzero(bits)))

    @property
    def size(self) -> int:
        return 1 << self.width

    @cached_property
    def solutions(self) -> np.ndarray:
        """Sorted inputs x with y(x) = 1."""
        return np.flatnonzero(self.bits)

    def __eq__(self, other):
        if not isinstance(other, OracleTable):
            return NotImplemented
        return self.width == other.width and np.array_equal(self.bits, other.bits)

    __hash__ = None


_CHUNK = 1 << 20


def build_oracle_table(ast: PredicateAst, width: int | None = None) -> OracleTable:
    """Evaluate the predicate at every x in ``[0, 2**width)``."""
    width = ast.width if width is None else check_width(width)
    if width != ast.width:
        ast = PredicateAst(ast.root, width)
    n = 1 << width
    bits = np.empty(n, dtype=bool)
    for start in range(0, n, _CHUNK):
        stop = min(n, start + _CHUNK)
        bits[start:stop] = eval_many(ast, np.arange(start, stop, dtype=np.uint64))
    return OracleTable(width, bits, int(np.count_nonzero(bits)))


def exact_fraction(table: OracleTable) -> Fraction:
    return Fraction(table.solution_count, table.size)
