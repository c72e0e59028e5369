"""Run-search filter language: tokenizer, parser, AST, and canonical printer.

Grammar (conjunctive; keywords case-insensitive):

    filter  := clause ("AND" clause)* | ""
    clause  := key comparator value
    key     := [namespace "."] ident | "`" any-chars "`"
    ns      := "params" | "metrics" | "tags" | "attributes"
    cmp     := "=" | "!=" | "<" | "<=" | ">" | ">=" | LIKE | ILIKE | IN
    value   := number | string | "(" [string ("," string)*] ")"

Bare idents default to the attributes namespace. Backticked keys carry an
optional "namespace." prefix (split at the first dot); without a namespace
prefix the whole content is an attributes key. Strings use single or double
quotes with no escape sequences; numbers are optionally signed decimals with
an optional fraction and no exponent.

Typing is enforced at parse time: metrics clauses take numeric operands with
the six ordering comparators; params/tags take string operands with EQ, NE,
LIKE, ILIKE; attributes are typed per key (run_id/status string-like,
start_time/end_time numeric); IN applies only to attributes.run_id.

Errors are reported as FilterParseError carrying the 0-based byte offset of
the first invalid token.
"""

from __future__ import annotations

import enum
import re
from dataclasses import dataclass
from decimal import Decimal

from qtrack.errors import InvalidParameterError


class Namespace(enum.Enum):
    PARAMS = "params"
    METRICS = "metrics"
    TAGS = "tags"
    ATTRIBUTES = "attributes"


class Comparator(enum.Enum):
    EQ = "="
    NE = "!="
    LT = "<"
    LE = "<="
    GT = ">"
    GE = ">="
    LIKE = "LIKE"
    ILIKE = "ILIKE"
    IN = "IN"


Operand = str | int | float | tuple[str, ...]


@dataclass(frozen=True)
class Clause:
    namespace: Namespace
    key: str
    comparator: Comparator
    operand: Operand


@dataclass(frozen=True)
class FilterExpr:
    clauses: tuple[Clause, ...] = ()

    @property
    def is_match_all(self) -> bool:
        return not self.clauses


@dataclass(frozen=True)
class OrderTerm:
    namespace: Namespace
    key: str
    ascending: bool = True


class FilterParseError(InvalidParameterError):
    """Filter/order_by text rejected; position is a 0-based byte offset."""

    def __init__(self, position: int, message: str):
        super().__init__(f"parse error at byte {position}: {message}")
        self.position = position
        self.reason = message


_NAMESPACES = {ns.value: ns for ns in Namespace}
_SYMBOL_COMPARATORS = {
    "=": Comparator.EQ,
    "!=": Comparator.NE,
    "<": Comparator.LT,
    "<=": Comparator.LE,
    ">": Comparator.GT,
    ">=": Comparator.GE,
}
_WORD_COMPARATORS = {"LIKE": Comparator.LIKE, "ILIKE": Comparator.ILIKE, "IN": Comparator.IN}

_STRING_COMPARATORS = frozenset(
    {Comparator.EQ, Comparator.NE, Comparator.LIKE, Comparator.ILIKE}
)
_NUMERIC_COMPARATORS = frozenset(
    {Comparator.EQ, Comparator.NE, Comparator.LT, Comparator.LE, Comparator.GT, Comparator.GE}
)
ATTRIBUTE_NUMERIC_KEYS = frozenset({"start_time", "end_time"})
ATTRIBUTE_STRING_KEYS = frozenset({"run_id", "status"})

_IDENT_START = frozenset(b"abcdefghijklmnopqrstuvwxyzABCDEFGHIJKLMNOPQRSTUVWXYZ_")
_IDENT_CHARS = _IDENT_START | frozenset(b"0123456789")
_DIGITS = frozenset(b"0123456789")
_SAFE_IDENT = re.compile(r"[A-Za-z_][A-Za-z0-9_]*\Z")


@dataclass(frozen=True)
class _Token:
    kind: str  # word | number | string | backtick | symbol | eof
    value: object
    pos: int


def _tokenize(data: bytes) -> list[_Token]:
    tokens: list[_Token] = []
    i, n = 0, len(data)
    while i < n:
        c = data[i]
        if c in b" \t\r\n":
            i += 1
            continue
        if c in _IDENT_START:
            j = i + 1
            while j < n and data[j] in _IDENT_CHARS:
                j += 1
            tokens.append(_Token("word", data[i:j].decode("ascii"), i))
            i = j
        elif c in _DIGITS or c in b"+-":
            j = i
            if data[j] in b"+-":
                j += 1
            if j >= n or data[j] not in _DIGITS:
                raise FilterParseError(i, "malformed number")
            while j < n and data[j] in _DIGITS:
                j += 1
            is_float = False
            if j < n and data[j : j + 1] == b".":
                if j + 1 >= n or data[j + 1] not in _DIGITS:
                    raise FilterParseError(i, "malformed number")
                is_float = True
                j += 1
                while j < n and data[j] in _DIGITS:
                    j += 1
            text = data[i:j].decode("ascii")
            tokens.append(_Token("number", float(text) if is_float else int(text), i))
            i = j
        elif c in b"'\"":
            end = data.find(c, i + 1)
            if end < 0:
                raise FilterParseError(i, "unterminated string literal")
            tokens.append(_Token("string", data[i + 1 : end].decode("utf-8"), i))
            i = end + 1
        elif c == ord("`"):
            end = data.find(c, i + 1)
            if end < 0:
                raise FilterParseError(i, "unterminated quoted key")
            tokens.append(_Token("backtick", data[i + 1 : end].decode("utf-8"), i))
            i = end + 1
        elif c == ord("!"):
            if i + 1 < n and data[i + 1 : i + 2] == b"=":
                tokens.append(_Token("symbol", "!=", i))
                i += 2
            else:
                raise FilterParseError(i, "unexpected character '!'")
        elif c in b"<>":
            if i + 1 < n and data[i + 1 : i + 2] == b"=":
                tokens.append(_Token("symbol", chr(c) + "=", i))
                i += 2
            else:
                tokens.append(_Token("symbol", chr(c), i))
                i += 1
        elif c in b"=(),.":
            tokens.append(_Token("symbol", chr(c), i))
            i += 1
        else:
            char = data[i:].decode("utf-8", "replace")[0]
            raise FilterParseError(i, f"unexpected character {char!r}")
    tokens.append(_Token("eof", None, n))
    return tokens


class _Parser:
    def __init__(self, text: str):
        self._tokens = _tokenize(text.encode("utf-8"))
        self._i = 0

    def _peek(self) -> _Token:
        return self._tokens[self._i]

    def _advance(self) -> _Token:
        tok = self._tokens[self._i]
        if tok.kind != "eof":
            self._i += 1
        return tok

    def _at_symbol(self, sym: str) -> bool:
        tok = self._peek()
        return tok.kind == "symbol" and tok.value == sym

    def parse_filter(self) -> FilterExpr:
        if self._peek().kind == "eof":
            return FilterExpr(())
        clauses = [self._parse_clause()]
        while True:
            tok = self._peek()
            if tok.kind == "eof":
                break
            if tok.kind == "word" and str(tok.value).upper() == "AND":
                self._advance()
                clauses.append(self._parse_clause())
            else:
                raise FilterParseError(tok.pos, "expected 'AND'")
        return FilterExpr(tuple(clauses))

    def parse_order_term(self) -> OrderTerm:
        namespace, key = self._parse_key()
        ascending = True
        tok = self._peek()
        if tok.kind == "word" and str(tok.value).upper() in ("ASC", "DESC"):
            ascending = str(tok.value).upper() == "ASC"
            self._advance()
        tok = self._peek()
        if tok.kind != "eof":
            raise FilterParseError(tok.pos, "expected end of order_by term")
        return OrderTerm(namespace, key, ascending)

    def _parse_key(self) -> tuple[Namespace, str]:
        tok = self._peek()
        if tok.kind == "backtick":
            self._advance()
            content = str(tok.value)
            head, dot, rest = content.partition(".")
            if dot and head in _NAMESPACES:
                namespace, key = _NAMESPACES[head], rest
            else:
                namespace, key = Namespace.ATTRIBUTES, content
            if not key:
                raise FilterParseError(tok.pos, "empty key")
            return namespace, key
        if tok.kind == "word":
            self._advance()
            word = str(tok.value)
            if word.lower() in _NAMESPACES and self._at_symbol("."):
                self._advance()
                ident = self._peek()
                if ident.kind != "word":
                    raise FilterParseError(ident.pos, "expected key")
                self._advance()
                return _NAMESPACES[word.lower()], str(ident.value)
            return Namespace.ATTRIBUTES, word
        raise FilterParseError(tok.pos, "expected key")

    def _parse_comparator(self) -> tuple[Comparator, int]:
        tok = self._peek()
        if tok.kind == "symbol" and tok.value in _SYMBOL_COMPARATORS:
            self._advance()
            return _SYMBOL_COMPARATORS[str(tok.value)], tok.pos
        if tok.kind == "word" and str(tok.value).upper() in _WORD_COMPARATORS:
            self._advance()
            return _WORD_COMPARATORS[str(tok.value).upper()], tok.pos
        raise FilterParseError(tok.pos, "expected comparator")

    def _parse_string_list(self) -> tuple[str, ...]:
        tok = self._peek()
        if not self._at_symbol("("):
            raise FilterParseError(tok.pos, "expected '('")
        self._advance()
        items: list[str] = []
        if self._at_symbol(")"):
            self._advance()
            return ()
        while True:
            tok = self._peek()
            if tok.kind != "string":
                raise FilterParseError(tok.pos, "expected string in list")
            items.append(str(tok.value))
            self._advance()
            if self._at_symbol(","):
                self._advance()
                continue
            if self._at_symbol(")"):
                self._advance()
                return tuple(items)
            raise FilterParseError(self._peek().pos, "expected ',' or ')'")

    def _parse_clause(self) -> Clause:
        namespace, key = self._parse_key()
        comparator, cmp_pos = self._parse_comparator()
        if comparator is Comparator.IN:
            operand: Operand = self._parse_string_list()
            value_pos = cmp_pos
        else:
            tok = self._peek()
            if tok.kind not in ("number", "string"):
                raise FilterParseError(tok.pos, "expected value")
            self._advance()
            operand = tok.value  # type: ignore[assignment]
            value_pos = tok.pos
        _check_clause(namespace, key, comparator, operand, cmp_pos, value_pos)
        return Clause(namespace, key, comparator, operand)


def _check_clause(
    namespace: Namespace,
    key: str,
    comparator: Comparator,
    operand: Operand,
    cmp_pos: int,
    value_pos: int,
) -> None:
    if comparator is Comparator.IN:
        if namespace is not Namespace.ATTRIBUTES or key != "run_id":
            raise FilterParseError(cmp_pos, "IN is only allowed for attributes.run_id")
        return
    is_string = isinstance(operand, str)

    def want_string(label: str) -> None:
        if comparator not in _STRING_COMPARATORS:
            raise FilterParseError(
                cmp_pos, f"comparator {comparator.value} not allowed for {label}"
            )
        if not is_string:
            raise FilterParseError(value_pos, f"{label} require a string operand")

    def want_numeric(label: str) -> None:
        if comparator not in _NUMERIC_COMPARATORS:
            raise FilterParseError(
                cmp_pos, f"comparator {comparator.value} not allowed for {label}"
            )
        if is_string:
            raise FilterParseError(value_pos, f"{label} require a numeric operand")

    if namespace is Namespace.METRICS:
        want_numeric("metrics clauses")
    elif namespace in (Namespace.PARAMS, Namespace.TAGS):
        want_string(f"{namespace.value} clauses")
    elif key in ATTRIBUTE_NUMERIC_KEYS:
        want_numeric(f"attributes.{key} clauses")
    elif key in ATTRIBUTE_STRING_KEYS:
        want_string(f"attributes.{key} clauses")
    elif is_string:
        want_string("string-valued attribute clauses")
    else:
        want_numeric("numeric-valued attribute clauses")


def parse_filter(text: str) -> FilterExpr:
    """Parse filter text; empty or blank input is the match-all expression."""
    return _Parser(text).parse_filter()


def parse_order_by(text: str) -> OrderTerm:
    """Parse one order_by element, e.g. ``"metrics.fidelity DESC"``."""
    return _Parser(text).parse_order_term()


def _print_key(namespace: Namespace, key: str) -> str:
    if _SAFE_IDENT.fullmatch(key):
        return f"{namespace.value}.{key}"
    if "`" in key:
        raise InvalidParameterError(f"key {key!r} contains a backtick and cannot be printed")
    return f"`{namespace.value}.{key}`"


def _print_string(value: str) -> str:
    if '"' not in value:
        return f'"{value}"'
    if "'" not in value:
        return f"'{value}'"
    raise InvalidParameterError(
        "string operand contains both quote characters and cannot be printed"
    )


def _print_number(value: int | float) -> str:
    if isinstance(value, int):
        return str(value)
    text = repr(value)
    if "e" in text or "E" in text:
        # Grammar has no exponent form; expand exactly via Decimal.
        text = format(Decimal(text), "f")
    if "." not in text:
        # Keep the token a float so reparsing preserves the operand type.
        text += ".0"
    return text


def print_filter(expr: FilterExpr) -> str:
    """Render a canonical form; parse(print_filter(e)) equals e structurally."""
    parts = []
    for clause in expr.clauses:
        if clause.comparator is Comparator.IN:
            assert isinstance(clause.operand, tuple)
            operand = "(" + ", ".join(_print_string(v) for v in clause.operand) + ")"
        elif isinstance(clause.operand, str):
            operand = _print_string(clause.operand)
        else:
            operand = _print_number(clause.operand)
        key = _print_key(clause.namespace, clause.key)
        parts.append(f"{key} {clause.comparator.value} {operand}")
    return " AND ".join(parts)


def print_order_by(term: OrderTerm) -> str:
    direction = "ASC" if term.ascending else "DESC"
    return f"{_print_key(term.namespace, term.key)} {direction}"
