"""SMT-LIB v2 tokens and the ``tokenize`` entry point.

The character scan runs in the compiled ``_cscan`` extension when it is
importable and falls back to the regex scanner in ``_pyscan`` otherwise.
Set ``SMTPCFG_PURE_PYTHON=1`` to force the fallback.
"""

from __future__ import annotations

import enum
import os
from dataclasses import dataclass

from . import _pyscan

if os.environ.get("SMTPCFG_PURE_PYTHON", "") not in ("", "0"):
    _scan = _pyscan.scan
    BACKEND = "python"
else:
    try:
        from ._cscan import scan as _scan

        BACKEND = "cython"
    except ImportError:  # extension not built
        _scan = _pyscan.scan
        BACKEND = "python"


class TokenKind(enum.Enum):
    LPAREN = "LPAREN"
    RPAREN = "RPAREN"
    SYMBOL = "SYMBOL"
    KEYWORD = "KEYWORD"
    NUMERAL = "NUMERAL"
    DECIMAL = "DECIMAL"
    HEXADECIMAL = "HEXADECIMAL"
    BINARY = "BINARY"
    STRING = "STRING"
    RESERVED = "RESERVED"


# Words the concrete grammar dispatches on. Other SMT-LIB reserved words
# (match, par, check-sat-assuming, ...) stay plain symbols so unsupported
# commands can fall through to the generic form.
RESERVED_WORDS = frozenset(
    {
        "set-logic",
        "set-option",
        "set-info",
        "declare-const",
        "declare-fun",
        "declare-sort",
        "define-fun",
        "define-sort",
        "declare-datatype",
        "declare-datatypes",
        "assert",
        "check-sat",
        "get-model",
        "get-value",
        "push",
        "pop",
        "echo",
        "exit",
        "_",
        "!",
        "as",
        "let",
        "forall",
        "exists",
    }
)


@dataclass(frozen=True, slots=True)
class Token:
    kind: TokenKind
    lexeme: str
    line: int
    column: int

    @property
    def terminal(self) -> str:
        """Grammar terminal this token matches: a class name or a literal."""
        if self.kind is TokenKind.LPAREN:
            return '"("'
        if self.kind is TokenKind.RPAREN:
            return '")"'
        if self.kind is TokenKind.RESERVED:
            return f'"{self.lexeme}"'
        return self.kind.value

    def __str__(self) -> str:
        if self.kind in (TokenKind.LPAREN, TokenKind.RPAREN, TokenKind.RESERVED):
            return f"'{self.lexeme}'"
        return f"{self.kind.value}({self.lexeme})"


_KINDS = (
    TokenKind.LPAREN,
    TokenKind.RPAREN,
    TokenKind.SYMBOL,
    TokenKind.SYMBOL,  # quoted symbols are never reserved
    TokenKind.KEYWORD,
    TokenKind.NUMERAL,
    TokenKind.DECIMAL,
    TokenKind.HEXADECIMAL,
    TokenKind.BINARY,
    TokenKind.STRING,
)


def tokenize(text: str, scanner=None) -> list[Token]:
    """Split SMT-LIB source into tokens, dropping whitespace and comments.

    Raises ``UnterminatedString`` or ``IllegalCharacter`` with the 1-based
    line and column of the offending character. ``scanner`` overrides the
    import-time backend (used by the benchmark and the backend parity tests).
    """
    raw = (scanner or _scan)(text)
    reserved = RESERVED_WORDS
    res = TokenKind.RESERVED
    out = []
    for code, start, end, line, col in raw:
        lexeme = text[start:end]
        kind = _KINDS[code]
        if code == 2 and lexeme in reserved:
            kind = res
        out.append(Token(kind, lexeme, line, col))
    return out
