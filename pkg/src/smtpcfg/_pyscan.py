"""Pure-Python SMT-LIB lexical scanner (fallback for ``_cscan``).

Both backends expose ``scan(text) -> list[tuple[int, int, int, int, int]]``
returning ``(kind_code, start, end, line, column)`` per token, and raise
identical errors at identical positions.
"""

import re

from .errors import IllegalCharacter, UnterminatedString

# kind codes, shared with _cscan.pyx
LPAREN, RPAREN, SYMBOL, QUOTED_SYMBOL, KEYWORD, NUMERAL, DECIMAL, HEXADECIMAL, BINARY, STRING = range(10)

_SYM = r"A-Za-z0-9~!@$%^&*_\-+=<>.?/"
_MASTER = re.compile(
    rf"""
    (?P<ws>[ \t\r\n]+)
  | (?P<comment>;[^\n]*)
  | (?P<lparen>\()
  | (?P<rparen>\))
  | (?P<string>"(?:[^"]|"")*"(?!"))
  | (?P<qsym>\|[^|\\]*\|)
  | (?P<keyword>:[{_SYM}]+)
  | (?P<hex>\#x[0-9a-fA-F]+)
  | (?P<bin>\#b[01]+)
  | (?P<decimal>(?:0|[1-9][0-9]*)\.[0-9]+)
  | (?P<numeral>0|[1-9][0-9]*)
  | (?P<symbol>[A-Za-z~!@$%^&*_\-+=<>.?/][{_SYM}]*)
    """,
    re.VERBOSE,
)

_CODES = {
    "lparen": LPAREN,
    "rparen": RPAREN,
    "string": STRING,
    "qsym": QUOTED_SYMBOL,
    "keyword": KEYWORD,
    "hex": HEXADECIMAL,
    "bin": BINARY,
    "decimal": DECIMAL,
    "numeral": NUMERAL,
    "symbol": SYMBOL,
}


def scan(text):
    out = []
    pos = 0
    n = len(text)
    line = 1
    line_start = 0
    match = _MASTER.match
    while pos < n:
        m = match(text, pos)
        if m is None:
            col = pos - line_start + 1
            ch = text[pos]
            if ch == '"':
                raise UnterminatedString("unterminated string literal", line, col)
            if ch == "|":
                raise IllegalCharacter("unterminated quoted symbol", line, col)
            raise IllegalCharacter(f"illegal character {ch!r}", line, col)
        group = m.lastgroup
        end = m.end()
        if group != "ws" and group != "comment":
            out.append((_CODES[group], pos, end, line, pos - line_start + 1))
        if group in ("ws", "string", "qsym"):
            nl = text.count("\n", pos, end)
            if nl:
                line += nl
                line_start = text.rindex("\n", pos, end) + 1
        pos = end
    return out
