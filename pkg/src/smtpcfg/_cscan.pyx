# cython: language_level=3, boundscheck=False, wraparound=False
"""Compiled SMT-LIB lexical scanner.

Character-level twin of ``_pyscan.scan``; same token codes, same errors.
"""

from .errors import IllegalCharacter, UnterminatedString

cdef enum:
    LPAREN = 0
    RPAREN = 1
    SYMBOL = 2
    QUOTED_SYMBOL = 3
    KEYWORD = 4
    NUMERAL = 5
    DECIMAL = 6
    HEXADECIMAL = 7
    BINARY = 8
    STRING = 9


cdef inline bint _is_digit(Py_UCS4 c):
    return c >= u'0' and c <= u'9'


cdef inline bint _is_hex(Py_UCS4 c):
    return _is_digit(c) or (c >= u'a' and c <= u'f') or (c >= u'A' and c <= u'F')


cdef inline bint _is_sym_start(Py_UCS4 c):
    if (c >= u'a' and c <= u'z') or (c >= u'A' and c <= u'Z'):
        return True
    return c in u'~!@$%^&*_-+=<>.?/'


cdef inline bint _is_sym(Py_UCS4 c):
    return _is_sym_start(c) or _is_digit(c)


def scan(str text):
    cdef Py_ssize_t n = len(text)
    cdef Py_ssize_t pos = 0, i, start, line_start = 0
    cdef Py_ssize_t line = 1
    cdef Py_UCS4 c, d
    cdef int kind
    out = []
    while pos < n:
        c = text[pos]
        if c == u' ' or c == u'\t' or c == u'\r':
            pos += 1
            continue
        if c == u'\n':
            pos += 1
            line += 1
            line_start = pos
            continue
        if c == u';':
            while pos < n and text[pos] != u'\n':
                pos += 1
            continue
        start = pos
        if c == u'(':
            kind = LPAREN
            pos += 1
        elif c == u')':
            kind = RPAREN
            pos += 1
        elif c == u'"':
            i = pos + 1
            while True:
                if i >= n:
                    raise UnterminatedString("unterminated string literal", line, start - line_start + 1)
                d = text[i]
                if d == u'"':
                    if i + 1 < n and text[i + 1] == u'"':
                        i += 2
                        continue
                    break
                i += 1
            kind = STRING
            pos = i + 1
        elif c == u'|':
            i = pos + 1
            while i < n and text[i] != u'|' and text[i] != u'\\':
                i += 1
            if i >= n or text[i] != u'|':
                raise IllegalCharacter("unterminated quoted symbol", line, start - line_start + 1)
            kind = QUOTED_SYMBOL
            pos = i + 1
        elif c == u':':
            i = pos + 1
            while i < n and _is_sym(text[i]):
                i += 1
            if i == pos + 1:
                raise IllegalCharacter("illegal character ':'", line, start - line_start + 1)
            kind = KEYWORD
            pos = i
        elif c == u'#':
            i = pos + 1
            kind = -1
            if i < n and text[i] == u'x':
                i += 1
                while i < n and _is_hex(text[i]):
                    i += 1
                if i > pos + 2:
                    kind = HEXADECIMAL
            elif i < n and text[i] == u'b':
                i += 1
                while i < n and (text[i] == u'0' or text[i] == u'1'):
                    i += 1
                if i > pos + 2:
                    kind = BINARY
            if kind < 0:
                raise IllegalCharacter("illegal character '#'", line, start - line_start + 1)
            pos = i
        elif _is_digit(c):
            i = pos + 1
            if c != u'0':
                while i < n and _is_digit(text[i]):
                    i += 1
            kind = NUMERAL
            if i + 1 < n and text[i] == u'.' and _is_digit(text[i + 1]):
                i += 2
                while i < n and _is_digit(text[i]):
                    i += 1
                kind = DECIMAL
            pos = i
        elif _is_sym_start(c):
            i = pos + 1
            while i < n and _is_sym(text[i]):
                i += 1
            kind = SYMBOL
            pos = i
        else:
            raise IllegalCharacter("illegal character %r" % text[pos], line, start - line_start + 1)
        out.append((kind, start, pos, line, start - line_start + 1))
        if kind == STRING or kind == QUOTED_SYMBOL:
            i = text.rfind(u'\n', start, pos)
            if i >= 0:
                line += text.count(u'\n', start, pos)
                line_start = i + 1
    return out
