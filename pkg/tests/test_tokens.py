import pytest
from hypothesis import given, settings, strategies as st

from smtpcfg import _pyscan, tokens
from smtpcfg.errors import IllegalCharacter, LexError, UnterminatedString
from smtpcfg.tokens import RESERVED_WORDS, TokenKind, tokenize

try:
    from smtpcfg import _cscan
except ImportError:  # pragma: no cover
    _cscan = None

SCANNERS = [pytest.param(_pyscan.scan, id="python")]
if _cscan is not None:
    SCANNERS.append(pytest.param(_cscan.scan, id="cython"))


def kinds(toks):
    return [(t.kind, t.lexeme) for t in toks]


@pytest.mark.parametrize("scan", SCANNERS)
class TestTokenize:
    def test_check_sat(self, scan):
        toks = tokenize("(check-sat)", scan)
        assert kinds(toks) == [(TokenKind.LPAREN, "("), (TokenKind.RESERVED, "check-sat"), (TokenKind.RPAREN, ")")]

    def test_assert_eight_tokens(self, scan):
        toks = tokenize("(assert (> x 1))", scan)
        assert kinds(toks) == [
            (TokenKind.LPAREN, "("),
            (TokenKind.RESERVED, "assert"),
            (TokenKind.LPAREN, "("),
            (TokenKind.SYMBOL, ">"),
            (TokenKind.SYMBOL, "x"),
            (TokenKind.NUMERAL, "1"),
            (TokenKind.RPAREN, ")"),
            (TokenKind.RPAREN, ")"),
        ]

    def test_unterminated_string(self, scan):
        with pytest.raises(UnterminatedString) as exc:
            tokenize('"ab', scan)
        assert (exc.value.line, exc.value.column) == (1, 1)

    def test_illegal_character_position(self, scan):
        with pytest.raises(IllegalCharacter) as exc:
            tokenize("(assert\n  [x])", scan)
        assert (exc.value.line, exc.value.column) == (2, 3)

    def test_literal_classes(self, scan):
        toks = tokenize('0 42 3.14 #xFF #b101 "a""b" :named |q r| 007', scan)
        got = [t.kind for t in toks]
        assert got[:8] == [
            TokenKind.NUMERAL,
            TokenKind.NUMERAL,
            TokenKind.DECIMAL,
            TokenKind.HEXADECIMAL,
            TokenKind.BINARY,
            TokenKind.STRING,
            TokenKind.KEYWORD,
            TokenKind.SYMBOL,
        ]
        assert toks[5].lexeme == '"a""b"'
        # leading zeros split under maximal munch: 0, 0, 7
        assert [t.lexeme for t in toks[8:]] == ["0", "0", "7"]

    def test_comments_dropped_and_lines_tracked(self, scan):
        toks = tokenize("; header\n(check-sat) ; tail\n  (exit)", scan)
        assert [(t.lexeme, t.line, t.column) for t in toks] == [
            ("(", 2, 1),
            ("check-sat", 2, 2),
            (")", 2, 11),
            ("(", 3, 3),
            ("exit", 3, 4),
            (")", 3, 8),
        ]

    def test_quoted_reserved_word_is_symbol(self, scan):
        (tok,) = tokenize("|assert|", scan)
        assert tok.kind is TokenKind.SYMBOL

    def test_multiline_string_advances_line(self, scan):
        toks = tokenize('"a\nb" x', scan)
        assert (toks[1].line, toks[1].column) == (2, 4)


def test_reserved_words_cover_commands():
    for w in ("assert", "check-sat", "declare-datatypes", "let", "forall", "exists", "!", "_", "as"):
        assert w in RESERVED_WORDS


def test_backend_flag():
    assert tokens.BACKEND in ("cython", "python")


def test_terminal_names():
    toks = tokenize("(assert x 1)")
    assert [t.terminal for t in toks] == ['"("', '"assert"', "SYMBOL", "NUMERAL", '")"']


_ALPHABET = st.sampled_from(list("()|\";:#xb01239.aZ-_+<=> \n\t!@") + ["assert", "check-sat", "#x", "#b", "\"\""])


def _scan_or_error(scan, text):
    try:
        return scan(text)
    except LexError as exc:
        return (type(exc), exc.line, exc.column)


@pytest.mark.skipif(_cscan is None, reason="compiled scanner not built")
@settings(max_examples=400, deadline=None)
@given(st.lists(_ALPHABET, max_size=40).map("".join))
def test_scanner_parity(text):
    assert _scan_or_error(_cscan.scan, text) == _scan_or_error(_pyscan.scan, text)


@settings(max_examples=200, deadline=None)
@given(st.lists(st.sampled_from(["(", ")", "x", "12", "3.5", ":k", '"s"', "|q|", "#xA", "#b1", " ", "\n"]), max_size=30))
def test_lexemes_reproduce_significant_content(parts):
    text = "".join(parts)
    toks = tokenize(text)
    assert "".join(t.lexeme for t in toks) == "".join(text.split())
    for t in toks:
        assert t.lexeme
        if t.kind is TokenKind.KEYWORD:
            assert t.lexeme.startswith(":")
