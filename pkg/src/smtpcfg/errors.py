"""Exception hierarchy shared by every smtpcfg module."""

from __future__ import annotations


class SmtPcfgError(Exception):
    """Base class for all errors raised by smtpcfg."""


# --- syntax -----------------------------------------------------------------


class LexError(SmtPcfgError):
    def __init__(self, message: str, line: int, column: int):
        super().__init__(f"{line}:{column}: {message}")
        self.line = line
        self.column = column


class UnterminatedString(LexError):
    pass


class IllegalCharacter(LexError):
    pass


class SMTSyntaxError(SmtPcfgError):
    """Raised by the parser; carries the offending token and the expected set.

    ``token_index`` is 0-based into the token list (``len(tokens)`` at EOF).
    """

    def __init__(self, token_index: int, line: int, column: int, expected, found: str):
        self.token_index = token_index
        self.line = line
        self.column = column
        self.expected = frozenset(expected)
        self.found = found
        exp = ", ".join(sorted(self.expected))
        super().__init__(f"{line}:{column}: expected {{{exp}}}, found {found}")


class GrammarError(SmtPcfgError):
    pass


# --- estimation -------------------------------------------------------------


class UnknownRuleId(SmtPcfgError):
    pass


class InvalidSmoothingParameter(SmtPcfgError):
    pass


class NonConvergence(SmtPcfgError):
    pass


class DivergentGrammar(SmtPcfgError):
    pass


class EmptyCorpus(SmtPcfgError):
    pass


# --- metrics ----------------------------------------------------------------


class UnknownNonterminal(SmtPcfgError):
    pass


class WeightMismatch(SmtPcfgError):
    pass


class EmptyGrammar(SmtPcfgError):
    pass


class MissingTokenData(SmtPcfgError):
    pass


class NoParsedPrograms(SmtPcfgError):
    pass


class AllMissing(SmtPcfgError):
    pass


# --- fusion / evaluation ----------------------------------------------------


class UnknownColumn(SmtPcfgError):
    pass


class EmptyMatrix(SmtPcfgError):
    pass


class SingleClass(SmtPcfgError):
    pass


class SingleClassValidation(SingleClass):
    pass


class NonFiniteFeature(SmtPcfgError):
    pass


class FoldDegenerate(SmtPcfgError):
    pass


class EmptyInput(SmtPcfgError):
    pass


class InsufficientData(SmtPcfgError):
    pass


# --- coverage ---------------------------------------------------------------


class DomainError(SmtPcfgError):
    pass


class InvalidParameters(SmtPcfgError):
    pass


class InvalidDistribution(SmtPcfgError):
    pass


# --- corpus / solver --------------------------------------------------------


class CorpusError(SmtPcfgError):
    pass


class MalformedLine(CorpusError):
    def __init__(self, line: int, reason: str):
        super().__init__(f"line {line}: {reason}")
        self.line = line
        self.reason = reason


class DuplicateQuestionId(CorpusError):
    def __init__(self, line: int, question_id: str):
        super().__init__(f"line {line}: duplicate question_id {question_id!r}")
        self.line = line
        self.question_id = question_id


class MissingTemperatures(CorpusError):
    pass


class SolverNotFound(SmtPcfgError):
    pass


class SpawnFailure(SmtPcfgError):
    pass
