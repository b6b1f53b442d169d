"""Context-free grammars with stable integer rule ids.

Nonterminals are plain names. Terminals are either token-class names
(``SYMBOL``, ``NUMERAL``, ...) or quoted literals (``'"("'``, ``'"assert"'``).
The shipped SMT-LIB inventory lives in ``grammar.bnf``: one rule per line,
``<lhs> ::= sym ...``, with rule id equal to the 0-based line index.
"""

from __future__ import annotations

import functools
from dataclasses import dataclass, field
from importlib import resources
from typing import Iterable, Sequence

from .errors import GrammarError

GRAMMAR_VERSION = "1"
EPSILON = "ε"


@dataclass(frozen=True)
class Rule:
    id: int
    lhs: str
    rhs: tuple[str, ...]

    def __str__(self) -> str:
        return f"{self.lhs} ::= {' '.join(self.rhs) if self.rhs else EPSILON}"


@dataclass(frozen=True)
class ConcreteGrammar:
    nonterminals: tuple[str, ...]
    terminals: frozenset[str]
    rules: tuple[Rule, ...]
    start: str
    rules_by_lhs: dict[str, tuple[int, ...]] = field(repr=False, compare=False)
    _index: dict[tuple[str, tuple[str, ...]], int] = field(repr=False, compare=False)

    @classmethod
    def from_rules(cls, rules: Iterable[tuple[str, Sequence[str]]], start: str | None = None):
        """Build a grammar from ``(lhs, rhs)`` pairs; ids follow input order.

        Every rhs symbol that never appears as a lhs is a terminal.
        """
        pairs = [(lhs, tuple(rhs)) for lhs, rhs in rules]
        if not pairs:
            raise GrammarError("grammar has no rules")
        nts: list[str] = []
        for lhs, _ in pairs:
            if lhs not in nts:
                nts.append(lhs)
        nt_set = set(nts)
        terms = {s for _, rhs in pairs for s in rhs if s not in nt_set}
        start = pairs[0][0] if start is None else start
        if start not in nt_set:
            raise GrammarError(f"start symbol {start!r} has no rules")
        built = tuple(Rule(i, lhs, rhs) for i, (lhs, rhs) in enumerate(pairs))
        by_lhs: dict[str, list[int]] = {a: [] for a in nts}
        index = {}
        for r in built:
            by_lhs[r.lhs].append(r.id)
            if (r.lhs, r.rhs) in index:
                raise GrammarError(f"duplicate rule {r}")
            index[(r.lhs, r.rhs)] = r.id
        return cls(
            nonterminals=tuple(nts),
            terminals=frozenset(terms),
            rules=built,
            start=start,
            rules_by_lhs={a: tuple(ids) for a, ids in by_lhs.items()},
            _index=index,
        )

    @classmethod
    def from_bnf(cls, text: str):
        pairs = []
        for lineno, line in enumerate(text.splitlines(), 1):
            if not line.strip():
                raise GrammarError(f"line {lineno}: blank lines would shift rule ids")
            lhs, sep, rhs = line.partition("::=")
            lhs = lhs.strip()
            if not sep or not (lhs.startswith("<") and lhs.endswith(">")):
                raise GrammarError(f"line {lineno}: expected '<lhs> ::= ...'")
            syms = []
            for sym in rhs.split():
                if sym == EPSILON:
                    continue
                syms.append(sym[1:-1] if sym.startswith("<") and sym.endswith(">") else sym)
            pairs.append((lhs[1:-1], syms))
        g = cls.from_rules(pairs)
        declared = set(g.nonterminals)
        for lineno, line in enumerate(text.splitlines(), 1):
            for sym in line.partition("::=")[2].split():
                if sym.startswith("<") and sym[1:-1] not in declared:
                    raise GrammarError(f"line {lineno}: nonterminal {sym} has no rules")
        return g

    def to_bnf(self) -> str:
        lines = []
        for r in self.rules:
            rhs = [f"<{s}>" if s in self.rules_by_lhs else s for s in r.rhs]
            lines.append(f"<{r.lhs}> ::= {' '.join(rhs) if rhs else EPSILON}")
        return "\n".join(lines) + "\n"

    def is_nonterminal(self, symbol: str) -> bool:
        return symbol in self.rules_by_lhs

    def rule_id(self, lhs: str, rhs: Sequence[str] | str) -> int:
        """Look up a rule; ``rhs`` may be a whitespace-separated string."""
        key = tuple(rhs.split()) if isinstance(rhs, str) else tuple(rhs)
        try:
            return self._index[(lhs, key)]
        except KeyError:
            raise GrammarError(f"no rule {lhs} ::= {' '.join(key)}") from None

    @property
    def num_rules(self) -> int:
        return len(self.rules)


@functools.lru_cache(maxsize=1)
def smt_grammar() -> ConcreteGrammar:
    """The shipped SMT-LIB v2 rule inventory."""
    text = resources.files(__package__).joinpath("grammar.bnf").read_text(encoding="utf-8")
    return ConcreteGrammar.from_bnf(text)
