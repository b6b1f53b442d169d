"""Recursive-descent parser for the shipped SMT-LIB rule inventory.

Every choice point is decided by a bounded peek at upcoming token terminals
(at most five tokens, at ``declare-fun``/``define-*`` parameter lists), so a
token stream has exactly one parse. Right-recursive list nonterminals
(``X ::= item X | item``) are read iteratively and folded into the nested
tree afterwards, which keeps Python recursion bounded by term nesting only.
"""

from __future__ import annotations

import functools
from dataclasses import dataclass, field
from typing import Iterator, Union

from .errors import SMTSyntaxError
from .grammar import ConcreteGrammar, smt_grammar
from .tokens import Token, tokenize

EOF = "<EOF>"
_SPEC = frozenset({"NUMERAL", "DECIMAL", "HEXADECIMAL", "BINARY", "STRING"})
LP, RP = '"("', '")"'


@dataclass(frozen=True)
class Leaf:
    token: Token
    index: int


@dataclass
class Node:
    nonterminal: str
    rule_id: int
    children: list[Union["Node", Leaf]]
    span: tuple[int, int]  # half-open token range [start, end)


@dataclass
class ParseTree:
    root: Node
    program_id: str = ""
    tokens: list[Token] = field(default_factory=list, repr=False)

    def leaves(self) -> Iterator[Leaf]:
        stack: list[Node | Leaf] = [self.root]
        while stack:
            item = stack.pop()
            if isinstance(item, Leaf):
                yield item
            else:
                stack.extend(reversed(item.children))

    def yield_tokens(self) -> list[Token]:
        return [leaf.token for leaf in self.leaves()]


@dataclass(frozen=True)
class RuleApplication:
    rule_id: int
    program_id: str
    depth: int
    span: tuple[int, int]


class _Rules:
    """Rule ids of the shipped grammar, resolved by their text once."""

    def __init__(self, g: ConcreteGrammar):
        r = g.rule_id
        self.rhs = [[(g.is_nonterminal(s), s) for s in rule.rhs] for rule in g.rules]
        self.script_cons = r("Script", "Command Script")
        self.script_end = r("Script", ())
        cmd = lambda rhs: r("Command", rhs)  # noqa: E731
        self.command = {
            "set-logic": cmd('"(" "set-logic" SYMBOL ")"'),
            "set-option": cmd('"(" "set-option" Attribute ")"'),
            "set-info": cmd('"(" "set-info" Attribute ")"'),
            "declare-const": cmd('"(" "declare-const" SYMBOL Sort ")"'),
            "declare-datatype": cmd('"(" "declare-datatype" SYMBOL DatatypeDec ")"'),
            "assert": cmd('"(" "assert" Term ")"'),
            "check-sat": cmd('"(" "check-sat" ")"'),
            "get-model": cmd('"(" "get-model" ")"'),
            "get-value": cmd('"(" "get-value" "(" TermList ")" ")"'),
            "echo": cmd('"(" "echo" STRING ")"'),
            "exit": cmd('"(" "exit" ")"'),
        }
        self.declare_fun = (
            cmd('"(" "declare-fun" SYMBOL "(" ")" Sort ")"'),
            cmd('"(" "declare-fun" SYMBOL "(" SortList ")" Sort ")"'),
        )
        self.declare_sort = (
            cmd('"(" "declare-sort" SYMBOL ")"'),
            cmd('"(" "declare-sort" SYMBOL NUMERAL ")"'),
        )
        self.define_fun = (
            cmd('"(" "define-fun" SYMBOL "(" ")" Sort Term ")"'),
            cmd('"(" "define-fun" SYMBOL "(" SortedVarList ")" Sort Term ")"'),
        )
        self.define_sort = (
            cmd('"(" "define-sort" SYMBOL "(" ")" Sort ")"'),
            cmd('"(" "define-sort" SYMBOL "(" SymbolList ")" Sort ")"'),
        )
        self.declare_datatypes = (
            cmd('"(" "declare-datatypes" "(" ")" "(" LegacyDatatypeList ")" ")"'),
            cmd('"(" "declare-datatypes" "(" SortDecList ")" "(" DatatypeDecList ")" ")"'),
        )
        self.push = (cmd('"(" "push" ")"'), cmd('"(" "push" NUMERAL ")"'))
        self.pop = (cmd('"(" "pop" ")"'), cmd('"(" "pop" NUMERAL ")"'))
        self.generic_cmd = cmd("GenericForm")
        self.generic = (r("GenericForm", '"(" SYMBOL ")"'), r("GenericForm", '"(" SYMBOL SExprList ")"'))
        self.attribute = (r("Attribute", "KEYWORD"), r("Attribute", "KEYWORD AttributeValue"))
        self.attr_value = {
            "spec": r("AttributeValue", "SpecConstant"),
            "SYMBOL": r("AttributeValue", "SYMBOL"),
            "empty": r("AttributeValue", '"(" ")"'),
            "list": r("AttributeValue", '"(" SExprList ")"'),
        }
        self.sexpr = {
            "spec": r("SExpr", "SpecConstant"),
            "SYMBOL": r("SExpr", "SYMBOL"),
            "KEYWORD": r("SExpr", "KEYWORD"),
            "empty": r("SExpr", '"(" ")"'),
            "list": r("SExpr", '"(" SExprList ")"'),
        }
        self.spec = {k: r("SpecConstant", k) for k in _SPEC}
        self.identifier = (r("Identifier", "SYMBOL"), r("Identifier", "IndexedIdentifier"))
        self.index = {"NUMERAL": r("Index", "NUMERAL"), "SYMBOL": r("Index", "SYMBOL")}
        self.sort = (r("Sort", "Identifier"), r("Sort", '"(" Identifier SortList ")"'))
        self.qual = (
            r("QualIdentifier", "SYMBOL"),
            r("QualIdentifier", "IndexedIdentifier"),
            r("QualIdentifier", '"(" "as" Identifier Sort ")"'),
        )
        self.term = {
            "spec": r("Term", "SpecConstant"),
            "qual": r("Term", "QualIdentifier"),
            "app": r("Term", '"(" QualIdentifier TermList ")"'),
            '"let"': r("Term", '"(" "let" "(" VarBindingList ")" Term ")"'),
            '"forall"': r("Term", '"(" "forall" "(" SortedVarList ")" Term ")"'),
            '"exists"': r("Term", '"(" "exists" "(" SortedVarList ")" Term ")"'),
            '"!"': r("Term", '"(" "!" Term AttributeList ")"'),
        }
        self.constructor = (r("ConstructorDec", '"(" SYMBOL ")"'), r("ConstructorDec", '"(" SYMBOL SelectorDecList ")"'))
        self.legacy_ctor = (r("LegacyConstructor", "SYMBOL"), r("LegacyConstructor", "ConstructorDec"))
        self.single = {
            nt: g.rules_by_lhs[nt][0]
            for nt in ("IndexedIdentifier", "SortedVar", "VarBinding", "DatatypeDec", "SelectorDec", "SortDec", "LegacyDatatype")
        }
        # list nonterminal -> (item symbol, recursive rule, base rule)
        self.lists = {}
        for nt, ids in g.rules_by_lhs.items():
            if nt.endswith("List"):
                rec, base = ids
                self.lists[nt] = (g.rules[base].rhs[0], rec, base)


@functools.lru_cache(maxsize=1)
def _rules() -> _Rules:
    return _Rules(smt_grammar())


_COMMAND_WORDS = frozenset(
    '"%s"' % w
    for w in (
        "set-logic set-option set-info declare-const declare-fun declare-sort define-fun define-sort "
        "declare-datatype declare-datatypes assert check-sat get-model get-value push pop echo exit"
    ).split()
)
_TERM_FIRST = _SPEC | {"SYMBOL", LP}


class _Parser:
    def __init__(self, tokens: list[Token]):
        self.g = smt_grammar()
        self.R = _rules()
        self.toks = tokens
        self.terms = [t.terminal for t in tokens]
        self.n = len(tokens)
        self.pos = 0
        self._rhs = self.R.rhs

    # --- token helpers ---

    def peek(self, k: int = 0) -> str:
        i = self.pos + k
        return self.terms[i] if i < self.n else EOF

    def fail(self, expected, at: int | None = None):
        i = self.pos if at is None else at
        if i < self.n:
            tok = self.toks[i]
            line, col, found = tok.line, tok.column, str(tok)
        elif self.n:
            last = self.toks[-1]
            line, col, found = last.line, last.column + len(last.lexeme), EOF
        else:
            line, col, found = 1, 1, EOF
        raise SMTSyntaxError(i, line, col, expected, found)

    def expect(self, terminal: str) -> Leaf:
        if self.peek() != terminal:
            self.fail({terminal})
        leaf = Leaf(self.toks[self.pos], self.pos)
        self.pos += 1
        return leaf

    # --- driver ---

    def script(self) -> Node:
        items = []
        while self.pos < self.n:
            items.append(self.nonterminal("Command"))
        end = self.n
        node = Node("Script", self.R.script_end, [], (end, end))
        for item in reversed(items):
            node = Node("Script", self.R.script_cons, [item, node], (item.span[0], end))
        return node

    def nonterminal(self, nt: str):
        if nt in self.R.lists:
            return self.list_of(nt)
        if nt in self.R.single:
            return self.expand(self.R.single[nt])
        return self.expand(getattr(self, "choose_" + nt)())

    def expand(self, rid: int) -> Node:
        start = self.pos
        children = []
        for is_nt, sym in self._rhs[rid]:
            children.append(self.nonterminal(sym) if is_nt else self.expect(sym))
        r = self.g.rules[rid]
        return Node(r.lhs, rid, children, (start, self.pos))

    def list_of(self, nt: str) -> Node:
        item, rec, base = self.R.lists[nt]
        is_nt = self.g.is_nonterminal(item)
        items = []
        while True:
            items.append(self.nonterminal(item) if is_nt else self.expect(item))
            if self.peek() == RP:
                break
        end = self.pos
        node = Node(nt, base, [items[-1]], (_start(items[-1]), end))
        for it in reversed(items[:-1]):
            node = Node(nt, rec, [it, node], (_start(it), end))
        return node

    # --- choice points ---

    def choose_Command(self) -> int:
        R = self.R
        if self.peek() != LP:
            self.fail({LP})
        word = self.peek(1)
        if word == "SYMBOL":
            return R.generic_cmd
        w = word.strip('"')
        if w in R.command and word in _COMMAND_WORDS:
            return R.command[w]
        if word == '"declare-fun"':
            return R.declare_fun[self.peek(4) != RP]
        if word == '"define-fun"':
            return R.define_fun[self.peek(4) != RP]
        if word == '"define-sort"':
            return R.define_sort[self.peek(4) != RP]
        if word == '"declare-sort"':
            return R.declare_sort[self.peek(3) == "NUMERAL"]
        if word == '"declare-datatypes"':
            return R.declare_datatypes[self.peek(3) != RP]
        if word == '"push"':
            return R.push[self.peek(2) == "NUMERAL"]
        if word == '"pop"':
            return R.pop[self.peek(2) == "NUMERAL"]
        self.fail(_COMMAND_WORDS | {"SYMBOL"}, self.pos + 1)

    def choose_GenericForm(self) -> int:
        return self.R.generic[self.peek(2) != RP]

    def choose_Attribute(self) -> int:
        if self.peek() != "KEYWORD":
            self.fail({"KEYWORD"})
        return self.R.attribute[self.peek(1) not in ("KEYWORD", RP)]

    def choose_AttributeValue(self) -> int:
        t = self.peek()
        if t in _SPEC:
            return self.R.attr_value["spec"]
        if t == "SYMBOL":
            return self.R.attr_value["SYMBOL"]
        if t == LP:
            return self.R.attr_value["empty" if self.peek(1) == RP else "list"]
        self.fail(_SPEC | {"SYMBOL", LP})

    def choose_SExpr(self) -> int:
        t = self.peek()
        if t in _SPEC:
            return self.R.sexpr["spec"]
        if t in ("SYMBOL", "KEYWORD"):
            return self.R.sexpr[t]
        if t == LP:
            return self.R.sexpr["empty" if self.peek(1) == RP else "list"]
        self.fail(_SPEC | {"SYMBOL", "KEYWORD", LP})

    def choose_SpecConstant(self) -> int:
        t = self.peek()
        if t not in _SPEC:
            self.fail(_SPEC)
        return self.R.spec[t]

    def choose_Identifier(self) -> int:
        t = self.peek()
        if t == "SYMBOL":
            return self.R.identifier[0]
        if t == LP:
            if self.peek(1) == '"_"':
                return self.R.identifier[1]
            self.fail({'"_"'}, self.pos + 1)
        self.fail({"SYMBOL", LP})

    def choose_Index(self) -> int:
        t = self.peek()
        if t not in self.R.index:
            self.fail(set(self.R.index))
        return self.R.index[t]

    def choose_Sort(self) -> int:
        t = self.peek()
        if t == "SYMBOL" or (t == LP and self.peek(1) == '"_"'):
            return self.R.sort[0]
        if t == LP:
            return self.R.sort[1]
        self.fail({"SYMBOL", LP})

    def choose_QualIdentifier(self) -> int:
        t = self.peek()
        if t == "SYMBOL":
            return self.R.qual[0]
        if t == LP:
            nxt = self.peek(1)
            if nxt == '"_"':
                return self.R.qual[1]
            if nxt == '"as"':
                return self.R.qual[2]
            self.fail({'"_"', '"as"'}, self.pos + 1)
        self.fail({"SYMBOL", LP})

    def choose_Term(self) -> int:
        T = self.R.term
        t = self.peek()
        if t in _SPEC:
            return T["spec"]
        if t == "SYMBOL":
            return T["qual"]
        if t == LP:
            nxt = self.peek(1)
            if nxt in ('"_"', '"as"'):
                return T["qual"]
            if nxt in T:
                return T[nxt]
            if nxt in ("SYMBOL", LP):
                return T["app"]
            self.fail({"SYMBOL", LP, '"_"', '"as"', '"let"', '"forall"', '"exists"', '"!"'}, self.pos + 1)
        self.fail(_TERM_FIRST)

    def choose_ConstructorDec(self) -> int:
        return self.R.constructor[self.peek(2) != RP]

    def choose_LegacyConstructor(self) -> int:
        t = self.peek()
        if t == "SYMBOL":
            return self.R.legacy_ctor[0]
        if t == LP:
            return self.R.legacy_ctor[1]
        self.fail({"SYMBOL", LP})


def _start(item) -> int:
    return item.index if isinstance(item, Leaf) else item.span[0]


def parse_program(tokens: list[Token], program_id: str = "") -> ParseTree:
    """Parse a token list into a ``Script`` tree or raise ``SMTSyntaxError``."""
    p = _Parser(tokens)
    root = p.script()
    return ParseTree(root, program_id, tokens)


def parse_source(text: str, program_id: str = "") -> ParseTree:
    return parse_program(tokenize(text), program_id)


def extract_rule_applications(tree: ParseTree) -> list[RuleApplication]:
    """Pre-order list of every internal node's rule, with depth (root 0)."""
    out = []
    stack = [(tree.root, 0)]
    pid = tree.program_id
    while stack:
        node, depth = stack.pop()
        out.append(RuleApplication(node.rule_id, pid, depth, node.span))
        for child in reversed(node.children):
            if isinstance(child, Node):
                stack.append((child, depth + 1))
    return out
