"""PCFG-based uncertainty metrics for ensembles of LLM-generated SMT-LIB programs."""

from .errors import SmtPcfgError
from .grammar import ConcreteGrammar, smt_grammar
from .metrics import MetricVector, metric_vector
from .parser import ParseTree, extract_rule_applications, parse_program, parse_source
from .pcfg import EstimationMethod, Pcfg, count_rules, estimate, mean_matrix, spectral_radius
from .tokens import BACKEND, Token, TokenKind, tokenize

__version__ = "0.1.0"

__all__ = [
    "BACKEND",
    "ConcreteGrammar",
    "EstimationMethod",
    "MetricVector",
    "ParseTree",
    "Pcfg",
    "SmtPcfgError",
    "Token",
    "TokenKind",
    "count_rules",
    "estimate",
    "extract_rule_applications",
    "mean_matrix",
    "metric_vector",
    "parse_program",
    "parse_source",
    "smt_grammar",
    "spectral_radius",
    "tokenize",
]
