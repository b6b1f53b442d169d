import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

from smtpcfg.grammar import ConcreteGrammar
from smtpcfg.pcfg import EstimationMethod, Pcfg, RuleCounts


def toy_pcfg(rules, probs, support=None):
    """Pcfg over an explicit rule list with given probabilities."""
    g = ConcreteGrammar.from_rules(rules)
    prob = np.asarray(probs, dtype=float)
    counts = RuleCounts(g, np.ones(len(rules), dtype=np.int64))
    sup = frozenset(range(len(rules))) if support is None else frozenset(support)
    return Pcfg(g, prob, EstimationMethod.mle(), sup, counts=counts)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def pytest_terminal_summary(terminalreporter):
    mod = sys.modules.get("test_acceptance")
    if mod is None or not mod.RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(mod.RESULTS):
        terminalreporter.write_line(mod.RESULTS[n])
