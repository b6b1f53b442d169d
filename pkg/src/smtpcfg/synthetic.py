"""Seeded synthetic corpora: random SMT-LIB programs whose diversity is controlled per question."""

from __future__ import annotations

from typing import Optional, Sequence

import numpy as np

from .consistency import AnswerLabel, Verdict
from .corpus import CorpusRecord, SampleRecord

_INT_OPS = ("+", "-", "*")
_CMP_OPS = ("<", "<=", ">", ">=", "=")
_BOOL_OPS = ("and", "or", "=>")


class ProgramGenerator:
    def __init__(self, rng: np.random.Generator, n_vars: int = 3):
        self.rng = rng
        self.vars = [f"x{i}" for i in range(n_vars)]

    def _pick(self, seq):
        return seq[int(self.rng.integers(len(seq)))]

    def int_term(self, depth: int) -> str:
        if depth <= 0 or self.rng.random() < 0.3:
            if self.rng.random() < 0.6:
                return self._pick(self.vars)
            return str(int(self.rng.integers(0, 20)))
        op = self._pick(_INT_OPS)
        k = int(self.rng.integers(2, 4))
        return f"({op} {' '.join(self.int_term(depth - 1) for _ in range(k))})"

    def bool_term(self, depth: int) -> str:
        r = self.rng.random()
        if depth <= 0 or r < 0.4:
            return f"({self._pick(_CMP_OPS)} {self.int_term(depth - 1)} {self.int_term(depth - 1)})"
        if r < 0.7:
            op = self._pick(_BOOL_OPS)
            return f"({op} {self.bool_term(depth - 1)} {self.bool_term(depth - 1)})"
        if r < 0.8:
            return f"(not {self.bool_term(depth - 1)})"
        if r < 0.9:
            return f"(let ((y {self.int_term(depth - 1)})) (> y {self.int_term(0)}))"
        return f"(forall ((z Int)) (=> (> z 0) {self.bool_term(depth - 1)}))"

    def program(self, depth: int, n_asserts: int) -> str:
        lines = [f"(declare-const {v} Int)" for v in self.vars]
        lines += [f"(assert {self.bool_term(depth)})" for _ in range(n_asserts)]
        lines.append("(check-sat)")
        return "\n".join(lines)


CANONICAL = "(declare-const x0 Int)\n(assert (> x0 1))\n(check-sat)"


def _flip(label: AnswerLabel) -> AnswerLabel:
    return AnswerLabel.FALSE if label is AnswerLabel.TRUE else AnswerLabel.TRUE


def _to_verdict(label: AnswerLabel) -> Verdict:
    return Verdict.SAT if label is AnswerLabel.TRUE else Verdict.UNSAT


def make_question(
    qid: str,
    diversity: float,
    incorrect: bool,
    rng: np.random.Generator,
    n_samples: int = 8,
    temperatures: Sequence[float] = (),
    dataset: str = "synthetic",
    tokens: bool = True,
) -> CorpusRecord:
    """One question whose programs copy a fixed canonical program with probability ``1 - diversity``.

    ``incorrect`` questions get a wrong SMT majority and a text majority that
    mostly agrees with it.
    """
    truth = AnswerLabel.TRUE if rng.random() < 0.5 else AnswerLabel.FALSE
    wrong = _flip(truth)
    gen = ProgramGenerator(rng)
    samples = []
    for k in range(n_samples):
        if rng.random() < diversity:
            prog = gen.program(depth=1 + int(rng.integers(0, 4)), n_asserts=1 + int(rng.integers(0, 3)))
        else:
            prog = CANONICAL
        majority = wrong if incorrect else truth
        smt = majority if k < n_samples // 2 + 1 or rng.random() < 0.5 else _flip(majority)
        text = majority if rng.random() < 0.8 else _flip(majority)
        temp = float(temperatures[k % len(temperatures)]) if temperatures else None
        lps = topk = None
        if tokens:
            # noisier token distributions for more diverse questions
            lps = (-rng.exponential(0.1 + diversity, size=12)).round(6).tolist()
            topk = []
            for _ in range(12):
                d = rng.dirichlet(np.full(3, 0.5 + 2 * diversity)) * 0.95
                topk.append(d.round(6).tolist())
        samples.append(SampleRecord(f"{qid}-s{k}", prog, temp, text, _to_verdict(smt), lps, topk))
    return CorpusRecord(qid, dataset, truth, samples)


def make_corpus(
    n_questions: int = 40,
    n_samples: int = 8,
    seed: int = 0,
    temperatures: Sequence[float] = (),
    unparseable: Optional[int] = None,
) -> list[CorpusRecord]:
    """Corpus where the chance of an incorrect answer grows with program diversity.

    ``unparseable`` names a question index whose programs are all malformed.
    """
    rng = np.random.default_rng(seed)
    records = []
    for q in range(n_questions):
        diversity = float(rng.uniform(0.0, 1.0))
        incorrect = bool(rng.random() < 0.15 + 0.7 * diversity)
        rec = make_question(f"q{q:04d}", diversity, incorrect, rng, n_samples, temperatures)
        if q == unparseable:
            for s in rec.samples:
                s.smt_program = "(assert (> x 1)"
        records.append(rec)
    return records
