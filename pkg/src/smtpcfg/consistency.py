"""Agreement scores over sampled text answers and solver-derived answers."""

from __future__ import annotations

import enum
from collections import Counter
from dataclasses import dataclass, field
from typing import NamedTuple, Optional, Sequence

from .errors import AllMissing


class AnswerLabel(enum.Enum):
    TRUE = "True"
    FALSE = "False"
    UNKNOWN = "Unknown"

    @classmethod
    def parse(cls, value) -> "AnswerLabel":
        """Accept JSON booleans or case-insensitive ``true``/``false``/``unknown``."""
        if isinstance(value, AnswerLabel):
            return value
        if isinstance(value, bool):
            return cls.TRUE if value else cls.FALSE
        if isinstance(value, str):
            key = value.strip().lower()
            for label in cls:
                if label.value.lower() == key:
                    return label
        raise ValueError(f"not an answer label: {value!r}")


class Verdict(enum.Enum):
    SAT = "sat"
    UNSAT = "unsat"
    UNKNOWN = "unknown"
    ERROR = "error"
    TIMEOUT = "timeout"


class Polarity(enum.Enum):
    DIRECT = "direct"
    NEGATED = "negated"  # the program asserts the negated conjecture


def map_verdict(verdict: Verdict | str | None, polarity: Polarity = Polarity.DIRECT) -> Optional[AnswerLabel]:
    if verdict is None:
        return None
    v = Verdict(verdict)
    if v is Verdict.UNKNOWN:
        return AnswerLabel.UNKNOWN
    if v in (Verdict.ERROR, Verdict.TIMEOUT):
        return None
    is_sat = v is Verdict.SAT
    if polarity is Polarity.NEGATED:
        is_sat = not is_sat
    return AnswerLabel.TRUE if is_sat else AnswerLabel.FALSE


class Vote(NamedTuple):
    winner: AnswerLabel
    agreement: float
    valid_count: int


def majority_vote(answers: Sequence[Optional[AnswerLabel]]) -> Vote:
    """Most frequent non-missing label; ties go to ``UNKNOWN``."""
    valid = [a for a in answers if a is not None]
    if not valid:
        raise AllMissing("no non-missing answers to vote on")
    ranked = Counter(valid).most_common()
    top = ranked[0][1]
    tied = [label for label, c in ranked if c == top]
    winner = tied[0] if len(tied) == 1 else AnswerLabel.UNKNOWN
    return Vote(winner, top / len(valid), len(valid))


def self_consistency(answers: Sequence[Optional[AnswerLabel]]) -> float:
    return majority_vote(answers).agreement


@dataclass
class SampleAnswers:
    question_id: str
    text_answers: list[Optional[AnswerLabel]] = field(default_factory=list)
    smt_answers: list[Optional[AnswerLabel]] = field(default_factory=list)
    ground_truth: AnswerLabel = AnswerLabel.UNKNOWN


@dataclass(frozen=True)
class CorrectnessLabels:
    smt_vs_ground_truth: bool
    smt_text_consistent: bool


def correctness_labels(sample: SampleAnswers) -> CorrectnessLabels:
    smt = majority_vote(sample.smt_answers).winner
    text = majority_vote(sample.text_answers).winner
    return CorrectnessLabels(smt == sample.ground_truth, smt == text)
