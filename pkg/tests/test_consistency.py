import pytest
from hypothesis import given, strategies as st

from smtpcfg.consistency import (
    AnswerLabel,
    Polarity,
    SampleAnswers,
    Verdict,
    correctness_labels,
    majority_vote,
    map_verdict,
    self_consistency,
)
from smtpcfg.errors import AllMissing

T, F, U = AnswerLabel.TRUE, AnswerLabel.FALSE, AnswerLabel.UNKNOWN


def test_map_verdict():
    assert map_verdict("sat") is T
    assert map_verdict("unsat", Polarity.NEGATED) is T
    assert map_verdict(Verdict.UNKNOWN) is U
    assert map_verdict("error") is None and map_verdict("timeout") is None and map_verdict(None) is None


@pytest.mark.parametrize("v", ["sat", "unsat"])
def test_negation_swaps(v):
    assert {map_verdict(v), map_verdict(v, Polarity.NEGATED)} == {T, F}


def test_majority_vote():
    assert majority_vote([T, T, T, F, F]) == (T, 0.6, 5)
    assert majority_vote([T, T, T]) == (T, 1.0, 3)
    assert majority_vote([T, F]) == (U, 0.5, 2)


def test_missing_ignored():
    assert majority_vote([None, F, None]) == (F, 1.0, 1)


def test_self_consistency():
    assert self_consistency([F] * 5) == 1.0
    assert self_consistency([T, T, F, F, F]) == 0.6
    with pytest.raises(AllMissing):
        self_consistency([None, None])


def test_correctness_labels():
    assert correctness_labels(SampleAnswers("q", [T], [T], T)).smt_vs_ground_truth
    assert not correctness_labels(SampleAnswers("q", [T], [F], F)).smt_text_consistent
    got = correctness_labels(SampleAnswers("q", [T, F, F], [T, T, F], F))
    assert (got.smt_vs_ground_truth, got.smt_text_consistent) == (False, False)


def test_unknown_is_its_own_label():
    # tied SMT answers yield Unknown, which does not match a True ground truth
    assert not correctness_labels(SampleAnswers("q", [U], [T, F], T)).smt_vs_ground_truth
    assert correctness_labels(SampleAnswers("q", [U], [T, F], T)).smt_text_consistent


def test_label_parsing():
    assert AnswerLabel.parse(True) is T and AnswerLabel.parse("unknown") is U
    with pytest.raises(ValueError):
        AnswerLabel.parse("maybe")


_answers = st.lists(st.sampled_from([T, F, U, None]), min_size=1, max_size=15).filter(lambda a: any(a))


@given(_answers, st.randoms())
def test_permutation_invariance(ans, r):
    shuffled = list(ans)
    r.shuffle(shuffled)
    assert majority_vote(ans) == majority_vote(shuffled)


@given(_answers)
def test_agreement_range(ans):
    v = majority_vote(ans)
    assert 1 / v.valid_count <= v.agreement <= 1
