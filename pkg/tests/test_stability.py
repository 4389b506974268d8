import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from interview_match import (
    Instance,
    InterviewLedger,
    InterviewRecord,
    Matching,
    PreconditionError,
    UniformModel,
    all_applicants_like_match,
    check_interim_stability,
    decoupled_da,
    run_hybrid,
    run_sequential,
)
from interview_match.core import interim_prefers, applicant, position, UNMATCHED


def bilateral(n, m):
    return Instance(n, m, UniformModel(n, m))


def test_worked_example_output_is_stable(worked_example, worked_example_run):
    instance, result = worked_example_run
    report = check_interim_stability(instance, result.ledger, result.matching)
    assert report.is_interim_stable
    assert report.uninterviewed_matched_pairs == [] and report.blocking_pairs == []


def test_worked_example_applicant_optimal_is_unstable(worked_example, worked_example_ledger):
    instance, expected = worked_example
    mu_a = Matching.from_json(expected["decoupled_full_interim"], 5, 5)
    report = check_interim_stability(instance, worked_example_ledger, mu_a)
    assert not report.is_interim_stable
    assert (4, 3) in report.uninterviewed_matched_pairs
    assert report.to_json()["uninterviewed_matched_pairs"] == [[5, 4]]


def test_empty_everything_blocks_everywhere():
    inst = bilateral(3, 2)
    report = check_interim_stability(inst, InterviewLedger(3, 2), Matching(3, 2))
    assert not report.is_interim_stable
    assert sorted(report.blocking_pairs) == [(i, j) for i in range(3) for j in range(2)]


def test_decoupled_full_interim_worked_example(worked_example, worked_example_ledger):
    instance, expected = worked_example
    mu, report = decoupled_da(instance, worked_example_ledger, "full-interim")
    assert mu.to_json()["pairs"] == expected["decoupled_full_interim"]["pairs"]
    assert not report.is_interim_stable


def test_all_like_match_cases(worked_example, worked_example_run):
    instance, result = worked_example_run
    assert not all_applicants_like_match(instance, result.ledger, result.matching)
    inst = bilateral(2, 2)
    ledger = InterviewLedger(2, 2, [InterviewRecord(0, 1, 0.7, 0.1), InterviewRecord(1, 0, 0.6, 0.2)])
    assert all_applicants_like_match(inst, ledger, Matching.from_pairs(2, 2, [(0, 1), (1, 0)]))
    assert all_applicants_like_match(inst, ledger, Matching(2, 2))
    with pytest.raises(PreconditionError):
        all_applicants_like_match(inst, ledger, Matching.from_pairs(2, 2, [(0, 0)]))


def brute_report(inst, ledger, mu):
    """Blocking pairs by direct use of interim_prefers on every pair."""
    unmet = [(i, j) for i, j in mu.pairs() if (i, j) not in ledger]
    blocking = []
    for i in range(inst.n):
        for j in range(inst.m):
            if mu.applicant_partner[i] == j:
                continue
            cur_j = mu.applicant_partner[i]
            cur_i = mu.position_partner[j]
            a_cur = UNMATCHED if cur_j < 0 else position(int(cur_j))
            p_cur = UNMATCHED if cur_i < 0 else applicant(int(cur_i))
            if interim_prefers(inst, ledger, applicant(i), position(j), a_cur) and \
                    interim_prefers(inst, ledger, position(j), applicant(i), p_cur):
                blocking.append((i, j))
    return unmet, blocking


@settings(max_examples=100, deadline=None)
@given(st.integers(2, 6), st.integers(2, 6), st.integers(0, 2**32 - 1))
def test_checker_matches_pairwise_definition(n, m, seed):
    rng = np.random.default_rng(seed)
    inst = bilateral(n, m)
    recs = [InterviewRecord(i, j, float(rng.random()), float(rng.random()))
            for i in range(n) for j in range(m) if rng.random() < 0.5]
    ledger = InterviewLedger(n, m, recs)
    perm = rng.permutation(m)
    pairs = [(i, int(perm[i])) for i in range(min(n, m)) if rng.random() < 0.7]
    mu = Matching.from_pairs(n, m, pairs)
    report = check_interim_stability(inst, ledger, mu)
    unmet, blocking = brute_report(inst, ledger, mu)
    assert report.uninterviewed_matched_pairs == unmet
    assert sorted(report.blocking_pairs) == sorted(blocking)
    assert report.is_interim_stable == (not unmet and not blocking)


@settings(max_examples=60, deadline=None)
@given(st.integers(2, 30), st.integers(0, 2**32 - 1), st.sampled_from(["sequential", "hybrid"]))
def test_decoupling_holds_when_everyone_likes_their_match(n, seed, algorithm):
    inst = bilateral(n, n)
    run = run_sequential if algorithm == "sequential" else run_hybrid
    res = run(inst, seed)
    if all_applicants_like_match(inst, res.ledger, res.matching):
        _, report = decoupled_da(inst, res.ledger, "realized-only")
        assert report.is_interim_stable
