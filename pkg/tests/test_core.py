from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from interview_match import (
    UNMATCHED,
    AgentId,
    FourPointModel,
    FourPointSide,
    InputError,
    Instance,
    InterviewLedger,
    InterviewRecord,
    Matching,
    PreconditionError,
    TwoPointOrderedModel,
    UniformModel,
    applicant as a,
    conduct_interview,
    generate_instance,
    interim_likes,
    interim_prefers,
    interim_utility,
    position as p,
)
from interview_match.core import ceil_log2_times, make_rng


def uniform(n, m):
    return Instance(n, m, UniformModel(n, m))


def test_agent_labels_round_trip():
    assert str(a(0)) == "a1" and str(p(4)) == "p5"
    assert AgentId.parse("p5") == p(4)
    with pytest.raises(InputError):
        AgentId.parse("x1")


def test_interim_utility_after_worked_example_interview(worked_example):
    instance, _ = worked_example
    ledger = InterviewLedger(5, 5)
    conduct_interview(instance, ledger, None, 0, 0)
    assert interim_utility(instance, ledger, a(0), p(0)) == 0.602
    assert interim_utility(instance, ledger, p(0), a(0)) == 0.409
    # reads are idempotent
    assert interim_utility(instance, ledger, a(0), p(0)) == 0.602


def test_empty_ledger_uniform_prior():
    inst = uniform(3, 4)
    ledger = InterviewLedger(3, 4)
    vals = [interim_utility(inst, ledger, a(i), p(j)) for i in range(3) for j in range(4)]
    assert vals == [0.5] * 12


def test_two_point_priors():
    inst = Instance(3, 3, TwoPointOrderedModel(3, 3))
    assert inst.V[0].tolist() == [4, 2, 1]
    assert inst.U[2].tolist() == [4, 2, 1]
    assert float(interim_utility(inst, InterviewLedger(3, 3), a(1), p(0))) == 4.0


def test_interim_prefers_worked_example(worked_example):
    instance, _ = worked_example
    ledger = InterviewLedger(5, 5)
    conduct_interview(instance, ledger, None, 4, 1)
    conduct_interview(instance, ledger, None, 2, 1)
    assert interim_prefers(instance, ledger, p(1), a(4), a(2))
    assert not interim_prefers(instance, ledger, p(1), a(2), a(4))


def test_interim_prefers_unmatched_and_ties():
    inst = uniform(2, 2)
    ledger = InterviewLedger(2, 2)
    assert interim_prefers(inst, ledger, a(0), p(1), UNMATCHED)
    assert not interim_prefers(inst, ledger, a(0), UNMATCHED, p(1))
    assert not interim_prefers(inst, ledger, a(0), p(0), p(1))
    assert not interim_prefers(inst, ledger, a(0), p(1), p(0))
    with pytest.raises(InputError):
        interim_prefers(inst, ledger, a(0), a(1), p(0))


def test_interim_likes_worked_example(worked_example_run):
    instance, result = worked_example_run
    assert interim_likes(instance, result.ledger, a(2), p(1))
    assert not interim_likes(instance, result.ledger, a(4), p(1))
    with pytest.raises(PreconditionError):
        interim_likes(instance, result.ledger, a(3), p(0))


def test_interim_likes_equal_is_false():
    inst = uniform(2, 2)
    ledger = InterviewLedger(2, 2, [InterviewRecord(0, 0, 0.5, 0.5)])
    assert not interim_likes(inst, ledger, a(0), p(0))
    assert not interim_likes(inst, ledger, p(0), a(0))


def test_conduct_interview_fixed_values(worked_example):
    instance, _ = worked_example
    ledger = InterviewLedger(5, 5)
    rec = conduct_interview(instance, ledger, None, 3, 2)
    assert (rec.v, rec.u) == (0.894, 0.889)
    assert (rec.v, rec.u) == (conduct_interview(instance, InterviewLedger(5, 5), None, 3, 2).v, 0.889)
    with pytest.raises(PreconditionError):
        conduct_interview(instance, ledger, None, 3, 2)
    with pytest.raises(PreconditionError):
        conduct_interview(instance, ledger, None, 3, 0)  # no fixed value
    with pytest.raises(InputError):
        conduct_interview(instance, ledger, None, 5, 0)


def test_conduct_interview_uniform_support():
    inst = uniform(2, 2)
    rec = conduct_interview(inst, InterviewLedger(2, 2), make_rng(7), 0, 0)
    assert 0 <= rec.v <= 1 and 0 <= rec.u <= 1


def test_two_point_values_n_m_2():
    inst = Instance(2, 2, TwoPointOrderedModel(2, 2))
    rng = make_rng(3)
    seen_v, seen_u = set(), set()
    for _ in range(200):
        v, u = inst.model.sample(0, 0, rng)
        seen_v.add(v)
        seen_u.add(u)
    assert seen_v == {Fraction(11, 3), Fraction(1, 3)}
    assert seen_u == {Fraction(11, 3), Fraction(1, 3)}


def test_two_point_exact_at_large_m():
    # high value of position j must stay strictly below the prior of position j-1
    model = TwoPointOrderedModel(2, 80)
    high = [model.applicant_quantile(0, j, 0.0) for j in range(80)]
    priors = model.applicant_priors[0]
    assert all(high[j] < priors[j - 1] for j in range(1, 80))
    assert all(high[j] > priors[j] for j in range(80))


def test_model_validation():
    with pytest.raises(InputError):
        UniformModel(1, 3)
    with pytest.raises(InputError):
        UniformModel(2, 2, applicant_center=0.2, applicant_half_width=0.5)
    with pytest.raises(InputError):
        FourPointModel(2, 2, FourPointSide(phi_upper=0.45))  # solved point leaves (prior, high)
    with pytest.raises(InputError):
        FourPointModel(2, 2, applicant_priors=0.7)


def test_four_point_upper_threshold_and_mean():
    model = FourPointModel(2, 2)
    upper, lower = model.applicant_side.points(np.array([0.5]))
    side = model.applicant_side
    mean = (0.5 - side.phi_upper) * side.top + side.phi_upper * upper[0] \
        + side.phi_lower * lower[0] + (0.5 - side.phi_lower) * side.bottom
    assert mean == pytest.approx(0.5)
    assert upper[0] == pytest.approx(0.55)
    assert lower[0] == pytest.approx(0.45)


def test_instance_json_round_trip(worked_example):
    instance, _ = worked_example
    back = Instance.from_json(instance.to_json())
    assert np.array_equal(back.model.v, instance.model.v, equal_nan=True)
    inst = generate_instance("almost-equivalent-4point", 3, 4, {"prior_spread": 0.002}, seed=1)
    back = Instance.from_json(inst.to_json())
    assert np.allclose(back.V, inst.V) and np.allclose(back.U, inst.U)


def test_ledger_rejects_duplicates():
    ledger = InterviewLedger(2, 2, [InterviewRecord(0, 1, 0.3, 0.4)])
    with pytest.raises(PreconditionError):
        ledger.add(InterviewRecord(0, 1, 0.1, 0.1))
    back = InterviewLedger.from_json(ledger.to_json(), 2, 2)
    assert back.pairs() == [(0, 1)]


def test_matching_involution_and_json():
    mu = Matching.from_pairs(3, 3, [(0, 2), (1, 0)])
    assert mu(a(0)) == p(2) and mu(p(2)) == a(0) and mu(a(2)) == a(2)
    assert mu.is_involutive()
    assert mu.size() == 2
    assert Matching.from_json(mu.to_json(), 3, 3) == mu
    with pytest.raises(InputError):
        Matching.from_pairs(3, 3, [(0, 1), (1, 1)])


def test_ceil_log2_times():
    assert ceil_log2_times(2) == 10
    assert ceil_log2_times(128) == 70
    assert ceil_log2_times(100) == 67


@settings(max_examples=60, deadline=None)
@given(st.integers(2, 6), st.integers(2, 6), st.integers(0, 2**32 - 1))
def test_interim_utility_is_prior_or_realised(n, m, seed):
    inst = uniform(n, m)
    ledger = InterviewLedger(n, m)
    rng = make_rng(seed)
    pairs = [(i, j) for i in range(n) for j in range(m)]
    for k in rng.permutation(len(pairs))[: len(pairs) // 2]:
        conduct_interview(inst, ledger, rng, *pairs[k])
    for i, j in pairs:
        rec = ledger.get(i, j)
        want = (rec.v, rec.u) if rec else (0.5, 0.5)
        assert interim_utility(inst, ledger, a(i), p(j)) == want[0]
        assert interim_utility(inst, ledger, p(j), a(i)) == want[1]
