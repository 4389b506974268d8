import json

import numpy as np
import pytest

from interview_match import InputError, InterviewLedger, conduct_interview, generate_instance
from interview_match.harness import (
    CSV_COLUMNS,
    ExperimentConfig,
    replay,
    rows_to_csv,
    run_experiment,
    run_trial,
)


def test_bilateral_priors():
    inst = generate_instance("bilateral-uniform", 5, 5)
    assert np.all(inst.V == 0.5) and np.all(inst.U == 0.5)
    assert inst.V.size + inst.U.size == 50


def test_two_point_position_priors():
    inst = generate_instance("two-point-ordered", 3, 3)
    for j in range(3):
        assert [float(x) for x in inst.U[j]] == [4.0, 2.0, 1.0]


def test_fixture_instance_values():
    inst = generate_instance("fixed-matrices", 5, 5, {"fixture": "d1"})
    rec = conduct_interview(inst, InterviewLedger(5, 5), None, 0, 0)
    assert (rec.v, rec.u) == (0.602, 0.409)
    with pytest.raises(InputError):
        generate_instance("fixed-matrices", 4, 5, {"fixture": "d1"})


def test_generation_is_deterministic():
    params = {"applicant_center_range": [0.25, 0.75], "applicant_half_width": 0.25}
    a = generate_instance("bilateral-uniform", 4, 6, params, seed=3)
    b = generate_instance("bilateral-uniform", 4, 6, params, seed=3)
    c = generate_instance("bilateral-uniform", 4, 6, params, seed=4)
    assert np.array_equal(a.V, b.V) and not np.array_equal(a.V, c.V)
    assert np.all(a.U == 0.5)
    assert np.all((a.V >= 0.25) & (a.V <= 0.75))


def test_invalid_generator_arguments():
    with pytest.raises(InputError):
        generate_instance("almost-equivalent-4point", 3, 3, {"applicants": {"phi_upper": 0.45}})
    with pytest.raises(InputError):
        generate_instance("nonsense", 3, 3)


def test_config_validation():
    with pytest.raises(InputError):
        ExperimentConfig("fig3-bilateral", trials=0)
    with pytest.raises(InputError):
        ExperimentConfig("fig3-bilateral", n_values=[10], m_rule=[5], algorithm="hybrid")
    with pytest.raises(InputError):
        ExperimentConfig("fig3-bilateral", n_values=[10, 20], m_rule=[12])
    cfg = ExperimentConfig("hybrid-rounds")
    assert cfg.m_rule == "n-plus-10logn" and cfg.algorithm.value == "hybrid" and cfg.trials == 100


def test_csv_schema_and_reproducibility(tmp_path):
    out = tmp_path / "run.csv"
    cfg = ExperimentConfig("fig3-bilateral", n_values=[6, 9], trials=5, base_seed=11, output_path=out)
    stats = run_experiment(cfg)
    text = out.read_text()
    assert text.splitlines()[0] == ",".join(CSV_COLUMNS)
    assert len(text.splitlines()) == 11
    again = run_experiment(ExperimentConfig("fig3-bilateral", n_values=[6, 9], trials=5, base_seed=11))
    assert rows_to_csv(again.rows) == text
    parallel = run_experiment(ExperimentConfig("fig3-bilateral", n_values=[6, 9], trials=5,
                                               base_seed=11, workers=2))
    assert rows_to_csv(parallel.rows) == text
    summary = json.loads(out.with_suffix(".json").read_text())
    assert summary["stability_pass_rate"] == 1.0
    assert [e["trials"] for e in summary["per_n"]] == [5, 5]
    assert stats.for_n(9)["m"] == 9


def test_trial_result_independent_of_order():
    cfg = ExperimentConfig("fig3-bilateral", n_values=[8], trials=6, base_seed=2)
    rows = run_experiment(cfg).rows
    assert run_trial(cfg, 8, 8, 4) == rows[4]
    assert rows[4]["seed"] == 6


def test_rates_are_fractions():
    stats = run_experiment(ExperimentConfig("hybrid-rounds", n_values=[16], trials=10))
    entry = stats.for_n(16)
    for key in ("stability_pass_rate", "fallback_rate", "decoupling_premise_rate"):
        assert 0.0 <= entry[key] <= 1.0
    assert entry["m"] == 16 + 40


def test_bilateral_n100_mean_near_two():
    stats = run_experiment(ExperimentConfig("fig3-bilateral", n_values=[100], trials=100))
    assert 1.7 <= stats.for_n(100)["interviews_per_applicant"]["mean"] <= 2.4


def test_worked_example_replay_experiment():
    out = replay()
    assert out["ok"], out["checks"]
    assert not out["decoupled_full_interim_stability"]["is_interim_stable"]
    assert out["trace"][0] == {"kind": "interview", "applicant": 1, "position": 1,
                               "v": 0.602, "u": 0.409, "round": 1, "iter": 1}


def test_lower_bound_experiment():
    stats = run_experiment(ExperimentConfig("lower-bound"))
    assert stats.for_n(5)["total_interviews"]["max"] > 8
    assert stats.stability_pass_rate == 1.0
