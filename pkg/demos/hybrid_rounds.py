"""
Parallel interview rounds
=========================

With a few more positions than applicants the hybrid algorithm schedules
interviews in parallel rounds, and the round count barely grows with n.
The fully parallel variant schedules every unmatched applicant in each round
even when n = m.
"""
import math

from interview_match import Instance, UniformModel, run_hybrid
from interview_match.core import ceil_log2_times
from interview_match.harness import ExperimentConfig, run_experiment

print("hybrid, m = n + ceil(10 log2 n)")
stats = run_experiment(ExperimentConfig("hybrid-rounds", n_values=[16, 32, 64, 128], trials=30))
for e in stats.per_n:
    print(f"  n={e['n']:>4} m={e['m']:>4}  rounds {e['rounds']['mean']:6.2f}"
          f"  (4 + log2 n = {4 + math.log2(e['n']):.1f})  fallback rate {e['fallback_rate']:.2f}")

print("\nfully parallel, m = n")
stats = run_experiment(ExperimentConfig("fully-parallel-rounds", n_values=[16, 64, 256], trials=20))
for e in stats.per_n:
    print(f"  n={e['n']:>4}  rounds {e['rounds']['mean']:6.2f}  stable {e['stability_pass_rate']:.2f}")

# %%
# One run in detail: where the phases begin and end.
n = 128
inst = Instance(n, n + ceil_log2_times(n), UniformModel(n, n + ceil_log2_times(n)))
res = run_hybrid(inst, seed=1)
m = res.metrics
print(f"\none run: {m.phase1_rounds} parallel rounds, {m.phase2_rounds} sequential interviews,"
      f" busiest agent had {m.max_agent_interviews} interviews")
