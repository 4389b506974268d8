"""
How many interviews does each applicant need?
=============================================

Values on both sides are uniform on [0, 1].  We sweep the market size and
count interviews per applicant for the sequential and the hybrid algorithm.
The average settles near two as the market grows.
"""
import numpy as np

from interview_match.harness import ExperimentConfig, run_experiment

sizes = [10, 25, 50, 100, 200]
trials = 50

print(f"{'n':>5} {'sequential':>12} {'hybrid':>12}")
results = {}
for algorithm in ("sequential", "hybrid"):
    stats = run_experiment(ExperimentConfig("fig3-bilateral", n_values=sizes, trials=trials, algorithm=algorithm))
    results[algorithm] = [e["interviews_per_applicant"]["mean"] for e in stats.per_n]

for k, n in enumerate(sizes):
    print(f"{n:>5} {results['sequential'][k]:>12.3f} {results['hybrid'][k]:>12.3f}")

# %%
# The spread shrinks too: look at single runs at the largest size.
per_trial = [r["interviews_per_applicant"] for r in
             run_experiment(ExperimentConfig("fig3-bilateral", n_values=[200], trials=trials)).rows]
print(f"\nn=200 single runs: min {np.min(per_trial):.3f}, max {np.max(per_trial):.3f}")
