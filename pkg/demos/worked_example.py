"""
A 5x5 market, interview by interview
====================================

Five applicants, five positions, every prior equal to 0.5 and the realised
values fixed in advance.  We watch the sequential algorithm decide who
interviews whom, then show why running DA on the same interviews after the
fact is not enough.
"""
from interview_match import check_interim_stability, decoupled_da, run_sequential
from interview_match.harness import load_fixture

instance, expected = load_fixture("d1")

# Run with a trace so every interview and proposal is recorded.
result = run_sequential(instance, trace=True)

for event in result.trace:
    who = f"a{event['applicant']} / p{event['position']}"
    if event["kind"] == "interview":
        print(f"round {event['round']:>2}: interview {who}  v={event['v']:.3f} u={event['u']:.3f}")
    elif event["kind"] == "proposal_accept":
        bumped = f" (a{event['displaced']} displaced)" if event["displaced"] else ""
        print(f"          accept    {who}{bumped}")
    else:
        print(f"          reject    {who}")

print("\nfinal matching:", result.matching)
print("interviews:", result.metrics.total_interviews)
print("interim stable:", check_interim_stability(instance, result.ledger, result.matching).is_interim_stable)

# %%
# Now forget the adaptive order and run DA on everyone's interim utilities.
# Applicant-optimal DA happily matches a pair that never met.
mu_a, report = decoupled_da(instance, result.ledger, "full-interim")
print("\nDA on interim utilities:", mu_a)
print("interim stable:", report.is_interim_stable)
print("matched without an interview:", [(f"a{i + 1}", f"p{j + 1}") for i, j in report.uninterviewed_matched_pairs])
