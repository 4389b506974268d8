import pytest

from interview_match import InterviewLedger, run_sequential
from interview_match.harness import load_fixture


@pytest.fixture
def worked_example():
    instance, expected = load_fixture("d1")
    return instance, expected


@pytest.fixture
def worked_example_run(worked_example):
    instance, _ = worked_example
    return instance, run_sequential(instance, trace=True)


@pytest.fixture
def worked_example_ledger(worked_example_run) -> InterviewLedger:
    return worked_example_run[1].ledger
