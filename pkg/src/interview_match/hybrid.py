"""Hybrid adaptive interviewing: parallel rounds, sequential completion, fallback.

Also hosts the fully parallel experimental variant, which schedules every
unmatched applicant each round.  That variant carries no stability guarantee
beyond what its final fallback provides.
"""
from __future__ import annotations

import enum
from typing import Iterable, Optional

import numpy as np

from .bipartite import maximum_matching
from .core import (
    Instance,
    InterviewLedger,
    MarketState,
    Matching,
    RejectionSet,
    RunResult,
    UnsupportedConfiguration,
    ceil_log2_times,
    make_rng,
)
from .da import applicant_proposing_da, interim_profile, truncated_da_state
from .sequential import TieBreak, almost_ceiling, sequential_loop


class Variant(enum.Enum):
    HYBRID = "hybrid"
    FULLY_PARALLEL = "fully-parallel"


def hybrid_parameters(n: int, m: int) -> tuple[int, int]:
    """Return ``(k, size of the parallel applicant set)`` for an n x m market."""
    k = max(ceil_log2_times(n), m - n + 1)
    return k, max(0, min(n, m - (k - 1)))


# ------------------------------------------------------------ batch selection


def _batch_edges(
    state: MarketState, eligible: Iterable[int], ceiling: Optional[float]
) -> dict[int, list[int]]:
    free = state.matching.position_partner < 0
    edges = {}
    for i in eligible:
        top = state.top_positions(int(i), ceiling)
        ok = top[free[top] & ~state.ledger.interviewed[i, top]]
        edges[int(i)] = ok.tolist()
    return edges


def pick_batch(
    state: MarketState, eligible: Iterable[int], ceiling: Optional[float] = None
) -> list[tuple[int, int]]:
    """Maximum matching between eligible applicants and free, not-yet-met top positions."""
    pairs = maximum_matching(_batch_edges(state, eligible, ceiling))
    return sorted(pairs.items())


def pick_next_interviews(
    instance: Instance,
    ledger: InterviewLedger,
    matching: Matching,
    rejections: RejectionSet,
    eligible_applicants: Iterable[int],
    almost_equivalent: bool | float = False,
) -> list[tuple[int, int]]:
    """Choose one round of simultaneous interviews.

    Each eligible applicant may be paired with a free position among her most
    preferred non-rejecting positions that she has not met; the batch is a
    maximum matching of that graph, sorted by applicant.
    """
    state = MarketState(instance, ledger, matching, rejections)
    return pick_batch(state, eligible_applicants, almost_ceiling(instance, almost_equivalent))


# --------------------------------------------------------------- fallback


def all_interviews_state(state: MarketState, phase: Optional[int] = 3) -> None:
    """Interview every remaining pair in m rounds of disjoint cyclic shifts."""
    n, m = state.n, state.m
    if m < n:
        raise UnsupportedConfiguration(f"all-interviews schedule needs m >= n (n={n}, m={m})")
    for shift in range(m):
        state.round += 1
        state.metrics.total_rounds += 1
        state.metrics.phase3_rounds += 1
        for i in range(n):
            j = (i + shift) % m
            if not state.ledger.interviewed[i, j]:
                rec = state.interview(i, j)
                state.emit(kind="interview", applicant=i + 1, position=j + 1,
                           v=float(rec.v), u=float(rec.u), round=state.round, phase=phase)


def all_interviews(
    instance: Instance, ledger: InterviewLedger, rng: Optional[np.random.Generator] = None
) -> tuple[InterviewLedger, int]:
    """Complete ``ledger`` to all n*m pairs; returns the new ledger and the rounds used (m)."""
    state = MarketState(instance, ledger.copy(), rng=rng)
    all_interviews_state(state)
    return state.ledger, state.metrics.phase3_rounds


def _fallback(state: MarketState) -> None:
    state.metrics.fallback_triggered = True
    state.metrics.phase_boundaries.append(state.round)
    all_interviews_state(state)
    state.rejections = RejectionSet(state.n, state.m)
    mu = applicant_proposing_da(interim_profile(state), None, state.rejections, state.trace)
    state.sync_matching(mu)


# ------------------------------------------------------------------- engines


def _conduct(state: MarketState, batch: list[tuple[int, int]], phase: int) -> None:
    state.round += 1
    state.metrics.total_rounds += 1
    if phase == 1:
        state.metrics.phase1_rounds += 1
    for i, j in batch:
        rec = state.interview(i, j)
        state.emit(kind="interview", applicant=i + 1, position=j + 1,
                   v=float(rec.v), u=float(rec.u), round=state.round, phase=phase)


def _hybrid(state: MarketState, ceiling: Optional[float], tie_break: TieBreak) -> None:
    n, m = state.n, state.m
    _, size = hybrid_parameters(n, m)
    parallel_set = np.arange(size)
    while True:
        eligible = state.active_applicants(parallel_set)
        if eligible.size == 0:
            break
        state.metrics.iterations += 1
        batch = pick_batch(state, eligible, ceiling)
        if len(batch) != eligible.size or not batch:
            _fallback(state)
            return
        _conduct(state, batch, phase=1)
        truncated_da_state(state)
    state.metrics.phase_boundaries.append(state.round)
    before = state.round
    sequential_loop(state, tie_break, ceiling, phase=2)
    state.metrics.phase2_rounds = state.round - before


def _fully_parallel_edges(
    state: MarketState, ceiling: Optional[float]
) -> tuple[dict[int, list[int]], bool]:
    """Edges for every active applicant; rejects without interview where the
    position already holds someone it weakly prefers.  Returns (edges, any rejection)."""
    rejected = False
    edges: dict[int, list[int]] = {}
    for i in state.active_applicants():
        i = int(i)
        while True:
            top = state.top_positions(i, ceiling)
            if top.size == 0:
                break
            fresh = top[~state.ledger.interviewed[i, top]]
            if fresh.size == 0:
                break
            willing = [int(j) for j in fresh if state.position_prefers(int(j), i)]
            if willing:
                edges[i] = willing
                break
            for j in fresh:
                state.rejections.add(i, int(j))
                state.emit(kind="reject_without_interview", applicant=i + 1,
                           position=int(j) + 1, phase=1)
            rejected = True
    return edges, rejected


def _prioritised_batch(state: MarketState, edges: dict[int, list[int]]) -> list[tuple[int, int]]:
    """Maximum matching that first covers free positions, then positions whose
    tentative match they do not interim like, then any other willing position."""
    partner = state.matching.position_partner
    U = state.instance.U

    def tier(j: int) -> int:
        cur = partner[j]
        if cur < 0:
            return 0
        return 1 if not state.pos_util[j, cur] > U[j, cur] else 2

    current: dict[int, int] = {}
    for level in (0, 1, 2):
        sub = {i: [j for j in js if tier(j) <= level] for i, js in edges.items()}
        current = maximum_matching(sub, current or None)
    return sorted(current.items())


def _fully_parallel(state: MarketState, ceiling: Optional[float]) -> None:
    if state.m < state.n:
        raise UnsupportedConfiguration("the fully parallel variant needs m >= n")
    while True:
        if state.active_applicants().size == 0:
            return
        state.metrics.iterations += 1
        before_matching = state.matching.copy()
        before_rejections = len(state.rejections)
        edges, _ = _fully_parallel_edges(state, ceiling)
        batch = _prioritised_batch(state, edges) if edges else []
        if batch:
            _conduct(state, batch, phase=1)
        truncated_da_state(state)
        if not batch and state.matching == before_matching and len(state.rejections) == before_rejections:
            _fallback(state)
            return


def run_hybrid(
    instance: Instance,
    seed: Optional[int] = None,
    *,
    rng: Optional[np.random.Generator] = None,
    variant: Variant | str = Variant.HYBRID,
    tie_break: TieBreak | str = TieBreak.LOWEST_MATCH_VALUE,
    almost_equivalent: bool | float = False,
    trace: bool = False,
) -> RunResult:
    """Hybrid adaptive algorithm (or the fully parallel variant).

    Phase 1 runs parallel rounds for the first ``min(n, m - k + 1)``
    applicants, ``k = max(ceil(10 log2 n), m - n + 1)``, each round followed
    by truncated DA.  Phase 2 finishes sequentially from that state.  If a
    round cannot give every eligible applicant an interview, all remaining
    pairs are interviewed (m rounds) and full-information DA decides.

    Raises:
        UnsupportedConfiguration: when ``m < n``.
    """
    if instance.m < instance.n:
        raise UnsupportedConfiguration(
            f"hybrid algorithm requires m >= n (n={instance.n}, m={instance.m})"
        )
    state = MarketState(instance, rng=rng if rng is not None else make_rng(seed), record_trace=trace)
    ceiling = almost_ceiling(instance, almost_equivalent)
    if Variant(variant) is Variant.HYBRID:
        _hybrid(state, ceiling, TieBreak(tie_break))
    else:
        _fully_parallel(state, ceiling)
    return state.finish()
