"""Applicant-proposing deferred acceptance and its truncated-interim variant."""
from __future__ import annotations

import heapq
from dataclasses import dataclass
from typing import Callable, Optional, Sequence, Union

import numpy as np

from .core import (
    Instance,
    InterviewLedger,
    MarketState,
    Matching,
    RejectionSet,
    preference_order,
)

Orders = Union[Sequence[Sequence[int]], "LazyOrders"]


class LazyOrders:
    """Applicant orders computed on first access (only proposers need them)."""

    def __init__(self, n: int, build: Callable[[int], list[int]]):
        self._n = n
        self._build = build
        self._cache: dict[int, list[int]] = {}

    def __len__(self) -> int:
        return self._n

    def __getitem__(self, i: int) -> list[int]:
        order = self._cache.get(i)
        if order is None:
            order = self._cache[i] = self._build(i)
        return order


@dataclass
class PreferenceProfile:
    """Applicant orders (best first, acceptable positions only) plus position scores.

    ``position_scores[j, i]`` ranks applicant i for position j; higher is
    better and being unmatched is below every applicant.
    """

    applicant_orders: Orders
    position_scores: np.ndarray

    def __post_init__(self):
        if isinstance(self.applicant_orders, LazyOrders):
            return
        for i, order in enumerate(self.applicant_orders):
            if len(set(order)) != len(order):
                raise ValueError(f"applicant {i} lists a position twice")

    @property
    def n(self) -> int:
        return self.position_scores.shape[1]

    @property
    def m(self) -> int:
        return self.position_scores.shape[0]


def applicant_proposing_da(
    profile: PreferenceProfile,
    matching: Optional[Matching] = None,
    rejections: Optional[RejectionSet] = None,
    trace: Optional[list[dict]] = None,
) -> Matching:
    """Run applicant-proposing DA from ``matching`` (empty by default).

    The smallest-index unmatched applicant with a remaining option proposes to
    her best listed position that has not rejected her.  Rejections, including
    the displacement of a tentative match, are written into ``rejections``.
    Returns a new matching; the input matching is not modified.
    """
    n, m = profile.n, profile.m
    mu = Matching(n, m) if matching is None else matching.copy()
    mu.validate()
    rej = rejections if rejections is not None else RejectionSet(n, m)
    orders = profile.applicant_orders
    scores = profile.position_scores
    pointer = [0] * n
    heap = [i for i in range(n) if mu.applicant_partner[i] < 0]
    heapq.heapify(heap)
    while heap:
        i = heapq.heappop(heap)
        if mu.applicant_partner[i] >= 0:
            continue
        order = orders[i]
        k = pointer[i]
        while k < len(order) and rej.mask[i, order[k]]:
            k += 1
        pointer[i] = k
        if k == len(order):
            continue
        j = order[k]
        cur = int(mu.position_partner[j])
        if cur < 0 or scores[j, i] > scores[j, cur]:
            if cur >= 0:
                rej.add(cur, j)
                mu.unmatch_applicant(cur)
                heapq.heappush(heap, cur)
            mu.pair(i, j)
            if trace is not None:
                trace.append({"kind": "proposal_accept", "applicant": i + 1, "position": j + 1})
        else:
            rej.add(i, j)
            heapq.heappush(heap, i)
            if trace is not None:
                trace.append({"kind": "proposal_reject", "applicant": i + 1, "position": j + 1})
    return mu


def truncated_order(state: MarketState, i: int) -> list[int]:
    """Applicant i's interim order cut just above her best non-interviewed position.

    The cut point is taken over positions that have not rejected her; every
    kept position has interviewed her.  With no non-interviewed position left
    the full order is returned.
    """
    row = state.app_util[i]
    open_ = ~state.ledger.interviewed[i] & ~state.rejections.mask[i]
    if not open_.any():
        return preference_order(row)
    pivot = row[open_].max()
    keep = np.flatnonzero(row > pivot)
    return preference_order(row, keep)


def truncated_da_state(state: MarketState) -> None:
    """One truncated-DA pass on a run state, updating its matching in place."""
    profile = PreferenceProfile(
        LazyOrders(state.n, lambda i: truncated_order(state, i)), state.pos_util
    )
    mu = applicant_proposing_da(profile, state.matching, state.rejections, state.trace)
    state.sync_matching(mu)


def truncated_da(
    instance: Instance,
    ledger: InterviewLedger,
    matching: Matching,
    rejections: RejectionSet,
) -> Matching:
    """DA on applicants' truncated interim preferences, starting from ``matching``.

    ``rejections`` is updated in place; the returned matching is new.
    """
    state = MarketState(instance, ledger, matching.copy(), rejections)
    truncated_da_state(state)
    return state.matching


def interim_profile(state: MarketState, realized_only: bool = False) -> PreferenceProfile:
    """Full interim preferences (or interviewed positions only) as a DA profile."""
    interviewed = state.ledger.interviewed

    def build(i: int) -> list[int]:
        cands = np.flatnonzero(interviewed[i]) if realized_only else None
        return preference_order(state.app_util[i], cands)

    return PreferenceProfile(LazyOrders(state.n, build), state.pos_util)

