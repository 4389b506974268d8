"""Sequential adaptive interviewing: one interview or one proposal per iteration."""
from __future__ import annotations

import enum
from typing import Optional

import numpy as np

from .core import (
    InputError,
    Instance,
    InterviewLedger,
    MarketState,
    Matching,
    RejectionSet,
    RunResult,
    Side,
    make_rng,
)


class TieBreak(enum.Enum):
    """How to choose among equally preferred positions.

    ``LOWEST_MATCH_VALUE``: the position valuing its tentative match least,
    free positions first, then lowest index.
    ``UNMATCHED_THEN_UNHAPPY``: free positions first, then positions that do
    not interim like their tentative match, then the rest; lowest index within
    each class.
    """

    LOWEST_MATCH_VALUE = "lowest-match-value"
    UNMATCHED_THEN_UNHAPPY = "unmatched-then-unhappy"


def almost_ceiling(instance: Instance, almost_equivalent: bool | float) -> Optional[float]:
    """Resolve the almost-equivalence option to a ceiling value (or ``None``)."""
    if almost_equivalent is False or almost_equivalent is None:
        return None
    if almost_equivalent is True:
        ceiling = instance.model.upper_threshold(Side.APPLICANT)
        if ceiling is None:
            raise ValueError(
                "almost-equivalence needs a ceiling: the value model has none, pass a number"
            )
        return ceiling
    return float(almost_equivalent)


def _select_position(state: MarketState, candidates: np.ndarray, tie_break: TieBreak) -> int:
    if candidates.size == 1:
        return int(candidates[0])
    if tie_break is TieBreak.LOWEST_MATCH_VALUE:
        vals = state.match_value[candidates]
        return int(candidates[int(np.argmin(vals))])
    U = state.instance.U
    partner = state.matching.position_partner

    def key(j: int):
        cur = partner[j]
        if cur < 0:
            return (0, 0, j)
        liked = state.pos_util[j, cur] > U[j, cur]
        return (2, state.match_value[j], j) if liked else (1, 0, j)

    return min((int(j) for j in candidates), key=key)


def sequential_loop(
    state: MarketState,
    tie_break: TieBreak = TieBreak.LOWEST_MATCH_VALUE,
    ceiling: Optional[float] = None,
    phase: Optional[int] = None,
) -> None:
    """Run sequential iterations on ``state`` until no active applicant remains.

    Every interview is one round.  ``phase`` only labels trace events.
    """
    extra = {} if phase is None else {"phase": phase}
    while True:
        active = state.active_applicants()
        if active.size == 0:
            return
        i = int(active[0])
        state.metrics.iterations += 1
        top = state.top_positions(i, ceiling)
        j = _select_position(state, top, tie_break)
        seen = state.ledger.interviewed[i, j]
        prefers = state.position_prefers(j, i)
        if not seen and prefers:
            rec = state.interview(i, j)
            state.round += 1
            state.metrics.total_rounds += 1
            state.emit(kind="interview", applicant=i + 1, position=j + 1,
                       v=float(rec.v), u=float(rec.u), round=state.round, **extra)
        elif not prefers:
            state.rejections.add(i, j)
            kind = "proposal_reject" if seen else "reject_without_interview"
            state.emit(kind=kind, applicant=i + 1, position=j + 1, **extra)
        else:
            cur = int(state.matching.position_partner[j])
            if cur >= 0:
                state.rejections.add(cur, j)
            state.pair(i, j)
            state.emit(kind="proposal_accept", applicant=i + 1, position=j + 1,
                       displaced=cur + 1 if cur >= 0 else None, **extra)


def run_sequential(
    instance: Instance,
    seed: Optional[int] = None,
    *,
    rng: Optional[np.random.Generator] = None,
    matching: Optional[Matching] = None,
    ledger: Optional[InterviewLedger] = None,
    rejections: Optional[RejectionSet] = None,
    tie_break: TieBreak | str = TieBreak.LOWEST_MATCH_VALUE,
    almost_equivalent: bool | float = False,
    trace: bool = False,
) -> RunResult:
    """Sequential adaptive algorithm.

    Args:
        instance: the market.
        seed: seed for a fresh generator (ignored when ``rng`` is given).
        matching, ledger, rejections: optional starting state (copied).
        tie_break: rule for choosing among equally preferred positions.
        almost_equivalent: treat non-interviewed positions as worth a common
            ceiling when finding the most preferred ones (``True`` uses the
            value model's upper threshold; a number is used as the ceiling).
        trace: record per-iteration events in ``result.trace``.

    Returns:
        The final matching, ledger, rejections and metrics.  An applicant
        rejected by every position is left unmatched and listed in
        ``metrics.unmatched_exhausted``.
    """
    state = MarketState(
        instance,
        ledger.copy() if ledger is not None else None,
        matching.copy() if matching is not None else None,
        rejections.copy() if rejections is not None else None,
        rng if rng is not None else make_rng(seed),
        record_trace=trace,
    )
    _check_rejections(state)
    sequential_loop(state, TieBreak(tie_break), almost_ceiling(instance, almost_equivalent))
    return state.finish()


def _check_rejections(state: MarketState) -> None:
    for i, j in state.matching.pairs():
        if state.rejections.mask[i, j]:
            raise InputError(f"(a{i + 1}, p{j + 1}) is matched but marked rejected")

