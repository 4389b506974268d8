"""Interim-stability verification and DA run after interviewing is over."""
from __future__ import annotations

import enum
from dataclasses import dataclass, field

import numpy as np

from .core import (
    NEG_INF,
    Instance,
    InterviewLedger,
    MarketState,
    Matching,
    PreconditionError,
    RejectionSet,
)
from .da import applicant_proposing_da, interim_profile


@dataclass
class StabilityReport:
    is_interim_stable: bool
    uninterviewed_matched_pairs: list[tuple[int, int]] = field(default_factory=list)
    blocking_pairs: list[tuple[int, int]] = field(default_factory=list)

    def to_json(self) -> dict:
        return {
            "is_interim_stable": self.is_interim_stable,
            "uninterviewed_matched_pairs": [[i + 1, j + 1] for i, j in self.uninterviewed_matched_pairs],
            "blocking_pairs": [[i + 1, j + 1] for i, j in self.blocking_pairs],
        }


def _current_values(util: np.ndarray, partner: np.ndarray) -> np.ndarray:
    dtype = object if util.dtype == object else float
    out = np.full(partner.shape[0], NEG_INF, dtype=dtype)
    matched = np.flatnonzero(partner >= 0)
    out[matched] = util[matched, partner[matched]]
    return out


def stability_report(state: MarketState) -> StabilityReport:
    mu = state.matching
    a_partner, p_partner = mu.applicant_partner, mu.position_partner
    unmet = [(i, j) for i, j in mu.pairs() if not state.ledger.interviewed[i, j]]
    a_cur = _current_values(state.app_util, a_partner)
    p_cur = _current_values(state.pos_util, p_partner)
    # (i, j) blocks when i strictly prefers j and j strictly prefers i
    a_wants = state.app_util > a_cur[:, None]
    p_wants = (state.pos_util > p_cur[:, None]).T
    blocking = np.asarray(a_wants & p_wants, dtype=bool)
    matched = np.flatnonzero(a_partner >= 0)
    blocking[matched, a_partner[matched]] = False
    pairs = [(int(i), int(j)) for i, j in zip(*np.nonzero(blocking))]
    return StabilityReport(not unmet and not pairs, unmet, pairs)


def check_interim_stability(
    instance: Instance, ledger: InterviewLedger, matching: Matching
) -> StabilityReport:
    """Exhaustively check every matched pair for an interview and every other pair for blocking."""
    return stability_report(MarketState(instance, ledger, matching))


class DecouplingMode(enum.Enum):
    FULL_INTERIM = "full-interim"
    REALIZED_ONLY = "realized-only"


def decoupled_da(
    instance: Instance, ledger: InterviewLedger, mode: DecouplingMode | str = DecouplingMode.REALIZED_ONLY
) -> tuple[Matching, StabilityReport]:
    """Applicant-proposing DA from scratch on the interviews in ``ledger``.

    ``FULL_INTERIM`` ranks every position by interim utility; ``REALIZED_ONLY``
    lists only interviewed positions, ordered by realised value.
    """
    state = MarketState(instance, ledger)
    realized = DecouplingMode(mode) is DecouplingMode.REALIZED_ONLY
    mu = applicant_proposing_da(interim_profile(state, realized), None, RejectionSet(state.n, state.m))
    state.sync_matching(mu)
    return mu, stability_report(state)


def all_applicants_like_match(instance: Instance, ledger: InterviewLedger, matching: Matching) -> bool:
    """True iff every matched applicant's realised value beats her prior for that position."""
    for i, j in matching.pairs():
        rec = ledger.get(i, j)
        if rec is None:
            raise PreconditionError(f"(a{i + 1}, p{j + 1}) is matched but never interviewed")
        if not rec.v > instance.V[i, j]:
            return False
    return True
