"""Exhaustive reference implementations used only by the tests."""
from __future__ import annotations

import itertools
from typing import Optional, Sequence

import numpy as np

from interview_match import RejectionSet


def all_matchings(n: int, m: int):
    """Every partial matching as a tuple ``partner[i]`` (None = unmatched)."""
    choices = list(range(m)) + [None]
    for combo in itertools.product(choices, repeat=n):
        used = [j for j in combo if j is not None]
        if len(used) == len(set(used)):
            yield combo


def blocking_pairs(
    partner: Sequence[Optional[int]],
    orders: Sequence[Sequence[int]],
    scores,
) -> list[tuple[int, int]]:
    """Pairs (i, j) with j acceptable to i, i preferring j and j preferring i.

    ``orders[i]`` lists acceptable positions best first; ``scores[j][i]`` ranks
    applicants for position j (higher is better, every applicant acceptable).
    A matched pair outside the applicant's list also counts as blocking
    (individual rationality), reported as (i, partner).
    """
    m = len(scores)
    holder = {j: i for i, j in enumerate(partner) if j is not None}
    out = []
    for i, order in enumerate(orders):
        rank = {j: r for r, j in enumerate(order)}
        cur = partner[i]
        if cur is not None and cur not in rank:
            out.append((i, cur))
            continue
        cur_rank = rank[cur] if cur is not None else len(order)
        for j in order:
            if rank[j] >= cur_rank:
                break
            h = holder.get(j)
            if h is None or scores[j][i] > scores[j][h]:
                out.append((i, j))
    assert all(0 <= j < m for _, j in out)
    return out


def stable_matchings(orders, scores, n: int, m: int) -> list[tuple]:
    return [mu for mu in all_matchings(n, m) if not blocking_pairs(mu, orders, scores)]


def max_matching_size(edges: dict[int, list[int]]) -> int:
    lefts = sorted(edges)
    best = 0

    def go(k: int, used: frozenset, size: int) -> None:
        nonlocal best
        if size + (len(lefts) - k) <= best:
            return
        if k == len(lefts):
            best = max(best, size)
            return
        for p in edges[lefts[k]]:
            if p not in used:
                go(k + 1, used | {p}, size + 1)
        go(k + 1, used, size)

    go(0, frozenset(), 0)
    return best


def random_bipartite(seed: int, max_side: int = 8) -> tuple[int, int, dict[int, list[int]]]:
    """Random bipartite graph with 1..max_side vertices per side.

    Returns ``(left count, right count, adjacency)``.
    """
    rng = np.random.default_rng(seed)
    n_left = int(rng.integers(1, max_side + 1))
    n_right = int(rng.integers(1, max_side + 1))
    density = rng.uniform(0.1, 0.9)
    adj = rng.random((n_left, n_right)) < density
    return n_left, n_right, {i: np.flatnonzero(adj[i]).tolist() for i in range(n_left)}


def graph_as_rejections(edges: dict[int, list[int]], size: int) -> RejectionSet:
    """Encode a bipartite graph as rejections on a size x size market.

    With equal priors every non-rejecting position ties for first place, so
    an applicant's candidate set is exactly her adjacency list.
    """
    rej = RejectionSet(size, size)
    for i in range(size):
        for j in range(size):
            if j not in edges.get(i, ()):
                rej.add(i, j)
    return rej
