"""Deterministic maximum-cardinality bipartite matching by augmenting paths."""
from __future__ import annotations

import sys
from typing import Mapping, Optional, Sequence


def maximum_matching(
    adjacency: Mapping[int, Sequence[int]],
    initial: Optional[Mapping[int, int]] = None,
) -> dict[int, int]:
    """Maximum matching of a bipartite graph given as ``left -> [right, ...]``.

    Left vertices are scanned in ascending order and each adjacency list in
    the order given, so the result is reproducible.  A greedy pass seeds the
    search unless ``initial`` is supplied; augmenting paths never unmatch a
    matched vertex, so every right vertex covered by ``initial`` stays covered.

    Returns:
        ``{left: right}`` for every matched left vertex.
    """
    left_of: dict[int, int] = {}
    right_of: dict[int, int] = {}
    lefts = sorted(adjacency)
    if initial:
        for a, p in initial.items():
            if p not in adjacency.get(a, ()):
                raise ValueError(f"initial pair ({a}, {p}) is not an edge")
            if p in left_of:
                raise ValueError(f"right vertex {p} used twice in initial matching")
            left_of[p] = a
            right_of[a] = p
    else:
        for a in lefts:
            for p in adjacency[a]:
                if p not in left_of:
                    left_of[p] = a
                    right_of[a] = p
                    break

    limit = sys.getrecursionlimit()
    if len(lefts) + 50 > limit:
        sys.setrecursionlimit(len(lefts) + 50)

    def augment(a: int, seen: set[int]) -> bool:
        for p in adjacency[a]:
            if p in seen:
                continue
            seen.add(p)
            owner = left_of.get(p)
            if owner is None or augment(owner, seen):
                left_of[p] = a
                right_of[a] = p
                return True
        return False

    for a in lefts:
        if a not in right_of:
            augment(a, set())
    return {a: right_of[a] for a in lefts if a in right_of}
