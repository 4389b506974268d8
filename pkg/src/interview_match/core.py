"""Domain types, value models and interim-view computations.

Indices are 0-based throughout the Python API (applicant ``i`` in ``range(n)``,
position ``j`` in ``range(m)``).  Labels such as ``a1``/``p5`` and every
external format (JSON, CSV, traces) use 1-based numbering.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from typing import Any, Iterable, Iterator, Optional, Sequence

import numpy as np
from gmpy2 import mpq

NEG_INF = float("-inf")


class InputError(ValueError):
    """Malformed or inconsistent input (bad ids, shapes, non-involutive matchings)."""


class PreconditionError(RuntimeError):
    """An operation was called outside its domain (duplicate interview, etc.)."""


class UnsupportedConfiguration(ValueError):
    """Configuration outside the scope of an algorithm (e.g. ``m < n`` for the hybrid)."""


# --------------------------------------------------------------------------- ids


class Side(enum.Enum):
    APPLICANT = "applicant"
    POSITION = "position"

    @property
    def other(self) -> "Side":
        return Side.POSITION if self is Side.APPLICANT else Side.APPLICANT


@dataclass(frozen=True, order=True)
class AgentId:
    side: Side
    index: int

    def __str__(self) -> str:
        prefix = "a" if self.side is Side.APPLICANT else "p"
        return f"{prefix}{self.index + 1}"

    @classmethod
    def parse(cls, label: str) -> "AgentId":
        """Parse ``"a3"`` / ``"p1"`` (1-based) into an id."""
        label = label.strip().lower()
        if len(label) < 2 or label[0] not in "ap" or not label[1:].isdigit():
            raise InputError(f"bad agent label {label!r}")
        side = Side.APPLICANT if label[0] == "a" else Side.POSITION
        return cls(side, int(label[1:]) - 1)


def applicant(i: int) -> AgentId:
    return AgentId(Side.APPLICANT, i)


def position(j: int) -> AgentId:
    return AgentId(Side.POSITION, j)


#: Sentinel for "remaining unmatched" in preference comparisons.
UNMATCHED = None


# ------------------------------------------------------------------ value models


def _as_matrix(value: Any, shape: tuple[int, int], name: str) -> np.ndarray:
    arr = np.asarray(value, dtype=float)
    if arr.ndim == 0:
        arr = np.full(shape, float(arr))
    if arr.shape != shape:
        raise InputError(f"{name} must have shape {shape}, got {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise InputError(f"{name} must be finite")
    return arr


def _listify(arr: np.ndarray) -> Any:
    if np.all(arr == arr.flat[0]):
        return float(arr.flat[0])
    return arr.tolist()


class ValueModel:
    """Per-pair value distributions F_{i,j} (applicants) and G_{j,i} (positions).

    Subclasses fill ``applicant_priors`` (n x m, the V matrix) and
    ``position_priors`` (m x n, the U matrix) and implement :meth:`sample`.
    Each interview consumes exactly two uniforms from the run's generator,
    the first for the applicant's value and the second for the position's.
    """

    kind: str = ""
    dtype: Any = float

    def __init__(self, n: int, m: int):
        if n < 2 or m < 2:
            raise InputError(f"need n >= 2 and m >= 2, got n={n}, m={m}")
        self.n = int(n)
        self.m = int(m)
        self.applicant_priors: np.ndarray
        self.position_priors: np.ndarray

    def sample(self, i: int, j: int, rng: Optional[np.random.Generator]) -> tuple[Any, Any]:
        raise NotImplementedError

    def params(self) -> dict:
        raise NotImplementedError

    def applicant_quantile(self, i: int, j: int, q: float) -> Any:
        raise NotImplementedError

    def position_quantile(self, j: int, i: int, q: float) -> Any:
        raise NotImplementedError

    def _draw(self, i: int, j: int, rng: np.random.Generator) -> tuple[Any, Any]:
        qv = rng.random()
        qu = rng.random()
        return self.applicant_quantile(i, j, qv), self.position_quantile(j, i, qu)

    def upper_threshold(self, side: Side) -> Optional[float]:
        """Common ceiling used by the almost-equivalence option, if the model has one."""
        return None


class UniformModel(ValueModel):
    """Uniform values ``U[c - w, c + w]`` per pair.

    With the defaults (``c = w = 1/2``) this is the bilateral ``U[0, 1]`` market.
    Per-pair centres make either side non-equivalent while keeping
    median equal to expectation.
    """

    kind = "bilateral-uniform"

    def __init__(
        self,
        n: int,
        m: int,
        applicant_center: Any = 0.5,
        applicant_half_width: Any = 0.5,
        position_center: Any = 0.5,
        position_half_width: Any = 0.5,
    ):
        super().__init__(n, m)
        self.applicant_priors = _as_matrix(applicant_center, (n, m), "applicant_center")
        self.applicant_half_width = _as_matrix(applicant_half_width, (n, m), "applicant_half_width")
        self.position_priors = _as_matrix(position_center, (m, n), "position_center")
        self.position_half_width = _as_matrix(position_half_width, (m, n), "position_half_width")
        for c, w, name in (
            (self.applicant_priors, self.applicant_half_width, "applicant"),
            (self.position_priors, self.position_half_width, "position"),
        ):
            if np.any(w <= 0):
                raise InputError(f"{name} half widths must be positive")
            if np.any(c - w < 0):
                raise InputError(f"{name} supports must be non-negative")

    def applicant_quantile(self, i, j, q):
        c = self.applicant_priors[i, j]
        w = self.applicant_half_width[i, j]
        return float(c - w + 2.0 * w * q)

    def position_quantile(self, j, i, q):
        c = self.position_priors[j, i]
        w = self.position_half_width[j, i]
        return float(c - w + 2.0 * w * q)

    def sample(self, i, j, rng):
        return self._draw(i, j, rng)

    def params(self) -> dict:
        return {
            "applicant_center": _listify(self.applicant_priors),
            "applicant_half_width": _listify(self.applicant_half_width),
            "position_center": _listify(self.position_priors),
            "position_half_width": _listify(self.position_half_width),
        }


class TwoPointOrderedModel(ValueModel):
    """Two-point ordered market.

    Applicant ``i`` values position ``j`` (1-based) at ``2**(m-(j-1)) - j/(m+1)``
    or ``j/(m+1)`` with probability 1/2 each, so ``V[i, j] = 2**(m-j)``;
    positions symmetrically with ``n`` and ``i``.  Values are exact
    rationals (``gmpy2.mpq``): in float64 the high realisation of
    position ``j`` rounds onto the prior of position ``j - 1`` once ``m``
    exceeds about 50, which would change every comparison the algorithms make.
    """

    kind = "two-point-ordered"
    dtype = object

    def __init__(self, n: int, m: int):
        super().__init__(n, m)
        self._a_high = [mpq(2 ** (m - j)) - mpq(j + 1, m + 1) for j in range(m)]
        self._a_low = [mpq(j + 1, m + 1) for j in range(m)]
        self._p_high = [mpq(2 ** (n - i)) - mpq(i + 1, n + 1) for i in range(n)]
        self._p_low = [mpq(i + 1, n + 1) for i in range(n)]
        v_row = [mpq(2 ** (m - 1 - j)) for j in range(m)]
        u_row = [mpq(2 ** (n - 1 - i)) for i in range(n)]
        self.applicant_priors = np.empty((n, m), dtype=object)
        self.position_priors = np.empty((m, n), dtype=object)
        for i in range(n):
            self.applicant_priors[i, :] = v_row
        for j in range(m):
            self.position_priors[j, :] = u_row

    def applicant_quantile(self, i, j, q):
        return self._a_high[j] if q < 0.5 else self._a_low[j]

    def position_quantile(self, j, i, q):
        return self._p_high[i] if q < 0.5 else self._p_low[i]

    def sample(self, i, j, rng):
        return self._draw(i, j, rng)

    def params(self) -> dict:
        return {}


@dataclass(frozen=True)
class FourPointSide:
    """One side of the almost-equivalent 4-point family.

    Masses: ``1/2 - phi_upper`` at ``top`` (> ``high``), ``phi_upper`` at a
    point in ``(prior, high)`` solved from the mean constraint, ``phi_lower``
    at the midpoint of ``(low, prior)``, and ``1/2 - phi_lower`` at
    ``bottom`` (< ``low``).
    """

    high: float = 0.6
    low: float = 0.4
    phi_upper: float = 0.05
    phi_lower: float = 0.05
    top: float = 1.0
    bottom: float = 0.0

    def points(self, prior: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        """Return (upper-middle, lower-middle) support points for each prior."""
        if not (0 < self.phi_upper < 0.5 and 0 < self.phi_lower < 0.5):
            raise InputError("phi_upper and phi_lower must lie in (0, 1/2)")
        if not (0 <= self.bottom < self.low < self.high < self.top):
            raise InputError("need 0 <= bottom < low < high < top")
        if np.any(prior <= self.low) or np.any(prior >= self.high):
            raise InputError("priors must lie strictly inside (low, high)")
        lower_mid = (self.low + prior) / 2.0
        upper_mid = (
            prior
            - (0.5 - self.phi_upper) * self.top
            - self.phi_lower * lower_mid
            - (0.5 - self.phi_lower) * self.bottom
        ) / self.phi_upper
        if np.any(upper_mid <= prior) or np.any(upper_mid >= self.high):
            raise InputError(
                "4-point parameters infeasible: solved upper point leaves (prior, high)"
            )
        return upper_mid, lower_mid

    def quantile(self, q: float, upper_mid: float, lower_mid: float) -> float:
        if q < 0.5 - self.phi_upper:
            return self.top
        if q < 0.5:
            return float(upper_mid)
        if q < 0.5 + self.phi_lower:
            return float(lower_mid)
        return self.bottom


class FourPointModel(ValueModel):
    """Ex-ante almost-equivalent markets built from 4-point distributions."""

    kind = "almost-equivalent-4point"

    def __init__(
        self,
        n: int,
        m: int,
        applicants: Optional[FourPointSide] = None,
        positions: Optional[FourPointSide] = None,
        applicant_priors: Any = 0.5,
        position_priors: Any = 0.5,
    ):
        super().__init__(n, m)
        self.applicant_side = applicants or FourPointSide()
        self.position_side = positions or FourPointSide()
        self.applicant_priors = _as_matrix(applicant_priors, (n, m), "applicant_priors")
        self.position_priors = _as_matrix(position_priors, (m, n), "position_priors")
        self._a_upper, self._a_lower = self.applicant_side.points(self.applicant_priors)
        self._p_upper, self._p_lower = self.position_side.points(self.position_priors)

    def applicant_quantile(self, i, j, q):
        return self.applicant_side.quantile(q, self._a_upper[i, j], self._a_lower[i, j])

    def position_quantile(self, j, i, q):
        return self.position_side.quantile(q, self._p_upper[j, i], self._p_lower[j, i])

    def sample(self, i, j, rng):
        return self._draw(i, j, rng)

    def upper_threshold(self, side: Side) -> Optional[float]:
        return self.applicant_side.high if side is Side.APPLICANT else self.position_side.high

    def params(self) -> dict:
        return {
            "applicants": dict(vars(self.applicant_side)),
            "positions": dict(vars(self.position_side)),
            "applicant_priors": _listify(self.applicant_priors),
            "position_priors": _listify(self.position_priors),
        }


class FixedMatricesModel(ValueModel):
    """Realised values fixed in advance; interviews read them instead of sampling.

    ``v`` is n x m, ``u`` is m x n.  Entries may be ``None``/NaN for pairs that
    are never expected to interview; interviewing such a pair raises.
    """

    kind = "fixed-matrices"

    def __init__(
        self,
        n: int,
        m: int,
        v: Any,
        u: Any,
        applicant_priors: Any = 0.5,
        position_priors: Any = 0.5,
    ):
        super().__init__(n, m)
        self.applicant_priors = _as_matrix(applicant_priors, (n, m), "applicant_priors")
        self.position_priors = _as_matrix(position_priors, (m, n), "position_priors")
        self.v = self._realised(v, (n, m), "v")
        self.u = self._realised(u, (m, n), "u")

    @staticmethod
    def _realised(values: Any, shape: tuple[int, int], name: str) -> np.ndarray:
        arr = np.array(
            [[np.nan if x is None else x for x in row] for row in values], dtype=float
        ) if not isinstance(values, np.ndarray) else values.astype(float)
        if arr.shape != shape:
            raise InputError(f"{name} must have shape {shape}, got {arr.shape}")
        if np.any(arr[~np.isnan(arr)] < 0):
            raise InputError(f"{name} values must be non-negative")
        return arr

    def sample(self, i, j, rng):
        v, u = self.v[i, j], self.u[j, i]
        if np.isnan(v) or np.isnan(u):
            raise PreconditionError(f"no fixed value for pair (a{i + 1}, p{j + 1})")
        return float(v), float(u)

    def params(self) -> dict:
        return {
            "applicant_priors": _listify(self.applicant_priors),
            "position_priors": _listify(self.position_priors),
        }


MODEL_KINDS = {
    cls.kind: cls for cls in (UniformModel, TwoPointOrderedModel, FourPointModel, FixedMatricesModel)
}


@dataclass
class Instance:
    n: int
    m: int
    model: ValueModel

    def __post_init__(self):
        if (self.model.n, self.model.m) != (self.n, self.m):
            raise InputError("model dimensions do not match the instance")

    @property
    def V(self) -> np.ndarray:
        return self.model.applicant_priors

    @property
    def U(self) -> np.ndarray:
        return self.model.position_priors

    @property
    def dtype(self):
        return self.model.dtype

    def validate_agent(self, agent: AgentId) -> None:
        limit = self.n if agent.side is Side.APPLICANT else self.m
        if not 0 <= agent.index < limit:
            raise InputError(f"{agent} out of range (n={self.n}, m={self.m})")

    # JSON --------------------------------------------------------------

    def to_json(self) -> dict:
        doc = {
            "format_version": 1,
            "n": self.n,
            "m": self.m,
            "kind": self.model.kind,
            "params": self.model.params(),
        }
        if isinstance(self.model, FixedMatricesModel):
            doc["v"] = _nullable(self.model.v)
            doc["u"] = _nullable(self.model.u)
        return doc

    @classmethod
    def from_json(cls, doc: dict) -> "Instance":
        try:
            n, m, kind = int(doc["n"]), int(doc["m"]), doc["kind"]
        except KeyError as exc:
            raise InputError(f"instance document missing {exc}") from None
        params = dict(doc.get("params") or {})
        if kind == UniformModel.kind:
            model: ValueModel = UniformModel(n, m, **params)
        elif kind == TwoPointOrderedModel.kind:
            model = TwoPointOrderedModel(n, m)
        elif kind == FourPointModel.kind:
            a = FourPointSide(**params.pop("applicants", {}))
            p = FourPointSide(**params.pop("positions", {}))
            model = FourPointModel(n, m, a, p, **params)
        elif kind == FixedMatricesModel.kind:
            if "v" not in doc or "u" not in doc:
                raise InputError("fixed-matrices instance needs 'v' and 'u'")
            model = FixedMatricesModel(n, m, doc["v"], doc["u"], **params)
        else:
            raise InputError(f"unknown model kind {kind!r}")
        return cls(n, m, model)


def _nullable(arr: np.ndarray) -> list:
    return [[None if np.isnan(x) else float(x) for x in row] for row in arr]


# ------------------------------------------------------------------- records


@dataclass(frozen=True)
class InterviewRecord:
    applicant: int
    position: int
    v: Any
    u: Any

    def to_json(self) -> dict:
        return {
            "applicant": self.applicant + 1,
            "position": self.position + 1,
            "v": float(self.v),
            "u": float(self.u),
        }


class InterviewLedger:
    """Append-only set of interviews; each pair appears at most once."""

    def __init__(self, n: int, m: int, records: Iterable[InterviewRecord] = ()):
        self.n, self.m = n, m
        self.records: list[InterviewRecord] = []
        self._lookup: dict[tuple[int, int], InterviewRecord] = {}
        self.interviewed = np.zeros((n, m), dtype=bool)
        for rec in records:
            self.add(rec)

    def add(self, record: InterviewRecord) -> None:
        key = (record.applicant, record.position)
        if not (0 <= key[0] < self.n and 0 <= key[1] < self.m):
            raise InputError(f"interview {key} out of range")
        if key in self._lookup:
            raise PreconditionError(
                f"pair (a{key[0] + 1}, p{key[1] + 1}) has already interviewed"
            )
        if record.v < 0 or record.u < 0:
            raise InputError("realised values must be non-negative")
        self.records.append(record)
        self._lookup[key] = record
        self.interviewed[key] = True

    def get(self, i: int, j: int) -> Optional[InterviewRecord]:
        return self._lookup.get((i, j))

    def __contains__(self, pair: tuple[int, int]) -> bool:
        return pair in self._lookup

    def __len__(self) -> int:
        return len(self.records)

    def __iter__(self) -> Iterator[InterviewRecord]:
        return iter(self.records)

    def pairs(self) -> list[tuple[int, int]]:
        return [(r.applicant, r.position) for r in self.records]

    def copy(self) -> "InterviewLedger":
        return InterviewLedger(self.n, self.m, self.records)

    def restricted(self, count: int) -> "InterviewLedger":
        """The first ``count`` records as a fresh ledger (snapshot Z^t)."""
        return InterviewLedger(self.n, self.m, self.records[:count])

    def to_json(self) -> dict:
        return {"interviews": [r.to_json() for r in self.records]}

    @classmethod
    def from_json(cls, doc: dict, n: int, m: int) -> "InterviewLedger":
        recs = doc["interviews"] if isinstance(doc, dict) else doc
        return cls(
            n,
            m,
            (
                InterviewRecord(int(r["applicant"]) - 1, int(r["position"]) - 1, r["v"], r["u"])
                for r in recs
            ),
        )


class Matching:
    """Partial one-to-one pairing, stored as two partner arrays (-1 = unmatched)."""

    def __init__(self, n: int, m: int):
        self.n, self.m = n, m
        self.applicant_partner = np.full(n, -1, dtype=np.int64)
        self.position_partner = np.full(m, -1, dtype=np.int64)

    @classmethod
    def from_pairs(cls, n: int, m: int, pairs: Iterable[tuple[int, int]]) -> "Matching":
        mu = cls(n, m)
        for i, j in pairs:
            if not (0 <= i < n and 0 <= j < m):
                raise InputError(f"pair ({i}, {j}) out of range")
            if mu.applicant_partner[i] >= 0 or mu.position_partner[j] >= 0:
                raise InputError(f"agent repeated in pairs at ({i}, {j})")
            mu.applicant_partner[i] = j
            mu.position_partner[j] = i
        return mu

    def __call__(self, agent: AgentId) -> AgentId:
        """mu(x): the partner of ``agent``, or ``agent`` itself when unmatched."""
        if agent.side is Side.APPLICANT:
            j = int(self.applicant_partner[agent.index])
            return agent if j < 0 else position(j)
        i = int(self.position_partner[agent.index])
        return agent if i < 0 else applicant(i)

    def pair(self, i: int, j: int) -> None:
        """Match ``i`` with ``j``, unmatching any previous partners of either."""
        old_j = self.applicant_partner[i]
        if old_j >= 0:
            self.position_partner[old_j] = -1
        old_i = self.position_partner[j]
        if old_i >= 0:
            self.applicant_partner[old_i] = -1
        self.applicant_partner[i] = j
        self.position_partner[j] = i

    def unmatch_applicant(self, i: int) -> None:
        j = self.applicant_partner[i]
        if j >= 0:
            self.position_partner[j] = -1
            self.applicant_partner[i] = -1

    def pairs(self) -> list[tuple[int, int]]:
        return [(i, int(j)) for i, j in enumerate(self.applicant_partner) if j >= 0]

    def labels(self) -> list[tuple[str, str]]:
        return [(f"a{i + 1}", f"p{j + 1}") for i, j in self.pairs()]

    def size(self) -> int:
        return int(np.count_nonzero(self.applicant_partner >= 0))

    def is_involutive(self) -> bool:
        for i, j in enumerate(self.applicant_partner):
            if j >= 0 and (j >= self.m or self.position_partner[j] != i):
                return False
        for j, i in enumerate(self.position_partner):
            if i >= 0 and (i >= self.n or self.applicant_partner[i] != j):
                return False
        return True

    def validate(self) -> None:
        if not self.is_involutive():
            raise InputError("matching is not an involution")

    def copy(self) -> "Matching":
        mu = Matching(self.n, self.m)
        mu.applicant_partner = self.applicant_partner.copy()
        mu.position_partner = self.position_partner.copy()
        return mu

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Matching):
            return NotImplemented
        return (self.n, self.m) == (other.n, other.m) and np.array_equal(
            self.applicant_partner, other.applicant_partner
        ) and np.array_equal(self.position_partner, other.position_partner)

    def __repr__(self) -> str:
        body = ", ".join(f"({a},{p})" for a, p in self.labels())
        return f"Matching({body})"

    def to_json(self) -> dict:
        return {"pairs": [[i + 1, j + 1] for i, j in self.pairs()]}

    @classmethod
    def from_json(cls, doc: dict, n: int, m: int) -> "Matching":
        return cls.from_pairs(n, m, ((int(a) - 1, int(p) - 1) for a, p in doc["pairs"]))


class RejectionSet:
    """Which positions have rejected which applicants; grows monotonically."""

    def __init__(self, n: int, m: int):
        self.n, self.m = n, m
        self.mask = np.zeros((n, m), dtype=bool)
        self.count = np.zeros(n, dtype=np.int64)

    def add(self, i: int, j: int) -> None:
        if not self.mask[i, j]:
            self.mask[i, j] = True
            self.count[i] += 1

    def __contains__(self, pair: tuple[int, int]) -> bool:
        return bool(self.mask[pair])

    def __len__(self) -> int:
        return int(self.count.sum())

    def rejected_by_all(self, i: int) -> bool:
        return bool(self.count[i] >= self.m)

    def pairs(self) -> list[tuple[int, int]]:
        return [(int(i), int(j)) for i, j in zip(*np.nonzero(self.mask))]

    def copy(self) -> "RejectionSet":
        r = RejectionSet(self.n, self.m)
        r.mask = self.mask.copy()
        r.count = self.count.copy()
        return r


# ----------------------------------------------------------------- run state


@dataclass
class RunMetrics:
    total_interviews: int = 0
    total_rounds: int = 0
    per_applicant_interviews: np.ndarray = field(default_factory=lambda: np.zeros(0, int))
    per_position_interviews: np.ndarray = field(default_factory=lambda: np.zeros(0, int))
    phase1_rounds: int = 0
    phase2_rounds: int = 0
    phase3_rounds: int = 0
    phase_boundaries: list[int] = field(default_factory=list)
    fallback_triggered: bool = False
    iterations: int = 0
    unmatched_exhausted: list[int] = field(default_factory=list)

    @property
    def max_agent_interviews(self) -> int:
        counts = [self.per_applicant_interviews, self.per_position_interviews]
        return int(max((c.max() for c in counts if c.size), default=0))

    def to_json(self) -> dict:
        return {
            "total_interviews": self.total_interviews,
            "total_rounds": self.total_rounds,
            "per_applicant_interviews": self.per_applicant_interviews.tolist(),
            "per_position_interviews": self.per_position_interviews.tolist(),
            "phase1_rounds": self.phase1_rounds,
            "phase2_rounds": self.phase2_rounds,
            "phase3_rounds": self.phase3_rounds,
            "phase_boundaries": self.phase_boundaries,
            "fallback_triggered": self.fallback_triggered,
            "iterations": self.iterations,
        }


@dataclass
class RunResult:
    matching: Matching
    ledger: InterviewLedger
    rejections: RejectionSet
    metrics: RunMetrics
    trace: Optional[list[dict]] = None

    def interview_sequence(self) -> list[tuple[int, int]]:
        return self.ledger.pairs()


def _utility_matrix(priors: np.ndarray, dtype: Any) -> np.ndarray:
    return priors.astype(dtype, copy=True)


class MarketState:
    """Mutable state of one run: ledger, matching, rejections and cached interim utilities.

    ``app_util[i, j]`` is applicant i's interim utility for position j and
    ``pos_util[j, i]`` the position's for the applicant.  ``match_value[j]`` is
    position j's interim utility for its tentative match (``-inf`` if free).
    """

    def __init__(
        self,
        instance: Instance,
        ledger: Optional[InterviewLedger] = None,
        matching: Optional[Matching] = None,
        rejections: Optional[RejectionSet] = None,
        rng: Optional[np.random.Generator] = None,
        record_trace: bool = False,
    ):
        n, m = instance.n, instance.m
        self.instance = instance
        self.n, self.m = n, m
        self.ledger = ledger if ledger is not None else InterviewLedger(n, m)
        self.matching = matching if matching is not None else Matching(n, m)
        self.rejections = rejections if rejections is not None else RejectionSet(n, m)
        for obj, name in ((self.ledger, "ledger"), (self.matching, "matching"), (self.rejections, "rejections")):
            if (obj.n, obj.m) != (n, m):
                raise InputError(f"{name} dimensions do not match the instance")
        self.matching.validate()
        self.rng = rng
        self.app_util = _utility_matrix(instance.V, instance.dtype)
        self.pos_util = _utility_matrix(instance.U, instance.dtype)
        self.app_count = np.zeros(n, dtype=np.int64)
        self.pos_count = np.zeros(m, dtype=np.int64)
        for rec in self.ledger:
            self._apply(rec)
        self.match_value = np.full(m, NEG_INF, dtype=object if instance.dtype is object else float)
        for i, j in self.matching.pairs():
            self.match_value[j] = self.pos_util[j, i]
        self.trace: Optional[list[dict]] = [] if record_trace else None
        self.metrics = RunMetrics()
        self.round = 0

    def _apply(self, rec: InterviewRecord) -> None:
        self.app_util[rec.applicant, rec.position] = rec.v
        self.pos_util[rec.position, rec.applicant] = rec.u
        self.app_count[rec.applicant] += 1
        self.pos_count[rec.position] += 1

    # mutations -----------------------------------------------------------

    def interview(self, i: int, j: int) -> InterviewRecord:
        if self.ledger.interviewed[i, j]:
            raise PreconditionError(f"pair (a{i + 1}, p{j + 1}) has already interviewed")
        v, u = self.instance.model.sample(i, j, self.rng)
        rec = InterviewRecord(i, j, v, u)
        self.ledger.add(rec)
        self._apply(rec)
        return rec

    def pair(self, i: int, j: int) -> None:
        old_j = self.matching.applicant_partner[i]
        if old_j >= 0:
            self.match_value[old_j] = NEG_INF
        self.matching.pair(i, j)
        self.match_value[j] = self.pos_util[j, i]

    def reset_matching(self) -> None:
        self.matching = Matching(self.n, self.m)
        self.match_value[:] = NEG_INF

    def sync_matching(self, matching: Matching) -> None:
        self.matching = matching
        self.match_value[:] = NEG_INF
        for i, j in matching.pairs():
            self.match_value[j] = self.pos_util[j, i]

    def emit(self, **event: Any) -> None:
        if self.trace is not None:
            event.setdefault("iter", self.metrics.iterations)
            self.trace.append(event)

    # queries -------------------------------------------------------------

    def position_prefers(self, j: int, i: int) -> bool:
        """Does position j strictly interim-prefer applicant i to its current match?"""
        return bool(self.pos_util[j, i] > self.match_value[j])

    def active_applicants(self, among: Optional[Sequence[int]] = None) -> np.ndarray:
        """Unmatched applicants not yet rejected by every position, ascending."""
        mask = (self.matching.applicant_partner < 0) & (self.rejections.count < self.m)
        idx = np.flatnonzero(mask)
        if among is not None:
            idx = idx[np.isin(idx, among)]
        return idx

    def top_positions(self, i: int, ceiling: Optional[float] = None) -> np.ndarray:
        """Applicant i's most preferred positions among those that have not rejected her.

        With ``ceiling`` set, every non-interviewed position counts as worth
        ``ceiling`` and ties among them are broken by the original priors.
        """
        avail = np.flatnonzero(~self.rejections.mask[i])
        if avail.size == 0:
            return avail
        row = self.app_util[i, avail]
        if ceiling is None:
            best = row.max()
            return avail[row == best]
        seen = self.ledger.interviewed[i, avail]
        eff = np.where(seen, row, ceiling)
        best = eff.max()
        top = avail[eff == best]
        top_seen = self.ledger.interviewed[i, top]
        if np.all(top_seen):
            return top
        secondary = np.where(top_seen, self.app_util[i, top], self.instance.V[i, top])
        return top[secondary == secondary.max()]

    def finish(self) -> RunResult:
        self.metrics.total_interviews = len(self.ledger)
        self.metrics.per_applicant_interviews = self.app_count.copy()
        self.metrics.per_position_interviews = self.pos_count.copy()
        self.metrics.unmatched_exhausted = [
            int(i)
            for i in np.flatnonzero(
                (self.matching.applicant_partner < 0) & (self.rejections.count >= self.m)
            )
        ]
        return RunResult(self.matching, self.ledger, self.rejections, self.metrics, self.trace)


def make_rng(seed: Optional[int] = None) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence(seed))


# ------------------------------------------------------------ interim views


def _check_pair(instance: Instance, viewer: AgentId, target: AgentId) -> tuple[int, int]:
    instance.validate_agent(viewer)
    instance.validate_agent(target)
    if viewer.side is target.side:
        raise InputError(f"{viewer} and {target} are on the same side")
    if viewer.side is Side.APPLICANT:
        return viewer.index, target.index
    return target.index, viewer.index


def interim_utility(instance: Instance, ledger: InterviewLedger, viewer: AgentId, target: AgentId):
    """Realised value if the pair interviewed, otherwise the prior expectation."""
    i, j = _check_pair(instance, viewer, target)
    rec = ledger.get(i, j)
    if viewer.side is Side.APPLICANT:
        return rec.v if rec is not None else instance.V[i, j]
    return rec.u if rec is not None else instance.U[j, i]


def interim_prefers(
    instance: Instance,
    ledger: InterviewLedger,
    viewer: AgentId,
    target_a: Optional[AgentId],
    target_b: Optional[AgentId],
) -> bool:
    """Strict interim preference of ``viewer`` for ``target_a`` over ``target_b``.

    ``None`` (:data:`UNMATCHED`) is below every agent on the other side.
    """
    instance.validate_agent(viewer)
    if target_a is UNMATCHED:
        if target_b is not UNMATCHED:
            _check_pair(instance, viewer, target_b)
        return False
    ua = interim_utility(instance, ledger, viewer, target_a)
    if target_b is UNMATCHED:
        return True
    return bool(ua > interim_utility(instance, ledger, viewer, target_b))


def interim_likes(instance: Instance, ledger: InterviewLedger, viewer: AgentId, target: AgentId) -> bool:
    """Whether the realised value strictly exceeds the pair's prior expectation."""
    i, j = _check_pair(instance, viewer, target)
    rec = ledger.get(i, j)
    if rec is None:
        raise PreconditionError(f"({viewer}, {target}) has not interviewed")
    if viewer.side is Side.APPLICANT:
        return bool(rec.v > instance.V[i, j])
    return bool(rec.u > instance.U[j, i])


def conduct_interview(
    instance: Instance,
    ledger: InterviewLedger,
    rng: Optional[np.random.Generator],
    applicant_index: int,
    position_index: int,
) -> InterviewRecord:
    """Draw (v, u) for a fresh pair, append it to ``ledger`` and return the record."""
    instance.validate_agent(applicant(applicant_index))
    instance.validate_agent(position(position_index))
    if (applicant_index, position_index) in ledger:
        raise PreconditionError(
            f"pair (a{applicant_index + 1}, p{position_index + 1}) has already interviewed"
        )
    v, u = instance.model.sample(applicant_index, position_index, rng)
    rec = InterviewRecord(applicant_index, position_index, v, u)
    ledger.add(rec)
    return rec


def preference_order(row: np.ndarray, candidates: Optional[np.ndarray] = None) -> list[int]:
    """Indices sorted by decreasing utility, ascending index on ties."""
    idx = np.arange(len(row)) if candidates is None else np.asarray(candidates)
    if idx.size == 0:
        return []
    vals = row[idx]
    if vals.dtype == object:
        return sorted(idx.tolist(), key=lambda j: (-row[j], j))
    order = np.lexsort((idx, -vals.astype(float)))
    return idx[order].tolist()


def ceil_log2_times(n: int, factor: int = 10) -> int:
    """``ceil(factor * log2(n))`` computed on the real value."""
    return math.ceil(factor * math.log2(n))
