"""Three-subarray Diophantine arrays, co-prime baselines and their coarrays.

Positions are integers in units of ``d = lambda/2``.

For a Diophantine array built from pairwise-coprime ``(p1, p2, q)`` the
subarrays are uniform with spacings ``q*p1``, ``q*p2`` and ``p1*p2``. The
lag of a sensor triple ``(d1, d2, d3)`` (one per subarray) is
``+-(d1 - d2) +- d3``. Two of the four sign patterns are realised by the
plain third-order product ``x_A conj(x_B) x_C`` (lag ``A - B + C``); the other
two are its full conjugate and carry conjugated source coefficients.
"""
from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass, field
from functools import lru_cache
from itertools import product
from typing import NamedTuple

import numpy as np

from .errors import NotCoveredError

__all__ = [
    "ArrayGeometry",
    "CoarrayReport",
    "LagTriple",
    "design_diophantine_array",
    "design_coprime_array",
    "coarray_lags",
    "lag_triples",
    "plain_statistics",
    "coprime_pairs",
]

PLAIN = "plain"
CONJUGATE = "conjugate"


def _pairwise_coprime(*xs: int) -> bool:
    return all(math.gcd(x, y) == 1 for i, x in enumerate(xs) for y in xs[i + 1:])


@dataclass(frozen=True)
class ArrayGeometry:
    """Sensor positions plus the uniform subarrays they were assembled from.

    ``subarrays[i]`` lists the positions of subarray ``i`` in increasing
    order; a position shared by several subarrays (the origin, typically) is
    one physical sensor.
    """

    kind: str  # "diophantine" or "coprime"
    params: tuple[int, ...]
    subarrays: tuple[tuple[int, ...], ...]
    positions: tuple[int, ...] = field(init=False)

    def __post_init__(self):
        pos = sorted({p for sub in self.subarrays for p in sub})
        object.__setattr__(self, "positions", tuple(pos))

    @property
    def sensor_count(self) -> int:
        return len(self.positions)

    @property
    def formula_sensor_count(self) -> int:
        """Count from the closed-form design rule (may double count the origin)."""
        if self.kind == "diophantine":
            p1, p2, q = self.params
            return p1 + 2 * p2 + q - 1
        m1, m2 = self.params
        return m1 + 2 * m2 - 1

    @property
    def min_spacing(self) -> int:
        if len(self.positions) < 2:
            return 0
        return int(np.diff(self.positions).min())

    @property
    def subarray_of(self) -> dict[int, tuple[int, ...]]:
        labels: dict[int, list[int]] = {p: [] for p in self.positions}
        for i, sub in enumerate(self.subarrays):
            for p in sub:
                labels[p].append(i + 1)
        return {p: tuple(v) for p, v in labels.items()}

    def sensor_index(self, position: int) -> int:
        return self.positions.index(position)

    @property
    def guaranteed_span(self) -> int:
        """Half-width of the consecutive lag range the design rule promises."""
        if self.kind == "diophantine":
            p1, p2, q = self.params
            return p1 * p2 * q
        m1, m2 = self.params
        return m1 * m2


def design_diophantine_array(p1: int, p2: int, q: int) -> ArrayGeometry:
    """Subarrays ``{m1 q p1}``, ``{m2 q p2}``, ``{m3 p1 p2}`` with ``m1 < 2 p2``, ``m2 < p1``, ``m3 < q``."""
    p1, p2, q = int(p1), int(p2), int(q)
    if min(p1, p2, q) < 2:
        raise ValueError(f"p1, p2, q must all be >= 2, got {(p1, p2, q)}")
    if not _pairwise_coprime(p1, p2, q):
        raise ValueError(f"p1, p2, q must be pairwise coprime, got {(p1, p2, q)}")
    M1, M2, M3 = q * p1, q * p2, p1 * p2
    subs = (
        tuple(m * M1 for m in range(2 * p2)),
        tuple(m * M2 for m in range(p1)),
        tuple(m * M3 for m in range(q)),
    )
    return ArrayGeometry("diophantine", (p1, p2, q), subs)


def design_coprime_array(M1: int, M2: int) -> ArrayGeometry:
    """Co-prime baseline: ``2 M2`` sensors at spacing ``M1`` and ``M1 - 1`` at spacing ``M2``.

    The origin is labelled as a member of both subarrays so that the cross
    differences ``m1 M1 - m2 M2`` run over the full Bezout windows.
    """
    M1, M2 = int(M1), int(M2)
    if M1 < 2 or M2 < 2 or math.gcd(M1, M2) != 1:
        raise ValueError(f"co-prime array needs coprime M1, M2 >= 2, got {(M1, M2)}")
    subs = (
        tuple(m * M1 for m in range(2 * M2)),
        tuple(m * M2 for m in range(M1)),
    )
    return ArrayGeometry("coprime", (M1, M2), subs)


class LagTriple(NamedTuple):
    """A sensor triple with the sign pattern ``s12*(d1 - d2) + s3*d3``."""

    positions: tuple[int, int, int]
    signs: tuple[int, int]
    statistic: str  # PLAIN or CONJUGATE

    @property
    def lag(self) -> int:
        d1, d2, d3 = self.positions
        return self.signs[0] * (d1 - d2) + self.signs[1] * d3

    @property
    def roles(self) -> tuple[int, int, int]:
        """Positions ``(A, B, C)`` of the product ``x_A conj(x_B) x_C``.

        For a conjugate-tagged triple the measured value is the conjugate of
        that product, whose lag is ``-(A - B + C)``.
        """
        d1, d2, d3 = self.positions
        if self.signs[0] * self.signs[1] > 0:
            return d1, d2, d3
        return d2, d1, d3


def _all_triples(g: ArrayGeometry):
    if g.kind != "diophantine":
        raise ValueError("triple patterns exist only for Diophantine arrays")
    s1, s2, s3 = g.subarrays
    for d1, d2, d3 in product(s1, s2, s3):
        for sa, sb in product((1, -1), (1, -1)):
            yield LagTriple((d1, d2, d3), (sa, sb), PLAIN if sb > 0 else CONJUGATE)


def _lag_multiset(g: ArrayGeometry) -> Counter:
    if g.kind == "diophantine":
        return Counter(t.lag for t in _all_triples(g))
    s1, s2 = g.subarrays
    diffs = np.subtract.outer(np.array(s1), np.array(s2)).ravel()
    return Counter(np.concatenate([diffs, -diffs]).tolist())


@dataclass(frozen=True)
class CoarrayReport:
    lag_set: frozenset
    witness_counts: dict = field(repr=False)
    span: int
    dof: int
    distinct_lags: int
    min_spacing: int
    sensor_count: int
    formula_sensor_count: int
    guaranteed_span: int

    @property
    def guaranteed_dof(self) -> int:
        return 2 * self.guaranteed_span + 1

    @property
    def guarantee_holds(self) -> bool:
        return self.span >= self.guaranteed_span

    @property
    def sensor_count_mismatch(self) -> bool:
        return self.sensor_count != self.formula_sensor_count

    def summary_line(self) -> str:
        return f"{self.span},{self.dof},{self.distinct_lags},{self.min_spacing},{self.sensor_count}"

    def to_csv(self) -> str:
        lines = ["lag,witness_count"]
        lines += [f"{lag},{self.witness_counts[lag]}" for lag in sorted(self.witness_counts)]
        lines.append("span,dof,distinct,min_spacing,sensors")
        lines.append(self.summary_line())
        return "\n".join(lines) + "\n"


def coarray_lags(g: ArrayGeometry) -> CoarrayReport:
    """Enumerate the coarray of a geometry under its designated lag pattern.

    Diophantine arrays use ``+-(d1 - d2) +- d3`` over one sensor per subarray;
    co-prime baselines use ``+-(d1 - d2)``.
    """
    counts = _lag_multiset(g)
    lags = frozenset(counts)
    span = 0
    while span + 1 in lags and -(span + 1) in lags:
        span += 1
    return CoarrayReport(
        lag_set=lags,
        witness_counts=dict(counts),
        span=span,
        dof=2 * span + 1 if 0 in lags else 0,
        distinct_lags=len(lags),
        min_spacing=g.min_spacing,
        sensor_count=g.sensor_count,
        formula_sensor_count=g.formula_sensor_count,
        guaranteed_span=g.guaranteed_span,
    )


def lag_triples(g: ArrayGeometry, lag: int) -> list[LagTriple]:
    """All one-per-subarray triples and sign patterns realising ``lag``."""
    found = [t for t in _all_triples(g) if t.lag == lag]
    if not found:
        raise NotCoveredError(f"lag {lag} is not realised by any sensor triple")
    return found


@lru_cache(maxsize=32)
def _plain_table(g: ArrayGeometry) -> dict[int, tuple[tuple[int, int, int], ...]]:
    table: dict[int, set] = {}
    for t in _all_triples(g):
        # a conjugate-tagged triple at -g is the conjugate of a plain product at +g
        lag = t.lag if t.statistic == PLAIN else -t.lag
        table.setdefault(lag, set()).add(t.roles)
    return {lag: tuple(sorted(r)) for lag, r in table.items()}


def plain_statistics(g: ArrayGeometry, lag: int) -> list[tuple[int, int, int]]:
    """Distinct role triples ``(A, B, C)`` whose plain product has lag ``lag``.

    Duplicates (e.g. from ``d1 = d2 = 0``) appear once.
    """
    roles = _plain_table(g).get(lag)
    if not roles:
        raise NotCoveredError(f"lag {lag} is not realised by any plain product")
    return list(roles)


@lru_cache(maxsize=32)
def _pair_table(g: ArrayGeometry) -> dict[int, tuple[tuple[int, int], ...]]:
    if g.kind != "coprime":
        raise ValueError("pair patterns exist only for co-prime arrays")
    s1, s2 = g.subarrays
    table: dict[int, set] = {}
    for d1, d2 in product(s1, s2):
        table.setdefault(d1 - d2, set()).add((d1, d2))
        table.setdefault(d2 - d1, set()).add((d2, d1))
    return {lag: tuple(sorted(p)) for lag, p in table.items()}


def coprime_pairs(g: ArrayGeometry, lag: int) -> list[tuple[int, int]]:
    """Cross pairs ``(A, B)`` of a co-prime array with ``A - B = lag``."""
    pairs = _pair_table(g).get(lag)
    if not pairs:
        raise NotCoveredError(f"lag {lag} is not realised by any sensor pair")
    return list(pairs)
