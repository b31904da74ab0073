"""Integer machinery for Diophantine sampling schemes.

A scheme attaches two integer vectors ``a`` and ``b`` to three down-sampling
rates ``M`` such that ``a . M = 0`` and ``b . M = 1``. For every lag ``k`` and
snapshot ``l`` the coefficients ``k*b + l*a`` then combine the three rates
into exactly ``k``, which is what lets a triple product of sparse samples
stand in for a dense autocorrelation lag.

All arithmetic here is exact. Rates of order 1e6 times indices of order
``2K + 3L`` overflow 32-bit integers, so identities are checked with Python
integers whenever int64 could overflow.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import reduce
from itertools import combinations
from typing import Iterator, Sequence

import numpy as np

from .errors import InvalidSchemeError, ScheduleInconsistencyError, UnsolvableTripleError

__all__ = [
    "SamplerSet",
    "SchemeCoefficients",
    "SampleSchedule",
    "gcd_many",
    "ext_gcd",
    "solve_scheme",
    "validate_scheme",
    "consecutive_scheme",
    "build_schedule",
    "enumerate_triplets",
    "delay_bound",
    "solvable_triplet_upper_bound",
]

# int64 products below this magnitude cannot overflow when three are summed
_INT64_SAFE = 2**61


def gcd_many(values: Sequence[int]) -> int:
    """Greatest common divisor of a nonempty list; zeros act as identity."""
    values = list(values)
    if not values:
        raise ValueError("gcd_many needs at least one value")
    return reduce(math.gcd, (int(v) for v in values))


def ext_gcd(x: int, y: int) -> tuple[int, int, int]:
    """Extended Euclid.

    Returns ``(g, u, v)`` with ``u*x + v*y == g == gcd(x, y)`` and ``g >= 0``.
    The coefficients are the minimal ones produced by the Euclidean
    recurrence, so ``|u| <= max(1, |y|/(2g))`` and ``|v| <= max(1, |x|/(2g))``.
    """
    x, y = int(x), int(y)
    if x == 0 and y == 0:
        raise ValueError("ext_gcd(0, 0) is undefined")
    r0, r1 = abs(x), abs(y)
    s0, s1 = 1, 0
    t0, t1 = 0, 1
    while r1 != 0:
        q = r0 // r1
        r0, r1 = r1, r0 - q * r1
        s0, s1 = s1, s0 - q * s1
        t0, t1 = t1, t0 - q * t1
    u = s0 if x >= 0 else -s0
    v = t0 if y >= 0 else -t0
    return r0, u, v


def _mod_inverse(x: int, m: int) -> int:
    """Inverse of ``x`` modulo ``m`` as a residue in ``[1, m]``.

    The modulus-1 case returns 1 rather than 0 so that the derived unit
    coefficients stay strictly positive.
    """
    if m == 1:
        return 1
    g, u, _ = ext_gcd(x, m)
    if g != 1:
        raise UnsolvableTripleError(f"{x} has no inverse modulo {m}")
    return u % m


@dataclass(frozen=True)
class SamplerSet:
    """Down-sampling rates ``M_1..M_N`` in units of the Nyquist interval ``ts``."""

    rates: tuple[int, ...]
    ts: float = 1.0

    def __post_init__(self):
        rates = tuple(int(r) for r in self.rates)
        object.__setattr__(self, "rates", rates)
        if len(rates) < 3:
            raise ValueError(f"need at least three samplers, got {len(rates)}")
        if any(r < 1 for r in rates):
            raise ValueError(f"rates must be positive integers, got {rates}")
        if self.ts <= 0:
            raise ValueError("Nyquist interval must be positive")

    @classmethod
    def consecutive(cls, n: int, gamma: int = 0, ts: float = 1.0) -> "SamplerSet":
        """Rates ``1+gamma, ..., n+gamma``."""
        return cls(tuple(i + gamma for i in range(1, n + 1)), ts)

    def __len__(self):
        return len(self.rates)

    def supports_lag(self, k: int) -> bool:
        return k % gcd_many(self.rates) == 0


@dataclass(frozen=True)
class SchemeCoefficients:
    """Three rates with coefficient vectors solving ``a.M = 0`` and ``b.M = 1``.

    ``rates`` are the effective rates (already shifted by ``gamma``) and
    ``triple`` the indices of the samplers they were taken from.
    """

    rates: tuple[int, int, int]
    a: tuple[int, int, int]
    b: tuple[int, int, int]
    triple: tuple[int, int, int] = (0, 1, 2)
    gamma: int = 0

    def __post_init__(self):
        for name in ("rates", "a", "b", "triple"):
            vals = tuple(int(v) for v in getattr(self, name))
            if len(vals) != 3:
                raise ValueError(f"{name} must have three entries, got {vals}")
            object.__setattr__(self, name, vals)
        if self.gamma < 0:
            raise ValueError("gamma must be nonnegative")

    @property
    def conj_slot(self) -> int:
        """Slot whose sample enters conjugated (both coefficients negative)."""
        slots = [i for i in range(3) if self.a[i] < 0 and self.b[i] < 0]
        if len(slots) != 1:
            raise InvalidSchemeError(f"no unique conjugated slot in a={self.a}, b={self.b}")
        return slots[0]

    @property
    def max_rate(self) -> int:
        return max(self.rates)

    def shifted(self, gamma: int) -> "SchemeCoefficients":
        """Same coefficients on rates ``M_i + gamma``; valid when both sums vanish."""
        if gamma < 0:
            raise ValueError("gamma must be nonnegative")
        return SchemeCoefficients(
            tuple(r + gamma for r in self.rates), self.a, self.b, self.triple, self.gamma + gamma
        )


def validate_scheme(s: SchemeCoefficients, require_zero_sum: bool = True) -> SchemeCoefficients:
    """Check every identity of a scheme exactly and return it unchanged.

    Raises :class:`InvalidSchemeError` naming the first violated identity.
    """
    M, a, b = s.rates, s.a, s.b
    if sum(ai * mi for ai, mi in zip(a, M)) != 0:
        raise InvalidSchemeError(f"a.M != 0 for a={a}, M={M}")
    if sum(bi * mi for bi, mi in zip(b, M)) != 1:
        raise InvalidSchemeError(f"b.M != 1 for b={b}, M={M}")
    if require_zero_sum:
        if sum(a) != 0:
            raise InvalidSchemeError(f"sum(a) = {sum(a)} != 0")
        if sum(b) != 0:
            raise InvalidSchemeError(f"sum(b) = {sum(b)} != 0")
    for name, vec in (("a", a), ("b", b)):
        if not (any(v > 0 for v in vec) and any(v < 0 for v in vec)):
            raise InvalidSchemeError(f"signs of {name}={vec} are not mixed")
    s.conj_slot  # raises when the conjugated slot is ambiguous
    return s


def is_valid_scheme(s: SchemeCoefficients, require_zero_sum: bool = True) -> bool:
    try:
        validate_scheme(s, require_zero_sum)
    except InvalidSchemeError:
        return False
    return True


def solve_scheme(M: Sequence[int], triple: Sequence[int] = (0, 1, 2)) -> SchemeCoefficients:
    """Build the shift-invariant scheme for three distinct rates.

    With the rates ordered ``hi > mid > lo`` the system reduces to two
    equations in the differences ``d1 = hi - mid`` and ``d3 = lo - mid``.
    The explicit solution is

    * ``a_hi = mid - lo``, ``a_lo = hi - mid``, ``a_mid = -(a_hi + a_lo)``
    * ``b_hi = d1^-1 mod (mid - lo)``, ``b_lo`` fixed by ``b.M = 1``,
      ``b_mid = -(b_hi + b_lo)``

    and coefficients are returned in the caller's rate order.

    Raises
    ------
    UnsolvableTripleError
        If two rates coincide or the differences are not coprime.
    """
    M = tuple(int(m) for m in M)
    if len(M) != 3:
        raise ValueError(f"need exactly three rates, got {M}")
    if any(m < 1 for m in M):
        raise ValueError(f"rates must be positive, got {M}")
    if len(set(M)) != 3:
        raise UnsolvableTripleError(f"rates {M} are not distinct")
    hi, mid, lo = sorted(range(3), key=lambda i: M[i], reverse=True)
    d1 = M[hi] - M[mid]
    d3 = M[lo] - M[mid]
    if math.gcd(d1, d3) != 1:
        raise UnsolvableTripleError(
            f"differences {d1} and {d3} of rates {M} share factor {math.gcd(d1, d3)}"
        )
    a = [0, 0, 0]
    b = [0, 0, 0]
    a[hi] = M[mid] - M[lo]
    a[lo] = d1
    a[mid] = -(a[hi] + a[lo])
    b[hi] = _mod_inverse(d1, -d3)
    b[lo] = (1 - b[hi] * d1) // d3
    b[mid] = -(b[hi] + b[lo])
    return validate_scheme(SchemeCoefficients(M, tuple(a), tuple(b), tuple(triple)))


def consecutive_scheme(gamma: int = 0) -> SchemeCoefficients:
    """Scheme ``a=(2,-3,1)``, ``b=(1,-2,1)`` on rates ``(2+gamma, 3+gamma, 5+gamma)``."""
    base = SchemeCoefficients((2, 3, 5), (2, -3, 1), (1, -2, 1))
    return validate_scheme(base.shifted(gamma))


def _needs_object(coeff_max: int, rate_max: int) -> bool:
    return coeff_max * rate_max >= _INT64_SAFE // 3


def _grid(s: SchemeCoefficients, K: int, L: int) -> np.ndarray:
    """Signed coefficients ``k*b + l*a`` with shape (K, L, 3)."""
    k = np.arange(1, K + 1, dtype=np.int64)[:, None, None]
    l = np.arange(1, L + 1, dtype=np.int64)[None, :, None]
    return k * np.asarray(s.b, dtype=np.int64) + l * np.asarray(s.a, dtype=np.int64)


@dataclass(frozen=True)
class SampleSchedule:
    """Per-(k, l) sample indices for the three samplers of a scheme.

    ``indices[k-1, l-1, i]`` is ``|k*b_i + l*a_i|``, the sample number to read
    from sampler ``i``; the sample at ``conj_slot`` enters conjugated.
    """

    scheme: SchemeCoefficients
    K: int
    L: int
    indices: np.ndarray = field(repr=False)
    conj_slot: int

    @property
    def signed(self) -> np.ndarray:
        sign = np.ones(3, dtype=np.int64)
        sign[self.conj_slot] = -1
        return self.indices * sign

    @property
    def max_index(self) -> int:
        return int(self.indices.max())

    def lags_reproduced(self) -> bool:
        """Exact check that every entry combines the rates into its lag."""
        signed = self.signed
        rates = self.scheme.rates
        if _needs_object(int(np.abs(signed).max()), max(rates)):
            signed = signed.astype(object)
            rates = np.array(rates, dtype=object)
        else:
            rates = np.asarray(rates, dtype=np.int64)
        combo = (signed * rates).sum(axis=-1)
        target = np.arange(1, self.K + 1)[:, None]
        return bool(np.all(combo == target))

    def demanded(self, slot: int) -> np.ndarray:
        """Sorted distinct sample indices read from one sampler."""
        return np.unique(self.indices[..., slot])

    def entries(self) -> Iterator[tuple[int, int, int, int, int]]:
        """Yield ``(k, l, i1, i2, i3)`` in lag-major order."""
        for k in range(self.K):
            for l in range(self.L):
                i1, i2, i3 = (int(v) for v in self.indices[k, l])
                yield k + 1, l + 1, i1, i2, i3


def build_schedule(s: SchemeCoefficients, K: int, L: int) -> SampleSchedule:
    """Index family ``k*b + l*a`` for ``k = 1..K`` and ``l = 1..L``."""
    if K < 1 or L < 1:
        raise ValueError(f"K and L must be positive, got K={K}, L={L}")
    conj = s.conj_slot
    signed = _grid(s, K, L)
    others = [i for i in range(3) if i != conj]
    bad_pos = signed[..., others] < 0
    bad_neg = signed[..., conj] > 0
    if bad_pos.any() or bad_neg.any():
        k, l = np.argwhere(bad_pos.any(axis=-1) | bad_neg)[0]
        raise ScheduleInconsistencyError(
            f"coefficients {signed[k, l].tolist()} at k={k + 1}, l={l + 1} break the sign pattern "
            f"(slot {conj} negative, others nonnegative)"
        )
    sched = SampleSchedule(s, K, L, np.abs(signed), conj)
    if not sched.lags_reproduced():
        raise ScheduleInconsistencyError("signed index combination does not reproduce the lag")
    return sched


def delay_bound(s: SchemeCoefficients, K: int, L: int) -> int:
    """Largest sample time, in Nyquist intervals, any schedule entry reads.

    The coefficient magnitude is linear in (k, l) inside each sign region, so
    its maximum over the grid sits on a corner.
    """
    if K < 1 or L < 1:
        raise ValueError(f"K and L must be positive, got K={K}, L={L}")
    corners = [(1, 1), (1, L), (K, 1), (K, L)]
    peak = max(abs(k * bi + l * ai) for k, l in corners for ai, bi in zip(s.a, s.b))
    return peak * s.max_rate


def enumerate_triplets(samplers: SamplerSet) -> list[SchemeCoefficients]:
    """Every 3-subset (lexicographic by index) with coprime rate differences."""
    out = []
    for triple in combinations(range(len(samplers)), 3):
        rates = [samplers.rates[i] for i in triple]
        try:
            out.append(solve_scheme(rates, triple))
        except UnsolvableTripleError:
            continue
    return out


def solvable_triplet_upper_bound(rates: Sequence[int]) -> int:
    """``C(N,3) - C(N_e,3) - C(N-N_e,3)``: same-parity triples never solve."""
    n = len(rates)
    n_even = sum(1 for r in rates if r % 2 == 0)
    return math.comb(n, 3) - math.comb(n_even, 3) - math.comb(n - n_even, 3)
