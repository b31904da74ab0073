"""Lag-indexed moment estimators.

Second order: the classic co-prime pairing ``x1[m1] conj(x2[m2])`` with
``m1 M1 - m2 M2 = k``, averaged over Bezout blocks.

Third order: the Diophantine triple product ``x1 conj(x2) x3`` read off a
:class:`~diosense.diophantine.SampleSchedule`, averaged over snapshots ``l``.
Its noiseless limit is ``sum_i A_i^3 exp(j phi_i) exp(j w_i k)``.

For arrays the analogous third-order statistic combines three sensors at
snapshot times ``n1 + n3 = n2``.
"""
from __future__ import annotations

import io
import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .arrays import ArrayGeometry, coprime_pairs, plain_statistics
from .diophantine import SampleSchedule, SchemeCoefficients
from .errors import BezoutWindowError, DegeneracyError, NotCoveredError
from .waveform import SampleStream, SourceSet, _wrap

__all__ = [
    "LagMomentSequence",
    "DegeneracyResult",
    "analytic_autocorrelation",
    "analytic_third_order",
    "find_bezout_pair",
    "coprime_demands",
    "coprime_second_order",
    "diophantine_third_order",
    "degeneracy_check",
    "time_pairs",
    "time_pair_count",
    "doa_third_order",
    "doa_lag_sequence",
    "doa_second_order_sequence",
]

DEGENERACY_TOL = 1e-12


@dataclass(frozen=True)
class LagMomentSequence:
    """Estimated moments at integer lags.

    ``counts[i]`` is the number of products averaged into ``values[i]``.
    Lags that could not be estimated are simply absent.
    """

    order: int
    lags: np.ndarray
    values: np.ndarray
    counts: np.ndarray = field(default=None)

    def __post_init__(self):
        lags = np.asarray(self.lags, dtype=np.int64)
        values = np.asarray(self.values, dtype=complex)
        counts = np.zeros_like(lags) if self.counts is None else np.asarray(self.counts, dtype=np.int64)
        if self.order not in (2, 3):
            raise ValueError(f"order must be 2 or 3, got {self.order}")
        if not (lags.shape == values.shape == counts.shape) or lags.ndim != 1:
            raise ValueError("lags, values and counts must be 1-D of equal length")
        if not np.all(np.isfinite(values)):
            raise ValueError("moment values must be finite")
        object.__setattr__(self, "lags", lags)
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "counts", counts)

    def __len__(self):
        return self.lags.size

    @property
    def is_consecutive(self) -> bool:
        return bool(np.all(np.diff(self.lags) == 1))

    def consecutive(self) -> "LagMomentSequence":
        """Leading run of consecutive lags starting at the first lag."""
        if len(self) == 0:
            return self
        breaks = np.flatnonzero(np.diff(self.lags) != 1)
        stop = breaks[0] + 1 if breaks.size else len(self)
        return LagMomentSequence(self.order, self.lags[:stop], self.values[:stop], self.counts[:stop])

    def scaled(self, c: complex) -> "LagMomentSequence":
        return LagMomentSequence(self.order, self.lags, self.values * c, self.counts)

    def to_csv(self, path=None) -> str:
        buf = io.StringIO(newline="")
        buf.write("lag,re,im,count\n")
        for lag, v, c in zip(self.lags, self.values, self.counts):
            buf.write(f"{int(lag)},{float(v.real)!r},{float(v.imag)!r},{int(c)}\n")
        text = buf.getvalue()
        if path is not None:
            with open(path, "w", encoding="utf-8", newline="\n") as fh:
                fh.write(text)
        return text


def analytic_autocorrelation(s: SourceSet, lags) -> np.ndarray:
    """``R[k] = sum_i A_i^2 exp(j w_i k)``."""
    k = np.asarray(lags, dtype=float)
    return (s.amplitudes**2 * np.exp(1j * np.multiply.outer(k, s.freqs))).sum(axis=-1)


def analytic_third_order(s: SourceSet, lags) -> np.ndarray:
    """``sum_i A_i^3 exp(j phi_i) exp(j w_i k)``."""
    k = np.asarray(lags, dtype=float)
    coeff = s.amplitudes**3 * np.exp(1j * s.phases)
    return (coeff * np.exp(1j * np.multiply.outer(k, s.freqs))).sum(axis=-1)


# -- second order, co-prime pairing ------------------------------------------


def find_bezout_pair(M1: int, M2: int, k: int, r: int = 0) -> tuple[int, int]:
    """``(m1, m2)`` with ``m1*M1 - m2*M2 = k`` inside block ``r``.

    The windows are ``m1 in [r M2, (r+2) M2)`` and ``m2 in [r M1, (r+1) M1)``.
    Every ``0 <= k <= M1*M2`` has exactly one pair; some negative lags near
    ``-M1*M2`` have none, which raises :class:`BezoutWindowError`.
    """
    if math.gcd(M1, M2) != 1:
        raise ValueError(f"rates {M1} and {M2} are not coprime")
    if abs(k) > M1 * M2:
        raise ValueError(f"|k| = {abs(k)} exceeds M1*M2 = {M1 * M2}")
    # m2 is fixed modulo M1 by k + m2*M2 = 0 (mod M1); the m2 window holds one residue
    m2 = r * M1 + (-k * pow(M2, -1, M1)) % M1
    m1, rem = divmod(k + m2 * M2, M1)
    if rem or not (r * M2 <= m1 < (r + 2) * M2):
        raise BezoutWindowError(f"no Bezout pair for k={k} in block r={r} of rates ({M1}, {M2})")
    return m1, m2


def _bezout_table(M1, M2, K, R):
    m1 = np.empty((K, R), dtype=np.int64)
    m2 = np.empty((K, R), dtype=np.int64)
    for k in range(K):
        a, b = find_bezout_pair(M1, M2, k, 0)
        # moving to block r shifts the pair by r*(M2, M1)
        m1[k] = a + M2 * np.arange(R)
        m2[k] = b + M1 * np.arange(R)
    return m1, m2


def coprime_demands(M1: int, M2: int, K: int, R: int) -> tuple[np.ndarray, np.ndarray]:
    """Sample indices the co-prime estimator reads from each stream."""
    if K == 0:
        return np.zeros(0, dtype=np.int64), np.zeros(0, dtype=np.int64)
    m1, m2 = _bezout_table(M1, M2, K, R)
    return np.unique(m1), np.unique(m2)


def coprime_second_order(x1: SampleStream, x2: SampleStream, K: int, R: int) -> LagMomentSequence:
    """Autocorrelation at lags ``0..K-1`` from two co-prime streams.

    ``value[k] = (1/R) sum_r x1[m1] conj(x2[m2])`` over the Bezout pairs of
    blocks ``r = 0..R-1``.
    """
    if K < 0 or R < 1:
        raise ValueError(f"need K >= 0 and R >= 1, got K={K}, R={R}")
    if K == 0:
        return LagMomentSequence(2, [], [], [])
    m1, m2 = _bezout_table(x1.rate, x2.rate, K, R)
    prod = x1.take(m1) * np.conj(x2.take(m2))
    return LagMomentSequence(2, np.arange(K), prod.mean(axis=1), np.full(K, R))


# -- third order, Diophantine schedule --------------------------------------


@dataclass(frozen=True)
class DegeneracyResult:
    passed: bool
    offending: tuple[int, int, int] | None = None

    def __bool__(self):
        return self.passed


def degeneracy_check(s: SourceSet, coeff: SchemeCoefficients, tol: float = DEGENERACY_TOL) -> DegeneracyResult:
    """Look for source triples whose cross term does not average out over ``l``.

    With sources ``(i, u, v)`` entering slots 1, 2, 3 the snapshot-dependent
    phase of the cross term advances by ``a1 M1 (w_i - w_v) + a2 M2 (w_u - w_v)``
    per snapshot. The check fails if that is a multiple of ``2 pi`` for any
    triple other than ``i = u = v``.
    """
    w = s.freqs
    c1 = coeff.a[0] * coeff.rates[0]
    c2 = coeff.a[1] * coeff.rates[1]
    i, u, v = np.meshgrid(np.arange(s.D), np.arange(s.D), np.arange(s.D), indexing="ij")
    step = c1 * (w[i] - w[v]) + c2 * (w[u] - w[v])
    bad = (np.abs(_wrap(step)) < tol) & ~((i == u) & (u == v))
    if not bad.any():
        return DegeneracyResult(True)
    hit = np.argwhere(bad)[0]
    return DegeneracyResult(False, tuple(int(x) for x in hit))


def diophantine_third_order(
    streams: Sequence[SampleStream], sched: SampleSchedule, sources: SourceSet | None = None
) -> LagMomentSequence:
    """Third-order moments at lags ``1..K`` from three sparse streams.

    ``value[k] = (1/L) sum_l x1[i1] conj(x2[i2]) x3[i3]`` with the conjugate
    placed on the schedule's conjugated slot. When ``sources`` is given the
    degeneracy condition is checked first.
    """
    if len(streams) != 3:
        raise ValueError("need exactly three streams")
    for slot, (st, rate) in enumerate(zip(streams, sched.scheme.rates)):
        if st.rate != rate:
            raise ValueError(f"stream {slot} has rate {st.rate}, scheme expects {rate}")
    if sources is not None:
        res = degeneracy_check(sources, sched.scheme)
        if not res:
            raise DegeneracyError(f"source triple {res.offending} leaves a non-vanishing cross term")
    prod = np.ones((sched.K, sched.L), dtype=complex)
    for slot, st in enumerate(streams):
        vals = st.take(sched.indices[..., slot])
        prod *= np.conj(vals) if slot == sched.conj_slot else vals
    return LagMomentSequence(3, np.arange(1, sched.K + 1), prod.mean(axis=1), np.full(sched.K, sched.L))


# -- third order, arrays ----------------------------------------------------


def time_pair_count(L: int) -> int:
    """Number of snapshot pairs ``(n1, n3)``: ``(L-1)(L-2)/2`` interior plus ``L-1`` edge."""
    return (L - 1) * (L - 2) // 2 + (L - 1)


def time_pairs(L: int) -> np.ndarray:
    """All ``(n1, n3)`` with ``n1, n3 >= 1`` and ``n1 + n3 <= L``; snapshots are numbered ``1..L``."""
    if L < 2:
        raise ValueError("need at least two snapshots")
    n1, n3 = np.meshgrid(np.arange(1, L), np.arange(1, L), indexing="ij")
    keep = n1 + n3 <= L
    return np.stack([n1[keep], n3[keep]], axis=1)


def _triple_sum(xa, xb, xc):
    """``sum x_a[n1] conj(x_b[n1+n3]) x_c[n3]`` over all admissible pairs."""
    L = xa.shape[-1]
    conv = np.convolve(xa, xc)[: L - 1]  # conv[m] pairs n1 + n3 = m + 2
    return np.dot(conv, np.conj(xb[1:L]))


def doa_third_order(X, positions, triple, conjugate: bool = False) -> complex:
    """Third-order coarray value of one sensor triple.

    Parameters
    ----------
    X : ndarray, shape (N, L)
        Snapshots per sensor; column ``n - 1`` is snapshot ``n``.
    positions : sequence of int
        Sensor positions matching the rows of ``X``.
    triple : (d1, d2, d3)
        Positions in the roles of ``x_{d1} conj(x_{d2}) x_{d3}``.
    conjugate : bool
        Return the fully conjugated statistic, which measures lag
        ``-(d1 - d2 + d3)`` with conjugated source coefficients.
    """
    X = np.asarray(X)
    L = X.shape[-1]
    if L < 2:
        raise ValueError("need at least two snapshots")
    pos = list(positions)
    ia, ib, ic = (pos.index(d) for d in triple)
    value = _triple_sum(X[ia], X[ib], X[ic]) / time_pair_count(L)
    return complex(np.conj(value) if conjugate else value)


def doa_lag_sequence(X, geometry: ArrayGeometry, max_lag: int | None = None) -> LagMomentSequence:
    """Third-order coarray sequence at lags ``0..max_lag``.

    Each lag averages the plain statistic over every distinct sensor triple
    that realises it. Lags without a triple are left out.
    """
    X = np.asarray(X)
    L = X.shape[-1]
    if L < 2:
        raise ValueError("need at least two snapshots")
    if X.shape[0] != geometry.sensor_count:
        raise ValueError(f"X has {X.shape[0]} rows for {geometry.sensor_count} sensors")
    if max_lag is None:
        max_lag = geometry.guaranteed_span
    row = {p: i for i, p in enumerate(geometry.positions)}
    npairs = time_pair_count(L)
    convs: dict[tuple[int, int], np.ndarray] = {}
    lags, values, counts = [], [], []
    for g in range(max_lag + 1):
        try:
            roles = plain_statistics(geometry, g)
        except NotCoveredError:
            continue
        acc = 0j
        for a, b, c in roles:
            ia, ib, ic = row[a], row[b], row[c]
            key = (ia, ic)
            if key not in convs:
                convs[key] = np.convolve(X[ia], X[ic])[: L - 1]
            acc += np.dot(convs[key], np.conj(X[ib, 1:L]))
        lags.append(g)
        values.append(acc / (npairs * len(roles)))
        counts.append(npairs * len(roles))
    return LagMomentSequence(3, lags, values, counts)


def doa_second_order_sequence(X, geometry: ArrayGeometry, max_lag: int | None = None) -> LagMomentSequence:
    """Second-order coarray sequence ``mean_n x_A[n] conj(x_B[n])`` over cross pairs."""
    X = np.asarray(X)
    if max_lag is None:
        max_lag = geometry.guaranteed_span
    row = {p: i for i, p in enumerate(geometry.positions)}
    L = X.shape[-1]
    lags, values, counts = [], [], []
    for g in range(max_lag + 1):
        try:
            pairs = coprime_pairs(geometry, g)
        except NotCoveredError:
            continue
        acc = sum(np.vdot(X[row[b]], X[row[a]]) for a, b in pairs)
        lags.append(g)
        values.append(acc / (L * len(pairs)))
        counts.append(L * len(pairs))
    return LagMomentSequence(2, lags, values, counts)
