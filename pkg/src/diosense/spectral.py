"""Hankel-subspace MUSIC on lag moment sequences.

A third-order sequence ``sum_i c_i exp(j w_i k)`` has complex weights
``c_i``, so it is not a Hermitian autocorrelation and there is no covariance
matrix to eigendecompose. The Hankel matrix of the sequence, however, still
has the Vandermonde vectors of the ``w_i`` as its column space, which is all
MUSIC needs. The left singular vectors beyond the model order span the noise
subspace.
"""
from __future__ import annotations

import io
from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .errors import DegenerateSpectrumError
from .moments import LagMomentSequence

__all__ = [
    "HankelMatrix",
    "Pseudospectrum",
    "PeakSet",
    "build_hankel",
    "default_rows",
    "noise_subspace",
    "frequency_grid",
    "doa_grid",
    "music_spectrum",
    "pick_peaks",
    "rmse_matched",
    "estimate_frequencies",
    "estimate_doas",
]

FREQ_GRID_POINTS = 4096
DOA_GRID_STEP_DEG = 0.05


@dataclass(frozen=True)
class HankelMatrix:
    data: np.ndarray
    first_lag: int

    @property
    def shape(self):
        return self.data.shape


@dataclass(frozen=True)
class Pseudospectrum:
    """MUSIC power on a grid.

    ``grid`` is in radians (frequency) or degrees (direction). ``periodic``
    marks grids that wrap around, which is the case for frequency.
    """

    grid: np.ndarray
    power: np.ndarray
    periodic: bool = False

    def to_csv(self) -> str:
        buf = io.StringIO()
        buf.write("abscissa,power\n")
        for x, p in zip(self.grid, self.power):
            buf.write(f"{float(x)!r},{float(p)!r}\n")
        return buf.getvalue()


@dataclass(frozen=True)
class PeakSet:
    locations: np.ndarray

    @property
    def count(self) -> int:
        return self.locations.size


def default_rows(n: int) -> int:
    """Near-square row count ``ceil((n + 1) / 2)`` for a length-``n`` sequence."""
    return (n + 2) // 2


def build_hankel(seq: LagMomentSequence, P: int | None = None) -> HankelMatrix:
    """``H[p, q] = value at lag first_lag + p + q``."""
    n = len(seq)
    if n == 0:
        raise ValueError("empty sequence")
    if not seq.is_consecutive:
        raise ValueError("Hankel construction needs consecutive lags")
    if P is None:
        P = default_rows(n)
    if not 1 <= P <= n:
        raise ValueError(f"row count {P} outside [1, {n}]")
    v = seq.values
    return HankelMatrix(scipy.linalg.hankel(v[:P], v[P - 1:]), int(seq.lags[0]))


def noise_subspace(H: HankelMatrix | np.ndarray, D: int) -> np.ndarray:
    """Left singular vectors beyond the ``D`` largest singular values, shape ``(P, P - D)``."""
    data = H.data if isinstance(H, HankelMatrix) else np.asarray(H)
    P, Q = data.shape
    if D < 0 or min(P, Q) <= D:
        raise ValueError(f"model order {D} needs both Hankel dimensions above it, got {P}x{Q}")
    U, _, _ = np.linalg.svd(data, full_matrices=True)
    return U[:, D:]


def frequency_grid(n: int = FREQ_GRID_POINTS) -> np.ndarray:
    """``n`` equispaced points on ``(-pi, pi]``."""
    return -np.pi + 2 * np.pi * np.arange(1, n + 1) / n


def doa_grid(step_deg: float = DOA_GRID_STEP_DEG) -> np.ndarray:
    n = int(round(180.0 / step_deg))
    return np.linspace(-90.0, 90.0, n + 1)


def _steering(P: int, omega: np.ndarray) -> np.ndarray:
    return np.exp(1j * np.outer(np.arange(P), omega)) / np.sqrt(P)


def music_spectrum(basis: np.ndarray, grid: np.ndarray | None = None, doa: bool = False) -> Pseudospectrum:
    """``1 / ||basis^H v(w)||^2`` with unit-norm Vandermonde ``v``.

    For ``doa=True`` the grid holds angles in degrees and maps to
    ``w = pi sin(theta)`` (half-wavelength units).
    """
    if grid is None:
        grid = doa_grid() if doa else frequency_grid()
    grid = np.asarray(grid, dtype=float)
    omega = np.pi * np.sin(np.radians(grid)) if doa else grid
    proj = basis.conj().T @ _steering(basis.shape[0], omega)
    denom = np.sum(np.abs(proj) ** 2, axis=0)
    power = 1.0 / np.maximum(denom, np.finfo(float).tiny)
    return Pseudospectrum(grid, power, periodic=not doa)


def pick_peaks(p: Pseudospectrum, D: int) -> PeakSet:
    """The ``D`` strongest strict local maxima, refined by a parabola on log power."""
    n = p.power.size
    if D < 1 or D > n:
        raise ValueError(f"cannot pick {D} peaks from a {n}-point grid")
    logp = np.log(p.power)
    if p.periodic:
        left, right = np.roll(logp, 1), np.roll(logp, -1)
        cand = np.flatnonzero((logp > left) & (logp > right))
    else:
        left = np.concatenate([[np.inf], logp[:-1]])
        right = np.concatenate([logp[1:], [np.inf]])
        cand = np.flatnonzero((logp > left) & (logp > right))
    if cand.size < D:
        raise DegenerateSpectrumError(f"pseudospectrum has {cand.size} local maxima, {D} requested")
    top = cand[np.argsort(logp[cand])[::-1][:D]]
    l, c, r = left[top], logp[top], right[top]
    curv = l - 2 * c + r
    # strict maxima keep |offset| <= 1/2
    offset = np.where(curv < 0, 0.5 * (l - r) / np.where(curv < 0, curv, 1.0), 0.0)
    if p.periodic:
        g = p.grid
        fwd = np.mod(g[(top + 1) % n] - g[top], 2 * np.pi)
        back = np.mod(g[top] - g[top - 1], 2 * np.pi)
    else:
        # endpoints are never strict maxima, so both neighbours exist
        fwd = p.grid[top + 1] - p.grid[top]
        back = p.grid[top] - p.grid[top - 1]
    loc = p.grid[top] + offset * np.where(offset > 0, fwd, back)
    if p.periodic:
        loc = np.pi - np.mod(np.pi - loc, 2 * np.pi)
    return PeakSet(np.sort(loc))


def rmse_matched(estimates, truth, circular: bool = False) -> float:
    """RMSE after sorting both lists and pairing positionally.

    With ``circular=True`` errors are shortest arcs on ``(-pi, pi]`` and the
    sorted estimates may be rotated cyclically; the best rotation is kept so
    that a source near the wrap point is not paired across the circle.
    """
    est = np.sort(np.asarray(estimates, dtype=float))
    tru = np.sort(np.asarray(truth, dtype=float))
    if est.shape != tru.shape:
        raise ValueError(f"length mismatch: {est.size} estimates for {tru.size} truths")
    if est.size == 0:
        return 0.0
    if not circular:
        return float(np.sqrt(np.mean((est - tru) ** 2)))
    best = np.inf
    for shift in range(est.size):
        err = np.pi - np.mod(np.pi - (np.roll(est, shift) - tru), 2 * np.pi)
        best = min(best, float(np.sqrt(np.mean(err**2))))
    return best


def estimate_frequencies(seq: LagMomentSequence, D: int, grid=None, P: int | None = None) -> np.ndarray:
    """Hankel, noise subspace, pseudospectrum and peaks in one call."""
    H = build_hankel(seq.consecutive(), P)
    return pick_peaks(music_spectrum(noise_subspace(H, D), grid), D).locations


def estimate_doas(seq: LagMomentSequence, D: int, grid=None, P: int | None = None) -> np.ndarray:
    """As :func:`estimate_frequencies` with a direction grid in degrees."""
    H = build_hankel(seq.consecutive(), P)
    return pick_peaks(music_spectrum(noise_subspace(H, D), grid, doa=True), D).locations
