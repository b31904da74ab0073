"""Multi-source complex waveforms, sparse sample streams and array snapshots.

Streams are only ever evaluated at the sample numbers a schedule asks for.
With rates around 1e6 a dense simulation of the Nyquist-rate signal would be
pointless, and sparsity is the whole reason for the schedules.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import IncompleteStreamError

__all__ = [
    "SourceSet",
    "NarrowbandSources",
    "NoiseSpec",
    "SampleStream",
    "random_sources",
    "random_narrowband_sources",
    "sample_at",
    "complex_noise",
    "downsample_stream",
    "sensor_snapshot",
    "array_snapshots",
    "snr_to_sigma2",
]

DEFAULT_MIN_SEP = 2 * np.pi / 1000


def _rng(seed) -> np.random.Generator:
    return np.random.default_rng(seed)


def _wrap(w):
    """Map angles into (-pi, pi]."""
    return np.pi - np.mod(np.pi - np.asarray(w, dtype=float), 2 * np.pi)


@dataclass(frozen=True)
class SourceSet:
    """``D`` complex exponentials ``A_i exp(j(w_i t + phi_i))``.

    Frequencies are digital, in radians per Nyquist sample.
    """

    amplitudes: np.ndarray
    freqs: np.ndarray
    phases: np.ndarray

    def __post_init__(self):
        amps = np.atleast_1d(np.asarray(self.amplitudes, dtype=float))
        freqs = np.atleast_1d(np.asarray(self.freqs, dtype=float))
        phases = np.atleast_1d(np.asarray(self.phases, dtype=float))
        if not (amps.shape == freqs.shape == phases.shape) or amps.ndim != 1:
            raise ValueError("amplitudes, freqs and phases must be 1-D of equal length")
        if amps.size < 1:
            raise ValueError("need at least one source")
        if np.any(amps <= 0):
            raise ValueError("amplitudes must be positive")
        object.__setattr__(self, "amplitudes", amps)
        object.__setattr__(self, "freqs", freqs)
        object.__setattr__(self, "phases", phases)

    @property
    def D(self) -> int:
        return self.amplitudes.size

    @property
    def power(self) -> float:
        return float(np.sum(self.amplitudes**2))

    @property
    def complex_amplitudes(self) -> np.ndarray:
        return self.amplitudes * np.exp(1j * self.phases)


@dataclass(frozen=True)
class NarrowbandSources:
    """Far-field narrowband sources for array processing.

    Attributes
    ----------
    thetas : ndarray
        Directions of arrival in radians, measured from broadside.
    freqs : ndarray
        Baseband offset frequencies in cycles per snapshot.
    gains : ndarray
        Complex source values ``s_i``, constant over the coherence block.
    """

    thetas: np.ndarray
    freqs: np.ndarray
    gains: np.ndarray

    def __post_init__(self):
        thetas = np.atleast_1d(np.asarray(self.thetas, dtype=float))
        freqs = np.atleast_1d(np.asarray(self.freqs, dtype=float))
        gains = np.atleast_1d(np.asarray(self.gains, dtype=complex))
        if not (thetas.shape == freqs.shape == gains.shape) or thetas.ndim != 1:
            raise ValueError("thetas, freqs and gains must be 1-D of equal length")
        object.__setattr__(self, "thetas", thetas)
        object.__setattr__(self, "freqs", freqs)
        object.__setattr__(self, "gains", gains)

    @property
    def D(self) -> int:
        return self.thetas.size

    @property
    def power(self) -> float:
        return float(np.sum(np.abs(self.gains) ** 2))

    @property
    def thetas_deg(self) -> np.ndarray:
        return np.degrees(self.thetas)


@dataclass(frozen=True)
class NoiseSpec:
    """Circularly-symmetric complex Gaussian noise of power ``sigma2``."""

    sigma2: float = 0.0
    seed: int = 0

    def __post_init__(self):
        if self.sigma2 < 0:
            raise ValueError(f"noise power must be nonnegative, got {self.sigma2}")

    def generator(self, stream_id: int = 0) -> np.random.Generator:
        """Independent generator per stream, derived from ``seed``."""
        return np.random.default_rng(np.random.SeedSequence(self.seed, spawn_key=(stream_id,)))


def snr_to_sigma2(snr_db: float, signal_power: float) -> float:
    return signal_power / 10.0 ** (snr_db / 10.0)


def _spread(rng, n, width, min_sep):
    """Sorted points on an interval of ``width`` that keep ``min_sep`` apart."""
    slack = width - (n - 1) * min_sep
    u = np.sort(rng.uniform(0.0, slack, n))
    return u + min_sep * np.arange(n)


def random_sources(D: int, min_sep: float = DEFAULT_MIN_SEP, amp_range=(1.0, 1.0), seed=None) -> SourceSet:
    """Draw ``D`` sources with circular frequency separation of at least ``min_sep``.

    Frequencies are uniform on the circle subject to the spacing constraint,
    phases uniform on ``[0, 2pi)`` and amplitudes uniform on ``amp_range``.
    """
    if D < 1:
        raise ValueError("D must be at least 1")
    if D > 1 and D * min_sep >= 2 * np.pi:
        raise ValueError(f"cannot place {D} frequencies {min_sep} apart on the circle")
    lo, hi = amp_range
    if lo <= 0 or hi < lo:
        raise ValueError(f"bad amplitude range {amp_range}")
    rng = _rng(seed)
    if D == 1:
        freqs = rng.uniform(-np.pi, np.pi, 1)
    else:
        # spacing on a circle of length 2pi - min_sep leaves the wrap gap >= min_sep
        pts = _spread(rng, D, 2 * np.pi - min_sep, min_sep)
        freqs = np.sort(_wrap(pts + rng.uniform(0, 2 * np.pi)))
    amps = rng.uniform(lo, hi, D)
    phases = rng.uniform(0.0, 2 * np.pi, D)
    return SourceSet(amps, freqs, phases)


def random_narrowband_sources(
    D: int,
    theta_range_deg=(-60.0, 60.0),
    min_sep_deg: float = 1.0,
    freq_range=(0.0, 0.5),
    min_freq_sep: float = 0.02,
    seed=None,
) -> NarrowbandSources:
    """Directions uniform on ``theta_range_deg``, distinct nonzero offset frequencies.

    Gains have unit modulus and uniform phase.
    """
    if D < 1:
        raise ValueError("D must be at least 1")
    lo, hi = theta_range_deg
    if (D - 1) * min_sep_deg >= hi - lo:
        raise ValueError(f"cannot place {D} directions {min_sep_deg} deg apart in {theta_range_deg}")
    flo, fhi = freq_range
    # open interval: keep min_freq_sep clear of both ends so f is never 0
    fwidth = fhi - flo - 2 * min_freq_sep
    if fwidth <= 0 or (D - 1) * min_freq_sep >= fwidth:
        raise ValueError(f"cannot place {D} frequencies {min_freq_sep} apart in {freq_range}")
    rng = _rng(seed)
    thetas = lo + _spread(rng, D, hi - lo, min_sep_deg)
    freqs = flo + min_freq_sep + _spread(rng, D, fwidth, min_freq_sep)
    rng.shuffle(freqs)
    gains = np.exp(2j * np.pi * rng.uniform(0, 1, D))
    return NarrowbandSources(np.radians(thetas), freqs, gains)


def sample_at(s: SourceSet, t_index):
    """The noiseless waveform at integer Nyquist ticks (scalar or array)."""
    t = np.asarray(t_index, dtype=float)
    phase = np.multiply.outer(t, s.freqs) + s.phases
    out = (s.amplitudes * np.exp(1j * phase)).sum(axis=-1)
    return complex(out) if out.ndim == 0 else out


def complex_noise(rng: np.random.Generator, sigma2: float, shape) -> np.ndarray:
    """Circular complex Gaussian draws with ``E|w|^2 = sigma2``."""
    if sigma2 == 0:
        return np.zeros(shape, dtype=complex)
    scale = np.sqrt(sigma2 / 2.0)
    return scale * (rng.standard_normal(shape) + 1j * rng.standard_normal(shape))


@dataclass(frozen=True)
class SampleStream:
    """Samples ``x(n M T_s) + w(n)`` held only at a sparse index set."""

    rate: int
    indices: np.ndarray
    values: np.ndarray = field(repr=False)

    def __len__(self):
        return self.indices.size

    def take(self, n) -> np.ndarray:
        """Values at sample numbers ``n`` (any shape)."""
        n = np.asarray(n, dtype=np.int64)
        if n.size == 0:
            return np.zeros(n.shape, dtype=complex)
        if self.indices.size == 0:
            raise IncompleteStreamError(f"stream at rate {self.rate} is empty")
        pos = np.minimum(np.searchsorted(self.indices, n), self.indices.size - 1)
        missing = self.indices[pos] != n
        if missing.any():
            raise IncompleteStreamError(
                f"stream at rate {self.rate} lacks sample index {int(n[missing].flat[0])}"
            )
        return self.values[pos]

    def __getitem__(self, n: int) -> complex:
        return complex(self.take(np.array([n]))[0])


def downsample_stream(s: SourceSet, M: int, indices, noise: NoiseSpec = NoiseSpec(), stream_id: int = 0) -> SampleStream:
    """Evaluate the rate-``M`` sampler at the given sample numbers.

    Noise draws come from a generator keyed on ``(noise.seed, stream_id)``, so
    distinct streams get independent noise and reruns are bit-identical.
    """
    idx = np.unique(np.asarray(indices, dtype=np.int64))
    if idx.size and idx[0] < 0:
        raise ValueError("sample indices must be nonnegative")
    signal = sample_at(s, idx * np.int64(M)) if idx.size else np.zeros(0, dtype=complex)
    values = np.asarray(signal, dtype=complex) + complex_noise(noise.generator(stream_id), noise.sigma2, idx.shape)
    return SampleStream(int(M), idx, values)


def sensor_snapshot(s: NarrowbandSources, position: float, n: int, sigma2: float = 0.0, rng=None) -> complex:
    """Baseband output of one sensor at snapshot ``n``.

    ``position`` is in units of half a wavelength, so the steering phase per
    unit is ``pi * sin(theta)``.
    """
    steer = np.exp(1j * np.pi * position * np.sin(s.thetas))
    value = complex(np.sum(steer * s.gains * np.exp(2j * np.pi * s.freqs * n)))
    if sigma2:
        value += complex(complex_noise(_rng(rng), sigma2, ()))
    return value


def array_snapshots(s: NarrowbandSources, positions, L: int, sigma2: float = 0.0, rng=None) -> np.ndarray:
    """Snapshots ``n = 1..L`` for every sensor, shape ``(len(positions), L)``.

    Column ``n - 1`` holds snapshot ``n``. Noise is independent across
    sensors and snapshots.
    """
    if L < 1:
        raise ValueError("L must be positive")
    pos = np.asarray(positions, dtype=float)
    steer = np.exp(1j * np.pi * np.multiply.outer(pos, np.sin(s.thetas)))  # (N, D)
    n = np.arange(1, L + 1)
    waves = s.gains[:, None] * np.exp(2j * np.pi * np.multiply.outer(s.freqs, n))  # (D, L)
    X = steer @ waves
    if sigma2:
        X = X + complex_noise(_rng(rng), sigma2, X.shape)
    return X
