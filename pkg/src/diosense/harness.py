"""Monte-Carlo RMSE-vs-SNR sweeps for frequency and direction estimation.

Every work item is one ``(snr, trial, method)`` triple. Its random numbers
come from a :class:`numpy.random.SeedSequence` keyed on the base seed and
the item's coordinates, so results do not depend on execution order or on
the number of workers. Source draws depend only on ``(trial, attempt)``, so
without redraws all SNR points and methods of one trial see the same sources.
"""
from __future__ import annotations

import csv
import dataclasses
import logging
import math
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Iterable

import numpy as np

from .arrays import coarray_lags, design_coprime_array, design_diophantine_array
from .diophantine import build_schedule, consecutive_scheme
from .errors import DegeneracyError, DegenerateSpectrumError
from .moments import (
    coprime_demands,
    coprime_second_order,
    diophantine_third_order,
    doa_lag_sequence,
    doa_second_order_sequence,
)
from .spectral import (
    default_rows,
    doa_grid,
    estimate_doas,
    estimate_frequencies,
    frequency_grid,
    rmse_matched,
)
from .waveform import (
    NoiseSpec,
    array_snapshots,
    downsample_stream,
    random_narrowband_sources,
    random_sources,
    snr_to_sigma2,
)

log = logging.getLogger(__name__)

__all__ = [
    "ExperimentConfig",
    "SweepRow",
    "SweepResult",
    "load_config",
    "run_freq_experiment",
    "run_doa_experiment",
    "run_experiment",
    "run_trial",
    "emit_csv",
]

METHODS = ("diophantine", "coprime")
MAX_REDRAWS = 20
CSV_HEADER = ["snr_db", "method", "rmse", "trials", "redraws", "mean_runtime_ms"]


def _hankel_fits(n_lags: int, D: int) -> bool:
    P = default_rows(n_lags)
    return min(P, n_lags - P + 1) > D


@dataclass(frozen=True)
class ExperimentConfig:
    mode: str = "freq"
    D: int = 0  # 0 picks 5 sources for freq, 3 for doa
    snr_db: tuple[float, ...] = (-10.0, -5.0, 0.0, 5.0, 10.0)
    trials: int = 100
    seed: int = 0
    methods: tuple[str, ...] = METHODS
    workers: int = 1
    # frequency mode
    K: int = 64
    L: int = 64
    gamma: int = 0
    coprime_rates: tuple[int, int] = (8, 9)
    grid_points: int = 4096
    min_sep: float = 0.1
    # direction mode
    p1: int = 4
    p2: int = 3
    q: int = 5
    coprime_array: tuple[int, int] = (7, 4)
    max_lag: int = 0  # 0 means p1*p2*q
    grid_step_deg: float = 0.05
    theta_range_deg: tuple[float, float] = (-60.0, 60.0)
    theta_min_sep_deg: float = 1.0
    f_min_sep: float = 0.02

    def __post_init__(self):
        if self.mode not in ("freq", "doa"):
            raise ValueError(f"mode must be 'freq' or 'doa', got {self.mode!r}")
        if self.D == 0:
            object.__setattr__(self, "D", 5 if self.mode == "freq" else 3)
        object.__setattr__(self, "snr_db", tuple(float(s) for s in self.snr_db))
        if self.trials < 1:
            raise ValueError(f"trials must be >= 1, got {self.trials}")
        if not self.snr_db:
            raise ValueError("SNR list is empty")
        if self.D < 1:
            raise ValueError("D must be >= 1")
        if self.workers < 1:
            raise ValueError("workers must be >= 1")
        unknown = set(self.methods) - set(METHODS)
        if unknown or not self.methods:
            raise ValueError(f"methods must be a nonempty subset of {METHODS}, got {self.methods}")
        if self.mode == "freq":
            self._check_freq()
        else:
            self._check_doa()

    def _check_freq(self):
        if self.K < 1 or self.L < 1:
            raise ValueError("K and L must be >= 1")
        consecutive_scheme(self.gamma)
        if self.D > 1 and self.D * self.min_sep >= 2 * math.pi:
            raise ValueError(f"{self.D} sources cannot be {self.min_sep} rad apart")
        if not _hankel_fits(self.K, self.D):
            raise ValueError(f"K={self.K} lags cannot resolve D={self.D} sources")
        if "coprime" in self.methods:
            m1, m2 = self.coprime_rates
            if math.gcd(m1, m2) != 1:
                raise ValueError(f"co-prime baseline rates {self.coprime_rates} are not coprime")
            if self.K - 1 > m1 * m2:
                raise ValueError(f"co-prime baseline covers lags up to {m1 * m2}, K-1={self.K - 1}")
        if self.grid_points < 3:
            raise ValueError("grid needs at least three points")

    def _check_doa(self):
        if self.L < 2:
            raise ValueError("direction mode needs L >= 2 snapshots")
        g = design_diophantine_array(self.p1, self.p2, self.q)
        if self.max_lag < 0:
            raise ValueError("max_lag must be nonnegative")
        if "diophantine" in self.methods:
            span = coarray_lags(g).span
            if self.lag_count > span + 1:
                raise ValueError(f"max_lag {self.lag_count - 1} exceeds the consecutive span {span}")
            if not _hankel_fits(self.lag_count, self.D):
                raise ValueError(f"{self.lag_count} lags cannot resolve D={self.D} sources")
        if "coprime" in self.methods:
            m1, m2 = self.coprime_array
            design_coprime_array(m1, m2)
            if not _hankel_fits(m1 * m2 + 1, self.D):
                raise ValueError(f"co-prime array {self.coprime_array} cannot resolve D={self.D}")
        lo, hi = self.theta_range_deg
        if not -90 <= lo < hi <= 90:
            raise ValueError(f"bad direction range {self.theta_range_deg}")

    @property
    def lag_count(self) -> int:
        return (self.max_lag or self.p1 * self.p2 * self.q) + 1

    def replace(self, **changes) -> "ExperimentConfig":
        return dataclasses.replace(self, **changes)


def _coerce(value: str, kind):
    text = str(kind)
    if text.startswith("tuple"):
        inner = float if "float" in text else (int if "int" in text else str)
        return tuple(inner(v.strip()) for v in value.split(",") if v.strip())
    if "int" in text:
        return int(value)
    if "float" in text:
        return float(value)
    return value.strip()


def parse_config(text: str, **overrides) -> ExperimentConfig:
    """Parse flat ``key = value`` lines; ``#`` starts a comment."""
    kinds = {f.name: f.type for f in dataclasses.fields(ExperimentConfig)}
    values = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ValueError(f"config line {lineno}: expected key=value, got {raw!r}")
        key, val = (part.strip() for part in line.split("=", 1))
        if key not in kinds:
            raise ValueError(f"config line {lineno}: unknown key {key!r}")
        try:
            values[key] = _coerce(val, kinds[key])
        except ValueError as exc:
            raise ValueError(f"config line {lineno}: bad value for {key}: {val!r}") from exc
    values.update({k: v for k, v in overrides.items() if v is not None})
    return ExperimentConfig(**values)


def load_config(path, **overrides) -> ExperimentConfig:
    with open(path, encoding="utf-8") as fh:
        return parse_config(fh.read(), **overrides)


@dataclass(frozen=True)
class SweepRow:
    snr_db: float
    method: str
    rmse: float
    trials: int
    redraws: int
    mean_runtime_ms: float


@dataclass
class SweepResult:
    rows: list[SweepRow] = field(default_factory=list)
    trial_rmse: dict = field(default_factory=dict, repr=False)  # (snr_db, method) -> ndarray

    def rmse(self, method: str) -> np.ndarray:
        return np.array([r.rmse for r in self.rows if r.method == method])

    def snrs(self, method: str) -> np.ndarray:
        return np.array([r.snr_db for r in self.rows if r.method == method])


# -- single trials ----------------------------------------------------------


def _seq(cfg, *key) -> np.random.SeedSequence:
    return np.random.SeedSequence(cfg.seed, spawn_key=tuple(int(k) for k in key))


def _noise_seed(ss: np.random.SeedSequence) -> int:
    return int(ss.generate_state(1, dtype=np.uint64)[0])


@lru_cache(maxsize=8)
def _schedule(gamma, K, L):
    return build_schedule(consecutive_scheme(gamma), K, L)


def _freq_trial(cfg: ExperimentConfig, method: str, snr_db: float, trial: int, snr_idx: int, attempt: int):
    src = random_sources(cfg.D, cfg.min_sep, seed=_seq(cfg, trial, attempt))
    noise = NoiseSpec(snr_to_sigma2(snr_db, src.power), _noise_seed(_seq(cfg, trial, attempt, snr_idx, METHODS.index(method))))
    grid = frequency_grid(cfg.grid_points)
    if method == "diophantine":
        sched = _schedule(cfg.gamma, cfg.K, cfg.L)
        streams = [downsample_stream(src, M, sched.demanded(i), noise, i) for i, M in enumerate(sched.scheme.rates)]
        seq = diophantine_third_order(streams, sched, src)
    else:
        m1, m2 = cfg.coprime_rates
        d1, d2 = coprime_demands(m1, m2, cfg.K, cfg.L)
        x1 = downsample_stream(src, m1, d1, noise, 0)
        x2 = downsample_stream(src, m2, d2, noise, 1)
        seq = coprime_second_order(x1, x2, cfg.K, cfg.L)
    est = estimate_frequencies(seq, cfg.D, grid)
    return rmse_matched(est, src.freqs, circular=True)


def _doa_trial(cfg: ExperimentConfig, method: str, snr_db: float, trial: int, snr_idx: int, attempt: int):
    src = random_narrowband_sources(
        cfg.D, cfg.theta_range_deg, cfg.theta_min_sep_deg, min_freq_sep=cfg.f_min_sep, seed=_seq(cfg, trial, attempt)
    )
    rng = np.random.default_rng(_seq(cfg, trial, attempt, snr_idx, METHODS.index(method)))
    sigma2 = snr_to_sigma2(snr_db, src.power)
    if method == "diophantine":
        g = design_diophantine_array(cfg.p1, cfg.p2, cfg.q)
        X = array_snapshots(src, g.positions, cfg.L, sigma2, rng)
        seq = doa_lag_sequence(X, g, cfg.lag_count - 1)
    else:
        g = design_coprime_array(*cfg.coprime_array)
        X = array_snapshots(src, g.positions, cfg.L, sigma2, rng)
        seq = doa_second_order_sequence(X, g)
    est = estimate_doas(seq, cfg.D, doa_grid(cfg.grid_step_deg))
    return rmse_matched(est, src.thetas_deg)


def run_trial(cfg: ExperimentConfig, method: str, snr_idx: int, trial: int) -> tuple[float, int, float]:
    """One Monte-Carlo trial; returns ``(rmse, redraws, runtime_ms)``.

    A degenerate source draw or spectrum is redrawn from the next substream.
    """
    fn = _freq_trial if cfg.mode == "freq" else _doa_trial
    snr_db = cfg.snr_db[snr_idx]
    t0 = time.perf_counter()
    for attempt in range(MAX_REDRAWS):
        try:
            rmse = fn(cfg, method, snr_db, trial, snr_idx, attempt)
        except (DegeneracyError, DegenerateSpectrumError) as exc:
            log.debug("trial %d at %s dB redrawn: %s", trial, snr_db, exc)
            continue
        return rmse, attempt, 1e3 * (time.perf_counter() - t0)
    raise DegenerateSpectrumError(f"trial {trial} at {snr_db} dB stayed degenerate after {MAX_REDRAWS} draws")


def _run_chunk(args):
    cfg, items = args
    return [run_trial(cfg, *item) for item in items]


def run_experiment(cfg: ExperimentConfig) -> SweepResult:
    items = [
        (method, si, t)
        for si in range(len(cfg.snr_db))
        for method in cfg.methods
        for t in range(cfg.trials)
    ]
    if cfg.workers == 1:
        results = [run_trial(cfg, *item) for item in items]
    else:
        size = max(1, len(items) // (4 * cfg.workers))
        chunks = [(cfg, items[i:i + size]) for i in range(0, len(items), size)]
        with ProcessPoolExecutor(max_workers=cfg.workers) as pool:
            results = [r for chunk in pool.map(_run_chunk, chunks) for r in chunk]
    out = SweepResult()
    for si, snr in enumerate(cfg.snr_db):
        for method in cfg.methods:
            sel = [r for (m, s, _), r in zip(items, results) if m == method and s == si]
            rmse = np.array([r[0] for r in sel])
            out.trial_rmse[(snr, method)] = rmse
            out.rows.append(
                SweepRow(
                    float(snr),
                    method,
                    float(np.mean(rmse)),
                    len(sel),
                    int(sum(r[1] for r in sel)),
                    float(np.mean([r[2] for r in sel])),
                )
            )
    return out


def run_freq_experiment(cfg: ExperimentConfig) -> SweepResult:
    if cfg.mode != "freq":
        raise ValueError("configuration is not in frequency mode")
    return run_experiment(cfg)


def run_doa_experiment(cfg: ExperimentConfig) -> SweepResult:
    if cfg.mode != "doa":
        raise ValueError("configuration is not in direction mode")
    return run_experiment(cfg)


def emit_csv(result: SweepResult | Iterable[SweepRow], path, runtime_column: bool = True) -> None:
    """Write one row per sweep point; floats use shortest round-trip repr."""
    rows = result.rows if isinstance(result, SweepResult) else list(result)
    header = CSV_HEADER if runtime_column else CSV_HEADER[:-1]
    try:
        with open(path, "w", encoding="utf-8", newline="") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(header)
            for r in rows:
                line = [repr(r.snr_db), r.method, repr(r.rmse), r.trials, r.redraws]
                if runtime_column:
                    line.append(repr(r.mean_runtime_ms))
                writer.writerow(line)
    except OSError as exc:
        raise OSError(f"cannot write {path}: {exc.strerror or exc}") from exc
