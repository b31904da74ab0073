import numpy as np
import pytest
from scipy import stats

from diosense.errors import IncompleteStreamError
from diosense.waveform import (
    NarrowbandSources,
    NoiseSpec,
    SourceSet,
    array_snapshots,
    complex_noise,
    downsample_stream,
    random_narrowband_sources,
    random_sources,
    sample_at,
    sensor_snapshot,
)


def circ_gaps(w):
    w = np.sort(np.mod(w, 2 * np.pi))
    return np.diff(np.concatenate([w, [w[0] + 2 * np.pi]]))


def test_random_sources_single():
    s = random_sources(1, min_sep=10.0, seed=3)
    assert s.D == 1


def test_random_sources_separation():
    for seed in range(50):
        s = random_sources(5, min_sep=0.1, seed=seed)
        assert circ_gaps(s.freqs).min() >= 0.1 - 1e-12
        assert np.all((s.freqs > -np.pi) & (s.freqs <= np.pi))


def test_random_sources_tight_packing_still_feasible():
    s = random_sources(60, min_sep=0.1, seed=1)
    assert circ_gaps(s.freqs).min() >= 0.1 - 1e-12


def test_random_sources_infeasible():
    with pytest.raises(ValueError):
        random_sources(100, min_sep=0.1)


def test_random_sources_deterministic():
    a, b = random_sources(4, seed=11), random_sources(4, seed=11)
    assert np.array_equal(a.freqs, b.freqs) and np.array_equal(a.phases, b.phases)


def test_phase_uniformity():
    s = random_sources(10_000, min_sep=1e-4, seed=5)
    res = stats.kstest(s.phases / (2 * np.pi), "uniform")
    assert res.statistic < 1.63 / np.sqrt(10_000)  # 1% critical value


def test_sample_at_examples():
    dc = SourceSet([1.0], [0.0], [0.0])
    assert sample_at(dc, 123) == 1 + 0j
    quarter = SourceSet([2.0], [np.pi / 2], [0.0])
    assert abs(sample_at(quarter, 1) - 2j) < 1e-12
    two = SourceSet([1.0, 1.0], [0.3, -1.1], [0.0, 0.0])
    assert sample_at(two, 0) == 2 + 0j


def test_noiseless_stream_equals_signal():
    s = random_sources(3, seed=2)
    st = downsample_stream(s, 7, [0, 3, 10, 11], NoiseSpec(0.0))
    assert np.array_equal(st.values, sample_at(s, np.array([0, 21, 70, 77])))


def test_stream_noise_variance():
    s = random_sources(2, seed=2)
    idx = np.arange(100_000)
    st = downsample_stream(s, 3, idx, NoiseSpec(1.0, seed=9))
    w = st.values - sample_at(s, idx * 3)
    assert abs(np.var(w) - 1.0) < 0.05


def test_noise_circularity():
    n = 200_000
    w = complex_noise(np.random.default_rng(0), 2.0, n)
    assert abs(np.mean(w**2)) < 3 * 2.0 / np.sqrt(n)


def test_empty_stream():
    st = downsample_stream(random_sources(1, seed=0), 5, [], NoiseSpec(1.0))
    assert len(st) == 0


def test_streams_independent_and_reproducible():
    s = random_sources(1, seed=0)
    idx = np.arange(20_000)
    a = downsample_stream(s, 2, idx, NoiseSpec(1.0, seed=4), stream_id=0)
    a2 = downsample_stream(s, 2, idx, NoiseSpec(1.0, seed=4), stream_id=0)
    b = downsample_stream(s, 2, idx, NoiseSpec(1.0, seed=4), stream_id=1)
    assert np.array_equal(a.values, a2.values)
    wa, wb = a.values - sample_at(s, idx * 2), b.values - sample_at(s, idx * 2)
    assert abs(np.mean(wa * np.conj(wb))) < 4 / np.sqrt(idx.size)


def test_stream_lookup():
    st = downsample_stream(random_sources(1, seed=0), 5, [2, 4, 9], NoiseSpec())
    assert st[4] == st.take([4])[0]
    with pytest.raises(IncompleteStreamError):
        st.take([2, 3])


def test_sensor_snapshot_examples():
    src = NarrowbandSources([0.0], [0.1], [2.0 + 1.0j])
    n = 7
    base = (2.0 + 1.0j) * np.exp(2j * np.pi * 0.1 * n)
    assert abs(sensor_snapshot(src, 13, n) - base) < 1e-12
    src30 = NarrowbandSources([np.radians(30.0)], [0.1], [2.0 + 1.0j])
    assert abs(sensor_snapshot(src30, 2, n) + base) < 1e-12
    two = random_narrowband_sources(3, seed=1)
    assert sensor_snapshot(two, 5, 3) == sensor_snapshot(two, 5, 3)


def test_broadside_position_independent_of_direction():
    a = NarrowbandSources([0.3], [0.2], [1.0])
    b = NarrowbandSources([-1.1], [0.2], [1.0])
    assert abs(sensor_snapshot(a, 0, 4) - sensor_snapshot(b, 0, 4)) < 1e-12


def test_array_snapshots_match_scalar_model():
    src = random_narrowband_sources(3, seed=8)
    X = array_snapshots(src, [0, 3, 12], 5)
    assert X.shape == (3, 5)
    assert abs(X[1, 2] - sensor_snapshot(src, 3, 3)) < 1e-12
    same = array_snapshots(src, [4, 4], 6)
    assert np.array_equal(same[0], same[1])


def test_narrowband_sources_constraints():
    for seed in range(20):
        src = random_narrowband_sources(10, seed=seed)
        th = np.sort(src.thetas_deg)
        assert th.min() >= -60 and th.max() <= 60 and np.diff(th).min() >= 1 - 1e-9
        f = np.sort(src.freqs)
        assert f.min() > 0 and f.max() < 0.5 and np.diff(f).min() >= 0.02 - 1e-12
