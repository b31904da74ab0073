import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from diosense.errors import DegenerateSpectrumError
from diosense.moments import LagMomentSequence, analytic_third_order
from diosense.spectral import (
    Pseudospectrum,
    build_hankel,
    default_rows,
    doa_grid,
    estimate_frequencies,
    frequency_grid,
    music_spectrum,
    noise_subspace,
    pick_peaks,
    rmse_matched,
)
from diosense.waveform import random_sources

STEP = 2 * np.pi / 4096


def seq_of(values, first=0):
    values = np.asarray(values, dtype=complex)
    return LagMomentSequence(3, np.arange(first, first + values.size), values, np.ones(values.size, int))


def test_hankel_example():
    H = build_hankel(seq_of([1, 1j, -1, -1j]), P=2)
    assert np.array_equal(H.data, np.array([[1, 1j, -1], [1j, -1, -1j]]))
    assert np.linalg.matrix_rank(H.data) == 1


@pytest.mark.parametrize("K", [4, 7, 64, 65])
def test_hankel_default_shape(K):
    H = build_hankel(seq_of(np.ones(K)))
    P = default_rows(K)
    assert P == int(np.ceil((K + 1) / 2))
    assert H.shape == (P, K - P + 1)


def test_hankel_zero_and_errors():
    assert not build_hankel(seq_of(np.zeros(6))).data.any()
    with pytest.raises(ValueError):
        build_hankel(LagMomentSequence(3, [0, 2], [1, 1]))
    with pytest.raises(ValueError):
        build_hankel(seq_of([]))
    with pytest.raises(ValueError):
        build_hankel(seq_of(np.ones(5)), P=6)


def test_noise_subspace_rank_one():
    w = 0.7
    H = build_hankel(seq_of(np.exp(1j * w * np.arange(20))))
    U = noise_subspace(H, 1)
    v = np.exp(1j * w * np.arange(U.shape[0]))
    assert np.linalg.norm(U.conj().T @ v) < 1e-8
    assert U.shape == (H.shape[0], H.shape[0] - 1)


def test_noise_subspace_errors_and_zero():
    H = build_hankel(seq_of(np.ones(9)))
    with pytest.raises(ValueError):
        noise_subspace(H, min(H.shape))
    Z = noise_subspace(np.zeros((4, 5)), 0)
    assert np.allclose(Z.conj().T @ Z, np.eye(4))


def test_music_single_exponential_peak():
    w = -1.234
    U = noise_subspace(build_hankel(seq_of(np.exp(1j * w * np.arange(30)))), 1)
    p = music_spectrum(U)
    assert p.grid.size == 4096 and p.grid[-1] == np.pi and p.grid[0] > -np.pi
    assert abs(p.grid[np.argmax(p.power)] - w) <= STEP


def test_music_full_basis_flat():
    p = music_spectrum(np.eye(8, dtype=complex))
    assert np.allclose(p.power, 1.0)


def test_doa_grid():
    g = doa_grid()
    assert g[0] == -90 and g[-1] == 90 and np.allclose(np.diff(g), 0.05)


def test_pick_two_peaks():
    grid = frequency_grid()
    truth = np.array([-1.0, 2.0])
    power = sum(1 / (1e-3 + (np.angle(np.exp(1j * (grid - t)))) ** 2) for t in truth)
    peaks = pick_peaks(Pseudospectrum(grid, power, periodic=True), 2)
    assert np.all(np.abs(peaks.locations - truth) <= STEP)


def test_pick_peaks_errors():
    flat = Pseudospectrum(frequency_grid(64), np.ones(64), periodic=True)
    with pytest.raises(DegenerateSpectrumError):
        pick_peaks(flat, 1)
    with pytest.raises(ValueError):
        pick_peaks(flat, 65)


def test_pick_peaks_nonperiodic_ignores_endpoints():
    grid = np.linspace(-90, 90, 181)
    power = np.exp(-((grid - 20) ** 2) / 50) + 5 * np.exp((grid - 90) / 5)  # taller rising edge at +90
    peaks = pick_peaks(Pseudospectrum(grid, power), 1)
    assert abs(peaks.locations[0] - 20) < 1


def test_peak_near_wrap_point():
    w = np.pi - 0.3 * STEP
    U = noise_subspace(build_hankel(seq_of(np.exp(1j * w * np.arange(40)))), 1)
    loc = pick_peaks(music_spectrum(U), 1).locations[0]
    assert abs(np.angle(np.exp(1j * (loc - w)))) <= STEP


@settings(max_examples=40, deadline=None)
@given(st.floats(-np.pi, np.pi), st.floats(0.1, 5.0), st.floats(0, 2 * np.pi))
def test_refinement_within_one_step(w, amp, phase):
    vals = amp * np.exp(1j * phase) * np.exp(1j * w * np.arange(24))
    p = music_spectrum(noise_subspace(build_hankel(seq_of(vals)), 1))
    loc = pick_peaks(p, 1).locations[0]
    raw = p.grid[np.argmax(p.power)]
    assert abs(np.angle(np.exp(1j * (loc - raw)))) <= STEP + 1e-12


def test_rmse_examples():
    t = np.array([0.1, -0.4, 2.0])
    assert rmse_matched(t, t) == 0
    assert abs(rmse_matched(t + 0.01, t) - 0.01) < 1e-12
    assert rmse_matched([1.2, 0.5], [0.5, 1.2]) == 0
    with pytest.raises(ValueError):
        rmse_matched([1.0], [1.0, 2.0])


def test_rmse_circular_pairs_across_wrap():
    truth = [np.pi - 0.01, 0.0]
    est = [-np.pi + 0.01, 0.0]
    assert rmse_matched(est, truth, circular=True) == pytest.approx(0.02 / np.sqrt(2))
    assert rmse_matched(est, truth) > 1


@pytest.mark.parametrize("seed", range(10))
def test_exact_moment_recovery(seed):
    D, K = 3, 4 * 3 + 2
    s = random_sources(D, min_sep=2 * np.pi * 10 / 64, amp_range=(0.5, 2.0), seed=seed)
    seq = LagMomentSequence(3, np.arange(K), analytic_third_order(s, np.arange(K)))
    est = estimate_frequencies(seq, D)
    assert rmse_matched(est, s.freqs, circular=True) <= STEP


def test_subspace_orthogonality_exact_rank():
    s = random_sources(4, min_sep=0.3, seed=3)
    vals = analytic_third_order(s, np.arange(40))
    U = noise_subspace(build_hankel(seq_of(vals)), 4)
    V = np.exp(1j * np.outer(np.arange(U.shape[0]), s.freqs)) / np.sqrt(U.shape[0])
    assert np.linalg.norm(U.conj().T @ V, axis=0).max() < 1e-6


@settings(max_examples=25, deadline=None)
@given(st.complex_numbers(min_magnitude=1e-3, max_magnitude=1e3, allow_nan=False, allow_infinity=False))
def test_scaling_invariance(c):
    s = random_sources(3, min_sep=0.5, seed=1)
    seq = seq_of(analytic_third_order(s, np.arange(32)))
    a = estimate_frequencies(seq, 3)
    b = estimate_frequencies(seq.scaled(c), 3)
    assert np.allclose(a, b, atol=1e-9)


def test_pseudospectrum_csv():
    p = Pseudospectrum(np.array([0.0, 1.0]), np.array([1.0, 2.5]))
    assert p.to_csv() == "abscissa,power\n0.0,1.0\n1.0,2.5\n"
