"""Diophantine-equation sparse sensing: sampling schemes, sparse arrays,
higher-order lag moments and subspace estimation."""

from .arrays import (
    ArrayGeometry,
    CoarrayReport,
    coarray_lags,
    design_coprime_array,
    design_diophantine_array,
    lag_triples,
)
from .diophantine import (
    SampleSchedule,
    SamplerSet,
    SchemeCoefficients,
    build_schedule,
    consecutive_scheme,
    delay_bound,
    enumerate_triplets,
    ext_gcd,
    gcd_many,
    solve_scheme,
    validate_scheme,
)
from .harness import ExperimentConfig, SweepResult, emit_csv, run_doa_experiment, run_freq_experiment
from .moments import (
    LagMomentSequence,
    coprime_second_order,
    degeneracy_check,
    diophantine_third_order,
    doa_lag_sequence,
    doa_third_order,
    find_bezout_pair,
)
from .spectral import build_hankel, music_spectrum, noise_subspace, pick_peaks, rmse_matched
from .waveform import NoiseSpec, SampleStream, SourceSet, downsample_stream, random_sources, sample_at

__version__ = "0.1.0"
