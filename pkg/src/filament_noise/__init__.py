"""Spectral correlations and noise reduction in self-phase-modulated pulse ensembles.

A 1D split-step propagator broadens seeded, jittered pulses; the resulting
ensembles of spectra feed Pearson correlation maps, Fano and Gemellity
factors, and spectral-filtering noise figures.
"""

from .config import RunConfig, default_config, load_config
from .detection import (
    Channel,
    DetectorModel,
    channel_counts,
    conjugate_wavelength,
    conjugation_locus,
    window_series,
)
from .ensemble import (
    EnsembleSpectra,
    JitterModel,
    PulseParameters,
    ShotSet,
    SpectrometerBinning,
    generate_shots,
    run_arm,
)
from .errors import (
    ConfigError,
    DegenerateStatisticsError,
    FilamentNoiseError,
    FormatError,
    NumericalError,
)
from .grid import Field, Grid, Spectrum, gaussian_pulse, make_grid, spectrum_of
from .io import load_csv, load_ensemble, save_csv, save_ensemble
from .propagation import Medium, StepControl, propagate, soliton_field, spm_analytic
from .statistics import (
    CorrelationMap,
    correlation_map,
    fano,
    gemellity,
    noise_reduction_db,
    normalize_rows,
    pearson,
)

__version__ = "0.1.0"
