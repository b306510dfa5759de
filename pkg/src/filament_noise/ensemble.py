"""Seeded shot ensembles: laser-noise model, arm runner and the spectra matrix."""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace

import numpy as np

from .errors import ConfigError, FilamentNoiseError, ShotFailedError
from .grid import Grid, gaussian_peak_power, gaussian_pulse, spectrum_of, Spectrum
from .propagation import Medium, StepControl, propagate

ARMS = ("filament", "reference", "external")
VALUE_KINDS = ("energy_density", "photon_counts", "normalized")


@dataclass(frozen=True)
class PulseParameters:
    """One shot's input pulse: energy (J), intensity FWHM (fs), chirp parameter."""

    energy: float = 1e-3
    duration_fwhm: float = 200.0
    chirp: float = 0.0

    def __post_init__(self):
        if not self.energy > 0:
            raise ConfigError(f"pulse energy must be positive, got {self.energy}")
        if not self.duration_fwhm > 0:
            raise ConfigError(f"pulse duration must be positive, got {self.duration_fwhm}")

    @property
    def peak_power(self) -> float:
        return gaussian_peak_power(self.energy, self.duration_fwhm)

    def field(self, grid: Grid):
        return gaussian_pulse(grid, self.peak_power, self.duration_fwhm, chirp=self.chirp)


@dataclass(frozen=True)
class JitterModel:
    """Independent Gaussian shot-to-shot jitter.

    ``sigma_energy`` and ``sigma_duration`` are relative rms values,
    ``sigma_chirp`` is absolute.
    """

    sigma_energy: float = 0.01
    sigma_duration: float = 0.005
    sigma_chirp: float = 0.0

    def __post_init__(self):
        for name in ("sigma_energy", "sigma_duration", "sigma_chirp"):
            if not getattr(self, name) >= 0:
                raise ConfigError(f"{name} must be >= 0")
        if self.sigma_energy >= 0.5 or self.sigma_duration >= 0.5:
            raise ConfigError("sigma_energy and sigma_duration must be < 0.5")


def shot_rng(seed: int, index: int) -> np.random.Generator:
    """Random stream of shot ``index``; depends on (seed, index) only."""
    return np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(index,)))


def _positive_factor(rng, sigma):
    while True:
        x = 1.0 + sigma * rng.standard_normal()
        if x > 0:
            return x


def _draw_shot(seed, index, nominal, jitter):
    rng = shot_rng(seed, index)
    # fixed draw order keeps streams comparable across jitter settings
    e = _positive_factor(rng, jitter.sigma_energy)
    d = _positive_factor(rng, jitter.sigma_duration)
    c = rng.standard_normal() * jitter.sigma_chirp
    return PulseParameters(nominal.energy * e, nominal.duration_fwhm * d, nominal.chirp + c)


@dataclass(frozen=True)
class ShotSet:
    seed: int
    n_shots: int
    nominal: PulseParameters
    jitter: JitterModel
    shots: tuple = field(repr=False)

    @property
    def energies(self) -> np.ndarray:
        return np.array([s.energy for s in self.shots])


def generate_shots(
    seed: int,
    n_shots: int,
    nominal: PulseParameters,
    jitter: JitterModel,
) -> ShotSet:
    """Materialize ``n_shots`` perturbed pulses from ``seed``."""
    if n_shots < 2:
        raise ConfigError(f"an ensemble needs at least 2 shots, got {n_shots}")
    if not 0 <= seed < 2**64:
        raise ConfigError("seed must fit an unsigned 64-bit integer")
    shots = tuple(_draw_shot(seed, i, nominal, jitter) for i in range(n_shots))
    return ShotSet(int(seed), int(n_shots), nominal, jitter, shots)


@dataclass(frozen=True)
class SpectrometerBinning:
    """Uniform wavelength bins covering ``[lo, hi]`` nm with ``width`` nm bins."""

    lo: float = 785.0
    hi: float = 845.0
    width: float = 0.3

    def __post_init__(self):
        if not (self.width > 0 and self.hi > self.lo > 0):
            raise ConfigError("spectrometer needs 0 < lo < hi and width > 0")
        n = (self.hi - self.lo) / self.width
        if abs(n - round(n)) > 1e-6:
            raise ConfigError("spectrometer range must hold a whole number of bins")

    @property
    def n_bins(self) -> int:
        return int(round((self.hi - self.lo) / self.width))

    @property
    def edges(self) -> np.ndarray:
        return self.lo + self.width * np.arange(self.n_bins + 1)

    @property
    def centers(self) -> np.ndarray:
        return (self.lo + self.width / 2) + self.width * np.arange(self.n_bins)


def bin_spectrum(spectrum: Spectrum, edges: np.ndarray) -> np.ndarray:
    """Energy (J) of ``spectrum`` falling in each bin between consecutive ``edges``.

    The density is constant over each spectral cell, so cells are split at the
    bin edges and each piece contributes density times width; contiguous bins
    partition the energy.  Only non-negative pieces are summed, so faint bins
    keep their relative precision (differencing a cumulative sum would not).
    """
    edges = np.asarray(edges, dtype=np.float64)
    cells = spectrum.edges
    pts = np.union1d(cells, np.clip(edges, cells[0], cells[-1]))
    mids = 0.5 * (pts[:-1] + pts[1:])
    pieces = spectrum.psd[np.searchsorted(cells, mids, side="right") - 1] * np.diff(pts)
    owner = np.searchsorted(edges, mids, side="right") - 1
    inside = (owner >= 0) & (owner < edges.size - 1)
    return np.bincount(owner[inside], weights=pieces[inside], minlength=edges.size - 1)


@dataclass(frozen=True)
class EnsembleSpectra:
    """Shots x bins matrix of spectral values with provenance.

    For ``energy_density`` and ``normalized`` the values are densities (J/nm or
    1/nm), so ``row.sum() * bin_width`` is the row integral.
    """

    wavelength_bins: np.ndarray
    bin_width: float
    values: np.ndarray
    value_kind: str = "energy_density"
    seed: int = 0
    arm: str = "external"
    config_digest: bytes = bytes(32)

    def __post_init__(self):
        bins = np.array(self.wavelength_bins, dtype=np.float64)
        vals = np.array(self.values, dtype=np.float64)
        if vals.ndim != 2 or vals.shape[1] != bins.size:
            raise ConfigError(
                f"values shape {vals.shape} does not match {bins.size} wavelength bins"
            )
        if not np.all(np.isfinite(vals)) or np.any(vals < 0):
            raise ConfigError("ensemble values must be finite and non-negative")
        if self.value_kind not in VALUE_KINDS:
            raise ConfigError(f"unknown value_kind {self.value_kind!r}")
        if self.arm not in ARMS:
            raise ConfigError(f"unknown arm {self.arm!r}")
        if len(self.config_digest) != 32:
            raise ConfigError("config digest must be 32 bytes")
        if self.value_kind == "normalized":
            integrals = vals.sum(axis=1) * self.bin_width
            if not np.allclose(integrals, 1.0, rtol=0, atol=1e-9):
                raise ConfigError("normalized rows must integrate to 1")
        bins.setflags(write=False)
        vals.setflags(write=False)
        object.__setattr__(self, "wavelength_bins", bins)
        object.__setattr__(self, "values", vals)
        object.__setattr__(self, "config_digest", bytes(self.config_digest))

    @property
    def n_shots(self) -> int:
        return self.values.shape[0]

    @property
    def n_bins(self) -> int:
        return self.values.shape[1]

    @property
    def bin_edges(self) -> np.ndarray:
        return np.concatenate(
            (self.wavelength_bins - self.bin_width / 2,
             [self.wavelength_bins[-1] + self.bin_width / 2])
        )

    @property
    def lo(self) -> float:
        return float(self.wavelength_bins[0] - self.bin_width / 2)

    @property
    def hi(self) -> float:
        return float(self.wavelength_bins[-1] + self.bin_width / 2)

    def bin_energies(self) -> np.ndarray:
        """Per-bin integrated quantity (values times bin width)."""
        return self.values * self.bin_width

    def row_totals(self) -> np.ndarray:
        return self.values.sum(axis=1) * self.bin_width

    def with_values(self, values, value_kind) -> "EnsembleSpectra":
        return replace(self, values=values, value_kind=value_kind)


def _run_shot(params, grid, medium, distance, step_control, edges):
    out = propagate(params.field(grid), medium, distance, step_control)
    return bin_spectrum(spectrum_of(out), edges)


def run_arm(
    shots: ShotSet,
    medium: Medium,
    distance: float,
    grid: Grid,
    spectrometer_binning: SpectrometerBinning | None = None,
    step_control: StepControl | None = None,
    workers: int = 1,
    arm: str | None = None,
    config_digest: bytes = bytes(32),
) -> EnsembleSpectra:
    """Propagate every shot and record its binned spectrum.

    Shots run on ``workers`` threads.  Each shot depends only on its own
    parameters, so the result is identical for any worker count; rows are
    always in shot order.

    Raises:
        ShotFailedError: the first failing shot (lowest index), with its cause.
    """
    binning = spectrometer_binning or SpectrometerBinning()
    if arm is None:
        arm = "reference" if medium.is_linear else "filament"
    edges = binning.edges

    def task(i):
        try:
            return _run_shot(shots.shots[i], grid, medium, distance, step_control, edges)
        except FilamentNoiseError as exc:
            raise ShotFailedError(i, exc) from exc

    indices = range(shots.n_shots)
    if workers <= 1:
        rows = [task(i) for i in indices]
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            rows = list(pool.map(task, indices))
    values = np.vstack(rows) / binning.width
    return EnsembleSpectra(
        binning.centers, binning.width, values, "energy_density",
        shots.seed, arm, config_digest,
    )


def phase_calibrated_medium(
    phi_max: float,
    nominal: PulseParameters,
    distance: float,
    beta2: float = 20.0,
    **kwargs,
) -> Medium:
    """Medium whose Kerr coefficient gives the nominal shot ``phi_max`` rad of peak phase."""
    gamma = float(phi_max / (nominal.peak_power * distance))
    if not math.isfinite(gamma):
        raise ConfigError("cannot calibrate gamma for a zero distance")
    return Medium(beta2=beta2, gamma=gamma, **kwargs)
