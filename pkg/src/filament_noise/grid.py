"""Time/frequency discretization, field envelopes and spectra.

Units: time in fs, wavelength in nm, distance in m, envelope in sqrt(W).
Energies returned to callers are in joules.

Sign convention: the spectral amplitude is ``A(W) = int A(t) exp(+i W t) dt``
(the usual nonlinear-optics convention), so a spectral sample at offset ``W``
sits at absolute angular frequency ``omega0 + W`` and the front of a pulse
undergoing self-phase modulation is red-shifted.  Both transforms are unitary.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
import scipy.fft

from .errors import ConfigError

#: speed of light in nm/fs
C_NM_PER_FS = 299.792458
FS = 1e-15
#: Planck constant times c, J*m
HC = 6.62607015e-34 * 299792458.0


def to_spectral(envelope: np.ndarray) -> np.ndarray:
    """Unitary transform from time samples to spectral samples (FFT order)."""
    return scipy.fft.ifft(envelope, norm="ortho")


def to_temporal(spectral: np.ndarray) -> np.ndarray:
    """Inverse of :func:`to_spectral`."""
    return scipy.fft.fft(spectral, norm="ortho")


def _readonly(a):
    a = np.asarray(a)
    a.setflags(write=False)
    return a


@dataclass(frozen=True)
class Grid:
    """Uniform time grid and the angular-frequency grid conjugate to it.

    ``omega`` holds offsets from the carrier in FFT order (rad/fs), spanning
    ``[-pi/dt, pi/dt)``.
    """

    n_points: int
    time_window: float
    carrier_wavelength: float
    dt: float = field(init=False)
    t: np.ndarray = field(init=False, repr=False, compare=False)
    omega: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        dt = self.time_window / self.n_points
        object.__setattr__(self, "dt", dt)
        t = (np.arange(self.n_points) - self.n_points // 2) * dt
        object.__setattr__(self, "t", _readonly(t))
        omega = 2 * np.pi * scipy.fft.fftfreq(self.n_points, dt)
        object.__setattr__(self, "omega", _readonly(omega))

    @property
    def omega0(self) -> float:
        """Carrier angular frequency (rad/fs)."""
        return 2 * np.pi * C_NM_PER_FS / self.carrier_wavelength

    @property
    def d_omega(self) -> float:
        return 2 * np.pi / self.time_window

    @property
    def wavelength(self) -> np.ndarray:
        """Wavelength (nm) of every spectral sample, in FFT order."""
        return 2 * np.pi * C_NM_PER_FS / (self.omega0 + self.omega)


def make_grid(n_points: int, time_window: float, carrier_wavelength: float) -> Grid:
    """Build a :class:`Grid`.

    Raises:
        ConfigError: ``n_points`` is not a power of two >= 64, a length is
            non-positive, or the frequency axis reaches zero absolute frequency.
    """
    n_points = int(n_points)
    if n_points < 64 or n_points & (n_points - 1):
        raise ConfigError(f"n_points must be a power of two >= 64, got {n_points}")
    if not time_window > 0:
        raise ConfigError(f"time_window must be positive, got {time_window}")
    if not carrier_wavelength > 0:
        raise ConfigError(f"carrier_wavelength must be positive, got {carrier_wavelength}")
    grid = Grid(n_points, float(time_window), float(carrier_wavelength))
    # lowest spectral cell edge must stay above zero absolute frequency
    if grid.omega0 - np.pi / grid.dt - grid.d_omega / 2 <= 0:
        raise ConfigError(
            "frequency axis crosses zero absolute frequency; "
            "increase dt (fewer points or a longer window)"
        )
    return grid


@dataclass(frozen=True)
class Field:
    """Complex envelope sampled on a grid, at propagation distance ``z_position`` (m)."""

    grid: Grid
    envelope: np.ndarray
    z_position: float = 0.0

    def __post_init__(self):
        env = np.array(self.envelope, dtype=np.complex128)
        if env.shape != (self.grid.n_points,):
            raise ConfigError(
                f"envelope has shape {env.shape}, expected ({self.grid.n_points},)"
            )
        object.__setattr__(self, "envelope", _readonly(env))

    @property
    def power(self) -> np.ndarray:
        """Instantaneous power |A|^2 (W)."""
        return np.abs(self.envelope) ** 2

    @property
    def energy(self) -> float:
        """Pulse energy in joules."""
        return float(np.sum(self.power) * self.grid.dt * FS)

    @property
    def peak_power(self) -> float:
        return float(np.max(self.power))

    def replace(self, envelope, z_position=None) -> "Field":
        z = self.z_position if z_position is None else z_position
        return Field(self.grid, envelope, z)


def gaussian_energy(peak_power: float, duration_fwhm: float) -> float:
    """Closed-form energy (J) of a Gaussian pulse of given peak power (W) and FWHM (fs)."""
    return peak_power * duration_fwhm * FS * math.sqrt(math.pi / (4 * math.log(2)))


def gaussian_peak_power(energy: float, duration_fwhm: float) -> float:
    """Peak power (W) of a Gaussian pulse carrying ``energy`` joules."""
    return energy / gaussian_energy(1.0, duration_fwhm)


def transform_limited_bandwidth(duration_fwhm: float, wavelength: float) -> float:
    """Spectral FWHM (nm) of a transform-limited Gaussian pulse."""
    tbp = 2 * np.log(2) / np.pi  # 0.441
    return tbp * wavelength**2 / (C_NM_PER_FS * duration_fwhm)


def chirp_for_bandwidth(duration_fwhm: float, wavelength: float, bandwidth: float) -> float:
    """Chirp parameter that stretches a Gaussian's spectrum to ``bandwidth`` nm FWHM."""
    ratio = bandwidth / transform_limited_bandwidth(duration_fwhm, wavelength)
    if ratio < 1:
        raise ConfigError("requested bandwidth is below the transform limit")
    return float(np.sqrt(ratio**2 - 1))


def gaussian_pulse(
    grid: Grid,
    peak_power: float,
    duration_fwhm: float,
    center_offset: float = 0.0,
    chirp: float = 0.0,
) -> Field:
    """Gaussian pulse with intensity FWHM ``duration_fwhm`` and linear chirp.

    The envelope is ``sqrt(P) exp(-2 ln2 ((t - t0)/FWHM)^2 (1 + i chirp))``.
    """
    if not peak_power > 0:
        raise ConfigError(f"peak_power must be positive, got {peak_power}")
    if not duration_fwhm >= 4 * grid.dt:
        raise ConfigError(
            f"pulse of {duration_fwhm} fs is under-resolved (dt = {grid.dt} fs)"
        )
    if duration_fwhm > grid.time_window / 8:
        raise ConfigError(
            f"pulse of {duration_fwhm} fs does not fit a {grid.time_window} fs window"
        )
    if abs(center_offset) > grid.time_window / 2 - 4 * duration_fwhm:
        raise ConfigError(f"center_offset {center_offset} fs clips the pulse")
    x = (grid.t - center_offset) / duration_fwhm
    env = np.sqrt(peak_power) * np.exp(-2 * np.log(2) * x**2 * (1 + 1j * chirp))
    return Field(grid, env)


@dataclass(frozen=True)
class Spectrum:
    """Spectral energy density on the (non-uniform) wavelength axis of a grid.

    ``psd[i]`` is the mean density (J/nm) over the cell
    ``[edges[i], edges[i+1]]``, the image of one frequency cell, so the
    cell sum reproduces the pulse energy exactly.
    """

    wavelength: np.ndarray
    psd: np.ndarray
    edges: np.ndarray

    def __post_init__(self):
        for name in ("wavelength", "psd", "edges"):
            object.__setattr__(self, name, _readonly(np.asarray(getattr(self, name), float)))

    @property
    def widths(self) -> np.ndarray:
        return np.diff(self.edges)

    @property
    def energy(self) -> float:
        return float(np.sum(self.psd * self.widths))


def spectral_cell_edges(grid: Grid) -> np.ndarray:
    """Wavelength edges of the frequency cells, increasing, length n_points + 1."""
    w = np.sort(grid.omega)
    w_edges = np.concatenate((w - grid.d_omega / 2, [w[-1] + grid.d_omega / 2]))
    return (2 * np.pi * C_NM_PER_FS / (grid.omega0 + w_edges))[::-1]


def spectrum_of(field: Field) -> Spectrum:
    """Spectrometer view of a field: energy density versus wavelength."""
    grid = field.grid
    spec = to_spectral(field.envelope)
    # energy per frequency cell, J; unitary transform keeps Parseval literal
    cell_energy = np.abs(spec) ** 2 * grid.dt * FS
    order = np.argsort(grid.omega)[::-1]  # decreasing frequency = increasing wavelength
    edges = spectral_cell_edges(grid)
    psd = cell_energy[order] / np.diff(edges)
    return Spectrum(grid.wavelength[order], psd, edges)


def fwhm(x: np.ndarray, y: np.ndarray) -> float:
    """Full width at half maximum between the outermost half-maximum crossings.

    Crossings are located by linear interpolation; ``x`` must be increasing.
    """
    x = np.asarray(x, float)
    y = np.asarray(y, float)
    half = y.max() / 2
    above = np.flatnonzero(y >= half)
    i, j = above[0], above[-1]
    if i == 0 or j == len(y) - 1:
        raise ValueError("profile does not fall below half maximum inside the axis")
    left = np.interp(half, [y[i - 1], y[i]], [x[i - 1], x[i]])
    right = np.interp(half, [y[j + 1], y[j]], [x[j + 1], x[j]])
    return float(right - left)
