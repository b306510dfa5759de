"""Virtual detection chain: spectral channels, photon conversion, conjugate wavelengths."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .ensemble import EnsembleSpectra, shot_rng
from .errors import ConfigError
from .grid import HC

_EDGE_TOL = 1e-9  # nm
#: above this mean, Poisson draws use the rounded normal approximation
POISSON_NORMAL_LIMIT = 1e12


class OutOfBandError(ConfigError):
    """No positive conjugate wavelength exists for the requested pair."""


@dataclass(frozen=True)
class Channel:
    """Rectangular spectral channel, ``bandwidth`` nm full width around ``center``."""

    center: float
    bandwidth: float = 9.0
    label: str = ""

    def __post_init__(self):
        if not self.bandwidth > 0:
            raise ConfigError(f"channel bandwidth must be positive, got {self.bandwidth}")
        if not self.center - self.bandwidth / 2 > 0:
            raise ConfigError("channel must lie at positive wavelengths")
        if not self.label:
            object.__setattr__(self, "label", f"{self.center:g}nm")

    @property
    def lo(self) -> float:
        return self.center - self.bandwidth / 2

    @property
    def hi(self) -> float:
        return self.center + self.bandwidth / 2


@dataclass(frozen=True)
class DetectorModel:
    """Grating plus photodiode.

    ``transmission`` is an optional neutral-density attenuation in front of
    the photodiode, used to set the detected photon level.
    """

    grating_efficiency: float = 0.9
    quantum_efficiency: float = 0.93
    poisson: bool = False
    transmission: float = 1.0

    def __post_init__(self):
        for name in ("grating_efficiency", "quantum_efficiency", "transmission"):
            v = getattr(self, name)
            if not 0 < v <= 1:
                raise ConfigError(f"{name} must lie in (0, 1], got {v}")

    @property
    def efficiency(self) -> float:
        return self.grating_efficiency * self.quantum_efficiency * self.transmission


def _overlap_weights(ensemble: EnsembleSpectra, lo: float, hi: float) -> np.ndarray:
    """Fraction of each bin covered by ``[lo, hi]``."""
    edges = ensemble.bin_edges
    covered = np.minimum(edges[1:], hi) - np.maximum(edges[:-1], lo)
    return np.clip(covered, 0.0, None) / ensemble.bin_width


def window_series(ensemble: EnsembleSpectra, lo_nm: float, hi_nm: float) -> np.ndarray:
    """Per-shot integral of the ensemble over ``[lo_nm, hi_nm]`` (edge bins pro-rated).

    The window is clipped to the binned range; it must overlap it.
    """
    if not lo_nm < hi_nm:
        raise ConfigError(f"window needs lo < hi, got ({lo_nm}, {hi_nm})")
    if hi_nm <= ensemble.lo or lo_nm >= ensemble.hi:
        raise ConfigError(
            f"window ({lo_nm}, {hi_nm}) nm does not overlap the binned range "
            f"({ensemble.lo:g}, {ensemble.hi:g}) nm"
        )
    return ensemble.bin_energies() @ _overlap_weights(ensemble, lo_nm, hi_nm)


def channel_energy(ensemble: EnsembleSpectra, channel: Channel) -> np.ndarray:
    """Per-shot energy (J) falling in ``channel``."""
    if ensemble.value_kind != "energy_density":
        raise ConfigError(
            f"photon conversion needs energy_density values, got {ensemble.value_kind}"
        )
    if channel.lo < ensemble.lo - _EDGE_TOL or channel.hi > ensemble.hi + _EDGE_TOL:
        raise ConfigError(
            f"channel {channel.label} ({channel.lo:g}-{channel.hi:g} nm) lies outside "
            f"the binned range ({ensemble.lo:g}-{ensemble.hi:g} nm)"
        )
    return window_series(ensemble, channel.lo, channel.hi)


def photons_per_joule(wavelength_nm: float) -> float:
    return wavelength_nm * 1e-9 / HC


def channel_counts(
    ensemble: EnsembleSpectra,
    channel: Channel,
    detector: DetectorModel | None = None,
    rng_seed: int = 0,
) -> np.ndarray:
    """Detected photon numbers per shot for one channel.

    The mean photon number uses the photon energy at the channel centre.  With
    ``detector.poisson`` the counts are Poisson draws from a per-shot stream
    keyed on ``(rng_seed, shot index)``, returned as integer-valued floats;
    otherwise the real-valued means are returned.  Means above
    ``POISSON_NORMAL_LIMIT`` use ``round(mu + sqrt(mu) * N(0, 1))``, which
    has the same first two moments and no sampler overflow.
    """
    detector = detector or DetectorModel()
    mean = channel_energy(ensemble, channel) * photons_per_joule(channel.center) * detector.efficiency
    if not detector.poisson:
        return mean
    counts = np.empty(mean.size)
    for i, mu in enumerate(mean):
        rng = shot_rng(rng_seed, i)
        if mu <= POISSON_NORMAL_LIMIT:
            counts[i] = rng.poisson(mu)
        else:
            counts[i] = max(0.0, round(mu + math.sqrt(mu) * rng.standard_normal()))
    return counts


def transmission_for_mean(
    ensemble: EnsembleSpectra,
    channel: Channel,
    detector: DetectorModel,
    target_mean: float,
) -> float:
    """Attenuation that brings the channel's mean photon number to ``target_mean``."""
    base = DetectorModel(detector.grating_efficiency, detector.quantum_efficiency, False, 1.0)
    mean = float(np.mean(channel_counts(ensemble, channel, base)))
    if mean <= 0:
        raise ConfigError(f"channel {channel.label} receives no light")
    t = target_mean / mean
    if t > 1:
        raise ConfigError(
            f"channel {channel.label} only reaches {mean:.3g} photons per shot"
        )
    return t


def conjugate_wavelength(lambda0: float, lambda2: float) -> float:
    """Partner ``lambda1`` of ``lambda2`` under ``2/lambda0 = 1/lambda1 + 1/lambda2``."""
    if not (lambda0 > 0 and lambda2 > 0):
        raise ConfigError("wavelengths must be positive")
    inv = 2.0 / lambda0 - 1.0 / lambda2
    if inv <= 0:
        raise OutOfBandError(
            f"{lambda2} nm has no positive conjugate about {lambda0} nm (2/lambda0 <= 1/lambda2)"
        )
    return 1.0 / inv


def conjugation_locus(lambda0: float, wavelength_bins) -> np.ndarray:
    """Conjugate of every bin centre; NaN marks bins without one."""
    bins = np.asarray(wavelength_bins, dtype=float)
    inv = 2.0 / lambda0 - 1.0 / bins
    out = np.full(bins.shape, np.nan)
    ok = inv > 0
    out[ok] = 1.0 / inv[ok]
    return out
