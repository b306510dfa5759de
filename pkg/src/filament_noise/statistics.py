"""Estimators: row normalization, Pearson correlation and maps, Fano, Gemellity, dB.

Sample (n-1) variances are used throughout.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .ensemble import EnsembleSpectra
from .errors import ConfigError, DegenerateStatisticsError

#: a series whose std is below this fraction of |mean| counts as constant;
#: catches identical rows that differ only by rounding after normalization.
#: Across a spectrum the rounding floor of a bin scales as sqrt(mean * peak),
#: so correlation maps compare against that instead of |mean| alone.
ZERO_VARIANCE_RTOL = 1e-12


class UndefinedCorrelationError(DegenerateStatisticsError):
    """Pearson correlation of a zero-variance series."""


def _is_constant(std, mean):
    return std == 0 or std <= ZERO_VARIANCE_RTOL * abs(mean)


def normalize_rows(ensemble: EnsembleSpectra) -> EnsembleSpectra:
    """Divide each shot's spectrum by its own integral."""
    totals = ensemble.row_totals()
    bad = np.flatnonzero(~(totals > 0))
    if bad.size:
        raise DegenerateStatisticsError(
            f"cannot normalize: shot {bad[0]} has zero total energy"
        )
    return ensemble.with_values(ensemble.values / totals[:, None], "normalized")


def pearson(x_series, y_series) -> float:
    """Pearson correlation coefficient of two equally long series."""
    x = np.asarray(x_series, dtype=np.float64)
    y = np.asarray(y_series, dtype=np.float64)
    if x.shape != y.shape or x.ndim != 1:
        raise ConfigError("pearson needs two 1D series of equal length")
    if x.size < 2:
        raise DegenerateStatisticsError("pearson needs at least 2 samples")
    mx, my = x.mean(), y.mean()
    dx, dy = x - mx, y - my
    sxx, syy = np.dot(dx, dx), np.dot(dy, dy)
    n1 = x.size - 1
    if _is_constant(math.sqrt(sxx / n1), mx) or _is_constant(math.sqrt(syy / n1), my):
        raise UndefinedCorrelationError("correlation undefined: a series has zero variance")
    r = float(np.dot(dx, dy) / math.sqrt(sxx * syy))
    assert abs(r) <= 1 + 1e-12, r
    return r


@dataclass(frozen=True)
class CorrelationMap:
    """Pearson coefficients between every pair of wavelength bins.

    Masked entries (a zero-variance bin on either axis) hold NaN.
    """

    wavelength_bins: np.ndarray
    matrix: np.ndarray
    mask: np.ndarray
    lambda0: float

    @property
    def defined(self) -> np.ndarray:
        return ~self.mask

    def channel_mask(self) -> np.ndarray:
        """True for bins whose own variance is zero."""
        return np.diag(self.mask).copy()


def correlation_map(normalized_ensemble: EnsembleSpectra, lambda0: float) -> CorrelationMap:
    """Correlation map over all bin pairs of a normalized ensemble."""
    ens = normalized_ensemble
    if ens.value_kind != "normalized":
        raise ConfigError("correlation maps are computed on normalized spectra")
    if ens.n_shots < 2:
        raise DegenerateStatisticsError(
            f"a correlation map needs at least 2 shots, got {ens.n_shots}"
        )
    x = ens.values
    mean = x.mean(axis=0)
    dx = x - mean
    norm = np.sqrt(np.einsum("ij,ij->j", dx, dx))
    std = norm / math.sqrt(ens.n_shots - 1)
    floor = np.sqrt(np.abs(mean) * np.max(np.abs(mean)))
    constant = (std == 0) | (std <= ZERO_VARIANCE_RTOL * floor)
    z = np.divide(dx, norm, out=np.zeros_like(dx), where=~constant)
    r = z.T @ z
    # one value per unordered pair: mirror the upper triangle
    upper = np.triu(r, 1)
    r = np.clip(upper + upper.T, -1.0, 1.0)
    np.fill_diagonal(r, 1.0)
    mask = constant[:, None] | constant[None, :]
    r[mask] = np.nan
    r.setflags(write=False)
    mask.setflags(write=False)
    return CorrelationMap(ens.wavelength_bins, r, mask, float(lambda0))


def fano(count_series) -> float:
    """Fano factor: sample variance over mean of a photon-count series."""
    c = np.asarray(count_series, dtype=np.float64)
    if c.ndim != 1 or c.size < 2:
        raise DegenerateStatisticsError("fano needs at least 2 samples")
    if np.any(c < 0):
        raise ConfigError("photon counts must be non-negative")
    mean = c.mean()
    if not mean > 0:
        raise DegenerateStatisticsError("fano factor undefined for zero mean")
    return float(c.var(ddof=1) / mean)


def gemellity(F1: float, F2: float, C12: float) -> float:
    """Gemellity factor of two beams from their Fano factors and correlation.

    Values below 1 indicate correlations beyond the classical bound.
    """
    if F1 < 0 or F2 < 0:
        raise ConfigError("Fano factors must be non-negative")
    if not -1 <= C12 <= 1:
        raise ConfigError(f"correlation {C12} outside [-1, 1]")
    return (F1 + F2) / 2 - math.sqrt(C12**2 * F1 * F2 + (F1 - F2) ** 2 / 4)


def relative_intensity_noise(series) -> float:
    s = np.asarray(series, dtype=np.float64)
    return float(s.var(ddof=1) / s.mean() ** 2)


def _checked_noise(series, name, mode):
    s = np.asarray(series, dtype=np.float64)
    if s.ndim != 1 or s.size < 2:
        raise DegenerateStatisticsError(f"{name} series needs at least 2 samples")
    mean = s.mean()
    if not mean > 0:
        raise DegenerateStatisticsError(f"{name} series has non-positive mean")
    var = s.var(ddof=1)
    if not var > 0:
        raise DegenerateStatisticsError(f"{name} series has zero variance")
    return var / mean**2 if mode == "rin" else var


def noise_reduction_db(filament_window_series, reference_window_series, mode="rin") -> float:
    """Noise of the reference relative to the filament arm, in dB.

    ``mode="rin"`` compares relative intensity noise (variance over squared
    mean); ``mode="variance"`` compares raw variances.  Positive values mean
    the filament arm is quieter.
    """
    if mode not in ("rin", "variance"):
        raise ConfigError(f"unknown noise mode {mode!r}")
    fil = _checked_noise(filament_window_series, "filament", mode)
    ref = _checked_noise(reference_window_series, "reference", mode)
    return 10.0 * (math.log10(ref) - math.log10(fil))


@dataclass
class NoiseMetrics:
    """Scalar noise figures for one analysis."""

    fano_per_channel: dict = field(default_factory=dict)
    gemellity: dict = field(default_factory=dict)
    reduction_db: dict = field(default_factory=dict)
    windows: list = field(default_factory=list)
