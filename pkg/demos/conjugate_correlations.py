"""
Correlations between conjugate wavelengths
==========================================

Shot-to-shot energy jitter moves the whole continuum in or out.  After each
spectrum is normalized to unit area, the two spectral wings move together
(they gain energy together as the pulse gets stronger) while the carrier
region moves against them.  Four-wave mixing pairs obey
2/lambda0 = 1/lambda1 + 1/lambda2, so the positively correlated ridge of the
correlation map follows that curve.

Takes about a minute for 500 shots and writes conjugate_map.csv to the working directory.
"""

import math
from pathlib import Path

import numpy as np

from filament_noise.detection import conjugate_wavelength, conjugation_locus, window_series
from filament_noise.ensemble import (
    JitterModel,
    PulseParameters,
    SpectrometerBinning,
    generate_shots,
    phase_calibrated_medium,
    run_arm,
)
from filament_noise.grid import make_grid
from filament_noise.pipeline import map_to_csv
from filament_noise.statistics import correlation_map, normalize_rows, pearson

lambda0 = 805.0
grid = make_grid(2048, 8192.0, lambda0)
nominal = PulseParameters(energy=1e-3, duration_fwhm=200.0)
# gamma calibrated so the nominal shot reaches 3 pi of peak phase over 4 m
medium = phase_calibrated_medium(3 * math.pi, nominal, 4.0, self_steepening=True)
binning = SpectrometerBinning(745.0, 865.0, 0.3)

shots = generate_shots(seed=1, n_shots=500, nominal=nominal, jitter=JitterModel(0.01, 0.0, 0.0))
spectra = normalize_rows(run_arm(shots, medium, 4.0, grid, binning))

wing = 844.0
partner = conjugate_wavelength(lambda0, wing)
print(f"conjugate of {wing} nm about {lambda0} nm: {partner:.2f} nm")


def channel(center):
    return window_series(spectra, center - 4.5, center + 4.5)


print(f"r(wing, partner)     = {pearson(channel(wing), channel(partner)):+.3f}")
print(f"r(wing, carrier)     = {pearson(channel(wing), channel(lambda0)):+.3f}")
print(f"r(partner, carrier)  = {pearson(channel(partner), channel(lambda0)):+.3f}")

# Walk along the conjugation locus and across the carrier cross.
cmap = correlation_map(spectra, lambda0)
lam = cmap.wavelength_bins
locus = conjugation_locus(lambda0, lam)
print("\n lambda1 (nm)   conjugate (nm)   r on locus   r with carrier bin")
i0 = int(np.argmin(np.abs(lam - lambda0)))
for target in (770.0, 780.0, 790.0, 795.0, 815.0, 820.0, 830.0, 840.0):
    i = int(np.argmin(np.abs(lam - target)))
    j = int(np.argmin(np.abs(lam - locus[i])))
    print(f"{lam[i]:12.2f}   {locus[i]:14.2f}   {cmap.matrix[i, j]:+10.3f}   {cmap.matrix[i, i0]:+.3f}")

out = Path("conjugate_map.csv")
out.write_text(map_to_csv(cmap))
print(f"\nfull map written to {out} ({int(cmap.channel_mask().sum())} masked bins)")
