"""
Fano and Gemellity factors of detected channels
===============================================

Photodiode channels see Poisson shot noise on top of the classical
fluctuations of the continuum.  The Fano factor compares the count variance
with the Poisson level; the Gemellity factor of a channel pair drops below 1
only for correlations stronger than any classical source allows.  With about
1e8 photons per shot and percent-level laser jitter the classical noise
dominates by orders of magnitude.
"""

import math

from filament_noise.detection import (
    Channel,
    DetectorModel,
    channel_counts,
    conjugate_wavelength,
    transmission_for_mean,
)
from filament_noise.ensemble import (
    JitterModel,
    PulseParameters,
    SpectrometerBinning,
    generate_shots,
    phase_calibrated_medium,
    run_arm,
)
from filament_noise.grid import make_grid
from filament_noise.statistics import fano, gemellity, pearson

grid = make_grid(2048, 8192.0, 805.0)
nominal = PulseParameters()
medium = phase_calibrated_medium(3 * math.pi, nominal, 4.0, self_steepening=True)
binning = SpectrometerBinning(745.0, 865.0, 0.3)
shots = generate_shots(seed=5, n_shots=300, nominal=nominal, jitter=JitterModel())
spectra = run_arm(shots, medium, 4.0, grid, binning)

channels = [Channel(844.0), Channel(conjugate_wavelength(805.0, 844.0)), Channel(805.0)]
base = DetectorModel(poisson=True)
counts = {}
for ch in channels:
    t = transmission_for_mean(spectra, ch, base, 1e8)
    det = DetectorModel(base.grating_efficiency, base.quantum_efficiency, True, t)
    counts[ch.label] = channel_counts(spectra, ch, det, rng_seed=1)
    print(f"{ch.label:>10}: attenuation {t:.2e}, Fano factor {fano(counts[ch.label]):.3g}")

labels = list(counts)
for i, a in enumerate(labels):
    for b in labels[i + 1:]:
        r = pearson(counts[a], counts[b])
        g = gemellity(fano(counts[a]), fano(counts[b]), r)
        print(f"{a:>10} / {b:<10} r = {r:+.3f}   G = {g:.3g}")

# For reference: independent shot-noise-limited beams sit exactly at G = 1,
# perfect twins at G = 0.
print(f"\nG(1, 1, 0) = {gemellity(1.0, 1.0, 0.0)},  G(F, F, 1) = {gemellity(5.0, 5.0, 1.0)}")
