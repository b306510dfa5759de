"""
Fundamental and third-order solitons
====================================

In anomalous dispersion a sech pulse of order N=1 propagates unchanged,
while N=3 compresses, splits its spectrum and re-forms once per soliton
period.  Both make convenient checks of the propagator.
"""

import numpy as np

from filament_noise.grid import fwhm, make_grid
from filament_noise.propagation import (
    Medium,
    StepControl,
    propagate,
    soliton_field,
    soliton_period,
)

grid = make_grid(4096, 8192.0, 805.0)
medium = Medium(beta2=-20.0, gamma=1e-3)
z0 = soliton_period(grid, medium)
print(f"soliton period {z0:.1f} m")

# N = 1: ten periods, the modulus should not move.
fund = soliton_field(grid, medium, 1)
out = propagate(fund, medium, 10 * z0, StepControl(max_step=1e4))
dev = np.linalg.norm(np.abs(out.envelope) - np.abs(fund.envelope)) / np.linalg.norm(fund.envelope)
print(f"N=1 after 10 periods: relative L2 change of |A| = {dev:.1e}, "
      f"energy drift {out.energy / fund.energy - 1:.1e}")


# N = 3: sample one period in eighths.
def rms_bandwidth(field):
    p = np.abs(np.fft.fft(field.envelope)) ** 2
    w = field.grid.omega
    m = np.sum(w * p) / p.sum()
    return np.sqrt(np.sum((w - m) ** 2 * p) / p.sum())


field = soliton_field(grid, medium, 3)
control = StepControl(max_step=1e4, max_nonlinear_phase_per_step=0.01)
print("\n z / z0   peak power (W)   duration (fs)   rms bandwidth (rad/fs)")
for k in range(9):
    print(f"{k / 8:7.3f}   {field.peak_power:14.2f}   {fwhm(grid.t, field.power):13.1f}"
          f"   {rms_bandwidth(field):.4f}")
    if k < 8:
        field = propagate(field, medium, z0 / 8, control)
