import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from filament_noise.errors import ConfigError, GuardBandError, NonConvergenceError
from filament_noise.grid import fwhm, gaussian_pulse, make_grid, spectrum_of
from filament_noise.propagation import (
    Medium,
    StepControl,
    check_guard_band,
    linear_propagate,
    propagate,
    soliton_field,
    soliton_period,
    spm_analytic,
)


def rel_l2(a, b):
    return float(np.linalg.norm(a - b) / np.linalg.norm(b))


ANOMALOUS = Medium(beta2=-20.0, gamma=1e-3)


def test_zero_distance_is_identity(grid):
    f = gaussian_pulse(grid, 1e9, 200.0)
    out = propagate(f, Medium(gamma=1e-9, self_steepening=True), 0.0)
    assert np.array_equal(out.envelope, f.envelope)


def test_negative_distance_rejected(grid):
    with pytest.raises(ConfigError):
        propagate(gaussian_pulse(grid, 1.0, 200.0), Medium(), -1.0)


def test_gaussian_dispersion_matches_closed_form(grid):
    beta2, fwhm0 = 20.0, 200.0
    t0 = fwhm0 / (2 * math.sqrt(math.log(2)))
    ld = t0**2 / beta2
    z = 5 * ld
    out = propagate(gaussian_pulse(grid, 1.0, fwhm0), Medium(beta2=beta2), z)
    q = t0**2 - 1j * beta2 * z
    expected = t0 / np.sqrt(q) * np.exp(-grid.t**2 / (2 * q))
    assert rel_l2(out.envelope, expected) < 1e-3
    width = fwhm(grid.t, out.power)
    assert width == pytest.approx(fwhm0 * math.sqrt(1 + 25), rel=1e-3)


def test_gamma_zero_equals_single_spectral_multiplication(grid):
    f = gaussian_pulse(grid, 1e6, 200.0, chirp=0.7)
    m = Medium(beta2=20.0, beta3=300.0)
    out = propagate(f, m, 500.0, StepControl(max_step=7.0))
    ref = linear_propagate(f, m, 500.0)
    assert rel_l2(out.envelope, ref.envelope) < 1e-12


def test_vanishing_kerr_converges_to_linear_result(grid):
    # goes through the split-step loop (72 fused steps) rather than the linear shortcut
    f = gaussian_pulse(grid, 1e6, 200.0, chirp=0.7)
    m = Medium(beta2=20.0, beta3=300.0, gamma=1e-30)
    out = propagate(f, m, 500.0, StepControl(max_step=7.0))
    ref = linear_propagate(f, m.linear_only(), 500.0)
    assert rel_l2(out.envelope, ref.envelope) < 1e-12


def test_pure_spm_matches_analytic(grid):
    f = gaussian_pulse(grid, 1e9, 200.0)
    gamma = 10.0 / (1e9 * 4.0)
    out = propagate(f, Medium(beta2=0.0, gamma=gamma), 4.0)
    ref = spm_analytic(f, gamma, 4.0)
    assert rel_l2(out.envelope, ref.envelope) < 1e-6


def test_spm_broadens_spectrum_with_phase(grid):
    # peak phase 10 rad widens a Gaussian's spectral FWHM roughly tenfold
    f = gaussian_pulse(grid, 1.0, 200.0)
    s0 = spectrum_of(f)
    s1 = spectrum_of(spm_analytic(f, 10.0, 1.0))
    ratio = fwhm(s1.wavelength, s1.psd) / fwhm(s0.wavelength, s0.psd)
    assert 8.0 < ratio < 12.0


def test_fundamental_soliton_keeps_shape(grid):
    f = soliton_field(grid, ANOMALOUS, 1)
    z0 = soliton_period(grid, ANOMALOUS)
    out = propagate(f, ANOMALOUS, 10 * z0, StepControl(max_step=1e4))
    assert rel_l2(np.abs(out.envelope), np.abs(f.envelope)) < 1e-3
    assert out.energy == pytest.approx(f.energy, rel=1e-10)


def rms_bandwidth(field):
    power = np.abs(np.fft.fft(field.envelope)) ** 2
    w = field.grid.omega
    mean = np.sum(w * power) / power.sum()
    return math.sqrt(np.sum((w - mean) ** 2 * power) / power.sum())


def test_third_order_soliton_breathes(grid):
    f = soliton_field(grid, ANOMALOUS, 3)
    z0 = soliton_period(grid, ANOMALOUS)
    control = StepControl(max_step=1e4, max_nonlinear_phase_per_step=0.01)
    fields = [f]
    for _ in range(8):
        fields.append(propagate(fields[-1], ANOMALOUS, z0 / 8, control))
    widths = [rms_bandwidth(x) for x in fields]
    peak = int(np.argmax(widths))
    # spectrum widens towards mid-period, then narrows back
    assert 0 < peak < 8
    assert widths[peak] > 2 * widths[0]
    assert widths[-1] < 0.5 * widths[peak]
    assert fields[4].peak_power > 2 * f.peak_power
    assert rel_l2(np.abs(fields[-1].envelope), np.abs(f.envelope)) < 1e-2


def test_spm_analytic_keeps_modulus(grid, rng):
    f = gaussian_pulse(grid, 1e9, 200.0, chirp=1.0)
    out = spm_analytic(f, 1e-9, 3.0)
    assert np.allclose(np.abs(out.envelope), np.abs(f.envelope), rtol=1e-14, atol=0)
    assert np.array_equal(spm_analytic(f, 0.0, 3.0).envelope, f.envelope)
    assert out.z_position == 3.0


def test_soliton_needs_anomalous_dispersion(grid):
    with pytest.raises(ConfigError):
        soliton_field(grid, Medium(beta2=20.0, gamma=1e-3), 1)
    with pytest.raises(ConfigError):
        soliton_field(grid, ANOMALOUS, 0.5)


@pytest.mark.parametrize("steepening", [False, True])
@pytest.mark.parametrize("adaptive", [False, True])
def test_strang_scheme_is_second_order(grid, steepening, adaptive):
    m = Medium(beta2=-20.0, gamma=1e-3, self_steepening=steepening)
    f = soliton_field(grid, m, 2)
    z = soliton_period(grid, m) / 2

    def run(phi):
        return propagate(f, m, z, StepControl(1e4, phi, adaptive)).envelope

    ref = run(0.0025)
    coarse, fine = rel_l2(run(0.05), ref), rel_l2(run(0.025), ref)
    assert 3.0 <= coarse / fine <= 5.0


@settings(max_examples=25, deadline=None)
@given(
    beta2=st.floats(-40, 40),
    beta3=st.floats(-500, 500),
    phase=st.floats(0.0, 6.0),
    steepening=st.booleans(),
)
def test_lossless_propagation_conserves_energy(beta2, beta3, phase, steepening):
    g = make_grid(1024, 8192.0, 805.0)
    f = gaussian_pulse(g, 1e9, 200.0)
    m = Medium(beta2=beta2, beta3=beta3, gamma=phase / 1e9, self_steepening=steepening)
    out = propagate(f, m, 1.0, StepControl(max_step=0.1))
    assert out.energy == pytest.approx(f.energy, rel=1e-10)


def test_linear_loss_decays_exponentially(grid):
    f = gaussian_pulse(grid, 1e6, 200.0)
    m = Medium(beta2=20.0, gamma=1e-9, loss_order=0, loss_coefficient=0.1)
    out = propagate(f, m, 3.0, StepControl(max_step=0.05))
    assert out.energy == pytest.approx(f.energy * math.exp(-0.3), rel=1e-8)


def test_three_photon_loss_matches_pointwise_solution(grid):
    # without dispersion dI/dz = -c I^3 at every instant: I = I0 / sqrt(1 + 2 c I0^2 z)
    f = gaussian_pulse(grid, 1e9, 200.0)
    c = 1e-18
    out = propagate(f, Medium(beta2=0.0, loss_order=2, loss_coefficient=c), 1.0)
    expected = f.power / np.sqrt(1 + 2 * c * f.power**2 * 1.0)
    assert rel_l2(out.power, expected) < 1e-6


def test_guard_band_violation_raises(grid):
    # about 500 dispersion lengths spreads the pulse over the whole window
    f = gaussian_pulse(grid, 1.0, 200.0)
    with pytest.raises(GuardBandError, match="guard band"):
        propagate(f, Medium(beta2=20.0), 500 * 721.0)


def test_guard_band_fraction_of_centred_pulse(grid):
    assert check_guard_band(gaussian_pulse(grid, 1.0, 200.0)) == 0.0


def test_step_below_floor_raises(grid):
    f = gaussian_pulse(grid, 1e9, 200.0)
    with pytest.raises(NonConvergenceError):
        propagate(f, Medium(gamma=1e3), 1.0)


@pytest.mark.parametrize(
    "kwargs",
    [dict(gamma=-1.0), dict(loss_coefficient=-1.0), dict(loss_order=1.5), dict(beta2=math.nan)],
)
def test_medium_validation(kwargs):
    with pytest.raises(ConfigError):
        Medium(**kwargs)


@pytest.mark.parametrize("kwargs", [dict(max_step=0.0), dict(max_nonlinear_phase_per_step=4.0)])
def test_step_control_validation(kwargs):
    with pytest.raises(ConfigError):
        StepControl(**kwargs)
