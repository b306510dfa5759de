import math

import numpy as np
import pytest

from filament_noise.errors import ConfigError, ShotFailedError
from filament_noise.grid import C_NM_PER_FS, make_grid, spectrum_of
from filament_noise.ensemble import (
    EnsembleSpectra,
    JitterModel,
    PulseParameters,
    ShotSet,
    SpectrometerBinning,
    bin_spectrum,
    generate_shots,
    phase_calibrated_medium,
    run_arm,
)
from filament_noise.propagation import Medium, propagate
from filament_noise.statistics import correlation_map, normalize_rows, pearson

NOMINAL = PulseParameters()
LINEAR = Medium(beta2=20.0)


@pytest.fixture(scope="module")
def g2k():
    return make_grid(2048, 8192.0, 805.0)


def test_same_seed_same_shots():
    a = generate_shots(7, 50, NOMINAL, JitterModel(0.01, 0.005, 0.2))
    b = generate_shots(7, 50, NOMINAL, JitterModel(0.01, 0.005, 0.2))
    assert a == b
    assert a != generate_shots(8, 50, NOMINAL, JitterModel(0.01, 0.005, 0.2))


def test_shot_stream_independent_of_ensemble_size():
    short = generate_shots(7, 10, NOMINAL, JitterModel())
    long = generate_shots(7, 100, NOMINAL, JitterModel())
    assert short.shots == long.shots[:10]


def test_zero_jitter_reproduces_nominal():
    shots = generate_shots(3, 20, NOMINAL, JitterModel(0.0, 0.0, 0.0))
    assert all(s == NOMINAL for s in shots.shots)


def test_energy_jitter_statistics():
    shots = generate_shots(1, 10_000, NOMINAL, JitterModel(0.01, 0.0, 0.0))
    rel = shots.energies / NOMINAL.energy - 1
    assert 0.0097 <= math.sqrt(np.mean(rel**2)) <= 0.0103
    assert abs(shots.energies.mean() - NOMINAL.energy) < 5 * 0.01 * NOMINAL.energy / 100


@pytest.mark.parametrize("n, seed", [(1, 0), (0, 0), (5, -1), (5, 2**64)])
def test_generate_shots_rejects(n, seed):
    with pytest.raises(ConfigError):
        generate_shots(seed, n, NOMINAL, JitterModel())


@pytest.mark.parametrize("kwargs", [dict(sigma_energy=-0.1), dict(sigma_duration=0.5),
                                    dict(sigma_chirp=-1.0)])
def test_jitter_validation(kwargs):
    with pytest.raises(ConfigError):
        JitterModel(**kwargs)


def test_binning_geometry():
    b = SpectrometerBinning()
    assert b.n_bins == 200
    assert b.edges[0] == 785.0 and b.edges[-1] == pytest.approx(845.0)
    assert np.allclose(b.centers, 0.5 * (b.edges[:-1] + b.edges[1:]))
    with pytest.raises(ConfigError):
        SpectrometerBinning(785.0, 845.0, 0.7)


def test_bins_partition_spectrum_energy(g2k):
    s = spectrum_of(propagate(NOMINAL.field(g2k), phase_calibrated_medium(3 * math.pi, NOMINAL, 4.0), 4.0))
    edges = np.linspace(s.edges[0], s.edges[-1], 97)
    assert bin_spectrum(s, edges).sum() == pytest.approx(s.energy, rel=1e-12)
    # splitting a bin in two conserves its content
    coarse = bin_spectrum(s, np.array([790.0, 800.0, 810.0]))
    fine = bin_spectrum(s, np.array([790.0, 795.0, 800.0, 803.3, 810.0]))
    assert coarse == pytest.approx([fine[:2].sum(), fine[2:].sum()], rel=1e-12)


def test_linear_arm_bookkeeping(g2k):
    # each row holds the shot's input energy inside the bin range; the oracle
    # bins raw FFT cells of the input field by frequency overlap
    b = SpectrometerBinning(800.0, 809.0, 0.3)
    shots = generate_shots(3, 5, NOMINAL, JitterModel(0.01, 0.005, 0.3))
    ens = run_arm(shots, Medium(beta2=20.0, beta3=100.0), 4.0, g2k, b)
    dw = 2 * np.pi / g2k.time_window
    w_abs = g2k.omega0 - 2 * np.pi * np.fft.fftfreq(g2k.n_points, g2k.dt)
    lo_w, hi_w = 2 * np.pi * C_NM_PER_FS / 809.0, 2 * np.pi * C_NM_PER_FS / 800.0
    frac = np.clip((np.minimum(w_abs + dw / 2, hi_w) - np.maximum(w_abs - dw / 2, lo_w)) / dw, 0, 1)
    for s, total in zip(shots.shots, ens.row_totals()):
        cells = np.abs(np.fft.fft(s.field(g2k).envelope)) ** 2 / g2k.n_points * g2k.dt * 1e-15
        assert total == pytest.approx(np.sum(cells * frac), rel=1e-6)


def test_linear_arm_with_energy_jitter_is_multiplicative(g2k):
    shots = generate_shots(5, 10, NOMINAL, JitterModel(0.01, 0.0, 0.0))
    ens = run_arm(shots, LINEAR, 4.0, g2k)
    assert ens.arm == "reference" and ens.value_kind == "energy_density"
    # bins far below the peak carry FFT rounding noise, so compare where the signal is
    strong = np.flatnonzero(ens.values[0] > 1e-3 * ens.values[0].max())
    scaled = ens.values[:, strong] / shots.energies[:, None]
    assert np.allclose(scaled, scaled[0], rtol=1e-9, atol=0)
    for i, j in [(strong[0], strong[-1]), (strong[1], strong[len(strong) // 2])]:
        assert pearson(ens.values[:, i], ens.values[:, j]) == pytest.approx(1.0, abs=1e-9)
    assert correlation_map(normalize_rows(ens), 805.0).mask.all()


def test_linear_arm_without_jitter_flags_every_channel(g2k):
    shots = generate_shots(5, 4, NOMINAL, JitterModel(0.0, 0.0, 0.0))
    ens = run_arm(shots, LINEAR, 4.0, g2k)
    assert np.array_equal(ens.values, np.broadcast_to(ens.values[0], ens.values.shape))
    cmap = correlation_map(normalize_rows(ens), 805.0)
    assert cmap.mask.all() and np.isnan(cmap.matrix).all()


def test_nonlinear_spectrum_is_broad(g2k):
    medium = phase_calibrated_medium(3 * math.pi, NOMINAL, 4.0, self_steepening=True)
    s = spectrum_of(propagate(NOMINAL.field(g2k), medium, 4.0))
    above = s.wavelength[s.psd >= 1e-3 * s.psd.max()]
    assert above[0] < 785.0 and above[-1] > 845.0
    assert above[-1] - above[0] > 60.0


def test_calibrated_phase(g2k):
    m = phase_calibrated_medium(3 * math.pi, NOMINAL, 4.0)
    assert m.gamma * NOMINAL.peak_power * 4.0 == pytest.approx(3 * math.pi, rel=1e-14)
    assert type(m.gamma) is float


def test_worker_count_does_not_change_output(g2k):
    shots = generate_shots(11, 12, NOMINAL, JitterModel())
    medium = phase_calibrated_medium(3 * math.pi, NOMINAL, 4.0, self_steepening=True)
    runs = [run_arm(shots, medium, 4.0, g2k, workers=w) for w in (1, 4, 8)]
    for r in runs[1:]:
        assert r.values.tobytes() == runs[0].values.tobytes()


def test_total_variance_grows_with_energy_jitter():
    g = make_grid(1024, 8192.0, 805.0)
    medium = phase_calibrated_medium(3 * math.pi, NOMINAL, 4.0)
    variances = []
    for sigma in (0.005, 0.01, 0.02):
        shots = generate_shots(2, 16, NOMINAL, JitterModel(sigma, 0.005, 0.0))
        variances.append(run_arm(shots, medium, 4.0, g).row_totals().var(ddof=1))
    assert variances[0] <= variances[1] <= variances[2]


def test_failing_shot_is_named(g2k):
    good = PulseParameters()
    bad = PulseParameters(duration_fwhm=5000.0)  # wider than the window allows
    shots = ShotSet(0, 4, good, JitterModel(), (good, good, bad, good))
    with pytest.raises(ShotFailedError) as info:
        run_arm(shots, LINEAR, 1.0, g2k)
    assert info.value.shot_index == 2
    assert "shot 2" in str(info.value)


def test_ensemble_validation():
    bins = np.arange(3.0)
    with pytest.raises(ConfigError):
        EnsembleSpectra(bins, 1.0, np.ones((2, 4)))
    with pytest.raises(ConfigError):
        EnsembleSpectra(bins, 1.0, -np.ones((2, 3)))
    with pytest.raises(ConfigError):
        EnsembleSpectra(bins, 1.0, np.ones((2, 3)), value_kind="normalized")
    ok = EnsembleSpectra(bins, 1.0, np.full((2, 3), 1 / 3), value_kind="normalized")
    assert ok.row_totals() == pytest.approx([1.0, 1.0])
    with pytest.raises(ValueError):
        ok.values[0, 0] = 2.0
