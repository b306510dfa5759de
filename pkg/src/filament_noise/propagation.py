"""Split-step Fourier propagation of the 1D nonlinear envelope equation.

    dA/dz = i (b2/2) W^2 A + i (b3/6) W^3 A                       (spectral part)
          + i g (|A|^2 A + (i/w0) d/dt(|A|^2 A)) - (a/2) |A|^(2K) A   (temporal part)

with ``W`` the spectral offset from the carrier.  The steepening term is only
present when ``Medium.self_steepening`` is set; the loss term only when
``loss_coefficient > 0``.  There is no plasma or Raman model.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import ConfigError, GuardBandError, NonConvergenceError, NumericalError
from .grid import Field, Grid, to_spectral, to_temporal

MIN_STEP = 1e-9  # m
GUARD_FRACTION = 0.05
GUARD_TOLERANCE = 1e-6


@dataclass(frozen=True)
class Medium:
    """Propagation medium.

    Attributes:
        beta2: group-velocity dispersion, fs^2/m.
        gamma: Kerr coefficient, 1/(W m).
        beta3: third-order dispersion, fs^3/m.
        self_steepening: include the shock term.
        loss_order: exponent K of the intensity-dependent loss; the loss rate
            of |A|^2 scales as |A|^(2K), so K=0 is linear loss and K>=1 is
            multiphoton-like.
        loss_coefficient: loss strength in 1/(m W^K); 0 disables loss.
    """

    beta2: float = 20.0
    gamma: float = 0.0
    beta3: float = 0.0
    self_steepening: bool = False
    loss_order: int = 0
    loss_coefficient: float = 0.0

    def __post_init__(self):
        values = (self.beta2, self.beta3, self.gamma, self.loss_coefficient)
        if not all(math.isfinite(v) for v in values):
            raise ConfigError("medium parameters must be finite")
        if self.gamma < 0:
            raise ConfigError(f"gamma must be >= 0, got {self.gamma}")
        if self.loss_coefficient < 0:
            raise ConfigError(f"loss_coefficient must be >= 0, got {self.loss_coefficient}")
        if int(self.loss_order) != self.loss_order or self.loss_order < 0:
            raise ConfigError(f"loss_order must be an integer >= 0, got {self.loss_order}")

    @property
    def is_linear(self) -> bool:
        return self.gamma == 0 and self.loss_coefficient == 0

    @property
    def has_phase_only_nonlinearity(self) -> bool:
        return not self.self_steepening and self.loss_coefficient == 0

    def linear_only(self) -> "Medium":
        """Same dispersion with every nonlinear and loss term switched off."""
        return Medium(beta2=self.beta2, beta3=self.beta3)


@dataclass(frozen=True)
class StepControl:
    """Step-size policy.

    With ``adaptive`` the step is re-chosen every step so that the nonlinear
    phase at the current peak power stays below the bound; otherwise the bound
    is evaluated once on the input and the distance is split into equal steps.
    """

    max_step: float = 1.0
    max_nonlinear_phase_per_step: float = 0.05
    adaptive: bool = True

    def __post_init__(self):
        if not self.max_step > 0:
            raise ConfigError(f"max_step must be positive, got {self.max_step}")
        if not 0 < self.max_nonlinear_phase_per_step < math.pi:
            raise ConfigError("max_nonlinear_phase_per_step must lie in (0, pi)")


def dispersion_operator(grid: Grid, medium: Medium) -> np.ndarray:
    """Spectral generator (per metre) of the linear part, FFT order."""
    w = grid.omega
    return 1j * (medium.beta2 / 2 * w**2 + medium.beta3 / 6 * w**3)


def linear_propagate(field: Field, medium: Medium, distance: float) -> Field:
    """Exact propagation through the dispersive part alone (one spectral multiplication)."""
    spec = to_spectral(field.envelope) * np.exp(dispersion_operator(field.grid, medium) * distance)
    return field.replace(to_temporal(spec), field.z_position + distance)


def _time_derivative(grid, x):
    return to_temporal(-1j * grid.omega * to_spectral(x))


def _nonlinear_rate(grid, medium, a):
    intensity = np.abs(a) ** 2
    kerr = intensity * a
    rate = 1j * medium.gamma * kerr
    if medium.self_steepening and medium.gamma:
        rate = rate - medium.gamma / grid.omega0 * _time_derivative(grid, kerr)
    if medium.loss_coefficient:
        rate = rate - 0.5 * medium.loss_coefficient * intensity**medium.loss_order * a
    return rate


def _nonlinear_step(grid, medium, a, h):
    if medium.has_phase_only_nonlinearity:
        return a * np.exp(1j * medium.gamma * h * np.abs(a) ** 2)
    # fourth-order Runge-Kutta keeps the splitting error dominant
    k1 = _nonlinear_rate(grid, medium, a)
    k2 = _nonlinear_rate(grid, medium, a + 0.5 * h * k1)
    k3 = _nonlinear_rate(grid, medium, a + 0.5 * h * k2)
    k4 = _nonlinear_rate(grid, medium, a + h * k3)
    out = a + h / 6 * (k1 + 2 * k2 + 2 * k3 + k4)
    if medium.loss_coefficient == 0:
        # the lossless operator conserves energy exactly; project RK4 back onto it
        out *= math.sqrt(np.vdot(a, a).real / np.vdot(out, out).real)
    return out


def _rate_bound(medium, peak):
    """Upper bound on the per-metre nonlinear phase (or loss exponent) at ``peak`` W."""
    rate = medium.gamma * peak
    if medium.loss_coefficient:
        rate += 0.5 * medium.loss_coefficient * peak**medium.loss_order
    return rate


def _step_for(medium, control, peak):
    rate = _rate_bound(medium, peak)
    if rate == 0:
        return control.max_step
    return min(control.max_step, control.max_nonlinear_phase_per_step / rate)


def check_guard_band(field: Field) -> float:
    """Fraction of energy in the outer 5% of the window on either side.

    Raises:
        GuardBandError: if the fraction exceeds 1e-6.
    """
    grid = field.grid
    edge = grid.time_window * (0.5 - GUARD_FRACTION)
    power = field.power
    total = power.sum()
    frac = float(power[np.abs(grid.t) > edge].sum() / total) if total > 0 else 0.0
    if frac > GUARD_TOLERANCE:
        raise GuardBandError(
            f"{frac:.3g} of the energy sits in the time-window guard band "
            f"at z = {field.z_position} m; widen the time window"
        )
    return frac


def propagate(
    field: Field,
    medium: Medium,
    distance: float,
    step_control: StepControl | None = None,
) -> Field:
    """Advance ``field`` by ``distance`` metres with symmetric (Strang) split-step.

    Consecutive linear half-steps are fused into one spectral multiplication,
    which leaves the scheme unchanged.

    Raises:
        GuardBandError: energy reached the window edges after propagation.
        NonConvergenceError: the step control asked for a step below 1e-9 m.
    """
    if distance < 0:
        raise ConfigError(f"distance must be >= 0, got {distance}")
    if distance == 0:
        return field
    if medium.is_linear:
        # splitting is exact here; one multiplication replaces the step loop
        out = linear_propagate(field, medium, distance)
        check_guard_band(out)
        return out
    control = step_control or StepControl()
    grid = field.grid
    gen = dispersion_operator(grid, medium)

    if control.adaptive:
        next_step = lambda a: _step_for(medium, control, float(np.max(np.abs(a) ** 2)))  # noqa: E731
    else:
        h0 = _step_for(medium, control, field.peak_power)
        n_steps = max(1, math.ceil(distance / h0 * (1 - 1e-12)))
        fixed = distance / n_steps
        next_step = lambda a: fixed  # noqa: E731

    a = field.envelope
    z = 0.0
    h = min(next_step(a), distance)
    spec = to_spectral(a) * np.exp(gen * (h / 2))
    while True:
        if h < MIN_STEP:
            raise NonConvergenceError(
                f"required step {h:.3g} m is below {MIN_STEP} m at z = {z:.6g} m"
            )
        a = _nonlinear_step(grid, medium, to_temporal(spec), h)
        z += h
        remaining = distance - z
        if remaining <= distance * 1e-12:
            spec = to_spectral(a) * np.exp(gen * (h / 2))
            break
        h_next = min(next_step(a), remaining)
        # avoid a sliver of a final step
        if remaining - h_next < 1e-3 * h_next:
            h_next = remaining
        spec = to_spectral(a) * np.exp(gen * ((h + h_next) / 2))
        h = h_next

    out = field.replace(to_temporal(spec), field.z_position + distance)
    if not np.all(np.isfinite(out.envelope)):
        raise NumericalError("non-finite envelope after propagation")
    check_guard_band(out)
    return out


def spm_analytic(field: Field, gamma: float, distance: float) -> Field:
    """Exact dispersionless self-phase modulation: ``A exp(i gamma |A|^2 z)``."""
    a = field.envelope
    return field.replace(a * np.exp(1j * gamma * distance * np.abs(a) ** 2),
                         field.z_position + distance)


def soliton_duration(grid: Grid) -> float:
    """sech half-width T0 (fs) used for soliton fixtures on ``grid``."""
    return grid.time_window / 40


def soliton_period(grid: Grid, medium: Medium) -> float:
    """Soliton period (m), ``pi/2 * T0^2 / |beta2|``."""
    return math.pi / 2 * soliton_duration(grid) ** 2 / abs(medium.beta2)


def soliton_field(grid: Grid, medium: Medium, order_N: float) -> Field:
    """Order-N sech soliton for an anomalous-dispersion medium."""
    if not (medium.beta2 < 0 and medium.gamma > 0):
        raise ConfigError("solitons need beta2 < 0 and gamma > 0")
    if order_N < 1:
        raise ConfigError(f"soliton order must be >= 1, got {order_N}")
    t0 = soliton_duration(grid)
    amp = order_N * math.sqrt(abs(medium.beta2) / (medium.gamma * t0**2))
    return Field(grid, amp / np.cosh(grid.t / t0))


def gamma_for_phase(phi_max: float, peak_power: float, distance: float) -> float:
    """Kerr coefficient that gives peak nonlinear phase ``phi_max`` over ``distance``."""
    return phi_max / (peak_power * distance)
