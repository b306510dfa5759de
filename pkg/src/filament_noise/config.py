"""Run configuration: a small ``section.key = value`` text format.

Grammar (UTF-8):

* one ``key = value`` per line; keys are dotted (``grid.n_points``);
* ``#`` starts a comment, blank lines are ignored;
* numbers may be written as multiples of pi (``3pi``, ``3*pi``);
* lists are comma separated; wavelength windows are ``lo:hi``.

Every output of a run carries :attr:`RunConfig.digest`, a SHA-256 of the
canonical serialization of all physics-relevant keys (``shots.workers`` and
``output.dir`` are excluded so they cannot change results).
"""

from __future__ import annotations

import hashlib
import math
import re
from dataclasses import dataclass
from importlib import resources
from pathlib import Path

from .detection import Channel, DetectorModel
from .ensemble import JitterModel, PulseParameters, SpectrometerBinning, phase_calibrated_medium
from .errors import ConfigError, FormatError
from .grid import Grid, make_grid
from .propagation import Medium, StepControl

REQUIRED = object()


def _float(text):
    s = text.strip().replace(" ", "")
    m = re.fullmatch(r"([-+0-9.eE]*)\*?pi", s)
    if m:
        k = m.group(1)
        return (float(k) if k not in ("", "+", "-") else float(k + "1")) * math.pi
    return float(s)


def _int(text):
    return int(text.strip())


def _bool(text):
    s = text.strip().lower()
    if s in ("true", "yes", "on", "1"):
        return True
    if s in ("false", "no", "off", "0"):
        return False
    raise ValueError(f"not a boolean: {text!r}")


def _floats(text):
    return tuple(_float(p) for p in text.split(",") if p.strip())


def _windows(text):
    out = []
    for part in text.split(","):
        if not part.strip():
            continue
        lo, hi = part.split(":")
        out.append((_float(lo), _float(hi)))
    return tuple(out)


def _str(text):
    return text.strip()


# key -> (parser, default); REQUIRED marks keys that must be present
SCHEMA = {
    "grid.n_points": (_int, REQUIRED),
    "grid.time_window_fs": (_float, REQUIRED),
    "grid.carrier_nm": (_float, REQUIRED),
    "pulse.energy_j": (_float, REQUIRED),
    "pulse.duration_fs": (_float, REQUIRED),
    "pulse.chirp": (_float, 0.0),
    "medium.beta2_fs2_per_m": (_float, REQUIRED),
    "medium.beta3_fs3_per_m": (_float, 0.0),
    "medium.phi_max_rad": (_float, REQUIRED),
    "medium.self_steepening": (_bool, False),
    "medium.loss_order": (_int, 0),
    "medium.loss_coefficient": (_float, 0.0),
    "propagation.distance_m": (_float, REQUIRED),
    "propagation.max_step_m": (_float, 1.0),
    "propagation.max_phase_per_step_rad": (_float, 0.05),
    "propagation.adaptive": (_bool, True),
    "jitter.sigma_energy": (_float, REQUIRED),
    "jitter.sigma_duration": (_float, 0.005),
    "jitter.sigma_chirp": (_float, 0.0),
    "shots.n": (_int, REQUIRED),
    "shots.seed": (_int, REQUIRED),
    "shots.workers": (_int, 1),
    "spectrometer.lo_nm": (_float, REQUIRED),
    "spectrometer.hi_nm": (_float, REQUIRED),
    "spectrometer.resolution_nm": (_float, REQUIRED),
    "channels.centers_nm": (_floats, (805.0, 840.0)),
    "channels.bandwidth_nm": (_float, 9.0),
    "filter.windows_nm": (_windows, ((785.0, 820.0), (814.0, 849.0))),
    "detector.grating_efficiency": (_float, 0.9),
    "detector.quantum_efficiency": (_float, 0.93),
    "detector.poisson": (_bool, True),
    "detector.seed": (_int, 0),
    "output.dir": (_str, "."),
}

NOT_DIGESTED = {"shots.workers", "output.dir"}


def parse_config_text(text: str) -> dict:
    """Split config text into raw ``{key: (value_text, line_number)}``.

    Raises:
        ConfigError: on malformed lines or duplicate keys, with line numbers.
    """
    raw = {}
    problems = []
    for lineno, line in enumerate(text.splitlines(), start=1):
        body = line.split("#", 1)[0].strip()
        if not body:
            continue
        if "=" not in body:
            problems.append(f"line {lineno}: expected 'key = value', got {line.strip()!r}")
            continue
        key, value = (p.strip() for p in body.split("=", 1))
        if not re.fullmatch(r"[A-Za-z_][\w]*(\.[A-Za-z_][\w]*)+", key):
            problems.append(f"line {lineno}: invalid key {key!r} (expected section.name)")
            continue
        if key in raw:
            problems.append(f"line {lineno}: duplicate key {key!r} (first on line {raw[key][1]})")
            continue
        raw[key] = (value, lineno)
    if problems:
        raise ConfigError("; ".join(problems), problems)
    return raw


@dataclass(frozen=True)
class RunConfig:
    values: dict
    grid: Grid
    nominal: PulseParameters
    medium: Medium
    distance: float
    step_control: StepControl
    jitter: JitterModel
    n_shots: int
    seed: int
    workers: int
    binning: SpectrometerBinning
    channels: tuple
    windows: tuple
    detector: DetectorModel
    detector_seed: int
    output_dir: Path
    digest: bytes

    @property
    def phi_max(self) -> float:
        return self.values["medium.phi_max_rad"]

    @property
    def lambda0(self) -> float:
        return self.grid.carrier_wavelength

    @property
    def digest_hex(self) -> str:
        return self.digest.hex()

    def replace(self, **overrides) -> "RunConfig":
        """New config with dotted-key overrides, e.g. ``replace(**{"shots.n": 10})``."""
        values = dict(self.values)
        values.update(overrides)
        return config_from_mapping(values)

    def canonical_text(self) -> str:
        return canonical_text(self.values)


def _canonical(value):
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return repr(value)
    if isinstance(value, tuple):
        return ",".join(_canonical(v) if not isinstance(v, tuple) else ":".join(map(repr, v))
                        for v in value)
    return str(value)


def canonical_text(values: dict) -> str:
    return "".join(
        f"{key} = {_canonical(values[key])}\n" for key in sorted(SCHEMA) if key not in NOT_DIGESTED
    )


def _build(values):
    problems = []

    def attempt(path, fn):
        try:
            return fn()
        except ConfigError as exc:
            problems.append(f"{path}: {exc}")
        except (ValueError, ZeroDivisionError, OverflowError) as exc:
            problems.append(f"{path}: {exc}")
        return None

    v = values
    grid = attempt("grid", lambda: make_grid(v["grid.n_points"], v["grid.time_window_fs"],
                                             v["grid.carrier_nm"]))
    nominal = attempt("pulse", lambda: PulseParameters(v["pulse.energy_j"], v["pulse.duration_fs"],
                                                       v["pulse.chirp"]))
    if grid is not None and nominal is not None:
        attempt("pulse", lambda: nominal.field(grid))
    if not v["propagation.distance_m"] > 0:
        problems.append("propagation.distance_m: must be positive")
    if not v["medium.phi_max_rad"] >= 0:
        problems.append("medium.phi_max_rad: must be >= 0")
    medium = None
    if nominal is not None and v["propagation.distance_m"] > 0:
        medium = attempt("medium", lambda: phase_calibrated_medium(
            v["medium.phi_max_rad"], nominal, v["propagation.distance_m"],
            beta2=v["medium.beta2_fs2_per_m"], beta3=v["medium.beta3_fs3_per_m"],
            self_steepening=v["medium.self_steepening"], loss_order=v["medium.loss_order"],
            loss_coefficient=v["medium.loss_coefficient"]))
    step = attempt("propagation", lambda: StepControl(
        v["propagation.max_step_m"], v["propagation.max_phase_per_step_rad"],
        v["propagation.adaptive"]))
    jitter = attempt("jitter", lambda: JitterModel(
        v["jitter.sigma_energy"], v["jitter.sigma_duration"], v["jitter.sigma_chirp"]))
    if v["shots.n"] < 2:
        problems.append(f"shots.n: must be >= 2, got {v['shots.n']}")
    if not 0 <= v["shots.seed"] < 2**64:
        problems.append("shots.seed: must fit an unsigned 64-bit integer")
    if v["shots.workers"] < 1:
        problems.append("shots.workers: must be >= 1")
    binning = attempt("spectrometer", lambda: SpectrometerBinning(
        v["spectrometer.lo_nm"], v["spectrometer.hi_nm"], v["spectrometer.resolution_nm"]))
    channels = []
    for c in v["channels.centers_nm"]:
        ch = attempt("channels.centers_nm", lambda c=c: Channel(c, v["channels.bandwidth_nm"]))
        if ch is None:
            continue
        if binning is not None and (ch.lo < binning.lo - 1e-9 or ch.hi > binning.hi + 1e-9):
            problems.append(
                f"channels.centers_nm: channel {ch.label} does not fit the spectrometer range"
            )
        channels.append(ch)
    for lo, hi in v["filter.windows_nm"]:
        if not lo < hi:
            problems.append(f"filter.windows_nm: window {lo}:{hi} needs lo < hi")
        elif binning is not None and (hi <= binning.lo or lo >= binning.hi):
            problems.append(f"filter.windows_nm: window {lo}:{hi} misses the spectrometer range")
    detector = attempt("detector", lambda: DetectorModel(
        v["detector.grating_efficiency"], v["detector.quantum_efficiency"], v["detector.poisson"]))
    if problems:
        raise ConfigError(f"invalid configuration: {'; '.join(problems)}", problems)
    digest = hashlib.sha256(canonical_text(values).encode()).digest()
    return RunConfig(
        values=dict(values), grid=grid, nominal=nominal, medium=medium,
        distance=v["propagation.distance_m"], step_control=step, jitter=jitter,
        n_shots=v["shots.n"], seed=v["shots.seed"], workers=v["shots.workers"],
        binning=binning, channels=tuple(channels), windows=tuple(v["filter.windows_nm"]),
        detector=detector, detector_seed=v["detector.seed"],
        output_dir=Path(v["output.dir"]), digest=digest,
    )


def config_from_mapping(mapping: dict, lines: dict | None = None) -> RunConfig:
    """Validate a ``{dotted key: value}`` mapping; values may be text or already typed.

    All problems are collected and raised together.
    """
    lines = lines or {}
    problems = []
    values = {}
    for key in mapping:
        if key not in SCHEMA:
            where = f"line {lines[key]}: " if key in lines else ""
            problems.append(f"{where}{key}: unknown key")
    for key, (parser, default) in SCHEMA.items():
        if key not in mapping:
            if default is REQUIRED:
                problems.append(f"{key}: required field missing")
            else:
                values[key] = default
            continue
        raw = mapping[key]
        try:
            if isinstance(raw, str):
                values[key] = parser(raw)
            elif parser is _float:
                values[key] = float(raw)
            elif parser is _int:
                if isinstance(raw, float) and not raw.is_integer():
                    raise ValueError(f"not an integer: {raw!r}")
                values[key] = int(raw)
            elif parser is _floats:
                values[key] = tuple(float(x) for x in raw)
            elif parser is _windows:
                values[key] = tuple((float(lo), float(hi)) for lo, hi in raw)
            else:
                values[key] = raw
        except (ValueError, TypeError) as exc:
            where = f"line {lines[key]}: " if key in lines else ""
            problems.append(f"{where}{key}: cannot parse {raw!r} ({exc})")
    if problems:
        raise ConfigError(f"invalid configuration: {'; '.join(problems)}", problems)
    return _build(values)


def load_config(path) -> RunConfig:
    """Read and validate a config file.

    Raises:
        ConfigError: listing every problem; parse errors carry line numbers.
        FormatError: the file cannot be read.
    """
    try:
        text = Path(path).read_text(encoding="utf-8")
    except (OSError, UnicodeDecodeError) as exc:
        raise FormatError(f"cannot read config {path}: {exc}") from exc
    raw = parse_config_text(text)
    return config_from_mapping({k: v for k, (v, _) in raw.items()},
                               {k: n for k, (_, n) in raw.items()})


def default_config_path() -> Path:
    return Path(str(resources.files("filament_noise") / "data" / "default.cfg"))


def default_config() -> RunConfig:
    """The shipped configuration mirroring the experiment's nominal values."""
    return load_config(default_config_path())
