"""Ensemble persistence: the ``FNSE`` binary format and a CSV exchange format.

Binary layout (little-endian)::

    magic        4s   b"FNSE"
    version      u16
    n_shots      u32
    n_bins       u32
    bin_width    f64  nm
    first_bin    f64  nm (centre of the first bin)
    value_kind   u8   0 energy_density, 1 photon_counts, 2 normalized
    seed         u64
    arm          u8   0 filament, 1 reference, 2 external
    digest       32s  SHA-256 of the run configuration
    values       f64[n_shots * n_bins], row-major

CSV: optional ``# key=value`` metadata lines, a header row of bin centres,
then one shot per line.  Floats are written with ``repr`` so a round trip is
exact.
"""

from __future__ import annotations

import os
import struct
import tempfile
from pathlib import Path

import numpy as np

from .ensemble import ARMS, VALUE_KINDS, EnsembleSpectra
from .errors import ConfigError, FormatError, TruncatedFileError

MAGIC = b"FNSE"
VERSION = 1
HEADER = struct.Struct("<4sHIIddBQB32s")


class ValidationError(FormatError):
    """File parsed but its content violates an ensemble invariant."""


def atomic_write(path, data: bytes | str) -> None:
    """Write ``data`` to a temporary file beside ``path``, then rename over it."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    if isinstance(data, str):
        data = data.encode("utf-8")
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "wb") as fh:
            fh.write(data)
        os.replace(tmp, path)
    except BaseException:
        try:
            os.unlink(tmp)
        except OSError:
            pass
        raise


def _bins(first, width, n):
    return first + width * np.arange(n)


def ensemble_to_bytes(ensemble: EnsembleSpectra) -> bytes:
    header = HEADER.pack(
        MAGIC, VERSION, ensemble.n_shots, ensemble.n_bins, float(ensemble.bin_width),
        float(ensemble.wavelength_bins[0]), VALUE_KINDS.index(ensemble.value_kind),
        ensemble.seed, ARMS.index(ensemble.arm), ensemble.config_digest,
    )
    return header + np.ascontiguousarray(ensemble.values, dtype="<f8").tobytes()


def ensemble_from_bytes(data: bytes) -> EnsembleSpectra:
    if len(data) < 4 or data[:4] != MAGIC:
        raise FormatError("not an FNSE ensemble file (bad magic)")
    if len(data) < HEADER.size:
        raise TruncatedFileError(f"header truncated: {len(data)} of {HEADER.size} bytes")
    (_, version, n_shots, n_bins, width, first, kind, seed, arm, digest) = HEADER.unpack_from(data)
    if version != VERSION:
        raise FormatError(f"unsupported FNSE version {version} (expected {VERSION})")
    if kind >= len(VALUE_KINDS) or arm >= len(ARMS):
        raise FormatError("corrupt header: unknown value kind or arm code")
    expected = HEADER.size + 8 * n_shots * n_bins
    if len(data) < expected:
        raise TruncatedFileError(
            f"payload truncated: {len(data)} of {expected} bytes "
            f"for {n_shots} x {n_bins} values"
        )
    if len(data) > expected:
        raise FormatError(
            f"dimension mismatch: {len(data) - expected} bytes beyond a "
            f"{n_shots} x {n_bins} payload"
        )
    values = np.frombuffer(data, dtype="<f8", offset=HEADER.size).reshape(n_shots, n_bins)
    try:
        return EnsembleSpectra(
            _bins(first, width, n_bins), width, values.astype(np.float64),
            VALUE_KINDS[kind], seed, ARMS[arm], digest,
        )
    except ConfigError as exc:
        raise ValidationError(f"invalid ensemble content: {exc}") from exc


def save_ensemble(ensemble: EnsembleSpectra, path) -> None:
    atomic_write(path, ensemble_to_bytes(ensemble))


def load_ensemble(path) -> EnsembleSpectra:
    """Read an ensemble file; ``.csv`` files go through :func:`load_csv`."""
    if str(path).lower().endswith(".csv"):
        return load_csv(path)
    try:
        data = Path(path).read_bytes()
    except OSError as exc:
        raise FormatError(f"cannot read {path}: {exc}") from exc
    return ensemble_from_bytes(data)


def ensemble_to_csv(ensemble: EnsembleSpectra) -> str:
    lines = [
        f"# value_kind={ensemble.value_kind}",
        f"# arm={ensemble.arm}",
        f"# seed={ensemble.seed}",
        f"# config_digest={ensemble.config_digest.hex()}",
        f"# bin_width={ensemble.bin_width!r}",
        ",".join(repr(float(b)) for b in ensemble.wavelength_bins),
    ]
    lines += [",".join(repr(float(v)) for v in row) for row in ensemble.values]
    return "\n".join(lines) + "\n"


def save_csv(ensemble: EnsembleSpectra, path) -> None:
    atomic_write(path, ensemble_to_csv(ensemble))


def ensemble_from_csv(text: str) -> EnsembleSpectra:
    """Parse CSV spectra; missing metadata means measured (external) energy densities."""
    meta = {}
    rows = []
    for lineno, line in enumerate(text.splitlines(), start=1):
        s = line.strip()
        if not s:
            continue
        if s.startswith("#"):
            if "=" in s:
                k, v = s[1:].split("=", 1)
                meta[k.strip()] = v.strip()
            continue
        try:
            rows.append((lineno, [float(x) for x in s.split(",")]))
        except ValueError as exc:
            raise FormatError(f"line {lineno}: {exc}") from exc
    if len(rows) < 2:
        raise FormatError("CSV needs a header row of bin centres and at least one shot")
    bins = np.array(rows[0][1])
    for lineno, row in rows[1:]:
        if len(row) != bins.size:
            raise FormatError(
                f"line {lineno}: dimension mismatch, {len(row)} values for {bins.size} bins"
            )
        if any(v < 0 for v in row):
            raise ValidationError(f"line {lineno}: negative spectral value (psd must be >= 0)")
    if bins.size >= 2:
        steps = np.diff(bins)
        width = float(meta.get("bin_width", (bins[-1] - bins[0]) / (bins.size - 1)))
        if not np.allclose(steps, width, rtol=1e-6, atol=0):
            raise ValidationError("bin centres must be uniformly spaced")
    elif "bin_width" in meta:
        width = float(meta["bin_width"])
    else:
        raise FormatError("a single-bin CSV needs a '# bin_width=' line")
    values = np.array([r for _, r in rows[1:]], dtype=np.float64)
    try:
        return EnsembleSpectra(
            bins, width, values,
            meta.get("value_kind", "energy_density"),
            int(meta.get("seed", 0)),
            meta.get("arm", "external"),
            bytes.fromhex(meta.get("config_digest", "00" * 32)),
        )
    except (ConfigError, ValueError) as exc:
        raise ValidationError(f"invalid CSV ensemble: {exc}") from exc


def load_csv(path) -> EnsembleSpectra:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise FormatError(f"cannot read {path}: {exc}") from exc
    return ensemble_from_csv(text)
