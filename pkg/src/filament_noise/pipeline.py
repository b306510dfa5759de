"""End-to-end runs: simulate both arms, analyze an ensemble, summarize metrics."""

from __future__ import annotations

import itertools
import json
import math

import numpy as np

from .config import RunConfig
from .detection import (
    Channel,
    DetectorModel,
    channel_counts,
    conjugate_wavelength,
    conjugation_locus,
    transmission_for_mean,
    window_series,
)
from .ensemble import EnsembleSpectra, generate_shots, run_arm
from .errors import ConfigError, DegenerateStatisticsError
from .statistics import (
    CorrelationMap,
    correlation_map,
    fano,
    gemellity,
    noise_reduction_db,
    normalize_rows,
    pearson,
)

METRICS_FORMAT = "fnse-metrics"


def simulate(config: RunConfig, arms=("filament", "reference"), workers=None) -> dict:
    """Run the requested arms of ``config``; returns ``{arm: EnsembleSpectra}``.

    The reference arm is the same shot set with every nonlinear term removed.
    """
    shots = generate_shots(config.seed, config.n_shots, config.nominal, config.jitter)
    workers = config.workers if workers is None else workers
    media = {"filament": config.medium, "reference": config.medium.linear_only()}
    out = {}
    for arm in arms:
        if arm not in media:
            raise ConfigError(f"unknown arm {arm!r}")
        out[arm] = run_arm(
            shots, media[arm], config.distance, config.grid, config.binning,
            config.step_control, workers=workers, arm=arm, config_digest=config.digest,
        )
    return out


def _provenance(ens: EnsembleSpectra):
    return {
        "arm": ens.arm,
        "seed": ens.seed,
        "config_digest": ens.config_digest.hex(),
        "n_shots": ens.n_shots,
        "n_bins": ens.n_bins,
        "value_kind": ens.value_kind,
    }


def _maybe(fn, *args):
    try:
        return fn(*args)
    except DegenerateStatisticsError:
        return None


def _finite_or_none(x):
    return None if x is None or not math.isfinite(x) else float(x)


def analyze(
    ensemble: EnsembleSpectra,
    lambda0: float,
    channels=(),
    windows=(),
    reference: EnsembleSpectra | None = None,
    detector: DetectorModel | None = None,
    detector_seed: int = 0,
    target_photons: float | None = None,
    noise_mode: str = "rin",
) -> tuple[CorrelationMap, dict]:
    """Correlation map plus per-channel, per-pair and per-window metrics.

    Pearson coefficients are reported on normalized spectra (primary) and on
    detected counts; Fano and Gemellity use counts.  With ``target_photons``
    each channel is attenuated to that mean photon number.  Statistics that
    are undefined for the data are reported as ``None``.

    Raises:
        DegenerateStatisticsError: fewer than two shots.
    """
    if ensemble.n_shots < 2:
        raise DegenerateStatisticsError(
            f"analysis needs an ensemble of at least 2 shots, got {ensemble.n_shots}"
        )
    detector = detector or DetectorModel(poisson=True)
    normalized = normalize_rows(ensemble) if ensemble.value_kind != "normalized" else ensemble
    cmap = correlation_map(normalized, lambda0)

    ch_metrics = []
    counts = {}
    norm_series = {}
    for ch in channels:
        det = detector
        if target_photons is not None:
            t = transmission_for_mean(ensemble, ch, detector, target_photons)
            det = DetectorModel(detector.grating_efficiency, detector.quantum_efficiency,
                                detector.poisson, t)
        c = channel_counts(ensemble, ch, det, detector_seed)
        counts[ch.label] = c
        norm_series[ch.label] = window_series(normalized, ch.lo, ch.hi)
        ch_metrics.append({
            "label": ch.label,
            "center_nm": ch.center,
            "bandwidth_nm": ch.bandwidth,
            "transmission": det.transmission,
            "mean_photons": float(np.mean(c)),
            "fano": _maybe(fano, c),
        })

    fanos = {m["label"]: m["fano"] for m in ch_metrics}
    pairs = []
    for a, b in itertools.combinations(channels, 2):
        r_norm = _maybe(pearson, norm_series[a.label], norm_series[b.label])
        r_counts = _maybe(pearson, counts[a.label], counts[b.label])
        g = None
        if r_counts is not None and fanos[a.label] is not None and fanos[b.label] is not None:
            g = gemellity(fanos[a.label], fanos[b.label], max(-1.0, min(1.0, r_counts)))
        try:
            conj = conjugate_wavelength(lambda0, b.center)
        except ConfigError:
            conj = None
        pairs.append({
            "a": a.label,
            "b": b.label,
            "a_nm": a.center,
            "b_nm": b.center,
            "pearson_normalized": r_norm,
            "pearson_counts": r_counts,
            "gemellity": g,
            "conjugate_of_b_nm": conj,
        })

    window_metrics = []
    for lo, hi in windows:
        db = None
        if reference is not None:
            db = _maybe(noise_reduction_db, window_series(ensemble, lo, hi),
                        window_series(reference, lo, hi), noise_mode)
        window_metrics.append({"lo_nm": lo, "hi_nm": hi, "reduction_db": db, "mode": noise_mode})

    locus = conjugation_locus(lambda0, ensemble.wavelength_bins)
    metrics = {
        "format": METRICS_FORMAT,
        "version": 1,
        "lambda0_nm": lambda0,
        "input": _provenance(ensemble),
        "reference": _provenance(reference) if reference is not None else None,
        "masked_bins": int(cmap.channel_mask().sum()),
        "channels": ch_metrics,
        "pairs": pairs,
        "windows": window_metrics,
        "conjugation_locus": {
            "wavelength_nm": [float(x) for x in ensemble.wavelength_bins],
            "conjugate_nm": [_finite_or_none(x) for x in locus],
        },
    }
    return cmap, metrics


def map_to_csv(cmap: CorrelationMap, digest_hex: str = "") -> str:
    """Correlation map as CSV: bin-centre header row and column, ``NA`` for masked entries."""
    bins = cmap.wavelength_bins
    lines = [f"# lambda0={cmap.lambda0!r}"]
    if digest_hex:
        lines.append(f"# config_digest={digest_hex}")
    lines.append("wavelength_nm," + ",".join(repr(float(b)) for b in bins))
    for b, row, mrow in zip(bins, cmap.matrix, cmap.mask):
        cells = ("NA" if m else repr(float(v)) for v, m in zip(row, mrow))
        lines.append(repr(float(b)) + "," + ",".join(cells))
    return "\n".join(lines) + "\n"


def metrics_to_json(metrics: dict) -> str:
    return json.dumps(metrics, indent=2, sort_keys=True) + "\n"


def _channel_width(metrics, label):
    for ch in metrics["channels"]:
        if ch["label"] == label:
            return ch["bandwidth_nm"]
    return 0.0


def classify_pair(metrics: dict, pair: dict) -> str:
    """``conjugate``, ``fundamental`` or ``other`` relative to the carrier."""
    lam0 = metrics["lambda0_nm"]
    half = max(_channel_width(metrics, pair["a"]), _channel_width(metrics, pair["b"])) / 2
    a, b = pair["a_nm"], pair["b_nm"]
    if abs(a - lam0) <= half or abs(b - lam0) <= half:
        return "fundamental"
    if pair["conjugate_of_b_nm"] is not None and abs(pair["conjugate_of_b_nm"] - a) <= half:
        return "conjugate"
    return "other"


class DigestMismatchError(ConfigError):
    """Filament and reference inputs come from different configurations."""


def report(metrics: dict, force: bool = False) -> str:
    """Readable summary checking the sign patterns expected from four-wave mixing."""
    if metrics.get("format") != METRICS_FORMAT:
        raise ConfigError("not a metrics file")
    ref = metrics.get("reference")
    if ref is not None and ref["config_digest"] != metrics["input"]["config_digest"] and not force:
        raise DigestMismatchError(
            "filament and reference ensembles have different config digests "
            f"({metrics['input']['config_digest'][:12]} vs {ref['config_digest'][:12]}); "
            "use --force to compare anyway"
        )
    lam0 = metrics["lambda0_nm"]
    inp = metrics["input"]
    out = [
        f"input: {inp['arm']} arm, {inp['n_shots']} shots x {inp['n_bins']} bins, "
        f"seed {inp['seed']}, digest {inp['config_digest'][:12]}",
        f"carrier: {lam0:g} nm; {metrics['masked_bins']} zero-variance bins masked",
        "",
        "channels:",
    ]
    for ch in metrics["channels"]:
        f = ch["fano"]
        out.append(f"  {ch['label']:>10}  mean {ch['mean_photons']:.3g} photons  "
                   f"Fano {'undefined' if f is None else format(f, '.3g')}")
    out += ["", "channel pairs (expected: conjugates correlated, fundamental anticorrelated):"]
    for p in metrics["pairs"]:
        kind = classify_pair(metrics, p)
        r = p["pearson_normalized"]
        if r is None:
            verdict = "undefined (zero variance)"
        elif kind == "conjugate":
            verdict = "as expected" if r > 0 else "DIFFERS (expected r > 0)"
        elif kind == "fundamental":
            verdict = "as expected" if r < 0 else "DIFFERS (expected r < 0)"
        else:
            verdict = "no expectation"
        g = p["gemellity"]
        g_txt = "G undefined" if g is None else (
            f"G = {g:.3g} ({'classical' if g >= 1 else 'beyond classical'})")
        r_txt = "r undefined" if r is None else f"r = {r:+.3f}"
        out.append(f"  {p['a']:>10} / {p['b']:<10} {kind:<11} {r_txt}  {verdict};  {g_txt}")
    if metrics["windows"]:
        out += ["", "spectral filtering (noise reduction vs reference, positive = quieter):"]
        for w in metrics["windows"]:
            lo, hi, db = w["lo_nm"], w["hi_nm"], w["reduction_db"]
            around = lo < lam0 < hi
            expect = "expect reduction" if around else "one-sided, expect none"
            db_txt = "n/a" if db is None else f"{db:+.2f} dB"
            if db is None:
                verdict = ""
            elif around:
                verdict = "as expected" if db > 0 else "DIFFERS"
            else:
                verdict = "as expected" if db <= 0.5 else "DIFFERS"
            out.append(f"  {lo:g}-{hi:g} nm: {db_txt} ({expect}) {verdict}".rstrip())
    return "\n".join(out) + "\n"
