"""Readers and writers for traces, spectra, peak lists, fits, sequences.

Tabular data goes to CSV with `# key=value` comment lines carrying the
metadata; structured results go to JSON. Numeric values are written with
repr precision so a write/read cycle reproduces every float bit for bit
(the JSON files use Python's extended dialect, which spells out infinite
values). Failures to touch the filesystem raise IoFailure; structurally
broken content raises FileFormatError.
"""

from __future__ import annotations

import json
import math
from pathlib import Path

import numpy as np

from .errors import FileFormatError, IoFailure, ValidationError
from .estimation import FitResult
from .model import Spectrum, TimeTrace
from .sequence import PulseEvent, PulseSequence
from .spectral import HarmonicAssignment


def _r(value) -> str:
    """Full-precision cell text; exact float round trip via repr."""
    return repr(float(value))


def _fmt(value) -> str:
    if isinstance(value, (bool, np.bool_)):
        return "True" if value else "False"
    if isinstance(value, (float, np.floating)):
        return repr(float(value))
    if isinstance(value, (int, np.integer)):
        return repr(int(value))
    return str(value)


def _parse_scalar(text: str):
    if text == "True":
        return True
    if text == "False":
        return False
    try:
        return int(text)
    except ValueError:
        pass
    try:
        return float(text)
    except ValueError:
        return text


def _meta_lines(meta: dict) -> list:
    lines = []
    for key, value in meta.items():
        if value is None:
            continue
        text = _fmt(value)
        if "\n" in str(key) or "\n" in text or "=" in str(key):
            raise ValidationError(f"meta entry {key!r} cannot be serialized to a comment line")
        lines.append(f"# {key}={text}")
    return lines


def _write_text(path, text: str) -> None:
    try:
        Path(path).write_text(text)
    except OSError as exc:
        raise IoFailure(f"cannot write {path}: {exc}") from exc


def _read_lines(path) -> list:
    try:
        raw = Path(path).read_text()
    except OSError as exc:
        raise IoFailure(f"cannot read {path}: {exc}") from exc
    return raw.splitlines()


def _split_table(path, lines: list) -> tuple:
    meta: dict = {}
    header = None
    rows = []
    for ln in lines:
        ln = ln.strip()
        if not ln:
            continue
        if ln.startswith("#"):
            body = ln[1:].strip()
            if "=" in body:
                key, _, val = body.partition("=")
                meta[key.strip()] = _parse_scalar(val.strip())
            continue
        if header is None:
            header = [c.strip() for c in ln.split(",")]
            continue
        rows.append([c.strip() for c in ln.split(",")])
    if header is None:
        raise FileFormatError(f"{path}: no header row found")
    return meta, header, rows


def _columns(path, header: list, rows: list, required: tuple) -> dict:
    for name in required:
        if name not in header:
            raise FileFormatError(f"{path}: missing column {name!r}, found {header}")
    out: dict = {name: [] for name in header}
    for i, row in enumerate(rows):
        if len(row) != len(header):
            raise FileFormatError(f"{path}: row {i + 1} has {len(row)} fields, expected {len(header)}")
        for name, cell in zip(header, row):
            try:
                out[name].append(float(cell))
            except ValueError as exc:
                raise FileFormatError(f"{path}: row {i + 1}, column {name!r}: {cell!r}") from exc
    return {k: np.asarray(v) for k, v in out.items()}


def write_trace(path, trace: TimeTrace) -> None:
    lines = _meta_lines(trace.meta)
    if trace.sigma is None:
        lines.append("tau_us,population")
        for t, p in zip(trace.tau_us, trace.population):
            lines.append(f"{_r(t)},{_r(p)}")
    else:
        lines.append("tau_us,population,sigma")
        for t, p, s in zip(trace.tau_us, trace.population, trace.sigma):
            lines.append(f"{_r(t)},{_r(p)},{_r(s)}")
    _write_text(path, "\n".join(lines) + "\n")


def read_trace(path) -> TimeTrace:
    meta, header, rows = _split_table(path, _read_lines(path))
    cols = _columns(path, header, rows, required=("tau_us", "population"))
    try:
        return TimeTrace(
            tau_us=cols["tau_us"],
            population=cols["population"],
            sigma=cols.get("sigma"),
            meta=meta,
        )
    except ValidationError as exc:
        raise FileFormatError(f"{path}: {exc}") from exc


def write_spectrum(path, spec: Spectrum) -> None:
    meta = dict(spec.meta)
    meta.update(window=spec.window, pad_factor=spec.pad_factor, n_samples=spec.n_samples)
    lines = _meta_lines(meta)
    lines.append("freq_mhz,magnitude")
    for f, m in zip(spec.freq_mhz, spec.magnitude):
        lines.append(f"{_r(f)},{_r(m)}")
    _write_text(path, "\n".join(lines) + "\n")


def read_spectrum(path) -> Spectrum:
    meta, header, rows = _split_table(path, _read_lines(path))
    cols = _columns(path, header, rows, required=("freq_mhz", "magnitude"))
    window = meta.pop("window", "rect")
    pad_factor = int(meta.pop("pad_factor", 1))
    n_samples = int(meta.pop("n_samples", 0))
    try:
        return Spectrum(
            freq_mhz=cols["freq_mhz"],
            magnitude=cols["magnitude"],
            window=window,
            pad_factor=pad_factor,
            n_samples=n_samples,
            meta=meta,
        )
    except ValidationError as exc:
        raise FileFormatError(f"{path}: {exc}") from exc


def write_peaks(path, assignments: list, meta: dict | None = None) -> None:
    lines = _meta_lines(meta or {})
    lines.append("n,branch,freq_mhz,magnitude,shift_mhz")
    for a in assignments:
        lines.append(f"{a.n},{a.branch},{_r(a.freq_mhz)},{_r(a.magnitude)},{_r(a.shift_mhz)}")
    _write_text(path, "\n".join(lines) + "\n")


def read_peaks(path) -> list:
    _, header, rows = _split_table(path, _read_lines(path))
    required = ("n", "branch", "freq_mhz", "magnitude", "shift_mhz")
    for name in required:
        if name not in header:
            raise FileFormatError(f"{path}: missing column {name!r}, found {header}")
    idx = {name: header.index(name) for name in required}
    out = []
    for i, row in enumerate(rows):
        if len(row) != len(header):
            raise FileFormatError(f"{path}: row {i + 1} has {len(row)} fields, expected {len(header)}")
        try:
            out.append(
                HarmonicAssignment(
                    n=int(row[idx["n"]]),
                    branch=row[idx["branch"]],
                    freq_mhz=float(row[idx["freq_mhz"]]),
                    magnitude=float(row[idx["magnitude"]]),
                    shift_mhz=float(row[idx["shift_mhz"]]),
                )
            )
        except ValueError as exc:
            raise FileFormatError(f"{path}: row {i + 1}: {exc}") from exc
    return out


def write_fit(path, fit: FitResult) -> None:
    doc = {
        "params": fit.params,
        "sigma": fit.sigma,
        "residual_rms": fit.residual_rms,
        "chi2_red": fit.chi2_red,
        "n_iter": fit.n_iter,
        "init_source": fit.init_source,
        "shift_sign_ambiguous": fit.shift_sign_ambiguous,
        "meta": {k: v for k, v in fit.meta.items() if v is not None},
    }
    _write_text(path, json.dumps(doc, indent=2) + "\n")


def read_fit(path) -> FitResult:
    text = "\n".join(_read_lines(path))
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise FileFormatError(f"{path}: {exc}") from exc
    try:
        return FitResult(
            params={k: float(v) for k, v in doc["params"].items()},
            sigma={k: float(v) for k, v in doc["sigma"].items()},
            residual_rms=float(doc["residual_rms"]),
            chi2_red=None if doc.get("chi2_red") is None else float(doc["chi2_red"]),
            n_iter=int(doc["n_iter"]),
            init_source=str(doc["init_source"]),
            shift_sign_ambiguous=bool(doc["shift_sign_ambiguous"]),
            meta=dict(doc.get("meta", {})),
        )
    except (KeyError, TypeError, ValueError) as exc:
        raise FileFormatError(f"{path}: malformed fit document: {exc}") from exc


def write_sequence(path, seq: PulseSequence) -> None:
    doc = {
        "kind_tag": seq.kind_tag,
        "events": [
            {
                "kind": e.kind,
                "start": e.start,
                "duration": e.duration,
                "mw_angle": e.mw_angle,
                "mw_phase": e.mw_phase,
            }
            for e in seq.events
        ],
    }
    _write_text(path, json.dumps(doc, indent=2) + "\n")


def read_sequence(path) -> PulseSequence:
    text = "\n".join(_read_lines(path))
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise FileFormatError(f"{path}: {exc}") from exc
    try:
        events = tuple(
            PulseEvent(
                kind=str(e["kind"]),
                start=float(e["start"]),
                duration=float(e["duration"]),
                mw_angle=float(e.get("mw_angle", 0.0)),
                mw_phase=float(e.get("mw_phase", 0.0)),
            )
            for e in doc["events"]
        )
        return PulseSequence(kind_tag=str(doc["kind_tag"]), events=events)
    except (KeyError, TypeError, ValueError) as exc:
        raise FileFormatError(f"{path}: malformed sequence document: {exc}") from exc


def _json_safe(value):
    if isinstance(value, (np.floating, np.integer)):
        return value.item()
    if isinstance(value, tuple):
        return list(value)
    if isinstance(value, float) and not math.isfinite(value):
        return value
    return value


def write_summary(path, summary: dict) -> None:
    """Persist a flat summary dict (e.g. the two-power reconstruction)."""
    doc = {k: _json_safe(v) for k, v in summary.items()}
    _write_text(path, json.dumps(doc, indent=2) + "\n")
