"""Spectral analysis of population time traces.

The free-evolution signal is a comb at integer multiples of the field
frequency, with each line split by the secular shift. This module turns
a uniformly sampled trace into a one-sided magnitude spectrum, locates
its peaks and labels each peak with a harmonic order and a sideband
branch.

Peak detection runs on the unpadded frequency grid (every pad_factor-th
bin of the padded transform equals an unpadded DFT bin), which keeps the
sidelobe oscillations that zero padding samples between bins from
masquerading as peaks. Detected peaks are then refined on the padded
grid with a three-point parabolic fit for sub-bin frequency estimates.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import AmbiguousAssignment, ValidationError, ZeroCarrier
from .model import Spectrum, TimeTrace

WINDOWS = ("rect", "hann")


def spectrum(
    trace: TimeTrace,
    window: str = "rect",
    pad_factor: int = 8,
    remove_mean: bool = True,
) -> Spectrum:
    """One-sided magnitude spectrum of a population trace.

    Normalized so that the sum of squared magnitudes equals the energy
    of the (windowed) samples for any pad_factor. remove_mean drops the
    constant baseline before windowing; the oscillating content,
    including any line inside the first bin, is unaffected.
    """
    if window not in WINDOWS:
        raise ValidationError(f"window must be one of {WINDOWS}, got {window!r}")
    if pad_factor < 1:
        raise ValidationError(f"pad_factor must be >= 1, got {pad_factor}")
    x = trace.population.astype(float)
    if remove_mean:
        x = x - x.mean()
    if window == "hann":
        x = x * np.hanning(x.size)
    n = x.size
    n_pad = n * pad_factor
    amp = np.abs(np.fft.rfft(x, n_pad))
    gain = np.full(amp.size, math.sqrt(2.0))
    gain[0] = 1.0
    if n_pad % 2 == 0:
        gain[-1] = 1.0
    # window and pad_factor live on the Spectrum itself; only the flag
    # with no dedicated field rides along in the meta dict
    meta = dict(trace.meta)
    meta.update(remove_mean=remove_mean)
    return Spectrum(
        freq_mhz=np.fft.rfftfreq(n_pad, d=trace.dt),
        magnitude=gain * amp / math.sqrt(n_pad),
        window=window,
        pad_factor=pad_factor,
        n_samples=n,
        meta=meta,
    )


@dataclass(frozen=True)
class Peak:
    """One spectral line: refined frequency (MHz) and magnitude."""

    freq_mhz: float
    magnitude: float


def _prominence(mag: np.ndarray, i: int) -> float:
    """Height of mag[i] above the higher of its two walk-down bases.

    Each base is the minimum encountered walking away from i until a bin
    taller than mag[i] appears (or the edge of the array).
    """
    left = mag[i]
    j = i - 1
    while j >= 0 and mag[j] <= mag[i]:
        left = min(left, mag[j])
        j -= 1
    right = mag[i]
    j = i + 1
    while j < mag.size and mag[j] <= mag[i]:
        right = min(right, mag[j])
        j += 1
    return mag[i] - max(left, right)


def _refine(mag: np.ndarray, freq: np.ndarray, center: int, halfwidth: int) -> Peak:
    """Parabolic sub-bin refinement around the padded-grid maximum."""
    lo = max(0, center - halfwidth)
    hi = min(mag.size, center + halfwidth + 1)
    p = lo + int(np.argmax(mag[lo:hi]))
    if p == 0 or p == mag.size - 1:
        return Peak(freq_mhz=float(freq[p]), magnitude=float(mag[p]))
    lft, mid, rgt = mag[p - 1], mag[p], mag[p + 1]
    denom = lft - 2.0 * mid + rgt
    offset = 0.0 if denom == 0.0 else 0.5 * (lft - rgt) / denom
    offset = float(np.clip(offset, -0.5, 0.5))
    df = freq[1] - freq[0]
    return Peak(
        freq_mhz=float(freq[p] + offset * df),
        magnitude=float(mid - 0.25 * (lft - rgt) * offset),
    )


def find_peaks(spec: Spectrum, threshold: float = 0.04) -> list:
    """Locate spectral lines above a relative threshold.

    A bin on the unpadded grid qualifies when it is a local maximum and
    both its height and its prominence reach threshold times the grid
    maximum; the dual criterion keeps a flat noisy spectrum from
    producing spurious peaks at tight thresholds. Returns Peaks sorted
    by frequency.
    """
    if not 0.0 < threshold <= 1.0:
        raise ValidationError(f"threshold must be in (0, 1], got {threshold}")
    step = spec.pad_factor
    raw = spec.magnitude[::step]
    if raw.size < 3:
        raise ValidationError("spectrum too short for peak detection")
    top = raw.max()
    if top <= 0.0:
        return []
    found = []
    for i in range(raw.size):
        lo_ok = i == 0 or raw[i] > raw[i - 1]
        hi_ok = i == raw.size - 1 or raw[i] > raw[i + 1]
        if not (lo_ok and hi_ok):
            continue
        if raw[i] < threshold * top or _prominence(raw, i) < threshold * top:
            continue
        found.append(_refine(spec.magnitude, spec.freq_mhz, i * step, step))
    return sorted(found, key=lambda p: p.freq_mhz)


@dataclass(frozen=True)
class HarmonicAssignment:
    """Peak labeled as the n-th carrier harmonic plus or minus a shift."""

    n: int
    branch: str
    freq_mhz: float
    magnitude: float
    shift_mhz: float


def assign_harmonics(peaks: list, nu_rf: float, max_offset: float = 0.4) -> list:
    """Label each peak with its nearest harmonic of the carrier.

    The residual against n * nu_rf becomes the sideband shift; its sign
    picks the branch. A residual beyond max_offset carrier units means
    the peak sits closer to nowhere and raises AmbiguousAssignment.
    """
    if nu_rf <= 0.0:
        raise ZeroCarrier(f"nu_rf must be > 0, got {nu_rf}")
    out = []
    for p in peaks:
        n = int(round(p.freq_mhz / nu_rf))
        d = p.freq_mhz - n * nu_rf
        if abs(d) > max_offset * nu_rf:
            raise AmbiguousAssignment(
                f"peak at {p.freq_mhz:.6g} MHz is {d:.6g} MHz from harmonic {n}, "
                f"beyond {max_offset} of the carrier spacing"
            )
        out.append(
            HarmonicAssignment(
                n=n,
                branch="-" if d < 0.0 else "+",
                freq_mhz=p.freq_mhz,
                magnitude=p.magnitude,
                shift_mhz=abs(d),
            )
        )
    return out
