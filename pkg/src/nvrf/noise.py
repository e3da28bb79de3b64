"""Photon-counting readout noise for simulated traces.

Optical readout maps the bright-level population linearly onto a photon
detection rate per shot, rate1 + P (rate0 - rate1), so the photon count
over many shots is Poisson with mean

    lam = shots (P rate0 + (1 - P) rate1).

Inverting the same linear map on the observed count gives the population
estimate and its one-sigma uncertainty sqrt(counts) / (shots (rate0 -
rate1)). The estimate can land outside [0, 1]; sampled traces carry
relaxed range bounds in their meta so downstream validation accepts
them.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

from .errors import ValidationError
from .model import TimeTrace

# Population estimates may overshoot [0, 1]; accept this much slack.
RANGE_LO = -0.2
RANGE_HI = 1.2


@dataclass(frozen=True)
class ReadoutModel:
    """Per-shot detection rates for the bright and dark levels."""

    rate0: float = 0.03
    rate1: float = 0.02
    shots: int = 100_000

    def __post_init__(self):
        if not (math.isfinite(self.rate0) and math.isfinite(self.rate1)):
            raise ValidationError(f"rates must be finite, got {self.rate0}, {self.rate1}")
        if self.rate1 < 0.0 or self.rate0 <= self.rate1:
            raise ValidationError(
                f"need rate0 > rate1 >= 0 for an invertible readout, got {self.rate0}, {self.rate1}"
            )
        if self.shots < 1:
            raise ValidationError(f"shots must be >= 1, got {self.shots}")

    def mean_counts(self, population) -> np.ndarray:
        p = np.asarray(population, dtype=float)
        return self.shots * (p * self.rate0 + (1.0 - p) * self.rate1)

    def expected_sigma(self, population) -> np.ndarray:
        """One-sigma population uncertainty at the given true population."""
        p = np.asarray(population, dtype=float)
        lam_per_shot = p * self.rate0 + (1.0 - p) * self.rate1
        return np.sqrt(lam_per_shot / self.shots) / (self.rate0 - self.rate1)


def sample_trace(trace: TimeTrace, model: ReadoutModel | None = None, seed: int = 0) -> TimeTrace:
    """Draw one noisy realization of a clean trace.

    Deterministic for a given seed. Each returned population comes from
    a Poisson photon count pushed back through the readout map; sigma is
    the count-based estimate, zero when no photons arrived.
    """
    if model is None:
        model = ReadoutModel()
    rng = np.random.default_rng(seed)
    counts = rng.poisson(model.mean_counts(trace.population))
    span = model.shots * (model.rate0 - model.rate1)
    population = (counts - model.shots * model.rate1) / span
    sigma = np.sqrt(counts) / span
    meta = dict(trace.meta)
    meta.update(
        rate0=model.rate0,
        rate1=model.rate1,
        shots=model.shots,
        seed=seed,
        # Rare tail draws may overshoot even the relaxed window; the
        # recorded bounds always cover the data actually written.
        range_lo=min(RANGE_LO, float(population.min())),
        range_hi=max(RANGE_HI, float(population.max())),
    )
    return replace(
        trace,
        population=population.astype(float),
        sigma=sigma.astype(float),
        meta=meta,
    )
