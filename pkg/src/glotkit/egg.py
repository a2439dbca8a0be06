"""Electroglottographic event detection and open-quotient measurement.

The EGG waveform tracks vocal-fold contact, so its first difference has a
sharp positive peak at each glottal closure and a broader negative peak at
each opening.  ``decom_detect`` turns a differenced EGG into calibrated
closure/opening instants; ``egg_open_quotients`` converts those instants
into per-period open-quotient records that serve as ground truth when
scoring glottal-flow estimates.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np
from scipy.signal import find_peaks

from .signals import SampledSignal

__all__ = ["GciSequence", "EggOqRecord", "decom_detect", "egg_open_quotients"]


@dataclass(frozen=True)
class GciSequence:
    """Detected glottal closure and opening instants, in samples.

    ``closures`` holds one index per detected closure, strictly increasing.
    ``openings`` holds one entry per period (pair of consecutive closures);
    a value of -1 marks a period where no opening was found.  Present
    openings lie strictly inside their period.
    """

    closures: np.ndarray
    openings: np.ndarray
    rate: float

    def __post_init__(self):
        closures = np.asarray(self.closures, dtype=np.int64)
        openings = np.asarray(self.openings, dtype=np.int64)
        if closures.ndim != 1 or openings.ndim != 1:
            raise ValueError("closures and openings must be 1-d")
        if self.rate <= 0:
            raise ValueError("rate must be positive")
        if closures.size and np.any(np.diff(closures) <= 0):
            raise ValueError("closures must be strictly increasing")
        n_periods = max(0, closures.size - 1)
        if openings.size != n_periods:
            raise ValueError(
                f"expected {n_periods} opening entries for {closures.size} closures, "
                f"got {openings.size}"
            )
        for k in range(n_periods):
            o = openings[k]
            if o != -1 and not closures[k] < o < closures[k + 1]:
                raise ValueError(f"opening {o} not inside period {k}")
        object.__setattr__(self, "closures", closures)
        object.__setattr__(self, "openings", openings)

    def __len__(self) -> int:
        return int(self.closures.size)


@dataclass(frozen=True)
class EggOqRecord:
    """One period's EGG-derived open quotient with its timing anchors."""

    period_index: int
    t_closure: float
    t_opening: float
    f0: float
    oq: float

    def __post_init__(self):
        if not 0.0 < self.oq < 1.0:
            raise ValueError(f"oq must lie in (0, 1), got {self.oq}")
        if self.f0 <= 0:
            raise ValueError("f0 must be positive")
        if self.t_opening <= self.t_closure:
            raise ValueError("opening must follow closure")


def _adaptive_threshold(x: np.ndarray, rate: float) -> np.ndarray:
    """0.35 x the 99th percentile of |x| over a sliding ~100 ms context."""
    n = x.shape[0]
    mag = np.abs(x)
    w = max(3, int(round(0.1 * rate)))
    if n <= w:
        return np.full(n, 0.35 * np.percentile(mag, 99.0))
    step = max(1, w // 4)
    windows = np.lib.stride_tricks.sliding_window_view(mag, w)[::step]
    level = np.percentile(windows, 99.0, axis=1)
    centers = np.arange(windows.shape[0]) * step + (w - 1) / 2.0
    return 0.35 * np.interp(np.arange(n), centers, level)


def decom_detect(degg: SampledSignal, min_f0: float, max_f0: float) -> GciSequence:
    """Locate closure/opening instants in a differenced EGG signal.

    Closures are positive peaks that clear an adaptive threshold and respect
    a minimum spacing of ``rate / max_f0`` samples.  Openings are the most
    negative sample strictly between consecutive closures; periods longer
    than ``rate / min_f0`` are treated as voicing gaps and get no opening.
    Polarity is detected automatically, so an EGG recorded with inverted
    leads still yields the same instants.  Silence (no peak clears the
    threshold) produces an empty sequence rather than an error.
    """
    if not 0 < min_f0 < max_f0:
        raise ValueError(f"need 0 < min_f0 < max_f0, got {min_f0}, {max_f0}")
    x = degg.samples
    rate = degg.rate
    empty = GciSequence(np.array([], np.int64), np.array([], np.int64), rate)
    if x.size == 0 or not np.any(x):
        return empty

    # Dominant-extremum polarity check: closures must look like positive peaks.
    if -np.percentile(x, 0.5) > np.percentile(x, 99.5):
        x = -x

    spacing = max(1, int(round(rate / max_f0)))
    peaks, _ = find_peaks(x, height=_adaptive_threshold(x, rate), distance=spacing)
    if peaks.size == 0:
        return empty

    max_period = rate / min_f0
    openings = np.full(max(0, peaks.size - 1), -1, dtype=np.int64)
    for k in range(peaks.size - 1):
        lo, hi = peaks[k], peaks[k + 1]
        if hi - lo > max_period:
            continue  # voicing gap, not a glottal period
        span = x[lo + 1 : hi]
        if span.size == 0:
            continue
        j = int(np.argmin(span))
        if span[j] < 0:
            openings[k] = lo + 1 + j
    return GciSequence(peaks.astype(np.int64), openings, rate)


def egg_open_quotients(gcis: GciSequence) -> list[EggOqRecord]:
    """Per-period open quotients from detected instants.

    For period k the fundamental is ``rate / (s_{k+1} - s_k)`` and the open
    duration runs from the opening instant to the next closure, so
    ``oq = (s_{k+1} - o_k) / (s_{k+1} - s_k)``.  Periods without an opening
    are skipped (with a summary warning), and records are emitted only when
    0.05 < oq < 0.95.
    """
    if len(gcis) < 2:
        raise ValueError("need at least two closures to measure open quotients")
    closures, openings, rate = gcis.closures, gcis.openings, gcis.rate
    records: list[EggOqRecord] = []
    skipped = 0
    for k in range(closures.size - 1):
        o = openings[k]
        if o < 0:
            skipped += 1
            continue
        s0, s1 = int(closures[k]), int(closures[k + 1])
        oq = (s1 - o) / (s1 - s0)
        if not 0.05 < oq < 0.95:
            continue
        records.append(
            EggOqRecord(
                period_index=k,
                t_closure=s0 / rate,
                t_opening=float(o) / rate,
                f0=rate / (s1 - s0),
                oq=float(oq),
            )
        )
    if skipped:
        warnings.warn(
            f"{skipped} of {closures.size - 1} periods had no opening instant and were skipped",
            RuntimeWarning,
            stacklevel=2,
        )
    return records
