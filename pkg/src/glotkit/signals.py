"""Core sampled-signal types and window/framing primitives.

Everything in here is format-free: file I/O lives in the command-line layer.
Arrays are float64 throughout; operations return new arrays and never modify
their inputs in place.
"""
from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

import numpy as np
from scipy.signal import lfilter

from .errors import DegenerateInputError

__all__ = [
    "SampledSignal",
    "Frame",
    "WindowKind",
    "make_window",
    "frame_signal",
    "differentiate",
    "leaky_integrate",
    "normalize_pulse",
]


@dataclass(frozen=True)
class SampledSignal:
    """A finite real waveform with its sampling rate in Hz."""

    samples: np.ndarray
    rate: float

    def __post_init__(self):
        samples = np.asarray(self.samples, dtype=np.float64)
        if samples.ndim != 1:
            raise ValueError("samples must be one-dimensional")
        if not np.all(np.isfinite(samples)):
            raise ValueError("samples must be finite")
        if not (self.rate > 0 and np.isfinite(self.rate)):
            raise ValueError(f"rate must be a positive finite number, got {self.rate}")
        object.__setattr__(self, "samples", samples)
        object.__setattr__(self, "rate", float(self.rate))

    def __len__(self) -> int:
        return self.samples.shape[0]

    @property
    def duration(self) -> float:
        """Length in seconds."""
        return len(self) / self.rate


@dataclass(frozen=True)
class Frame:
    """A contiguous excerpt of a signal, tagged with where it came from."""

    samples: np.ndarray
    start_index: int
    rate: float

    def __post_init__(self):
        samples = np.asarray(self.samples, dtype=np.float64)
        if samples.ndim != 1 or samples.shape[0] == 0:
            raise ValueError("frame samples must be a non-empty 1-d array")
        if not np.all(np.isfinite(samples)):
            raise ValueError("frame samples must be finite")
        if self.start_index < 0:
            raise ValueError("start_index must be >= 0")
        object.__setattr__(self, "samples", samples)
        object.__setattr__(self, "start_index", int(self.start_index))
        object.__setattr__(self, "rate", float(self.rate))

    def __len__(self) -> int:
        return self.samples.shape[0]


class WindowKind(Enum):
    RECTANGULAR = "rectangular"
    HAMMING = "hamming"
    BLACKMAN = "blackman"
    HALF_BLACKMAN_LEFT = "half_blackman_left"

    @classmethod
    def parse(cls, name: str) -> "WindowKind":
        try:
            return cls(name.strip().lower())
        except ValueError:
            options = ", ".join(k.value for k in cls)
            raise ValueError(f"unknown window kind {name!r}; expected one of: {options}") from None


def make_window(kind: WindowKind, length: int) -> np.ndarray:
    """Return window coefficients of the given kind, all within [0, 1].

    ``HAMMING`` and ``BLACKMAN`` use the standard symmetric coefficient sets
    (0.54/0.46 and 0.42/0.5/0.08).  ``HALF_BLACKMAN_LEFT`` is the rising half
    of a Blackman of twice the length: monotone nondecreasing, near zero at
    the left edge and exactly 1.0 at the right edge.  It is used as a
    quefrency-domain taper, oriented so attenuation grows away from the
    origin.
    """
    if length < 1:
        raise ValueError(f"window length must be >= 1, got {length}")
    if kind is WindowKind.RECTANGULAR:
        return np.ones(length)
    if kind is WindowKind.HAMMING:
        w = np.hamming(length)
    elif kind is WindowKind.BLACKMAN:
        w = np.blackman(length)
    elif kind is WindowKind.HALF_BLACKMAN_LEFT:
        # Rising half of an odd symmetric Blackman; sample `length` is the
        # peak, which the symmetric form makes exactly 1.
        w = np.blackman(2 * length + 1)[1 : length + 1]
    else:  # pragma: no cover - enum is closed
        raise ValueError(f"unsupported window kind: {kind}")
    # The Blackman endpoints are analytically zero but round to ~-1e-17.
    return np.clip(w, 0.0, 1.0)


def frame_signal(signal: SampledSignal, window_len: int, hop: int) -> list[Frame]:
    """Cut a signal into fixed-length frames; a trailing partial frame is dropped.

    Frame ``i`` starts at sample ``i * hop``.  Raises ``ValueError`` when the
    signal is shorter than one window or the hop is not positive.
    """
    if window_len < 1:
        raise ValueError(f"window_len must be >= 1, got {window_len}")
    if hop < 1:
        raise ValueError(f"hop must be >= 1, got {hop}")
    n = len(signal)
    if n < window_len:
        raise ValueError(f"signal of length {n} is shorter than one window ({window_len})")
    frames = []
    for start in range(0, n - window_len + 1, hop):
        frames.append(Frame(signal.samples[start : start + window_len], start, signal.rate))
    return frames


def differentiate(signal: SampledSignal) -> SampledSignal:
    """First difference y[n] = x[n] - x[n-1] with y[0] = 0."""
    if len(signal) < 2:
        raise ValueError("differentiate needs at least 2 samples")
    y = np.empty(len(signal))
    y[0] = 0.0
    y[1:] = np.diff(signal.samples)
    return SampledSignal(y, signal.rate)


def leaky_integrate(signal: SampledSignal, alpha: float) -> SampledSignal:
    """Run y[n] = x[n] + alpha * y[n-1], the inverse of a 1 - alpha*z^-1 stage."""
    if not 0.0 < alpha <= 1.0:
        raise ValueError(f"alpha must lie in (0, 1], got {alpha}")
    y = lfilter([1.0], [1.0, -alpha], signal.samples)
    return SampledSignal(y, signal.rate)


def normalize_pulse(signal: SampledSignal) -> SampledSignal:
    """Scale (and if needed flip) a pulse so its most negative sample is -1.

    If the dominant extremum is positive the pulse polarity is flipped first,
    so estimates produced with inverted sign conventions compare cleanly.
    Idempotent: renormalizing an already normalized pulse is exact.
    """
    x = signal.samples
    if not np.any(x):
        raise DegenerateInputError("cannot normalize an all-zero pulse")
    if x[np.argmax(np.abs(x))] > 0:
        x = -x
    return SampledSignal(x / -x.min(), signal.rate)
