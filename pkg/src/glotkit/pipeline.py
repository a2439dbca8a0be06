"""Two-stage glottal source estimation driver.

Stage one removes the vocal tract coarsely: short overlapping frames are fit
with odd-order covariance linear prediction, stable resonance poles are kept,
and the speech is inverse-filtered frame by frame (lip radiation cancelled by
leaky integration).  Stage two refines each glottal cycle: the coarse source
between consecutive closure instants is windowed, its complex cepstrum is
split, the anti-causal (maximum-phase, open-phase) part is kept with a tapered
cut, and the pulse is rebuilt in the time domain.

The pulses tile the analysed span without overlap: pulse k starts at
``s_k + eps_k`` and runs to ``s_{k+1} + eps_{k+1}``, so each pulse contains
exactly one closure spike near its end.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from .cepstrum import (
    complex_cepstrum,
    deflate_zeros,
    flow_balance_zeros,
    inverse_cepstrum,
    pitch_synchronous_window,
    restore_zeros,
    split_anticausal,
)
from .errors import (
    AnalysisError,
    CepstrumError,
    DegenerateInputError,
    DegenerateVtfError,
    NumericalDegeneracyError,
)
from .lp import covariance_lp, find_poles, vtf_from_poles
from .signals import (
    Frame,
    SampledSignal,
    WindowKind,
    leaky_integrate,
    make_window,
    normalize_pulse,
)

__all__ = ["PipelineConfig", "GlottalPulse", "GlottalEstimate", "default_lp_order", "lpcc_analyze"]


def default_lp_order(rate: float) -> int:
    """Default analysis order: one pole pair per kHz plus margin, forced odd."""
    order = int(round(rate / 1000.0)) + 3
    return order if order % 2 == 1 else order + 1


@dataclass(frozen=True)
class PipelineConfig:
    """Tunable parameters shared by the estimation pipelines.

    ``lp_order=None`` selects the rate-based default (19 at 16 kHz).  The
    pulse window defaults to plain truncation because the analysis region
    boundaries already sit in the low-amplitude closed phase; a Blackman
    taper is available for noisy material.  ``taper_fraction`` sets the
    cepstral attenuation length as a fraction of the anti-causal extent.
    """

    lp_order: int | None = None
    frame_ms: float = 25.0
    hop_ms: float = 10.0
    lip_alpha: float = 0.98
    epsilon_frac: float = 0.05
    nfft_factor: int = 8
    taper_fraction: float = 0.5
    balance_zero_tol: float = 0.02
    head_taper_frac: float = 0.15
    lp_window: WindowKind = WindowKind.RECTANGULAR
    pulse_window: WindowKind = WindowKind.RECTANGULAR
    iaif_iterations: int = 2
    iaif_glottal_order: int = 4

    def __post_init__(self):
        if self.lp_order is not None and (self.lp_order < 3 or self.lp_order % 2 == 0):
            raise ValueError("lp_order must be an odd integer >= 3 (or None for the default)")
        if self.frame_ms <= 0 or self.hop_ms <= 0 or self.hop_ms > self.frame_ms:
            raise ValueError("need 0 < hop_ms <= frame_ms")
        if not 0.0 < self.lip_alpha < 1.0:
            raise ValueError("lip_alpha must lie in (0, 1)")
        if not 0.0 <= self.epsilon_frac <= 0.2:
            raise ValueError("epsilon_frac must lie in [0, 0.2]")
        if self.nfft_factor < 1:
            raise ValueError("nfft_factor must be >= 1")
        if not 0.0 < self.taper_fraction <= 1.0:
            raise ValueError("taper_fraction must lie in (0, 1]")
        if not 0.0 <= self.balance_zero_tol < 0.5:
            raise ValueError("balance_zero_tol must lie in [0, 0.5)")
        if not 0.0 <= self.head_taper_frac <= 0.45:
            raise ValueError("head_taper_frac must lie in [0, 0.45]")
        if self.iaif_iterations < 1:
            raise ValueError("iaif_iterations must be >= 1")
        if self.iaif_glottal_order < 1:
            raise ValueError("iaif_glottal_order must be >= 1")

    def order_for(self, rate: float) -> int:
        return self.lp_order if self.lp_order is not None else default_lp_order(rate)


@dataclass(frozen=True)
class GlottalPulse:
    """One reconstructed cycle: anchor closure index, pad, and waveform."""

    gci_index: int
    epsilon: int
    waveform: SampledSignal

    @property
    def start(self) -> int:
        """First sample of the pulse span in source coordinates."""
        return self.gci_index + self.epsilon

    @property
    def stop(self) -> int:
        return self.start + len(self.waveform)


@dataclass(frozen=True)
class GlottalEstimate:
    """Sequence of non-overlapping glottal pulses on a shared timeline."""

    pulses: tuple[GlottalPulse, ...]
    source_rate: float

    def __post_init__(self):
        object.__setattr__(self, "pulses", tuple(self.pulses))
        if self.source_rate <= 0:
            raise ValueError("source_rate must be positive")
        for a, b in zip(self.pulses, self.pulses[1:]):
            if b.gci_index <= a.gci_index:
                raise ValueError("pulse gci_index values must be strictly increasing")
            if b.start < a.stop:
                raise ValueError(f"pulses at {a.gci_index} and {b.gci_index} overlap")

    def __len__(self) -> int:
        return len(self.pulses)


def _gci_array(gcis) -> np.ndarray:
    closures = getattr(gcis, "closures", gcis)
    arr = np.asarray(closures, dtype=np.int64)
    if arr.ndim != 1:
        raise ValueError("gcis must be a 1-d sequence of sample indices")
    if arr.size >= 2 and np.any(np.diff(arr) <= 0):
        raise ValueError("gcis must be strictly increasing")
    return arr


def _pad_per_gci(gcis: np.ndarray, epsilon_frac: float) -> np.ndarray:
    """Pad for each closure, sized from the period that ends there.

    The first closure has no preceding period, so it borrows the following
    one.  Sizing pads from the ending period keeps every pulse span inside
    its own analysis region even when periods jitter.
    """
    periods = np.diff(gcis)
    pads = np.rint(epsilon_frac * periods).astype(np.int64)
    return np.concatenate([pads[:1], pads])


def inverse_filter_frames(speech: SampledSignal, config: PipelineConfig, order: int) -> tuple[SampledSignal, int]:
    """Framewise LP inverse filtering of the stable resonance poles.

    Each frame claims the leading hop of its span (the last frame claims to
    the end of the signal); the prediction-error filter estimated on the
    frame is applied over the claim with ``order`` samples of true context,
    so no per-frame transients are introduced.  Frames whose fit is rank
    deficient or yields no stable pole pair pass their samples through
    unchanged.  Returns the assembled residual (after lip-radiation
    cancellation) and the number of passed-through frames.
    """
    x = speech.samples
    n = x.shape[0]
    rate = speech.rate
    frame_len = int(round(config.frame_ms * rate / 1000.0))
    hop = int(round(config.hop_ms * rate / 1000.0))
    if n < frame_len:
        raise AnalysisError(f"signal of {n} samples shorter than one {frame_len}-sample frame")
    window = None
    if config.lp_window is not WindowKind.RECTANGULAR:
        window = make_window(config.lp_window, frame_len)

    residual = np.empty(n)
    starts = list(range(0, n - frame_len + 1, hop))
    skipped = 0
    for i, b in enumerate(starts):
        claim_end = b + hop if i < len(starts) - 1 else n
        frame_samples = x[b : b + frame_len]
        if window is not None:
            frame_samples = frame_samples * window
        try:
            model = covariance_lp(Frame(frame_samples, b, rate), order)
            vtf = vtf_from_poles(find_poles(model))
        except (NumericalDegeneracyError, DegenerateVtfError):
            skipped += 1
            residual[b:claim_end] = x[b:claim_end]
            continue
        den = vtf.denominator
        lo = max(0, b - vtf.order)
        context = x[lo:claim_end]
        filtered = np.convolve(context, den)[: context.shape[0]]
        residual[b:claim_end] = filtered[b - lo :]
    return leaky_integrate(SampledSignal(residual, rate), config.lip_alpha), skipped


def _next_pow2(value: int) -> int:
    return 1 << max(2, int(value - 1).bit_length())


def cepstral_refine(
    coarse: SampledSignal, gcis: np.ndarray, config: PipelineConfig
) -> GlottalEstimate:
    """Per-cycle maximum-phase reconstruction of an already-coarse source.

    Cycle k is analysed on [s_k + eps_k, s_{k+1} + eps_{k+1}]: both ends sit
    a small pad past a closure, inside the low-amplitude closed phase, and
    the region holds exactly one open phase ending in one closure spike —
    the maximum-phase content the anti-causal cepstrum isolates.  Anchoring
    at closures themselves would put a second spike at the region head and
    near-unit-circle zeros (one signal period apart) defeat the phase
    separation.

    Because net flow over a cycle is zero, each region's z-transform has one
    or two zeros essentially on the unit circle at z = +1 (occasionally a
    conjugate pair just off the axis).  Those zeros belong to the pulse but
    sit too close to the causal/anti-causal boundary for the split to place
    reliably, so they are divided out before the cepstrum and multiplied
    back onto the reconstructed pulse.
    """
    pads = _pad_per_gci(gcis, config.epsilon_frac)
    pulses = []
    dropped = 0
    for k in range(gcis.size - 1):
        s0, s1 = int(gcis[k]), int(gcis[k + 1])
        a, b = s0 + int(pads[k]), s1 + int(pads[k + 1])
        try:
            frame = pitch_synchronous_window(coarse, a, b, 0.0, window=config.pulse_window)
            if frame.start_index != a or len(frame.samples) <= b - a:
                raise DegenerateInputError("analysis region clipped at the signal boundary")
            head = int(round(config.head_taper_frac * (b - a)))
            if head >= 2:
                # The region head holds whatever formant ringing the coarse
                # stage failed to cancel, truncated mid-decay; a short onset
                # ramp keeps that discontinuity from polluting the spectrum.
                head = min(head, len(frame.samples) // 3)
                ramped = frame.samples.copy()
                ramped[:head] *= 0.5 * (1.0 - np.cos(np.pi * np.arange(head) / head))
                frame = Frame(ramped, frame.start_index, frame.rate)
            # Enforce the zero-net-flow premise exactly: any residual offset
            # is coarse-stage leakage, and subtracting it pins the balance
            # zero at +1 where the deflation below can always catch it.
            frame = Frame(frame.samples - frame.samples.mean(), frame.start_index, frame.rate)
            guarded = flow_balance_zeros(frame.samples, config.balance_zero_tol)
            if guarded.size:
                frame = Frame(
                    deflate_zeros(frame.samples, guarded), frame.start_index, frame.rate
                )
                if len(frame.samples) < 16:
                    raise DegenerateInputError("frame exhausted by near-circle zero removal")
            nfft = _next_pow2(config.nfft_factor * len(frame.samples))
            cep = complex_cepstrum(frame, nfft)
            taper = int(round(config.taper_fraction * cep.extent))
            cep = split_anticausal(cep, min(max(taper, 4), cep.extent))
            recon = inverse_cepstrum(cep)
            tile = recon.samples
            if guarded.size:
                tile = restore_zeros(tile, guarded)
            waveform = normalize_pulse(SampledSignal(tile[: b - a], coarse.rate))
        except (DegenerateInputError, CepstrumError) as exc:
            warnings.warn(f"pulse at {s0} dropped: {exc}", RuntimeWarning, stacklevel=2)
            dropped += 1
            continue
        pulses.append(GlottalPulse(gci_index=s0, epsilon=int(pads[k]), waveform=waveform))
    if len(pulses) < 2:
        raise AnalysisError(
            f"only {len(pulses)} usable pulses ({dropped} dropped); need at least 2"
        )
    return GlottalEstimate(pulses=tuple(pulses), source_rate=coarse.rate)


def lpcc_analyze(speech: SampledSignal, gcis, config: PipelineConfig | None = None) -> GlottalEstimate:
    """Estimate the glottal source: coarse LP inverse filtering, then
    per-cycle cepstral phase separation.

    ``gcis`` is a strictly increasing sequence of closure sample indices (a
    detected sequence object is accepted too); at least two are required.
    """
    config = config or PipelineConfig()
    closures = _gci_array(gcis)
    if closures.size < 2:
        raise AnalysisError("need at least two closure instants")
    order = config.order_for(speech.rate)
    coarse, _ = inverse_filter_frames(speech, config, order)
    return cepstral_refine(coarse, closures, config)
