"""Reference glottal estimators the main pipeline is compared against.

Two classics, built from the same primitives as :func:`~glotkit.pipeline.lpcc_analyze`
and segmented on the same closure instants so per-pulse metrics pair up:

* :func:`iaif_analyze` — iterative adaptive inverse filtering: alternate a
  low-order source pre-estimate (one pole in the first round, a few poles
  after) with an even-order vocal-tract fit, inverse filter, and cancel lip
  radiation by leaky integration.
* :func:`cc_analyze` — per-cycle cepstral phase separation applied straight
  to the (lip-radiation-compensated) speech, with no linear-prediction
  stage at all.  Every cepstral knob is shared with the main pipeline, so
  differences between the two isolate the inverse-filtering stage.
"""

from __future__ import annotations

import warnings

import numpy as np
from scipy.linalg import solve_toeplitz
from scipy.signal import lfilter

from .cepstrum import complex_cepstrum, inverse_cepstrum, split_anticausal
from .errors import AnalysisError, CepstrumError, DegenerateInputError, NumericalDegeneracyError
from .pipeline import (
    GlottalEstimate,
    GlottalPulse,
    PipelineConfig,
    _gci_array,
    _next_pow2,
    _pad_per_gci,
)
from .signals import Frame, SampledSignal, WindowKind, leaky_integrate, make_window, normalize_pulse

__all__ = ["iaif_analyze", "cc_analyze", "vocal_tract_order"]


def vocal_tract_order(full_order: int) -> int:
    """Even vocal-tract order paired with a given full analysis order.

    One pole is set aside for the source tilt model, and the remainder is
    rounded down to an even count so the tract model can be all conjugate
    pairs.
    """
    vt = full_order - 1
    if vt % 2:
        vt -= 1
    if vt < 2:
        raise ValueError(f"order {full_order} leaves no poles for the vocal tract")
    return vt


def _autocorr_fir(samples: np.ndarray, order: int) -> np.ndarray:
    """Prediction-error FIR by the autocorrelation method (stable by design).

    The iterative stages refit filters on their own intermediate outputs,
    so unlike the main pipeline's covariance fits they need guaranteed-
    stable models at every round; the autocorrelation normal equations
    provide that.
    """
    n = samples.shape[0]
    if n <= order:
        raise NumericalDegeneracyError(f"frame of {n} samples cannot support order {order}")
    r = np.correlate(samples, samples, "full")[n - 1 : n + order]
    if not np.isfinite(r).all() or r[0] <= 0.0:
        raise NumericalDegeneracyError("frame energy too low for an autocorrelation fit")
    try:
        a = solve_toeplitz((r[:-1], r[:-1]), -r[1:])
    except np.linalg.LinAlgError as exc:
        raise NumericalDegeneracyError(f"singular autocorrelation system: {exc}") from exc
    if not np.isfinite(a).all():
        raise NumericalDegeneracyError("autocorrelation solve produced non-finite coefficients")
    return np.concatenate([[1.0], a])


def _iaif_tract_filter(samples: np.ndarray, vt_order: int,
                       iterations: int, glottal_order: int, lip_alpha: float) -> np.ndarray:
    """Run the alternating source/tract fits on one frame.

    Returns the final vocal-tract prediction-error (FIR) coefficients.  The
    first round fits a one-pole model straight to the frame (it captures the
    combined source + lip tilt), removes it, and fits the tract on what is
    left.  Later rounds fit a ``glottal_order``-pole model to the current
    source estimate instead, sharpening the separation between source
    resonance and tract resonances before the tract is refitted.  Between
    rounds the source estimate is refreshed by inverse filtering with the
    new tract fit plus leaky integration.
    """
    source_view = samples
    vt_fir = None
    for it in range(iterations):
        g_order = 1 if it == 0 else glottal_order
        g_fir = _autocorr_fir(source_view, g_order)
        degl = lfilter(g_fir, [1.0], samples)
        vt_fir = _autocorr_fir(degl, vt_order)
        residual = lfilter(vt_fir, [1.0], samples)
        source_view = lfilter([1.0], [1.0, -lip_alpha], residual)
    return vt_fir


def _iaif_residual(speech: SampledSignal, config: PipelineConfig, vt_order: int) -> tuple[SampledSignal, int]:
    """Framewise iterative inverse filtering over a whole utterance.

    Framing, claims, and the context trick match the main pipeline's coarse
    stage: each frame's final tract filter is applied over its claim with
    ``vt_order`` samples of true left context, so no per-frame transients
    appear.  Frames whose least-squares fit degenerates pass through
    unchanged and are counted.
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
            vt_fir = _iaif_tract_filter(
                frame_samples, vt_order,
                config.iaif_iterations, config.iaif_glottal_order, config.lip_alpha,
            )
        except NumericalDegeneracyError:
            skipped += 1
            residual[b:claim_end] = x[b:claim_end]
            continue
        lo = max(0, b - vt_order)
        context = x[lo:claim_end]
        filtered = np.convolve(context, vt_fir)[: context.shape[0]]
        residual[b:claim_end] = filtered[b - lo :]
    return leaky_integrate(SampledSignal(residual, rate), config.lip_alpha), skipped


def _tile_on_closures(source: SampledSignal, gcis: np.ndarray, config: PipelineConfig) -> GlottalEstimate:
    """Cut a continuous source estimate into per-cycle pulses.

    Boundaries are the same padded spans [s_k + eps_k, s_{k+1} + eps_{k+1})
    the cepstral stage analyses, so estimates from different methods line up
    pulse for pulse.
    """
    pads = _pad_per_gci(gcis, config.epsilon_frac)
    n = len(source)
    pulses = []
    dropped = 0
    for k in range(gcis.size - 1):
        s0, s1 = int(gcis[k]), int(gcis[k + 1])
        a, b = s0 + int(pads[k]), s1 + int(pads[k + 1])
        try:
            if a < 0 or b > n:
                raise DegenerateInputError("pulse span clipped at the signal boundary")
            if b - a < 4:
                raise DegenerateInputError(f"pulse span of {b - a} samples is too short")
            waveform = normalize_pulse(SampledSignal(source.samples[a:b].copy(), source.rate))
        except DegenerateInputError as exc:
            warnings.warn(f"pulse at {s0} dropped: {exc}", RuntimeWarning, stacklevel=2)
            dropped += 1
            continue
        pulses.append(GlottalPulse(gci_index=s0, epsilon=int(pads[k]), waveform=waveform))
    if len(pulses) < 2:
        raise AnalysisError(
            f"only {len(pulses)} usable pulses ({dropped} dropped); need at least 2"
        )
    return GlottalEstimate(pulses=tuple(pulses), source_rate=source.rate)


def iaif_analyze(speech: SampledSignal, gcis, config: PipelineConfig | None = None) -> GlottalEstimate:
    """Estimate the glottal source by iterative adaptive inverse filtering.

    Classic alternating structure: a one-pole pre-estimate of the source
    tilt, a vocal-tract fit of even order (one below the main pipeline's
    order), inverse filtering, repeated ``config.iaif_iterations`` times,
    with lip radiation cancelled by leaky integration.  The raw prediction-
    error filters are applied as-is — no pole selection — which is what
    leaves the characteristic ripple in the output.  Pulses are segmented
    on the same closures and pads as the other methods.
    """
    config = config or PipelineConfig()
    closures = _gci_array(gcis)
    if closures.size < 2:
        raise AnalysisError("need at least two closure instants")
    vt_order = vocal_tract_order(config.order_for(speech.rate))
    source, _ = _iaif_residual(speech, config, vt_order)
    return _tile_on_closures(source, closures, config)


def cc_analyze(speech: SampledSignal, gcis, config: PipelineConfig | None = None) -> GlottalEstimate:
    """Estimate the glottal source by cepstral phase separation alone.

    No linear-prediction stage: the per-cycle split works directly on
    lip-radiation-compensated speech and must absorb the vocal-tract
    resonances itself.  Because raw speech rings right through each cycle
    boundary, the analysis frame is the classic one — two periods under a
    bell window centered on the closure that ends the cycle, so both frame
    edges land where the window is already zero.  The transform size and
    cepstral taper rules are shared with the main pipeline, and the emitted
    pulse still covers the common span [s_k + eps_k, s_{k+1} + eps_{k+1})
    so per-pulse metrics pair up; the bell's amplitude envelope is divided
    back out where it stays above a floor.
    """
    config = config or PipelineConfig()
    closures = _gci_array(gcis)
    if closures.size < 2:
        raise AnalysisError("need at least two closure instants")
    flow = leaky_integrate(speech, config.lip_alpha)
    x = flow.samples
    n = x.shape[0]
    pads = _pad_per_gci(closures, config.epsilon_frac)
    pulses = []
    dropped = 0
    for k in range(closures.size - 1):
        s0, s1 = int(closures[k]), int(closures[k + 1])
        a, b = s0 + int(pads[k]), s1 + int(pads[k + 1])
        period = s1 - s0
        half = min(period, s1, n - 1 - s1)
        try:
            if half < int(0.6 * period) or a < s1 - half or b > s1 + half + 1:
                raise DegenerateInputError("not enough context for a closure-centered frame")
            window = np.blackman(2 * half + 1)
            frame = Frame(x[s1 - half : s1 + half + 1] * window, s1 - half, flow.rate)
            nfft = _next_pow2(config.nfft_factor * len(frame.samples))
            cep = complex_cepstrum(frame, nfft)
            taper = int(round(config.taper_fraction * cep.extent))
            cep = split_anticausal(cep, min(max(taper, 4), cep.extent))
            recon = inverse_cepstrum(cep)
            offset = a - (s1 - half)
            tile = recon.samples[offset : offset + (b - a)]
            # Undo the bell's amplitude shaping over the emitted span; the
            # floor bounds noise amplification near the window's feet.
            tile = tile / np.maximum(window[offset : offset + (b - a)], 0.1)
            waveform = normalize_pulse(SampledSignal(tile, flow.rate))
        except (DegenerateInputError, CepstrumError) as exc:
            warnings.warn(f"pulse at {s0} dropped: {exc}", RuntimeWarning, stacklevel=2)
            dropped += 1
            continue
        pulses.append(GlottalPulse(gci_index=s0, epsilon=int(pads[k]), waveform=waveform))
    if len(pulses) < 2:
        raise AnalysisError(
            f"only {len(pulses)} usable pulses ({dropped} dropped); need at least 2"
        )
    return GlottalEstimate(pulses=tuple(pulses), source_rate=flow.rate)
