"""Synthetic voices with known ground truth, and the paired metrics.

The forward model mirrors what the analysis inverts: a pulse-train source
built from scaled copies of one derivative template, a cascade of two-pole
resonators for the vocal tract, and a single-zero lip radiation stage.
Because every intermediate is kept — source, closure/opening instants,
designed open quotients, a matching synthetic electroglottogram — estimator
output can be scored per cycle instead of eyeballed.

Everything here is deterministic: the only randomness is the optional
additive noise, drawn from an explicitly seeded generator.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy.signal import lfilter

from .baselines import cc_analyze, iaif_analyze
from .egg import EggOqRecord, GciSequence
from .errors import FitError, GlotkitError, OpenQuotientError
from .lf import LFParams, lf_fit, lf_synthesize
from .pipeline import GlottalEstimate, PipelineConfig, _gci_array, lpcc_analyze
from .signals import SampledSignal

__all__ = [
    "SynthSpec",
    "OqMethodStats",
    "OqReport",
    "ConditionReport",
    "SweepReport",
    "synth_voice",
    "waveform_error",
    "closed_phase_ripple",
    "oq_report",
    "sweep_template",
    "run_default_sweep",
    "DEFAULT_FORMANTS",
    "DEFAULT_OQ_GRID",
    "DEFAULT_F0_GRID",
]

# Five-formant neutral-vowel tract used by the default sweep; frequencies and
# bandwidths in Hz.
DEFAULT_FORMANTS = ((660.0, 80.0), (1720.0, 120.0), (2410.0, 160.0), (3500.0, 200.0), (4500.0, 200.0))
DEFAULT_OQ_GRID = (0.4, 0.5, 0.6, 0.7, 0.8)
DEFAULT_F0_GRID = (80.0, 120.0, 160.0, 220.0)

# Designed first-difference bumps that build the synthetic electroglottogram:
# a sharp rise peaking exactly on the closure sample and a broader fall whose
# minimum lands on the opening sample.  Both sum to the same magnitude, so
# each cycle returns to baseline and the cumulative signal is a trapezoid
# with closed fraction 1 - oq.
_EGG_RISE = np.array([0.2, 1.0, 0.2]) / 1.4
_EGG_FALL = np.array([-0.15, -0.25, -0.6, -0.25, -0.15]) / 1.4


@dataclass(frozen=True)
class SynthSpec:
    """Recipe for one synthetic utterance.

    ``lf`` is the shape template: its timing instants are interpreted as
    fractions of its own ``T0`` and rescaled to each period of ``f0_track``,
    so jittered tracks keep the designed open quotient exactly.
    ``f0_track`` holds either one value (constant pitch) or one per period.
    """

    lf: LFParams
    f0_track: tuple
    formants: tuple
    lip_alpha: float
    rate: float
    n_periods: int
    noise_snr_db: float | None = None

    def __post_init__(self):
        object.__setattr__(self, "f0_track", tuple(float(f) for f in np.atleast_1d(self.f0_track)))
        object.__setattr__(
            self, "formants", tuple((float(f), float(bw)) for f, bw in self.formants)
        )
        if self.rate <= 0:
            raise ValueError("rate must be positive")
        if not 0.0 < self.lip_alpha <= 1.0:
            raise ValueError(f"lip_alpha must lie in (0, 1], got {self.lip_alpha}")
        if self.n_periods < 2:
            raise ValueError(f"n_periods must be >= 2, got {self.n_periods}")
        if len(self.f0_track) not in (1, self.n_periods):
            raise ValueError(
                f"f0_track must hold 1 or n_periods={self.n_periods} values, got {len(self.f0_track)}"
            )
        if any(f <= 0 for f in self.f0_track):
            raise ValueError("f0_track values must be positive")
        for f, bw in self.formants:
            if not 0.0 < f < self.rate / 2.0:
                raise ValueError(f"formant frequency {f} Hz outside (0, rate/2)")
            if bw <= 0:
                raise ValueError(f"formant bandwidth must be positive, got {bw}")
        if self.noise_snr_db is not None and not np.isfinite(self.noise_snr_db):
            raise ValueError("noise_snr_db must be finite or None")


def _scaled_params(template: LFParams, T0: float) -> LFParams:
    """Rescale a template's timing to a new period, preserving its shape."""
    s = T0 / template.T0
    return LFParams(
        t_o=template.t_o * s,
        t_p=template.t_p * s,
        t_e=template.t_e * s,
        t_a=template.t_a * s,
        T0=T0,
        E_e=template.E_e,
    )


def _add_bump(degg: np.ndarray, center: int, bump: np.ndarray) -> None:
    half = bump.shape[0] // 2
    lo = max(0, center - half)
    hi = min(degg.shape[0], center + half + 1)
    degg[lo:hi] += bump[lo - (center - half) : bump.shape[0] - (center + half + 1 - hi)]


def synth_voice(
    spec: SynthSpec, seed: int = 0
) -> tuple[SampledSignal, SampledSignal, GciSequence, np.ndarray, SampledSignal]:
    """Render a synthetic voice and every ground-truth artifact scoring needs.

    Returns ``(speech, truth_source, truth_gcis, truth_oq, egg)``:

    * ``speech`` — source through the resonator cascade and lip radiation,
      plus optional seeded white noise at ``spec.noise_snr_db``;
    * ``truth_source`` — the clean concatenated derivative pulse train;
    * ``truth_gcis`` — closure/opening instants, one closure per period;
    * ``truth_oq`` — designed open quotient per complete cycle between
      consecutive closures (length ``n_periods - 1``);
    * ``egg`` — synthetic electroglottogram whose first difference peaks
      exactly on the closures and dips on the openings.
    """
    f0s = np.asarray(spec.f0_track, float)
    if f0s.size == 1:
        f0s = np.full(spec.n_periods, f0s[0])

    pieces = []
    closures = np.empty(spec.n_periods, dtype=np.int64)
    period_openings = np.empty(spec.n_periods, dtype=np.int64)
    offset = 0
    for k in range(spec.n_periods):
        params = _scaled_params(spec.lf, 1.0 / f0s[k])
        one = lf_synthesize(params, spec.rate)
        n_k = len(one)
        closures[k] = offset + min(int(round(params.t_e * spec.rate)), n_k - 1)
        period_openings[k] = offset + max(int(round(params.t_o * spec.rate)), 1)
        pieces.append(one.samples)
        offset += n_k
    source = np.concatenate(pieces)

    filtered = source
    for f, bw in spec.formants:
        r = np.exp(-np.pi * bw / spec.rate)
        theta = 2.0 * np.pi * f / spec.rate
        filtered = lfilter([1.0], [1.0, -2.0 * r * np.cos(theta), r * r], filtered)
    speech = lfilter([1.0, -spec.lip_alpha], [1.0], filtered)

    if spec.noise_snr_db is not None:
        rng = np.random.default_rng(seed)
        power = float(np.mean(speech**2))
        sigma = np.sqrt(power * 10.0 ** (-spec.noise_snr_db / 10.0))
        speech = speech + sigma * rng.standard_normal(speech.shape[0])

    degg = np.zeros(source.shape[0])
    for c in closures:
        _add_bump(degg, int(c), _EGG_RISE)
    # The opening that ends cycle k's closed phase is the (k+1)-th period's.
    for o in period_openings[1:]:
        _add_bump(degg, int(o), _EGG_FALL)
    egg = np.cumsum(degg)

    gcis = GciSequence(closures=closures, openings=period_openings[1:], rate=spec.rate)
    designed_oq = (spec.lf.t_e - spec.lf.t_o) / spec.lf.T0
    truth_oq = np.full(spec.n_periods - 1, designed_oq)
    return (
        SampledSignal(speech, spec.rate),
        SampledSignal(source, spec.rate),
        gcis,
        truth_oq,
        SampledSignal(egg, spec.rate),
    )


def _nearest_closure(closures: np.ndarray, index: int) -> tuple[int, int]:
    """Index of the closure nearest ``index`` and the local period length."""
    j = int(np.searchsorted(closures, index))
    if j > 0 and (j == closures.size or index - closures[j - 1] <= closures[j] - index):
        j -= 1
    if closures.size < 2:
        period = 0
    elif j + 1 < closures.size:
        period = int(closures[j + 1] - closures[j])
    else:
        period = int(closures[j] - closures[j - 1])
    return j, period


def waveform_error(
    est: GlottalEstimate, truth: SampledSignal, truth_gcis
) -> np.ndarray:
    """Per-pulse normalized RMS error against the true source.

    Each pulse is compared over its own sample span with the best positive
    scale and the best integer shift within +/-2 ms, so group-delay offsets
    between methods and the arbitrary output gain do not count as error.
    Pulses with no truth closure within half a period, or whose span leaves
    the truth signal, are skipped; an empty result carries a warning.
    """
    if abs(est.source_rate - truth.rate) > 1e-9:
        raise ValueError(
            f"estimate rate {est.source_rate} and truth rate {truth.rate} differ"
        )
    closures = _gci_array(truth_gcis)
    if closures.size == 0:
        raise ValueError("truth_gcis is empty")
    max_shift = int(round(0.002 * truth.rate))
    x = truth.samples
    n = x.shape[0]
    errors = []
    skipped = 0
    for pulse in est.pulses:
        j, period = _nearest_closure(closures, pulse.gci_index)
        if period and abs(int(closures[j]) - pulse.gci_index) > period // 2:
            skipped += 1
            continue
        e = pulse.waveform.samples
        ee = float(e @ e)
        lo = max(0, pulse.start - max_shift)
        hi = min(n, pulse.stop + max_shift)
        if ee <= 0.0 or hi - lo < e.shape[0]:
            skipped += 1
            continue
        seg = x[lo:hi]
        cross = np.correlate(seg, e, mode="valid")
        csum = np.concatenate([[0.0], np.cumsum(seg * seg)])
        tt = csum[e.shape[0] :] - csum[: -e.shape[0]]
        valid = tt > 0.0
        if not np.any(valid):
            skipped += 1
            continue
        rho2 = np.zeros_like(tt)
        rho2[valid] = cross[valid] ** 2 / (ee * tt[valid])
        errors.append(float(np.sqrt(max(0.0, 1.0 - rho2.max()))))
    if not errors:
        warnings.warn(
            f"no pulses matched the truth closures ({skipped} skipped)",
            RuntimeWarning,
            stacklevel=2,
        )
        return np.empty(0)
    return np.asarray(errors)


def closed_phase_ripple(est: GlottalEstimate, closed_frac: float = 0.1) -> np.ndarray:
    """RMS of the above-second-harmonic residual over each pulse's head.

    The head of a pulse sits in the closed phase, where the true derivative
    is flat; whatever survives a high-pass at twice the cycle's fundamental
    there is ripple the inverse filtering failed to remove.  Pulses are
    normalized on output, so values compare across methods.
    """
    if not 0.0 < closed_frac < 0.5:
        raise ValueError(f"closed_frac must lie in (0, 0.5), got {closed_frac}")
    out = np.empty(len(est.pulses))
    for i, pulse in enumerate(est.pulses):
        xsamp = pulse.waveform.samples
        spectrum = np.fft.rfft(xsamp)
        spectrum[: min(3, spectrum.shape[0])] = 0.0
        ripple = np.fft.irfft(spectrum, xsamp.shape[0])
        head = max(3, int(round(closed_frac * xsamp.shape[0])))
        out[i] = float(np.sqrt(np.mean(ripple[:head] ** 2)))
    return out


@dataclass(frozen=True)
class OqMethodStats:
    """Signed per-cycle open-quotient errors for one method."""

    errors: np.ndarray
    mean_abs_error: float
    variance: float
    unmatched: int


@dataclass(frozen=True)
class OqReport:
    """Open-quotient errors per method against a common reference."""

    per_method: dict
    reference: np.ndarray


def _reference_arrays(reference_oq, reference_gcis, rate: float) -> tuple[np.ndarray, np.ndarray]:
    seq = list(reference_oq)
    if seq and isinstance(seq[0], EggOqRecord):
        anchors = np.asarray([int(round(r.t_closure * rate)) for r in seq], dtype=np.int64)
        oqs = np.asarray([r.oq for r in seq])
        return anchors, oqs
    oqs = np.asarray(seq, dtype=float)
    if reference_gcis is None:
        raise ValueError("plain reference_oq values need reference_gcis for alignment")
    anchors = _gci_array(reference_gcis)
    if anchors.size < oqs.size:
        raise ValueError(
            f"{anchors.size} reference closures cannot anchor {oqs.size} oq values"
        )
    return anchors[: oqs.size], oqs


def oq_report(methods: dict, f0s, reference_oq, reference_gcis=None) -> OqReport:
    """Fit a pulse model to every pulse of every method and score the
    open quotients against a per-cycle reference.

    ``reference_oq`` is either ground-truth values (then ``reference_gcis``
    must supply the cycle-anchor closures) or electroglottogram-derived
    records, which carry their own anchors.  Pulses are matched to the
    nearest reference anchor within half a period; unmatched or unfittable
    pulses are dropped and counted.  ``f0s``, when given, supplies the
    per-cycle fundamental used to convert fitted open times to quotients
    (one entry per reference cycle); otherwise each pulse's own length sets
    it.
    """
    per_method: dict = {}
    reference_used: np.ndarray | None = None
    for name, est in methods.items():
        anchors, oqs = _reference_arrays(reference_oq, reference_gcis, est.source_rate)
        if f0s is not None and len(f0s) != oqs.size:
            raise ValueError(f"need one f0 per reference cycle ({oqs.size}), got {len(f0s)}")
        reference_used = oqs
        errors = []
        unmatched = 0
        for pulse in est.pulses:
            j, period = _nearest_closure(anchors, pulse.gci_index)
            if j >= oqs.size or (period and abs(int(anchors[j]) - pulse.gci_index) > period // 2):
                unmatched += 1
                continue
            pulse_f0 = est.source_rate / len(pulse.waveform)
            try:
                fit = lf_fit(pulse.waveform, pulse_f0, effort="fast")
                f0_conv = float(f0s[j]) if f0s is not None else pulse_f0
                estimate = f0_conv * (fit.params.t_e - fit.params.t_o)
                if not 0.0 < estimate < 1.0:
                    raise OpenQuotientError(f"fitted open quotient {estimate:.3f} outside (0, 1)")
            except (FitError, OpenQuotientError, ValueError) as exc:
                warnings.warn(f"pulse at {pulse.gci_index} not scored: {exc}", RuntimeWarning, stacklevel=2)
                unmatched += 1
                continue
            errors.append(estimate - float(oqs[j]))
        arr = np.asarray(errors)
        if arr.size == 0:
            warnings.warn(f"method {name!r}: no pulses scored", RuntimeWarning, stacklevel=2)
            per_method[name] = OqMethodStats(arr, float("nan"), float("nan"), unmatched)
        else:
            per_method[name] = OqMethodStats(
                arr, float(np.mean(np.abs(arr))), float(np.var(arr)), unmatched
            )
    if reference_used is None:
        raise ValueError("methods mapping is empty")
    return OqReport(per_method=per_method, reference=reference_used)


def sweep_template(oq: float, f0: float) -> LFParams:
    """Derivative template for one sweep condition.

    Timing spreads the open phase across the period with a short return
    branch, keeping every instant inside the model's feasibility region for
    open quotients in (0, 0.97).
    """
    if not 0.0 < oq < 0.97:
        raise ValueError(f"oq must lie in (0, 0.97), got {oq}")
    T0 = 1.0 / f0
    t_o = 0.8 * (0.97 - oq) * T0
    return LFParams(
        t_o=t_o,
        t_p=t_o + 0.75 * oq * T0,
        t_e=t_o + oq * T0,
        t_a=0.0015 * T0,
        T0=T0,
        E_e=1.0,
    )


@dataclass(frozen=True)
class ConditionReport:
    """All per-method metrics for one (oq, f0) sweep condition."""

    oq: float
    f0: float
    n_periods: int
    waveform_errors: dict
    oq_errors: dict
    unmatched: dict


@dataclass(frozen=True)
class SweepReport:
    """Ordered condition reports plus pooled per-method summaries."""

    conditions: tuple = field(default_factory=tuple)

    def methods(self) -> tuple:
        return tuple(self.conditions[0].waveform_errors) if self.conditions else ()

    def pooled_waveform_errors(self, method: str) -> np.ndarray:
        parts = [c.waveform_errors[method] for c in self.conditions]
        return np.concatenate(parts) if parts else np.empty(0)

    def pooled_oq_errors(self, method: str) -> np.ndarray:
        parts = [c.oq_errors[method] for c in self.conditions]
        return np.concatenate(parts) if parts else np.empty(0)

    def summary(self) -> dict:
        out = {}
        for m in self.methods():
            werr = self.pooled_waveform_errors(m)
            oerr = self.pooled_oq_errors(m)
            out[m] = {
                "median_waveform_nrmse": float(np.median(werr)) if werr.size else float("nan"),
                "oq_mean_abs_error": float(np.mean(np.abs(oerr))) if oerr.size else float("nan"),
                "oq_error_variance": float(np.var(oerr)) if oerr.size else float("nan"),
                "n_pulses": int(werr.size),
            }
        return out


_ANALYZERS = {"lpcc": lpcc_analyze, "cc": cc_analyze, "iaif": iaif_analyze}


def run_default_sweep(
    methods=("lpcc", "cc", "iaif"),
    n_periods: int = 50,
    rate: float = 16000.0,
    formants=DEFAULT_FORMANTS,
    noise_snr_db: float | None = None,
    config: PipelineConfig | None = None,
    oq_grid=DEFAULT_OQ_GRID,
    f0_grid=DEFAULT_F0_GRID,
) -> SweepReport:
    """Score the requested methods over the oq x f0 synthesis grid.

    Conditions run in a fixed order (oq outer, f0 inner) and everything is
    deterministic, so two runs with the same arguments produce identical
    reports.
    """
    unknown = [m for m in methods if m not in _ANALYZERS]
    if unknown:
        raise ValueError(f"unknown methods {unknown}; choose from {sorted(_ANALYZERS)}")
    conditions = []
    for oq in oq_grid:
        for f0 in f0_grid:
            spec = SynthSpec(
                lf=sweep_template(oq, f0),
                f0_track=(f0,),
                formants=formants,
                lip_alpha=0.98,
                rate=rate,
                n_periods=n_periods,
                noise_snr_db=noise_snr_db,
            )
            speech, truth, gcis, truth_oq, _ = synth_voice(spec)
            estimates = {m: _ANALYZERS[m](speech, gcis, config) for m in methods}
            werr = {m: waveform_error(est, truth, gcis) for m, est in estimates.items()}
            report = oq_report(estimates, None, truth_oq, reference_gcis=gcis)
            conditions.append(
                ConditionReport(
                    oq=oq,
                    f0=f0,
                    n_periods=n_periods,
                    waveform_errors=werr,
                    oq_errors={m: report.per_method[m].errors for m in methods},
                    unmatched={m: report.per_method[m].unmatched for m in methods},
                )
            )
    return SweepReport(conditions=tuple(conditions))
