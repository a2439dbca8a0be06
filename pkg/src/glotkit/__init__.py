"""Glottal source analysis toolkit.

Estimates glottal flow derivative waveforms from speech by odd-order linear
prediction followed by complex-cepstrum phase decomposition, alongside IAIF
and cepstrum-only baselines, Liljencrants-Fant pulse fitting, and
electroglottogram-based closure/opening detection.
"""
from .baselines import cc_analyze, iaif_analyze, vocal_tract_order
from .cepstrum import (
    CepstrumFrame,
    complex_cepstrum,
    deflate_zeros,
    flow_balance_zeros,
    inverse_cepstrum,
    pitch_synchronous_window,
    restore_zeros,
    split_anticausal,
)
from .egg import EggOqRecord, GciSequence, decom_detect, egg_open_quotients
from .errors import (
    AnalysisError,
    CepstrumError,
    DegenerateInputError,
    DegenerateVtfError,
    FitError,
    GlotkitError,
    NumericalDegeneracyError,
    OpenQuotientError,
    SynthesisError,
)
from .evaluate import (
    ConditionReport,
    OqMethodStats,
    OqReport,
    SweepReport,
    SynthSpec,
    closed_phase_ripple,
    oq_report,
    run_default_sweep,
    sweep_template,
    synth_voice,
    waveform_error,
)
from .lf import FitResult, LFParams, lf_fit, lf_synthesize, open_quotient
from .lp import (
    LPModel,
    PoleSet,
    covariance_lp,
    find_poles,
    inverse_filter,
    vtf_from_poles,
    vtf_spectrum,
)
from .pipeline import (
    GlottalEstimate,
    GlottalPulse,
    PipelineConfig,
    cepstral_refine,
    default_lp_order,
    inverse_filter_frames,
    lpcc_analyze,
)
from .signals import (
    Frame,
    SampledSignal,
    WindowKind,
    differentiate,
    frame_signal,
    leaky_integrate,
    make_window,
    normalize_pulse,
)

__version__ = "0.1.0"

__all__ = [
    "AnalysisError",
    "CepstrumError",
    "CepstrumFrame",
    "ConditionReport",
    "DegenerateInputError",
    "DegenerateVtfError",
    "EggOqRecord",
    "FitError",
    "FitResult",
    "Frame",
    "GciSequence",
    "GlotkitError",
    "GlottalEstimate",
    "GlottalPulse",
    "LFParams",
    "LPModel",
    "NumericalDegeneracyError",
    "OpenQuotientError",
    "OqMethodStats",
    "OqReport",
    "PipelineConfig",
    "PoleSet",
    "SampledSignal",
    "SweepReport",
    "SynthSpec",
    "SynthesisError",
    "WindowKind",
    "cc_analyze",
    "cepstral_refine",
    "closed_phase_ripple",
    "complex_cepstrum",
    "covariance_lp",
    "decom_detect",
    "default_lp_order",
    "deflate_zeros",
    "differentiate",
    "egg_open_quotients",
    "find_poles",
    "flow_balance_zeros",
    "frame_signal",
    "iaif_analyze",
    "inverse_cepstrum",
    "inverse_filter",
    "inverse_filter_frames",
    "leaky_integrate",
    "lf_fit",
    "lf_synthesize",
    "lpcc_analyze",
    "make_window",
    "normalize_pulse",
    "open_quotient",
    "oq_report",
    "pitch_synchronous_window",
    "restore_zeros",
    "run_default_sweep",
    "split_anticausal",
    "sweep_template",
    "synth_voice",
    "vocal_tract_order",
    "vtf_from_poles",
    "vtf_spectrum",
    "waveform_error",
]
