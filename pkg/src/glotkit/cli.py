"""Command-line front end: WAV in, CSV out, plus the synthetic runners.

Subcommands
-----------
analyze   one utterance, one method -> pulses/gci/lf_fits/oq CSVs
compare   all three methods on one utterance -> per-method CSVs + oq_report
synth     deterministic synthetic voice -> WAV (speech + EGG) + truth CSVs
eval      the synthetic sweep -> per-condition and per-method report CSVs
selftest  quick built-in property battery, pass/fail table

Exit codes: 0 success, 1 analysis failure, 2 I/O or configuration error.
Every CSV starts with a ``# schema=1`` comment and a header line, and files
are written atomically (write to a temp name, then rename).  Heavy imports
happen inside ``main`` so the ``GLOTTAL_NUM_THREADS`` cap can be applied to
the numeric libraries before they start their thread pools.
"""

from __future__ import annotations

import argparse
import os
import sys
from dataclasses import dataclass, field

__all__ = ["RunConfig", "run", "main"]

_METHODS = ("lpcc", "cc", "iaif")


@dataclass(frozen=True)
class RunConfig:
    """Everything one invocation needs; built from flags by :func:`main`."""

    command: str
    input_path: str | None
    output_dir: str
    pipeline: object
    method: str = "lpcc"
    egg_channel: int | None = None
    options: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.command not in ("analyze", "synth", "eval", "compare", "selftest"):
            raise ValueError(f"unknown command {self.command!r}")
        if self.command in ("analyze", "compare") and not self.input_path:
            raise ValueError(f"{self.command} requires an input file")
        if self.method not in _METHODS + ("all",):
            raise ValueError(f"unknown method {self.method!r}")


def _apply_thread_cap() -> None:
    cap = os.environ.get("GLOTTAL_NUM_THREADS")
    if not cap:
        return
    for var in ("OMP_NUM_THREADS", "OPENBLAS_NUM_THREADS", "MKL_NUM_THREADS", "NUMEXPR_NUM_THREADS"):
        os.environ.setdefault(var, cap)


# ---------------------------------------------------------------------------
# CSV / WAV plumbing


def _fmt(value) -> str:
    if isinstance(value, bool):
        return str(int(value))
    if isinstance(value, float):
        return repr(float(value))
    return str(value)


def _write_csv(path: str, header, rows) -> None:
    tmp = path + ".tmp"
    with open(tmp, "w", encoding="ascii", newline="\n") as fh:
        fh.write("# schema=1\n")
        fh.write(",".join(header) + "\n")
        for row in rows:
            fh.write(",".join(_fmt(v) for v in row) + "\n")
    os.replace(tmp, path)


def _read_wav(path: str, egg_channel: int | None):
    import numpy as np
    from scipy.io import wavfile

    from .signals import SampledSignal

    rate, data = wavfile.read(path)
    if data.dtype == np.int16:
        data = data.astype(np.float64) / 32768.0
    elif data.dtype == np.float32:
        data = data.astype(np.float64)
    else:
        raise IOError(
            f"unsupported WAV encoding {data.dtype} in {path}: "
            "need 16-bit PCM or 32-bit float"
        )
    if not 8000 <= rate <= 48000:
        raise IOError(f"sample rate {rate} Hz outside the supported 8-48 kHz range")
    if data.ndim == 1:
        return SampledSignal(data, float(rate)), None
    if data.shape[1] == 2:
        egg_idx = 1 if egg_channel is None else egg_channel
        if egg_idx not in (0, 1):
            raise IOError(f"egg channel {egg_idx} out of range for a 2-channel file")
        return (
            SampledSignal(data[:, 1 - egg_idx], float(rate)),
            SampledSignal(data[:, egg_idx], float(rate)),
        )
    raise IOError(f"{path} has {data.shape[1]} channels; need mono or speech+EGG stereo")


def _write_wav(path: str, rate: float, channels, encoding: str) -> None:
    import numpy as np
    from scipy.io import wavfile

    data = np.stack(channels, axis=1) if len(channels) > 1 else np.asarray(channels[0])
    if encoding == "pcm16":
        peak = float(np.max(np.abs(data)))
        scale = 0.95 / peak if peak > 0 else 1.0
        data = np.round(data * scale * 32767.0).astype(np.int16)
    elif encoding == "float32":
        data = data.astype(np.float32)
    else:
        raise ValueError(f"unknown encoding {encoding!r}")
    tmp = path + ".tmp"
    wavfile.write(tmp, int(rate), data)
    os.replace(tmp, path)


# ---------------------------------------------------------------------------
# Pipeline configuration from file + flags


_CONFIG_KEYS = {
    "lp_order": int,
    "frame_ms": float,
    "hop_ms": float,
    "lip_alpha": float,
    "epsilon_frac": float,
    "nfft_factor": int,
    "taper_fraction": float,
    "balance_zero_tol": float,
    "head_taper_frac": float,
    "iaif_iterations": int,
    "iaif_glottal_order": int,
}


def _load_config_file(path: str) -> dict:
    from .signals import WindowKind

    out: dict = {}
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, 1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ValueError(f"{path}:{lineno}: expected key=value, got {raw.strip()!r}")
            key, value = (part.strip() for part in line.split("=", 1))
            if key in ("lp_window", "pulse_window"):
                out[key] = WindowKind.parse(value)
            elif key in _CONFIG_KEYS:
                out[key] = _CONFIG_KEYS[key](value)
            else:
                raise ValueError(f"{path}:{lineno}: unknown configuration key {key!r}")
    return out


def _build_pipeline_config(args) -> object:
    from .pipeline import PipelineConfig

    values: dict = {}
    config_path = getattr(args, "config", None)
    if config_path:
        values.update(_load_config_file(config_path))
    for flag, key in (
        ("order", "lp_order"),
        ("frame_ms", "frame_ms"),
        ("hop_ms", "hop_ms"),
        ("lip_alpha", "lip_alpha"),
        ("epsilon_frac", "epsilon_frac"),
        ("nfft_factor", "nfft_factor"),
        ("taper_fraction", "taper_fraction"),
    ):
        flag_value = getattr(args, flag, None)
        if flag_value is not None:
            values[key] = flag_value
    return PipelineConfig(**values)


# ---------------------------------------------------------------------------
# Shared emission helpers


def _emit_gci_csv(path: str, gcis) -> None:
    closures = gcis.closures
    openings = gcis.openings
    rows = [
        (k, int(closures[k]), int(openings[k]))
        for k in range(closures.size - 1)
    ]
    _write_csv(path, ["period_index", "gci_sample", "goi_sample"], rows)


def _emit_pulses_csv(path: str, est) -> None:
    rows = []
    for pulse in est.pulses:
        start = pulse.start
        for i, v in enumerate(pulse.waveform.samples):
            idx = start + i
            rows.append((idx, float(idx / est.source_rate), float(v)))
    _write_csv(path, ["sample_index", "time_s", "value"], rows)


def _fit_pulses(est):
    """lf_fit every pulse; returns list of (pulse, fit-or-None)."""
    from .errors import FitError
    from .lf import lf_fit

    out = []
    for pulse in est.pulses:
        f0 = est.source_rate / len(pulse.waveform)
        try:
            fit = lf_fit(pulse.waveform, f0)
        except (FitError, ValueError):
            fit = None
        out.append((pulse, fit))
    return out


def _emit_lf_fits_csv(path: str, est, fits, period_of) -> None:
    rows = []
    for pulse, fit in fits:
        k = period_of(pulse.gci_index)
        if fit is None:
            rows.append((k, float("nan"), float("nan"), float("nan"), float("nan"), float("nan"), float("nan"), 0))
        else:
            p = fit.params
            rows.append(
                (k, float(p.t_o), float(p.t_p), float(p.t_e), float(p.t_a), float(p.E_e), float(fit.residual_nrmse), int(fit.converged))
            )
    _write_csv(
        path,
        ["period_index", "t_o_s", "t_p_s", "t_e_s", "t_a_s", "E_e", "nrmse", "converged"],
        rows,
    )


def _emit_oq_csv(path: str, est, fits, period_of, reference: dict) -> None:
    rows = []
    for pulse, fit in fits:
        k = period_of(pulse.gci_index)
        f0 = float(est.source_rate / len(pulse.waveform))
        ref = reference.get(k, float("nan"))
        if fit is None:
            est_oq = float("nan")
        else:
            est_oq = f0 * (fit.params.t_e - fit.params.t_o)
        rows.append((k, f0, est_oq, float(ref), float(est_oq - ref)))
    _write_csv(path, ["period_index", "f0_hz", "oq_est", "oq_ref", "error"], rows)


def _analysis_products(out_dir: str, prefix: str, est, gcis, egg_records) -> None:
    closures = gcis.closures
    index_of = {int(closures[k]): k for k in range(closures.size)}

    def period_of(gci_index: int) -> int:
        return index_of.get(int(gci_index), -1)

    fits = _fit_pulses(est)
    reference = {r.period_index: r.oq for r in egg_records}
    _emit_pulses_csv(os.path.join(out_dir, prefix + "pulses.csv"), est)
    _emit_lf_fits_csv(os.path.join(out_dir, prefix + "lf_fits.csv"), est, fits, period_of)
    _emit_oq_csv(os.path.join(out_dir, prefix + "oq.csv"), est, fits, period_of, reference)


# ---------------------------------------------------------------------------
# Commands


def _cmd_analyze(config: RunConfig) -> int:
    from .baselines import cc_analyze, iaif_analyze
    from .egg import decom_detect, egg_open_quotients
    from .pipeline import lpcc_analyze
    from .signals import differentiate

    opts = config.options
    speech, egg = _read_wav(config.input_path, config.egg_channel)
    if egg is None:
        raise IOError(
            f"{config.input_path} is mono; analyze needs a second EGG channel to locate closures"
        )
    gcis = decom_detect(differentiate(egg), opts["min_f0"], opts["max_f0"])
    analyzers = {"lpcc": lpcc_analyze, "cc": cc_analyze, "iaif": iaif_analyze}
    est = analyzers[config.method](speech, gcis, config.pipeline)
    records = egg_open_quotients(gcis)
    os.makedirs(config.output_dir, exist_ok=True)
    _emit_gci_csv(os.path.join(config.output_dir, "gci.csv"), gcis)
    _analysis_products(config.output_dir, "", est, gcis, records)
    print(f"analyze[{config.method}]: {len(est.pulses)} pulses -> {config.output_dir}")
    return 0


def _cmd_compare(config: RunConfig) -> int:
    from .baselines import cc_analyze, iaif_analyze
    from .egg import decom_detect, egg_open_quotients
    from .evaluate import oq_report
    from .pipeline import lpcc_analyze
    from .signals import differentiate

    opts = config.options
    speech, egg = _read_wav(config.input_path, config.egg_channel)
    if egg is None:
        raise IOError(
            f"{config.input_path} is mono; compare needs a second EGG channel to locate closures"
        )
    gcis = decom_detect(differentiate(egg), opts["min_f0"], opts["max_f0"])
    records = egg_open_quotients(gcis)
    analyzers = {"lpcc": lpcc_analyze, "cc": cc_analyze, "iaif": iaif_analyze}
    os.makedirs(config.output_dir, exist_ok=True)
    _emit_gci_csv(os.path.join(config.output_dir, "gci.csv"), gcis)
    estimates = {}
    for name, analyze in analyzers.items():
        estimates[name] = analyze(speech, gcis, config.pipeline)
        _analysis_products(config.output_dir, name + "_", estimates[name], gcis, records)
    report = oq_report(estimates, None, records)
    rows = []
    for name in analyzers:
        stats = report.per_method[name]
        rows.append(
            (name, int(stats.errors.size), int(stats.unmatched), float(stats.mean_abs_error), float(stats.variance))
        )
    _write_csv(
        os.path.join(config.output_dir, "oq_report.csv"),
        ["method", "n_scored", "n_unmatched", "mean_abs_error", "variance"],
        rows,
    )
    print(f"compare: {len(gcis)} closures, 3 methods -> {config.output_dir}")
    return 0


def _cmd_synth(config: RunConfig) -> int:
    from .evaluate import DEFAULT_FORMANTS, SynthSpec, sweep_template, synth_voice

    opts = config.options
    formants = DEFAULT_FORMANTS if opts["formants"] == "neutral" else ()
    spec = SynthSpec(
        lf=sweep_template(opts["oq"], opts["f0"]),
        f0_track=(opts["f0"],),
        formants=formants,
        lip_alpha=0.98,
        rate=opts["rate"],
        n_periods=opts["periods"],
        noise_snr_db=opts["noise_snr"],
    )
    speech, source, gcis, truth_oq, egg = synth_voice(spec, seed=opts["seed"])
    os.makedirs(config.output_dir, exist_ok=True)
    _write_wav(
        os.path.join(config.output_dir, "voice.wav"),
        spec.rate,
        [speech.samples, egg.samples],
        opts["encoding"],
    )
    _write_wav(os.path.join(config.output_dir, "source.wav"), spec.rate, [source.samples], "float32")
    _emit_gci_csv(os.path.join(config.output_dir, "gci.csv"), gcis)
    closures = gcis.closures
    rows = [
        (k, float(spec.rate / (closures[k + 1] - closures[k])), float(truth_oq[k]))
        for k in range(closures.size - 1)
    ]
    _write_csv(
        os.path.join(config.output_dir, "truth_oq.csv"),
        ["period_index", "f0_hz", "oq_ref"],
        rows,
    )
    print(f"synth: {opts['periods']} periods at {opts['f0']:g} Hz -> {config.output_dir}")
    return 0


def _cmd_eval(config: RunConfig) -> int:
    import numpy as np

    from .evaluate import run_default_sweep

    opts = config.options
    if opts["sweep"] != "default":
        raise ValueError(f"unknown sweep {opts['sweep']!r}; only 'default' is defined")
    report = run_default_sweep(
        n_periods=opts["periods"],
        noise_snr_db=opts["noise_snr"],
        config=config.pipeline,
    )
    os.makedirs(config.output_dir, exist_ok=True)
    rows = []
    for cond in report.conditions:
        for m in sorted(cond.waveform_errors):
            werr = cond.waveform_errors[m]
            oerr = cond.oq_errors[m]
            rows.append(
                (
                    float(cond.oq),
                    float(cond.f0),
                    m,
                    float(np.median(werr)) if werr.size else float("nan"),
                    float(np.mean(np.abs(oerr))) if oerr.size else float("nan"),
                    float(np.var(oerr)) if oerr.size else float("nan"),
                    int(werr.size),
                    int(cond.unmatched[m]),
                )
            )
    _write_csv(
        os.path.join(config.output_dir, "sweep_conditions.csv"),
        ["oq", "f0", "method", "median_waveform_nrmse", "oq_mean_abs_error", "oq_error_variance", "n_pulses", "n_unmatched"],
        rows,
    )
    summary = report.summary()
    _write_csv(
        os.path.join(config.output_dir, "oq_report.csv"),
        ["method", "median_waveform_nrmse", "oq_mean_abs_error", "oq_error_variance", "n_pulses"],
        [
            (m, d["median_waveform_nrmse"], d["oq_mean_abs_error"], d["oq_error_variance"], d["n_pulses"])
            for m, d in summary.items()
        ],
    )
    for m, d in summary.items():
        print(
            f"eval[{m}]: median NRMSE {d['median_waveform_nrmse']:.3f}, "
            f"oq mean abs {d['oq_mean_abs_error']:.4f}, variance {d['oq_error_variance']:.6f}"
        )
    return 0


def _cmd_selftest(config: RunConfig) -> int:
    import numpy as np

    results = []

    def check(name, fn):
        try:
            fn()
            results.append((name, True, ""))
        except Exception as exc:  # the table reports any failure mode
            results.append((name, False, f"{type(exc).__name__}: {exc}"))

    def cepstrum_roundtrip():
        from .cepstrum import complex_cepstrum, inverse_cepstrum
        from .signals import Frame

        rng = np.random.default_rng(7)
        inner = np.poly(rng.uniform(0.3, 0.7, 4))
        outer = np.poly(1.0 / rng.uniform(0.3, 0.7, 3))[::-1]
        x = np.convolve(inner, outer)
        cep = complex_cepstrum(Frame(x, 0, 16000.0), 1024)
        recon = inverse_cepstrum(cep).samples[: x.shape[0]]
        err = np.max(np.abs(recon - x)) / np.max(np.abs(x))
        assert err < 1e-8, f"roundtrip error {err:.2e}"

    def odd_order_real_root():
        from .lp import LPModel, find_poles

        rng = np.random.default_rng(11)
        for _ in range(200):
            order = int(rng.choice([5, 9, 13, 19]))
            poles = rng.uniform(0.2, 0.95, order) * np.exp(1j * rng.uniform(0, np.pi, order))
            poles = poles[: order // 2]
            roots = np.concatenate([poles, np.conj(poles), rng.uniform(-0.9, 0.9, order - 2 * poles.shape[0])])
            den = np.poly(roots).real
            model = LPModel(-den[1:], order, 0.0)
            assert find_poles(model).real_poles.size >= 1

    def inverse_identity():
        from .lf import lf_synthesize
        from .lp import LPModel, inverse_filter
        from .evaluate import sweep_template
        from .signals import SampledSignal
        from scipy.signal import lfilter

        params = sweep_template(0.6, 100.0)
        one = lf_synthesize(params, 16000.0)
        source = np.tile(one.samples, 12)
        r, th = 0.97, 2 * np.pi * 700 / 16000.0
        den = np.array([1.0, -2 * r * np.cos(th), r * r])
        speech = lfilter([1.0, -0.98], [1.0], lfilter([1.0], den, source))
        vtf = LPModel(-den[1:], 2, 0.0)
        back = inverse_filter(SampledSignal(speech, 16000.0), vtf, 0.98)
        err = np.max(np.abs(back.samples[4:] - source[4:])) / np.max(np.abs(source))
        assert err < 1e-8, f"recovery error {err:.2e}"

    def lf_fit_roundtrip():
        from .lf import lf_fit, lf_synthesize
        from .evaluate import sweep_template
        from .signals import normalize_pulse

        params = sweep_template(0.6, 120.0)
        pulse = normalize_pulse(lf_synthesize(params, 16000.0))
        fit = lf_fit(pulse, 120.0)
        oq = 120.0 * (fit.params.t_e - fit.params.t_o)
        assert abs(oq - 0.6) < 0.01, f"oq {oq:.4f}"

    def decom_recovers():
        from .egg import decom_detect, egg_open_quotients
        from .evaluate import SynthSpec, sweep_template, synth_voice
        from .signals import differentiate

        spec = SynthSpec(
            lf=sweep_template(0.6, 110.0), f0_track=(110.0,), formants=(),
            lip_alpha=0.98, rate=16000.0, n_periods=20,
        )
        _, _, gcis, truth_oq, egg = synth_voice(spec)
        detected = decom_detect(differentiate(egg), 60.0, 400.0)
        assert detected.closures.size == gcis.closures.size
        assert np.max(np.abs(detected.closures - gcis.closures)) <= 1
        oqs = np.array([r.oq for r in egg_open_quotients(detected)])
        assert abs(float(np.mean(oqs)) - 0.6) < 0.01

    def end_to_end():
        from .evaluate import SynthSpec, sweep_template, synth_voice, waveform_error
        from .pipeline import lpcc_analyze

        spec = SynthSpec(
            lf=sweep_template(0.6, 120.0), f0_track=(120.0,),
            formants=((660.0, 80.0), (1720.0, 120.0), (2410.0, 160.0), (3500.0, 200.0), (4500.0, 200.0)),
            lip_alpha=0.98, rate=16000.0, n_periods=12,
        )
        speech, truth, gcis, _, _ = synth_voice(spec)
        est = lpcc_analyze(speech, gcis, config.pipeline)
        err = waveform_error(est, truth, gcis)
        assert np.median(err) < 0.25, f"median NRMSE {np.median(err):.3f}"

    check("cepstrum round trip", cepstrum_roundtrip)
    check("odd-order real root", odd_order_real_root)
    check("inverse-system identity", inverse_identity)
    check("pulse-model fit round trip", lf_fit_roundtrip)
    check("EGG closure detection", decom_recovers)
    check("end-to-end synthetic", end_to_end)

    width = max(len(name) for name, _, _ in results)
    failed = 0
    for name, ok, detail in results:
        status = "PASS" if ok else "FAIL"
        line = f"{name:<{width}}  {status}"
        if detail:
            line += f"  ({detail})"
        print(line)
        failed += 0 if ok else 1
    print(f"{len(results) - failed}/{len(results)} checks passed")
    return 0 if failed == 0 else 1


# ---------------------------------------------------------------------------
# Argument parsing


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="glotkit",
        description="Glottal source analysis: LP inverse filtering with per-cycle cepstral phase separation, baselines, and synthetic evaluation.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def add_pipeline_flags(p):
        p.add_argument("--config", help="key=value file mirroring the pipeline configuration fields")
        p.add_argument("--order", type=int, help="linear-prediction order (default: rate-derived odd order)")
        p.add_argument("--frame-ms", dest="frame_ms", type=float, help="analysis frame length, ms")
        p.add_argument("--hop-ms", dest="hop_ms", type=float, help="frame hop, ms")
        p.add_argument("--lip-alpha", dest="lip_alpha", type=float, help="lip radiation coefficient")
        p.add_argument("--epsilon-frac", dest="epsilon_frac", type=float, help="per-cycle pad as a fraction of the period")
        p.add_argument("--nfft-factor", dest="nfft_factor", type=int, help="transform oversize factor")
        p.add_argument("--taper-fraction", dest="taper_fraction", type=float, help="cepstral attenuation-window fraction")

    def add_io_flags(p):
        p.add_argument("input", help="input WAV (channel 0 speech, channel 1 EGG)")
        p.add_argument("--out-dir", default=".", help="output directory (default: current)")
        p.add_argument("--egg-channel", type=int, default=None, help="EGG channel index in a stereo file (default 1)")
        p.add_argument("--min-f0", type=float, default=50.0, help="lowest expected fundamental, Hz")
        p.add_argument("--max-f0", type=float, default=500.0, help="highest expected fundamental, Hz")

    p_an = sub.add_parser("analyze", help="run one method on one utterance")
    add_io_flags(p_an)
    p_an.add_argument("--method", choices=_METHODS, default="lpcc")
    add_pipeline_flags(p_an)

    p_cmp = sub.add_parser("compare", help="run all three methods on one utterance")
    add_io_flags(p_cmp)
    add_pipeline_flags(p_cmp)

    p_syn = sub.add_parser("synth", help="write a deterministic synthetic voice")
    p_syn.add_argument("--f0", type=float, required=True, help="fundamental frequency, Hz")
    p_syn.add_argument("--oq", type=float, required=True, help="designed open quotient in (0, 0.97)")
    p_syn.add_argument("--periods", type=int, default=50)
    p_syn.add_argument("--rate", type=float, default=16000.0)
    p_syn.add_argument("--formants", choices=("neutral", "none"), default="neutral")
    p_syn.add_argument("--noise-snr", dest="noise_snr", type=float, default=None, help="additive noise SNR, dB (default: clean)")
    p_syn.add_argument("--seed", type=int, default=0)
    p_syn.add_argument("--encoding", choices=("float32", "pcm16"), default="float32")
    p_syn.add_argument("--out-dir", default=".")

    p_ev = sub.add_parser("eval", help="run the synthetic sweep and write the report")
    p_ev.add_argument("--sweep", default="default")
    p_ev.add_argument("--periods", type=int, default=50)
    p_ev.add_argument("--noise-snr", dest="noise_snr", type=float, default=None)
    p_ev.add_argument("--out-dir", default=".")
    add_pipeline_flags(p_ev)

    p_st = sub.add_parser("selftest", help="run the built-in property battery")
    add_pipeline_flags(p_st)

    return parser


def run(config: RunConfig) -> int:
    """Execute one parsed invocation; returns the process exit code."""
    handler = {
        "analyze": _cmd_analyze,
        "compare": _cmd_compare,
        "synth": _cmd_synth,
        "eval": _cmd_eval,
        "selftest": _cmd_selftest,
    }[config.command]
    return handler(config)


def main(argv=None) -> int:
    _apply_thread_cap()
    parser = _build_parser()
    args = parser.parse_args(argv)
    from .errors import GlotkitError

    try:
        pipeline = _build_pipeline_config(args)
        options = {
            key: getattr(args, key)
            for key in ("min_f0", "max_f0", "f0", "oq", "periods", "rate", "formants",
                        "noise_snr", "seed", "encoding", "sweep")
            if hasattr(args, key)
        }
        config = RunConfig(
            command=args.command,
            input_path=getattr(args, "input", None),
            output_dir=getattr(args, "out_dir", "."),
            pipeline=pipeline,
            method=getattr(args, "method", "lpcc"),
            egg_channel=getattr(args, "egg_channel", None),
            options=options,
        )
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    try:
        return run(config)
    except GlotkitError as exc:
        print(f"analysis failed: {exc}", file=sys.stderr)
        return 1
    except (OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
