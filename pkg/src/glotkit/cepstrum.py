"""Complex cepstrum computation and causal/anti-causal phase separation.

A windowed frame w[n] factors as A * z^-K * prod(1 - a_m z^-1) * prod(1 - b_k z)
with |a_m| < 1 (minimum-phase zeros) and |b_k| < 1 (reciprocals of the
maximum-phase zeros).  Its complex cepstrum is then

    c[0] = ln|A|
    c[n] = -sum_m a_m**n / n          for n > 0
    c[n] =  sum_k b_k**(-n) / n       for n < 0

so causal quefrencies carry the minimum-phase factors and anti-causal
quefrencies the maximum-phase ones.  Zeroing n > 0 and inverting therefore
reconstructs the maximum-phase (anti-causal) component of the frame, which
for glottal-derivative analysis is the open-phase arc ending at a closure.

The FFT path removes two aliases of linear phase before taking the log:
the algebraic sign of the gain A (read off the zero-frequency value, where
every root factor contributes a positive number) and the integer z^-K delay
(read off the unwrapped phase at Nyquist).  Both are stored on the frame so
the inverse can restore them.
"""
from __future__ import annotations

import warnings
from dataclasses import dataclass, replace

import numpy as np

from .errors import CepstrumError, DegenerateInputError
from .signals import Frame, SampledSignal, WindowKind, make_window

__all__ = [
    "CepstrumFrame",
    "pitch_synchronous_window",
    "complex_cepstrum",
    "split_anticausal",
    "inverse_cepstrum",
    "flow_balance_zeros",
    "deflate_zeros",
    "restore_zeros",
]


@dataclass(frozen=True)
class CepstrumFrame:
    """Two-sided real cepstrum in FFT layout plus inversion bookkeeping.

    ``values[j]`` holds quefrency n = j for j <= nfft/2 and n = j - nfft for
    the upper half, so anti-causal quefrencies occupy the tail of the array.
    ``gain_log`` equals values[0] = ln|A|; ``gain_sign`` and
    ``linear_phase_shift`` record what was divided out of the spectrum before
    the log.
    """

    values: np.ndarray
    gain_log: float
    gain_sign: int
    linear_phase_shift: int
    rate: float

    def __post_init__(self):
        values = np.asarray(self.values, dtype=np.float64)
        if values.ndim != 1 or values.shape[0] < 4 or values.shape[0] % 2:
            raise ValueError("cepstrum values must be a 1-d array of even length >= 4")
        if not np.all(np.isfinite(values)):
            raise ValueError("cepstrum values must be finite")
        if self.gain_sign not in (-1, 1):
            raise ValueError("gain_sign must be +1 or -1")
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "gain_log", float(self.gain_log))
        object.__setattr__(self, "gain_sign", int(self.gain_sign))
        object.__setattr__(self, "linear_phase_shift", int(self.linear_phase_shift))
        object.__setattr__(self, "rate", float(self.rate))

    @property
    def nfft(self) -> int:
        return self.values.shape[0]

    @property
    def extent(self) -> int:
        """Largest |n| on the anti-causal side; quefrencies run [-extent, extent+1]."""
        return self.nfft // 2 - 1

    def at(self, n: int) -> float:
        """Value at signed quefrency n."""
        if not -self.extent <= n <= self.extent + 1:
            raise ValueError(f"quefrency {n} outside [-{self.extent}, {self.extent + 1}]")
        return float(self.values[n % self.nfft])


def pitch_synchronous_window(
    signal: SampledSignal,
    s_k: int,
    s_k1: int,
    epsilon_frac: float,
    window: WindowKind = WindowKind.BLACKMAN,
) -> Frame:
    """Extract and taper the region spanning one glottal cycle.

    The region covers [s_k - eps, s_k1 + eps] inclusive, with
    eps = round(epsilon_frac * (s_k1 - s_k)), then is multiplied by the given
    analysis window.  Out-of-range bounds are clipped with a warning; regions
    shorter than 16 samples are rejected.
    """
    if not 0 <= s_k < s_k1:
        raise ValueError(f"need 0 <= s_k < s_k1, got {s_k}, {s_k1}")
    if not 0.0 <= epsilon_frac <= 0.2:
        raise ValueError(f"epsilon_frac must lie in [0, 0.2], got {epsilon_frac}")
    eps = int(round(epsilon_frac * (s_k1 - s_k)))
    lo, hi = s_k - eps, s_k1 + eps
    n = len(signal)
    if lo < 0 or hi >= n:
        warnings.warn(
            f"analysis region [{lo}, {hi}] clipped to signal bounds [0, {n - 1}]",
            RuntimeWarning,
            stacklevel=2,
        )
        lo, hi = max(lo, 0), min(hi, n - 1)
    length = hi - lo + 1
    if length < 16:
        raise DegenerateInputError(f"analysis region of {length} samples is too short")
    samples = signal.samples[lo : hi + 1] * make_window(window, length)
    return Frame(samples, lo, signal.rate)


def flow_balance_zeros(samples: np.ndarray, radial_tol: float = 0.05) -> np.ndarray:
    """Find the frame's z-transform zeros pinned near z = +1 by flow balance.

    Net glottal flow over a cycle is zero, so a cycle-length frame has a
    structural zero essentially on the unit circle at z = +1 — sometimes two
    real ones, or a conjugate pair just off the axis when residual filtering
    error makes two real zeros collide.  Such zeros belong decisively to
    neither the causal nor the anti-causal cepstral side, and letting
    rounding decide derails the phase split.

    Every finite frame also carries generic truncation zeros near the
    circle, angularly spaced about 2*pi/len(samples) apart; those are part
    of the frame's ordinary spectral shape and must stay.  The structural
    zeros are therefore selected by an angular window of half the truncation
    spacing around the positive real axis, plus a ``radial_tol`` band around
    |z| = 1.

    Returns real zeros plus the upper-half-plane member of each conjugate
    pair (at most three entries, nearest to +1 first).  Pass the result
    unchanged to :func:`deflate_zeros` / :func:`restore_zeros`.
    """
    w = np.asarray(samples, dtype=np.float64)
    if w.ndim != 1:
        raise ValueError("need a 1-d frame")
    if w.shape[0] < 3 or not np.any(w):
        return np.empty(0, dtype=np.complex128)
    # Work on p(x) = sum w[n] x^n with x = 1/z; the reversed ordering keeps
    # the (large) closure samples in the leading coefficients.
    coeffs = w[::-1]
    dcoeffs = np.polyder(coeffs)
    angle_tol = np.pi / w.shape[0]

    def polish(seeds):
        found = []
        for xk in seeds:
            for _ in range(40):
                if abs(xk - 1.0) > 0.2:
                    break
                dp = np.polyval(dcoeffs, xk)
                if dp == 0:
                    break
                step = np.polyval(coeffs, xk) / dp
                xk -= step
                if abs(step) <= 1e-13 * abs(xk):
                    found.append(xk)
                    break
        if not found:
            return np.empty(0, dtype=np.complex128)
        z = 1.0 / np.asarray(found, dtype=np.complex128)
        z = z[
            (np.abs(np.abs(z) - 1.0) < radial_tol)
            & (z.real > 0.0)
            & (np.abs(np.angle(z)) < angle_tol)
        ]
        z = np.where(np.abs(z.imag) <= 1e-8 * np.abs(z.real), z.real + 0.0j, z)
        return np.where(z.imag < 0.0, z.conj(), z)

    # Newton from fixed seeds around x = +1 finds the structural zeros in
    # all but pathological frames.  Companion-matrix eigenvalue estimates
    # are computed only as a fallback: the frame ends in quiet closed-phase
    # samples, so the polynomial is badly scaled and those estimates
    # routinely land outside their own Newton basins anyway.
    z = polish(
        [
            1.0 + 0.0j,
            0.99 + 0.0j,
            1.01 + 0.0j,
            0.98 + 0.0j,
            1.02 + 0.0j,
            1.0 + 0.015j,
            0.995 + 0.008j,
            1.005 + 0.008j,
            0.99 + 0.015j,
            1.01 + 0.015j,
        ]
    )
    if not z.size:
        estimates = np.roots(coeffs)
        estimates = estimates[estimates != 0]
        z = polish(
            estimates[
                (np.abs(np.abs(estimates) - 1.0) < 0.15)
                & (estimates.real > 0.0)
                & (np.abs(np.angle(estimates)) < 4.0 * angle_tol)
            ]
        )
    # Different seeds usually converge onto the same root; deflating a root
    # twice would manufacture a factor the frame does not have.
    zs = z[np.argsort(np.abs(z - 1.0), kind="stable")]
    keep = np.ones(zs.size, dtype=bool)
    for i in range(1, zs.size):
        if np.any(np.abs(zs[:i][keep[:i]] - zs[i]) <= 1e-7):
            keep[i] = False
    return zs[keep][:3]


def _zero_factors(zeros: np.ndarray) -> list:
    """Monic x-polynomial factors (x = 1/z, highest power first) for the
    representatives returned by :func:`flow_balance_zeros`."""
    factors = []
    for zk in np.asarray(zeros, dtype=np.complex128):
        xk = 1.0 / zk
        if xk.imag == 0.0:
            factors.append(np.array([1.0, -xk.real]))
        else:
            factors.append(np.array([1.0, -2.0 * xk.real, abs(xk) ** 2]))
    return factors


def deflate_zeros(samples: np.ndarray, zeros: np.ndarray) -> np.ndarray:
    """Divide the frame's z-transform by the factors carrying ``zeros``.

    Conjugate pairs are removed as real quadratics, so the quotient stays
    real.  Division remainders are discarded (negligible when the entries
    really are zeros of the frame).  The result is shorter by one sample per
    real zero and two per conjugate pair.
    """
    cx = np.asarray(samples, dtype=np.float64)[::-1]
    for fac in _zero_factors(zeros):
        if len(cx) <= len(fac) - 1:
            raise ValueError("frame too short for requested deflation")
        cx, _ = np.polydiv(cx, fac)
    return cx[::-1]


def restore_zeros(samples: np.ndarray, zeros: np.ndarray) -> np.ndarray:
    """Multiply a time signal's z-transform by the factors removed by
    :func:`deflate_zeros`, growing the length accordingly."""
    cx = np.asarray(samples, dtype=np.float64)[::-1]
    for fac in _zero_factors(zeros):
        cx = np.convolve(cx, fac)
    return cx[::-1]


def complex_cepstrum(frame: Frame, nfft: int) -> CepstrumFrame:
    """Compute the complex cepstrum of one frame on an nfft grid.

    Requires nfft even and at least 4x the frame length so that the 1/n
    cepstral tails decay across the grid instead of aliasing.  Raises
    :class:`CepstrumError` when the log spectrum is ill-conditioned (a
    near-zero bin, or phase unwrapping that leaves a non-integer multiple of
    pi at Nyquist).
    """
    n = len(frame)
    if nfft % 2 or nfft < 4 * n:
        raise ValueError(f"nfft must be even and >= 4 * frame length ({4 * n}), got {nfft}")
    if not np.any(frame.samples):
        raise DegenerateInputError("cannot take the cepstrum of an all-zero frame")
    spectrum = np.fft.rfft(frame.samples, nfft)
    mag = np.abs(spectrum)
    if mag.min() <= 1e-12 * max(1.0, mag.max()):
        raise CepstrumError(
            "spectral zero on the DFT grid; increase nfft or adjust the region bounds"
        )
    gain_sign = 1 if spectrum[0].real >= 0 else -1
    phase = np.unwrap(np.angle(gain_sign * spectrum))
    half = nfft // 2
    shift = int(round(phase[-1] / np.pi))
    if abs(phase[-1] - shift * np.pi) > 0.25 * np.pi:
        raise CepstrumError(
            "phase unwrapping left a fractional linear term; "
            "increase nfft or adjust the region bounds"
        )
    phase = phase - (np.pi * shift / half) * np.arange(half + 1)
    log_spectrum = np.log(mag) + 1j * phase
    log_spectrum[-1] = np.log(mag[-1])  # Nyquist bin is real by symmetry
    values = np.fft.irfft(log_spectrum, nfft)
    return CepstrumFrame(values, float(values[0]), gain_sign, shift, frame.rate)


def split_anticausal(cep: CepstrumFrame, taper_len: int) -> CepstrumFrame:
    """Keep the anti-causal (maximum-phase) side, tapered, plus the gain term.

    All quefrencies n > 0 are zeroed.  The n < 0 side is multiplied by a
    rising half-Blackman oriented so the weight is exactly 1 at n = -1 and
    decays toward higher |n|; quefrencies beyond -taper_len are dropped
    entirely.  The gain term at n = 0 is kept unchanged.
    """
    if not 4 <= taper_len <= cep.extent:
        raise ValueError(f"taper_len must lie in [4, {cep.extent}], got {taper_len}")
    half = cep.nfft // 2
    values = cep.values.copy()
    values[1 : half + 1] = 0.0  # causal side, including the Nyquist quefrency
    weights = np.zeros(half - 1)
    weights[-taper_len:] = make_window(WindowKind.HALF_BLACKMAN_LEFT, taper_len)
    values[half + 1 :] *= weights  # indices half+1.. hold n = -(half-1)..-1
    return replace(cep, values=values, gain_log=float(values[0]))


def inverse_cepstrum(cep: CepstrumFrame) -> SampledSignal:
    """Map a (possibly split) cepstrum back to a time-domain frame.

    Exponentiates the DFT of the cepstrum, restores the recorded gain sign
    and integer linear phase, and returns the real signal on the nfft grid.
    A non-negligible imaginary residue means the cepstral tails aliased;
    that raises :class:`CepstrumError` suggesting a larger nfft.
    """
    n = cep.nfft
    k = np.arange(n)
    ramp = np.exp(1j * (2.0 * np.pi * cep.linear_phase_shift / n) * k)
    spectrum = np.exp(np.fft.fft(cep.values)) * ramp
    x = np.fft.ifft(spectrum) * cep.gain_sign
    scale = max(1.0, float(np.max(np.abs(x.real))))
    if np.max(np.abs(x.imag)) > 1e-9 * scale:
        raise CepstrumError("imaginary residue above threshold; increase nfft")
    return SampledSignal(x.real, cep.rate)
