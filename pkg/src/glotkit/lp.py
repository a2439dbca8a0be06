"""Linear-prediction analysis with explicit pole bookkeeping.

The coarse stage of the refinement pipeline fits an *odd* prediction order by
the covariance (unwindowed least-squares) method.  A real-coefficient odd
polynomial always carries at least one real root, so the rooted model can be
split into resonant conjugate pairs -- kept as the vocal-tract filter -- and
real or unstable poles, which model source tilt and are deliberately left out
of the inverse filter.
"""
from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np
import scipy.linalg
from scipy.signal import lfilter

from .errors import DegenerateVtfError, NumericalDegeneracyError
from .signals import Frame, SampledSignal, leaky_integrate

__all__ = [
    "LPModel",
    "PoleSet",
    "covariance_lp",
    "find_poles",
    "vtf_from_poles",
    "vtf_spectrum",
    "inverse_filter",
]

# A root counts as real when its imaginary part is below this scale factor
# times (1 + |root|).  LAPACK's real Schur form returns exactly conjugate
# pairs, so in practice the tolerance only matters for downstream callers
# that build models from perturbed coefficients.
REAL_ROOT_TOL = 1e-7


@dataclass(frozen=True)
class LPModel:
    """All-pole predictor x[n] ~ sum_m coefficients[m-1] * x[n-m].

    ``denominator`` gives the inverse-filter FIR taps [1, -a_1, ..., -a_p].
    Models fitted by :func:`covariance_lp` in the refinement pipeline always
    have odd order; models derived from pole subsets may be even.
    """

    coefficients: np.ndarray
    order: int
    residual_energy: float

    def __post_init__(self):
        coeff = np.asarray(self.coefficients, dtype=np.float64)
        if coeff.ndim != 1:
            raise ValueError("coefficients must be one-dimensional")
        if self.order != coeff.shape[0] or self.order < 1:
            raise ValueError(f"order ({self.order}) must equal len(coefficients) and be >= 1")
        if not np.all(np.isfinite(coeff)):
            raise ValueError("coefficients must be finite")
        if self.residual_energy < 0:
            raise ValueError("residual_energy must be >= 0")
        object.__setattr__(self, "coefficients", coeff)
        object.__setattr__(self, "order", int(self.order))
        object.__setattr__(self, "residual_energy", float(self.residual_energy))

    @property
    def denominator(self) -> np.ndarray:
        """FIR taps of A(z) = 1 - sum_m a_m z^-m."""
        return np.concatenate(([1.0], -self.coefficients))


@dataclass(frozen=True)
class PoleSet:
    """Roots of an LP denominator, partitioned for vocal-tract modelling.

    ``complex_pairs`` holds one positive-imaginary representative per stable
    conjugate pair.  ``excluded_unstable`` holds representatives of non-real
    pairs with modulus >= 1 (each standing for two roots).  Real roots land in
    ``real_poles`` regardless of modulus, since they are never used for the
    vocal-tract filter either way.
    """

    real_poles: np.ndarray
    complex_pairs: np.ndarray
    excluded_unstable: np.ndarray
    order: int

    def __post_init__(self):
        rp = np.asarray(self.real_poles, dtype=np.float64)
        cp = np.asarray(self.complex_pairs, dtype=np.complex128)
        eu = np.asarray(self.excluded_unstable, dtype=np.complex128)
        if 2 * cp.shape[0] + rp.shape[0] + 2 * eu.shape[0] != self.order:
            raise ValueError("pole partition does not account for every root of the model")
        if cp.size and not (np.all(cp.imag > 0) and np.all(np.abs(cp) < 1)):
            raise ValueError("complex_pairs must have positive imaginary part and modulus < 1")
        if eu.size and not np.all(eu.imag > 0):
            raise ValueError("excluded_unstable entries must be positive-imaginary representatives")
        object.__setattr__(self, "real_poles", rp)
        object.__setattr__(self, "complex_pairs", cp)
        object.__setattr__(self, "excluded_unstable", eu)
        object.__setattr__(self, "order", int(self.order))


def covariance_lp(frame: Frame, order: int) -> LPModel:
    """Fit LP coefficients by unwindowed least squares over one frame.

    Minimizes sum_{n=order}^{N-1} (x[n] - sum_m a_m x[n-m])^2 through a
    QR-based solve.  No window or autocorrelation taper is applied, so an
    exactly autoregressive frame is recovered exactly and poles may come out
    unstable; the caller decides what to do with them.
    """
    n = len(frame)
    if order < 1:
        raise ValueError(f"order must be >= 1, got {order}")
    if n <= 2 * order:
        raise ValueError(f"frame length {n} must exceed twice the order ({order})")
    x = frame.samples
    y = x[order:]
    cols = [x[order - m : n - m] for m in range(1, order + 1)]
    data = np.column_stack(cols)
    coeff, _, rank, _ = scipy.linalg.lstsq(data, y, lapack_driver="gelsy")
    if rank < order:
        raise NumericalDegeneracyError(
            f"rank-deficient covariance system (rank {rank} < order {order}) "
            f"for frame starting at sample {frame.start_index}"
        )
    resid = y - data @ coeff
    return LPModel(coeff, order, float(resid @ resid))


def find_poles(model: LPModel, real_tol: float = REAL_ROOT_TOL) -> PoleSet:
    """Root the denominator via the balanced companion matrix and classify.

    Roots with |Im| <= real_tol * (1 + |root|) are treated as real.  The
    remaining conjugate pairs are split on modulus: stable pairs feed the
    vocal-tract filter, pairs with modulus >= 1 are reported separately.
    """
    try:
        roots = np.roots(model.denominator)
    except np.linalg.LinAlgError as exc:
        raise NumericalDegeneracyError(
            f"eigenvalue iteration failed for denominator {model.denominator!r}"
        ) from exc
    is_real = np.abs(roots.imag) <= real_tol * (1.0 + np.abs(roots))
    rest = roots[~is_real]
    while rest.size and 2 * np.count_nonzero(rest.imag > 0) != rest.shape[0]:
        # Defensive: LAPACK returns exact conjugate pairs for real input, so
        # a parity mismatch means the tolerance split a pair; fold the root
        # closest to the real axis back into the reals.
        odd = np.argmin(np.abs(rest.imag))
        is_real[np.flatnonzero(~is_real)[odd]] = True
        rest = roots[~is_real]
    real_poles = np.sort(roots[is_real].real)
    reps = rest[rest.imag > 0]
    order_key = np.lexsort((np.abs(reps), np.angle(reps)))
    reps = reps[order_key]
    stable = np.abs(reps) < 1.0
    return PoleSet(
        real_poles=real_poles,
        complex_pairs=reps[stable],
        excluded_unstable=reps[~stable],
        order=model.order,
    )


def vtf_from_poles(poles: PoleSet) -> LPModel:
    """Build the all-pole vocal-tract model from the stable conjugate pairs.

    Real and unstable poles are excluded by construction, so the result has
    even order 2 * len(complex_pairs) and is always stable.
    """
    pairs = poles.complex_pairs
    if pairs.shape[0] == 0:
        raise DegenerateVtfError(
            "no stable complex pole pairs available (frame likely unvoiced or silent)"
        )
    roots = np.concatenate([pairs, np.conj(pairs)])
    den = np.poly(roots)
    scale = 1.0 + np.max(np.abs(den.real))
    if np.max(np.abs(den.imag)) > 1e-12 * scale:
        raise NumericalDegeneracyError("conjugate-pair product produced non-real coefficients")
    den = den.real
    return LPModel(-den[1:], 2 * pairs.shape[0], 0.0)


def vtf_spectrum(vtf: LPModel, nfft: int, rate: float) -> tuple[np.ndarray, np.ndarray]:
    """Evaluate |1/A(z)| in dB on nfft/2 + 1 points of the upper semicircle.

    Returns (frequencies_hz, magnitude_db).  Magnitudes are clamped at
    +200 dB with a warning, which only triggers for near-unit-modulus poles
    landing on a bin.
    """
    if nfft < 2 or nfft & (nfft - 1):
        raise ValueError(f"nfft must be a power of two >= 2, got {nfft}")
    if nfft < 2 * vtf.order:
        raise ValueError(f"nfft {nfft} too small for order {vtf.order}")
    if rate <= 0:
        raise ValueError("rate must be positive")
    response = np.fft.rfft(vtf.denominator, nfft)
    mag = np.abs(response)
    freqs = np.arange(nfft // 2 + 1) * (rate / nfft)
    with np.errstate(divide="ignore"):
        db = -20.0 * np.log10(mag)
    if np.any(db > 200.0):
        warnings.warn("vocal-tract spectrum clamped at +200 dB", RuntimeWarning, stacklevel=2)
        db = np.minimum(db, 200.0)
    return freqs, db


def inverse_filter(signal: SampledSignal, vtf: LPModel, lip_alpha: float) -> SampledSignal:
    """Undo the vocal tract and lip radiation in one pass.

    FIR-filters with the (stable) VTF denominator, then cancels the
    1 - lip_alpha * z^-1 radiation stage by leaky integration.  The result is
    the coarse glottal derivative estimate.
    """
    if not 0.0 < lip_alpha <= 1.0:
        raise ValueError(f"lip_alpha must lie in (0, 1], got {lip_alpha}")
    residual = lfilter(vtf.denominator, [1.0], signal.samples)
    return leaky_integrate(SampledSignal(residual, signal.rate), lip_alpha)
