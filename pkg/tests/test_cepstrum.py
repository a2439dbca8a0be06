"""Cepstrum tests built around a root-series oracle.

For a frame w[n] with W(z) = w0 * prod(1 - q_i / z), the cepstrum follows
directly from the root moduli: roots inside the unit circle feed the causal
side as -q**n / n, roots outside feed the anti-causal side as -(1/q)**|n| / |n|,
and the gain term is ln|w0| plus the log moduli of the outside roots.  The
FFT implementation must agree with that series; several hand-checked values
are frozen below.
"""

import numpy as np
import pytest

from glotkit.cepstrum import (
    complex_cepstrum,
    deflate_zeros,
    flow_balance_zeros,
    inverse_cepstrum,
    pitch_synchronous_window,
    restore_zeros,
    split_anticausal,
)
from glotkit.errors import CepstrumError, DegenerateInputError
from glotkit.signals import Frame, SampledSignal, WindowKind


def series_cepstrum(roots, w0, nmax):
    """Independent direct evaluation of the cepstral series from known roots."""
    q = np.asarray(roots, dtype=complex)
    inside = q[np.abs(q) < 1]
    outside = q[np.abs(q) > 1]
    c = {0: float(np.log(abs(w0)) + np.sum(np.log(np.abs(outside))).real)}
    for n in range(1, nmax + 1):
        c[n] = float(np.real(-np.sum(inside**n) / n)) if inside.size else 0.0
        c[-n] = float(np.real(-np.sum((1.0 / outside) ** n) / n)) if outside.size else 0.0
    return c


def random_real_polynomial(rng, max_pairs=3, max_reals=2):
    """Real coefficients with controlled root moduli; returns (coeffs, roots)."""
    n_in = rng.integers(1, max_pairs + 1)
    n_out = rng.integers(1, max_pairs + 1)
    pin = rng.uniform(0.3, 0.9, n_in) * np.exp(1j * rng.uniform(0.1, np.pi - 0.1, n_in))
    pout = rng.uniform(1.1, 2.5, n_out) * np.exp(1j * rng.uniform(0.1, np.pi - 0.1, n_out))
    reals = np.concatenate(
        [
            rng.uniform(0.3, 0.9, rng.integers(0, max_reals + 1)) * rng.choice([-1.0, 1.0], size=None),
            rng.uniform(1.1, 2.5, rng.integers(0, max_reals + 1)) * rng.choice([-1.0, 1.0], size=None),
        ]
    )
    roots = np.concatenate([pin, pin.conj(), pout, pout.conj(), reals])
    return np.real(np.poly(roots)), roots


# ---------------------------------------------------------------------------
# Frozen classical values (computed from the series by hand)


def test_single_maxphase_zero():
    # [1, -2] = -2/z * (1 - 0.5 z): pure anti-causal cepstrum
    cep = complex_cepstrum(Frame([1.0, -2.0], 0, 8000.0), 512)
    assert cep.at(-1) == pytest.approx(-0.5, abs=1e-12)
    assert cep.at(-2) == pytest.approx(-0.125, abs=1e-12)
    assert cep.at(0) == pytest.approx(np.log(2.0), abs=1e-12)
    assert cep.at(1) == pytest.approx(0.0, abs=1e-12)
    assert cep.gain_sign == -1
    assert cep.linear_phase_shift == -1


def test_single_minphase_zero():
    cep = complex_cepstrum(Frame([1.0, -0.5], 0, 8000.0), 512)
    assert cep.at(1) == pytest.approx(-0.5, abs=1e-12)
    assert cep.at(2) == pytest.approx(-0.125, abs=1e-12)
    assert cep.at(3) == pytest.approx(-0.5**3 / 3, abs=1e-12)
    assert cep.at(0) == pytest.approx(0.0, abs=1e-12)
    assert cep.at(-1) == pytest.approx(0.0, abs=1e-12)


def test_mixed_phase_quadratic():
    # x^2 - 2x + 0.96 factors as (x - 1.2)(x - 0.8): one root each side
    cep = complex_cepstrum(Frame([1.0, -2.0, 0.96], 0, 8000.0), 512)
    assert cep.at(1) == pytest.approx(-0.8, abs=1e-12)
    assert cep.at(2) == pytest.approx(-0.32, abs=1e-12)
    assert cep.at(-1) == pytest.approx(-1.0 / 1.2, abs=1e-12)
    assert cep.at(-2) == pytest.approx(-0.5 / 1.2**2, abs=1e-12)
    assert cep.at(0) == pytest.approx(np.log(1.2), abs=1e-12)


def test_matches_series_on_random_polynomials(rng):
    for _ in range(25):
        w, roots = random_real_polynomial(rng)
        cep = complex_cepstrum(Frame(w, 0, 16000.0), 1024)
        c = series_cepstrum(roots, w[0], 64)
        for n in range(-64, 65):
            assert abs(cep.at(n) - c[n]) < 1e-9, f"quefrency {n}"


def test_nfft_validation_and_degenerate_frames():
    with pytest.raises(ValueError):
        complex_cepstrum(Frame(np.ones(100), 0, 8000.0), 256)  # < 4x length
    with pytest.raises(ValueError):
        complex_cepstrum(Frame([1.0, 0.5], 0, 8000.0), 510 + 1)  # odd
    with pytest.raises(DegenerateInputError):
        complex_cepstrum(Frame(np.zeros(8), 0, 8000.0), 64)
    # a zero exactly on the DFT grid makes the log blow up
    w = np.convolve([1.0, -1.0], [1.0, 0.3])  # zero at z=+1 = bin 0
    with pytest.raises(CepstrumError):
        complex_cepstrum(Frame(w, 0, 8000.0), 64)


# ---------------------------------------------------------------------------
# Round trips


def test_homomorphic_roundtrip(rng):
    for _ in range(10):
        w, _ = random_real_polynomial(rng)
        frame = Frame(w, 0, 16000.0)
        recon = inverse_cepstrum(complex_cepstrum(frame, 2048))
        scale = np.max(np.abs(w))
        np.testing.assert_allclose(recon.samples[: w.shape[0]], w, atol=1e-8 * scale)
        assert np.max(np.abs(recon.samples[w.shape[0] :])) < 1e-8 * scale


def test_pure_maxphase_split_identity():
    # all roots outside: the anti-causal side carries the entire frame
    roots = np.array([1.5, 2.0 + 1.0j, 2.0 - 1.0j])
    w = np.real(np.poly(roots))
    frame = Frame(w, 0, 16000.0)
    cep = complex_cepstrum(frame, 2048)
    kept = split_anticausal(cep, cep.extent)
    recon = inverse_cepstrum(kept)
    np.testing.assert_allclose(recon.samples[: w.shape[0]], w, atol=1e-6 * np.max(np.abs(w)))


def test_split_zeroes_causal_side(rng):
    w, _ = random_real_polynomial(rng)
    cep = complex_cepstrum(Frame(w, 0, 16000.0), 2048)
    kept = split_anticausal(cep, 32)
    half = kept.nfft // 2
    assert np.all(kept.values[1 : half + 1] == 0.0)
    # gain and nearest anti-causal quefrency survive untouched
    assert kept.at(0) == cep.at(0)
    assert kept.at(-1) == pytest.approx(cep.at(-1), abs=1e-15)
    with pytest.raises(ValueError):
        split_anticausal(cep, 3)
    with pytest.raises(ValueError):
        split_anticausal(cep, cep.extent + 1)


def test_convolution_additivity(rng):
    """Cepstrum of a convolution is the sum of the factor cepstra."""
    for _ in range(5):
        w1, _ = random_real_polynomial(rng, max_pairs=2, max_reals=1)
        w2, _ = random_real_polynomial(rng, max_pairs=2, max_reals=1)
        both = np.convolve(w1, w2)
        c1 = complex_cepstrum(Frame(w1, 0, 16000.0), 2048)
        c2 = complex_cepstrum(Frame(w2, 0, 16000.0), 2048)
        c12 = complex_cepstrum(Frame(both, 0, 16000.0), 2048)
        np.testing.assert_allclose(c12.values, c1.values + c2.values, atol=1e-9)


# ---------------------------------------------------------------------------
# Pitch-synchronous windowing


def test_pitch_synchronous_window_bounds():
    sig = SampledSignal(np.arange(200, dtype=float) + 1.0, 8000.0)
    frame = pitch_synchronous_window(sig, 40, 80, 0.05, window=WindowKind.RECTANGULAR)
    eps = round(0.05 * 40)
    assert frame.start_index == 40 - eps
    assert len(frame) == (80 + eps) - (40 - eps) + 1
    np.testing.assert_array_equal(frame.samples, sig.samples[40 - eps : 80 + eps + 1])


def test_pitch_synchronous_window_default_is_blackman():
    sig = SampledSignal(np.ones(200), 8000.0)
    frame = pitch_synchronous_window(sig, 40, 80, 0.0)
    assert frame.samples[0] == pytest.approx(0.0, abs=1e-15)
    assert np.max(frame.samples) == pytest.approx(1.0, abs=1e-2)


def test_pitch_synchronous_window_clips_with_warning():
    sig = SampledSignal(np.ones(60), 8000.0)
    with pytest.warns(RuntimeWarning, match="clipped"):
        frame = pitch_synchronous_window(sig, 2, 58, 0.2, window=WindowKind.RECTANGULAR)
    assert frame.start_index == 0
    assert len(frame) == 60
    with pytest.raises(DegenerateInputError):
        pitch_synchronous_window(sig, 10, 14, 0.0)


# ---------------------------------------------------------------------------
# Flow-balance zeros


def test_flow_balance_zero_found_on_mean_free_frame(rng):
    for _ in range(10):
        base = rng.standard_normal(60)
        w = base - base.mean()  # zero net sum -> zero of W at z = +1
        zeros = flow_balance_zeros(w)
        assert zeros.size >= 1
        assert np.min(np.abs(zeros - 1.0)) < 1e-6


def test_flow_balance_returns_genuine_zeros_only(rng):
    """Whatever the selection picks must actually be a zero of the frame."""
    for _ in range(20):
        w = rng.standard_normal(64)
        if rng.random() < 0.5:
            w = w - w.mean()
        zeros = flow_balance_zeros(w)
        assert zeros.size <= 3
        for z0 in zeros:
            assert z0.imag >= 0.0  # upper-half-plane representative
            value = np.polyval(w[::-1], 1.0 / z0)
            assert abs(value) < 1e-8 * np.max(np.abs(w))


def test_deflate_restore_roundtrip(rng):
    base = rng.standard_normal(50)
    w = base - base.mean()
    zeros = flow_balance_zeros(w)
    assert zeros.size
    short = deflate_zeros(w, zeros)
    n_real = int(np.sum(zeros.imag == 0.0))
    n_pairs = int(np.sum(zeros.imag != 0.0))
    assert short.shape[0] == w.shape[0] - n_real - 2 * n_pairs
    back = restore_zeros(short, zeros)
    np.testing.assert_allclose(back, w, atol=1e-8 * np.max(np.abs(w)))


def test_deflate_too_short_raises():
    with pytest.raises(ValueError):
        deflate_zeros(np.array([1.0]), np.array([1.0 + 0.0j]))
