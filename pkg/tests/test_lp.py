import numpy as np
import pytest
from scipy.signal import lfilter

from glotkit.errors import DegenerateVtfError, NumericalDegeneracyError
from glotkit.lp import (
    LPModel,
    covariance_lp,
    find_poles,
    inverse_filter,
    vtf_from_poles,
    vtf_spectrum,
)
from glotkit.pipeline import default_lp_order
from glotkit.signals import Frame, SampledSignal


def ar_signal(coefficients, n, rng, scale=1e-3):
    """Drive an all-pole system with an impulse plus faint noise."""
    drive = np.zeros(n)
    drive[0] = 1.0
    drive += scale * rng.standard_normal(n)
    den = np.concatenate(([1.0], -np.asarray(coefficients)))
    return lfilter([1.0], den, drive)


def test_covariance_lp_exact_recovery():
    # noiseless AR(3) data is fit exactly by the covariance method
    a = np.array([1.2, -0.6, 0.1])
    drive = np.zeros(240)
    drive[0] = 1.0
    x = lfilter([1.0], np.concatenate(([1.0], -a)), drive)
    model = covariance_lp(Frame(x, 0, 16000.0), 3)
    np.testing.assert_allclose(model.coefficients, a, atol=1e-10)
    assert model.residual_energy < 1e-18


def test_covariance_lp_validation(rng):
    frame = Frame(rng.standard_normal(20), 0, 16000.0)
    with pytest.raises(ValueError):
        covariance_lp(frame, 0)
    with pytest.raises(ValueError):
        covariance_lp(frame, 10)  # length must exceed 2 * order
    # constant frame: every lag column is identical -> rank deficient
    with pytest.raises(NumericalDegeneracyError):
        covariance_lp(Frame(np.ones(64), 0, 16000.0), 3)


def test_lp_model_denominator_layout():
    m = LPModel([0.5, -0.25], 2, 0.0)
    np.testing.assert_array_equal(m.denominator, [1.0, -0.5, 0.25])
    with pytest.raises(ValueError):
        LPModel([0.5], 2, 0.0)


def test_find_poles_known_roots():
    # denominator built from two known pairs and one real pole
    pairs = np.array([0.9 * np.exp(1j * 0.7), 0.8 * np.exp(1j * 1.9)])
    real = -0.4
    roots = np.concatenate([pairs, pairs.conj(), [real]])
    den = np.real(np.poly(roots))
    model = LPModel(-den[1:], 5, 0.0)
    ps = find_poles(model)
    assert ps.real_poles.shape == (1,)
    assert ps.real_poles[0] == pytest.approx(real, abs=1e-10)
    assert ps.complex_pairs.shape == (2,)
    got = np.sort_complex(ps.complex_pairs)
    np.testing.assert_allclose(np.sort_complex(pairs), got, atol=1e-10)
    assert ps.excluded_unstable.size == 0


def test_find_poles_unstable_pair_reported():
    pairs = np.array([1.05 * np.exp(1j * 0.5), 0.7 * np.exp(1j * 2.2)])
    roots = np.concatenate([pairs, pairs.conj(), [0.3]])
    den = np.real(np.poly(roots))
    ps = find_poles(LPModel(-den[1:], 5, 0.0))
    assert ps.excluded_unstable.shape == (1,)
    assert abs(ps.excluded_unstable[0]) > 1.0
    assert ps.complex_pairs.shape == (1,)


def test_odd_order_always_has_real_pole(rng):
    """Real odd-degree polynomials cannot avoid a real root."""
    for _ in range(200):
        order = int(rng.choice([3, 5, 7, 9, 11, 19]))
        x = ar_signal(0.4 * rng.standard_normal(order) / order, 400, rng, scale=0.1)
        model = covariance_lp(Frame(x, 0, 16000.0), order)
        ps = find_poles(model)
        assert ps.real_poles.size >= 1


def test_vtf_from_poles_excludes_reals_and_unstable():
    pairs = np.array([0.9 * np.exp(1j * 0.6)])
    unstable = np.array([1.1 * np.exp(1j * 1.2)])
    roots = np.concatenate([pairs, pairs.conj(), unstable, unstable.conj(), [0.5, -0.2, 0.99]])
    den = np.real(np.poly(roots))
    ps = find_poles(LPModel(-den[1:], 7, 0.0))
    vtf = vtf_from_poles(ps)
    assert vtf.order == 2
    got = np.roots(vtf.denominator)
    np.testing.assert_allclose(np.sort_complex(got), np.sort_complex(np.r_[pairs, pairs.conj()]), atol=1e-9)


def test_vtf_from_poles_empty_raises():
    roots = np.array([0.5, -0.3, 0.8])
    den = np.real(np.poly(roots))
    ps = find_poles(LPModel(-den[1:], 3, 0.0))
    with pytest.raises(DegenerateVtfError):
        vtf_from_poles(ps)


def test_inverse_filter_recovers_source(rng):
    """Synthesize through a known VTF + lip stage, invert with the same VTF."""
    pairs = np.array([0.95 * np.exp(1j * 0.5), 0.9 * np.exp(1j * 1.4)])
    roots = np.concatenate([pairs, pairs.conj()])
    den = np.real(np.poly(roots))
    vtf = LPModel(-den[1:], 4, 0.0)
    source = rng.standard_normal(2000)
    speech = lfilter([1.0, -0.97], [1.0], lfilter([1.0], den, source))
    back = inverse_filter(SampledSignal(speech, 16000.0), vtf, 0.97)
    skip = vtf.order
    err = np.max(np.abs(back.samples[skip:] - source[skip:]))
    assert err < 1e-8 * np.max(np.abs(source))


def test_vtf_spectrum_peaks_at_pole_angles():
    theta = 2 * np.pi * 1000.0 / 8000.0
    pair = np.array([0.97 * np.exp(1j * theta)])
    den = np.real(np.poly(np.r_[pair, pair.conj()]))
    vtf = LPModel(-den[1:], 2, 0.0)
    freqs, db = vtf_spectrum(vtf, 1024, 8000.0)
    assert freqs[np.argmax(db)] == pytest.approx(1000.0, abs=8000.0 / 1024)
    with pytest.raises(ValueError):
        vtf_spectrum(vtf, 100, 8000.0)  # not a power of two


def test_default_lp_order_rule():
    # odd order, about one pole pair per kHz plus tilt room
    assert default_lp_order(16000.0) == 19
    assert default_lp_order(8000.0) % 2 == 1
    assert default_lp_order(8000.0) < default_lp_order(22050.0)
