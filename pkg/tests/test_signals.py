import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from glotkit.errors import DegenerateInputError
from glotkit.signals import (
    Frame,
    SampledSignal,
    WindowKind,
    differentiate,
    frame_signal,
    leaky_integrate,
    make_window,
    normalize_pulse,
)


def test_sampled_signal_validation():
    with pytest.raises(ValueError):
        SampledSignal(np.zeros((2, 2)), 8000.0)
    with pytest.raises(ValueError):
        SampledSignal([0.0, np.inf], 8000.0)
    with pytest.raises(ValueError):
        SampledSignal([0.0, 1.0], 0.0)
    s = SampledSignal([0, 1, 2], 100.0)
    assert s.samples.dtype == np.float64
    assert len(s) == 3
    assert s.duration == pytest.approx(0.03)


def test_frame_records_origin():
    f = Frame([1.0, 2.0], 5, 8000.0)
    assert f.start_index == 5
    assert len(f) == 2
    with pytest.raises(ValueError):
        Frame([], 0, 8000.0)
    with pytest.raises(ValueError):
        Frame([1.0], -1, 8000.0)


def test_window_kind_parse():
    assert WindowKind.parse(" Blackman ") is WindowKind.BLACKMAN
    with pytest.raises(ValueError, match="unknown window"):
        WindowKind.parse("kaiser")


@pytest.mark.parametrize("kind", list(WindowKind))
def test_make_window_range(kind):
    w = make_window(kind, 33)
    assert w.shape == (33,)
    assert w.min() >= 0.0 and w.max() <= 1.0


def test_half_blackman_left_shape():
    """Rising half: monotone nondecreasing, max exactly 1 at the right edge."""
    w = make_window(WindowKind.HALF_BLACKMAN_LEFT, 17)
    assert np.all(np.diff(w) >= -1e-15)
    assert w[-1] == pytest.approx(1.0, abs=1e-15)
    assert w[0] < 0.05
    # consistent with the rising half of a double-length Blackman
    full = np.blackman(2 * 17 + 1)
    np.testing.assert_allclose(w, np.clip(full[1:18], 0.0, 1.0), atol=1e-15)


def test_frame_signal_layout():
    sig = SampledSignal(np.arange(10, dtype=float), 100.0)
    frames = frame_signal(sig, 4, 3)
    assert [f.start_index for f in frames] == [0, 3, 6]
    np.testing.assert_array_equal(frames[1].samples, [3, 4, 5, 6])
    with pytest.raises(ValueError):
        frame_signal(sig, 11, 3)
    with pytest.raises(ValueError):
        frame_signal(sig, 4, 0)


def test_differentiate_then_integrate_roundtrip(rng):
    x = SampledSignal(rng.standard_normal(256), 16000.0)
    d = differentiate(x)
    assert d.samples[0] == 0.0
    # alpha=1 integration undoes the first difference up to the initial value
    y = leaky_integrate(d, 1.0)
    np.testing.assert_allclose(y.samples, x.samples - x.samples[0], atol=1e-12)


def test_leaky_integrate_impulse_response():
    imp = SampledSignal(np.r_[1.0, np.zeros(7)], 8000.0)
    y = leaky_integrate(imp, 0.5)
    np.testing.assert_allclose(y.samples, 0.5 ** np.arange(8))
    with pytest.raises(ValueError):
        leaky_integrate(imp, 0.0)
    with pytest.raises(ValueError):
        leaky_integrate(imp, 1.5)


def test_normalize_pulse_basic():
    p = normalize_pulse(SampledSignal([0.0, 2.0, -4.0, 1.0], 100.0))
    assert p.samples.min() == pytest.approx(-1.0)
    # dominant positive extremum gets flipped
    q = normalize_pulse(SampledSignal([0.0, 5.0, -1.0], 100.0))
    assert q.samples.min() == pytest.approx(-1.0)
    assert q.samples[1] == pytest.approx(-1.0)
    with pytest.raises(DegenerateInputError):
        normalize_pulse(SampledSignal(np.zeros(4), 100.0))


@settings(max_examples=50, deadline=None)
@given(
    st.lists(
        st.floats(min_value=-1e6, max_value=1e6, allow_nan=False),
        min_size=2,
        max_size=40,
    ).filter(lambda v: any(x != 0.0 for x in v))
)
def test_normalize_pulse_idempotent(values):
    once = normalize_pulse(SampledSignal(values, 100.0))
    twice = normalize_pulse(once)
    np.testing.assert_array_equal(once.samples, twice.samples)
    assert once.samples.min() == pytest.approx(-1.0, abs=1e-12)
