import numpy as np
import pytest

from glotkit.errors import OpenQuotientError
from glotkit.lf import LFParams, lf_fit, lf_residuals, lf_synthesize, open_quotient
from glotkit.signals import normalize_pulse


def random_params(rng):
    """A valid LF parameter set drawn inside the model's constraint polytope."""
    T0 = rng.uniform(1.0 / 350.0, 1.0 / 70.0)
    oq = rng.uniform(0.35, 0.85)
    t_o = rng.uniform(0.02, 0.95 - oq) * T0
    t_e = t_o + oq * T0
    # keep the closing branch comfortably shorter than the opening branch
    t_p = t_o + rng.uniform(0.62, 0.82) * (t_e - t_o)
    t_a = rng.uniform(0.002, min(0.05, 0.8 * (T0 - t_e) / T0)) * T0
    return LFParams(t_o=t_o, t_p=t_p, t_e=t_e, t_a=t_a, T0=T0, E_e=rng.uniform(0.5, 2.0))


def test_params_validation():
    good = dict(t_o=0.001, t_p=0.004, t_e=0.005, t_a=0.0003, T0=0.01, E_e=1.0)
    LFParams(**good)
    for key, bad in [
        ("t_o", 0.004),          # violates t_o < t_p
        ("t_a", 0.0),            # must be positive
        ("t_a", 0.006),          # t_e + t_a >= T0
        ("E_e", -1.0),
        ("t_e", 0.0095),         # closing branch longer than opening
    ]:
        with pytest.raises(ValueError):
            LFParams(**{**good, key: bad})


def test_synthesized_pulse_shape():
    p = LFParams(t_o=0.0015, t_p=0.0055, t_e=0.0065, t_a=0.0002, T0=0.01, E_e=1.0)
    sig = lf_synthesize(p, 16000.0)
    x = sig.samples
    assert len(sig) == 160
    rate = 16000.0
    # closed before onset, minimum of -E_e at t_e
    assert np.all(x[: int(p.t_o * rate)] == 0.0)
    i_min = int(np.argmin(x))
    assert i_min == pytest.approx(p.t_e * rate, abs=1.0)
    assert x.min() == pytest.approx(-1.0, rel=5e-3)
    # derivative crosses zero near t_p
    sign_change = np.flatnonzero((x[:-1] > 0) & (x[1:] <= 0))
    assert sign_change.size >= 1
    assert sign_change[-1] == pytest.approx(p.t_p * rate, abs=2.0)


def test_zero_net_flow(rng):
    """The implicit growth constant balances the pulse area to zero."""
    for _ in range(20):
        p = random_params(rng)
        rate = 256.0 / p.T0  # fixed samples per period, rate varies
        x = lf_synthesize(p, rate).samples
        # trapezoid over the sampled grid; tolerance scales with peak * step
        area = np.trapezoid(x, dx=1.0 / rate)
        assert abs(area) < 2e-2 * np.max(np.abs(x)) * p.T0


def test_open_quotient_bounds():
    p = LFParams(t_o=0.001, t_p=0.004, t_e=0.005, t_a=0.0003, T0=0.01, E_e=1.0)
    assert open_quotient(p, 100.0) == pytest.approx(0.4)
    with pytest.raises(OpenQuotientError):
        open_quotient(p, 300.0)  # 0.3 * 4 = 1.2
    with pytest.raises(ValueError):
        open_quotient(p, 0.0)


def test_fit_recovers_clean_pulse(rng):
    for _ in range(10):
        p = random_params(rng)
        rate = max(16000.0, 40.0 / p.T0)
        pulse = lf_synthesize(p, rate)
        fit = lf_fit(pulse, 1.0 / p.T0)
        assert fit.residual_nrmse < 1e-4
        for name in ("t_o", "t_p", "t_e"):
            got, want = getattr(fit.params, name), getattr(p, name)
            assert got == pytest.approx(want, abs=0.01 * p.T0), name


def test_fit_normalized_pulse_preserves_oq(rng):
    p = random_params(rng)
    rate = max(16000.0, 40.0 / p.T0)
    pulse = normalize_pulse(lf_synthesize(p, rate))
    fit = lf_fit(pulse, 1.0 / p.T0)
    want = (p.t_e - p.t_o) / p.T0
    got = (fit.params.t_e - fit.params.t_o) / p.T0
    assert got == pytest.approx(want, abs=5e-3)


def test_fit_rejects_inconsistent_length():
    p = LFParams(t_o=0.001, t_p=0.004, t_e=0.005, t_a=0.0003, T0=0.01, E_e=1.0)
    pulse = lf_synthesize(p, 16000.0)
    with pytest.raises(ValueError, match="inconsistent"):
        lf_fit(pulse, 150.0)  # pulse is 100 Hz long


def test_residual_gradient_matches_finite_differences(rng):
    """Perturbing each parameter changes the residuals as the finite
    difference of the model predicts (smoke version of the full check)."""
    p = random_params(rng)
    rate = 32000.0
    pulse = lf_synthesize(p, rate)
    base = lf_residuals(p, pulse)
    assert np.max(np.abs(base)) < 1e-12  # model vs itself
    h = 1e-7 * p.T0
    for name in ("t_o", "t_p", "t_e", "t_a"):
        bumped = {**p.__dict__, name: getattr(p, name) + h}
        plus = lf_residuals(LFParams(**bumped), pulse)
        bumped[name] = getattr(p, name) - h
        minus = lf_residuals(LFParams(**bumped), pulse)
        grad = (plus - minus) / (2 * h)
        assert np.all(np.isfinite(grad))
        assert np.max(np.abs(grad)) > 0.0  # every timing parameter matters
