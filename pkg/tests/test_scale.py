import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from levikernel.scale import (BoundFunctions, ScaleFunction, beta_fn,
                              exp2_gap, surface_area)

POWER = ScaleFunction.power(1.2)
UNIT = ScaleFunction.power(1.0)
BF = BoundFunctions(POWER, d=1, b=1.0, beta=0.5, T=1.0)
BF_UNIT = BoundFunctions(UNIT, d=1, b=1.0, beta=0.5, T=1.0)
BF_BETA1 = BoundFunctions(UNIT, d=1, b=1.0, beta=1.0, T=1.0)


def test_phi_power_values():
    assert POWER(0.5) == pytest.approx(0.435275281648, abs=1e-12)
    assert POWER(1.0) == 1.0


@given(st.floats(1e-6, 1.0), st.floats(1e-6, 1.0))
def test_phi_monotone(r1, r2):
    lo, hi = min(r1, r2), max(r1, r2)
    if lo < hi:
        assert POWER(lo) < POWER(hi)


def test_phi_domain_rejected():
    with pytest.raises(ValueError):
        POWER(0.0)
    with pytest.raises(ValueError):
        POWER(1.5)


def test_big_phi_closed_form():
    # alpha = 1: antiderivative of s/phi(s) = s gives Phi(r) = r/2 on (0,1]
    assert BF_UNIT.Phi(0.5) == pytest.approx(0.25, abs=1e-14)
    assert BF_UNIT.Phi(2.0) == pytest.approx(2.0, abs=1e-14)
    assert BF_UNIT.Phi1 == pytest.approx(0.5, abs=1e-14)
    # C0 for the power family
    assert BF.C0 == pytest.approx(1.0 / 0.8, rel=1e-12)


def test_big_phi_tabulated_matches_power():
    rs = np.exp(np.linspace(np.log(1e-4), 0.0, 60))
    tab = ScaleFunction.from_table(rs, rs**1.2)
    bft = BoundFunctions(tab, d=1, b=1.0, beta=0.5, T=1.0)
    r = np.array([0.03, 0.2, 0.9])
    assert np.allclose(bft.Phi(r), BF.Phi(r), rtol=1e-6)
    t = np.array([0.01, 0.2])
    assert np.allclose(bft.Phi_inv(t), BF.Phi_inv(t), rtol=1e-5)


def test_phi_inverse_roundtrip():
    rng = np.random.default_rng(0)
    r = np.exp(rng.uniform(np.log(1e-6), np.log(30.0), 200))
    back = BF.Phi_inv(BF.Phi(r))
    assert np.max(np.abs(back / r - 1.0)) < 1e-10
    assert BF_UNIT.Phi_inv(0.25) == pytest.approx(0.5, abs=1e-12)


@given(st.floats(1e-6, 40.0), st.floats(1e-6, 40.0))
@settings(max_examples=200)
def test_two_sided_scaling(r1, r2):
    r, R = min(r1, r2), max(r1, r2)
    ratio = BF.Phi(R) / BF.Phi(r)
    assert ratio >= (R / r) ** 1.2 * (1 - 1e-10)
    assert ratio <= (R / r) ** 2 * (1 + 1e-10)


@given(st.floats(1e-8, 30.0), st.floats(1e-8, 30.0))
@settings(max_examples=200)
def test_inverse_scaling(t1, t2):
    r, R = min(t1, t2), max(t1, t2)
    ratio = BF.Phi_inv(R) / BF.Phi_inv(r)
    assert ratio >= (R / r) ** 0.5 * (1 - 1e-10)
    assert ratio <= (R / r) ** (1 / 1.2) * (1 + 1e-10)


def test_theta_values():
    assert BF_UNIT.theta(0.5) == pytest.approx(8.0, abs=1e-12)
    assert BF.theta(4.0) == pytest.approx(np.exp(-2.0), rel=1e-12)
    assert BF_BETA1.theta(2.0) == pytest.approx(0.25 * np.exp(-0.4), rel=1e-12)


def test_envelope_values():
    assert BF_UNIT.G(0.25, 0.0) == pytest.approx(8.0, abs=1e-12)
    # gamma = delta = 0 weight is the identity
    rng = np.random.default_rng(1)
    t = rng.uniform(0.01, 1.0, 50)
    r = rng.uniform(0.0, 10.0, 50)
    assert np.allclose(BF.G_gd(0.0, 0.0, t, r), BF.G(t, r), rtol=1e-14)
    # tilde and plain envelopes agree below radius one
    rr = np.linspace(1e-3, 1.0, 50)
    assert np.allclose(BF.G(0.3, rr), BF.G_tilde(0.3, rr), rtol=1e-14)


def test_envelope_domain():
    with pytest.raises(ValueError):
        BF.G_T(1.5, 1.0)  # beyond horizon
    BF.G(1.5, 1.0)  # plain envelope has no horizon


@pytest.mark.parametrize("bf", [BF, BF_BETA1])
def test_gt_continuous_nonincreasing(bf):
    r = np.linspace(1e-3, 3 * bf.RT + 4, 40000)
    for t in (1e-3, 0.1, 1.0):
        v = bf.G_T(t, r)
        assert np.all(np.diff(v) <= 1e-12 * v[:-1])
        # continuity across both branch radii
        for rb in (bf.Phi_inv(t), bf.RT):
            lo = bf.G_T(t, rb * (1 - 1e-9))
            hi = bf.G_T(t, rb * (1 + 1e-9))
            assert abs(hi - lo) <= 1e-6 * lo


@given(st.floats(1e-3, 30.0), st.floats(1e-3, 30.0),
       st.floats(0.02, 0.98))
@settings(max_examples=300)
def test_exp2_inequality(t, s, beta):
    assert exp2_gap(t, s, beta) >= -1e-12 * max(t, s) ** beta


def test_beta_fn():
    assert beta_fn(1.0, 1.0) == pytest.approx(1.0, rel=1e-14)
    assert beta_fn(2.0, 3.0) == pytest.approx(1.0 / 12.0, rel=1e-13)
    rng = np.random.default_rng(2)
    a = rng.uniform(0.1, 8.0, 50)
    b = rng.uniform(0.1, 8.0, 50)
    assert np.allclose(beta_fn(a, b), beta_fn(b, a), rtol=1e-13)
    with pytest.raises(ValueError):
        beta_fn(0.0, 1.0)


def test_time_convolution_closed_form():
    # power family, t below Phi(1): both sides have closed forms
    gamma, delta, eta, theta = 1.1, 0.4, 0.6, 0.3
    t = 0.2
    a = 1.2
    lhs = BF.time_convolution_lhs(gamma, delta, eta, theta, t)
    pref = (t / BF.Phi1) ** ((gamma + delta) / a)
    closed = pref * t ** (1 - eta - theta + 0.0) * \
        beta_fn(1 + gamma / a - eta, 1 + delta / a - theta) * \
        t ** (gamma / a + delta / a) / t ** ((gamma + delta) / a)
    assert lhs == pytest.approx(closed, rel=1e-9)
    rhs = BF.time_convolution_rhs(gamma, delta, eta, theta, t)
    assert lhs <= rhs * (1 + 1e-9)


def test_exp_convolution_constant_closed_form():
    # d = 1, beta = 1/2: 2 * int exp(-c sqrt|z|) dz = 8 / c^2
    bf = BoundFunctions(POWER, d=1, b=1.0, beta=0.5, T=1.0)
    c = 1.0 * (2.0 - np.sqrt(2.0))
    assert bf.exp_convolution_constant() == pytest.approx(8.0 / c**2, rel=1e-12)
    with pytest.raises(ValueError):
        BF_BETA1.exp_convolution_constant()


def test_surface_area():
    assert surface_area(1) == pytest.approx(2.0)
    assert surface_area(2) == pytest.approx(2 * np.pi)
    assert surface_area(3) == pytest.approx(4 * np.pi)


def test_weighted_envelope_orderings():
    rng = np.random.default_rng(3)
    t = rng.uniform(1e-3, 1.0, 300)
    r = rng.uniform(0.0, 15.0, 300)
    # raising the time weight is controlled by the horizon factor
    lhs = BF.G_gd(1.4, 0.3, t, r)
    rhs = BF.Phi_inv(1.0) ** (1.4 - 0.2) * BF.G_gd(0.2, 0.3, t, r)
    assert np.all(lhs <= rhs * (1 + 1e-12))
    # larger spatial weight shrinks the envelope
    assert np.all(BF.G_gd(0.5, 1.0, t, r) <= BF.G_gd(0.5, 0.2, t, r) * (1 + 1e-12))
    # combined bound
    for dl in (0.3, 1.0):
        lhs = BF.G_gd(0.0, dl, t, r) + BF.G_gd(dl, 0.0, t, r)
        assert np.all(lhs <= 2 * BF.Phi_inv(1.0) ** dl * BF.G(t, r) * (1 + 1e-12))
