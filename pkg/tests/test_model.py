import json

import numpy as np
import pytest

from levikernel.model import (ConfigError, FreezeKernel, KappaSpec, ModelSpec,
                              load_model, model_from_dict, psi_quad)

MODEL = ModelSpec()


def test_jump_kernel_values():
    assert MODEL.J(1.0) == pytest.approx(np.exp(-1.0), rel=1e-14)
    r = np.exp(np.linspace(np.log(1e-5), 0.0, 500))
    prod = MODEL.J(r) * r * MODEL.phi(r)
    assert prod.max() <= 1.0 + 1e-12
    assert prod.min() >= np.exp(-1.0) - 1e-12
    rr = np.exp(np.linspace(np.log(1e-4), np.log(50.0), 800))
    assert np.all(np.diff(MODEL.J(rr)) < 0)


def test_monotone_difference_condition():
    assert MODEL.j2_check()["passed"]
    for alpha, b, beta in ((0.4, 0.5, 0.3), (1.8, 2.0, 1.0), (1.0, 1.0, 0.9)):
        mdl = ModelSpec(alpha=alpha, b=b, beta=beta)
        assert mdl.j2_check()["passed"], (alpha, b, beta)


def test_monotone_difference_negative_case():
    # -J'(r)/r = 2 r^2 exp(-r^2) increases on (0, 1): outside the class
    r = np.exp(np.linspace(np.log(1e-3), np.log(5.0), 300))
    bad = ModelSpec(jump_family="table",
                    jump_table=(r, (1.0 + r**2) * np.exp(-r**2)))
    rep = bad.j2_check(grid=np.linspace(0.05, 3.0, 500))
    assert not rep["passed"]
    assert rep["max_relative_increase"] > 1e-3


def test_scaled_kernel_passes_iff():
    # constant multiples preserve the sign structure of -J'(r)/r differences
    r = np.exp(np.linspace(np.log(1e-3), np.log(40.0), 400))
    scaled = ModelSpec(jump_family="table", jump_table=(r, 3.0 * MODEL.J(r)))
    assert scaled.j2_check()["passed"] == MODEL.j2_check()["passed"]


def test_nu1():
    # closed form for the tempered family
    r = 0.7
    expect = r ** (-1 - 1.2 - 2) * np.exp(-np.sqrt(r)) * \
        (2.2 + 0.5 * np.sqrt(r)) / (2 * np.pi)
    assert MODEL.nu1(r) == pytest.approx(expect, rel=1e-12)
    rr = np.exp(np.linspace(np.log(1e-4), np.log(30.0), 500))
    assert np.all(MODEL.nu1(rr) >= 0)


def test_nu1_sandwich():
    for s, r in ((0.05, 0.2), (0.3, 1.0), (1.5, 4.0)):
        assert (r - s) * MODEL.nu1(r) <= MODEL.J(s) / (2 * np.pi * s) * (1 + 1e-12)
        assert (r - s) * MODEL.nu1(s) >= \
            (MODEL.J(s) - MODEL.J(r)) / (2 * np.pi * r) * (1 - 1e-12)


def test_pruitt_and_moment():
    rs = np.array([0.01, 0.1, 1.0, 5.0, 40.0])
    P = np.array([MODEL.pruitt(r) for r in rs])
    assert np.all(np.diff(P) < 0)
    m2 = MODEL.second_moment()
    assert 40.0**2 * P[-1] == pytest.approx(m2, rel=0.02)


def test_varphi():
    # ratio to the integrated scale lies in [2, 2 e^b] on (0, 1]
    bf = MODEL.bounds()
    r = np.exp(np.linspace(np.log(1e-3), 0.0, 40))
    band = MODEL.varphi(r) / bf.Phi(r)
    assert band.min() >= 2.0 - 1e-9
    assert band.max() <= 2.0 * np.e + 1e-9
    # quadratic upper scaling
    assert MODEL.varphi(2.0) / MODEL.varphi(0.5) <= 16.0 + 1e-9


def test_psi_basics():
    assert psi_quad(MODEL, None, 0.0) == 0.0
    xis = np.array([0.3, 1.0, 7.0, 80.0])
    vals = psi_quad(MODEL, None, xis)
    assert np.all(vals > 0)
    assert np.all(np.diff(vals) > 0)
    P = np.array([MODEL.pruitt(1.0 / x) for x in xis])
    assert np.all(vals >= 2.0 / np.pi**2 * P)
    assert np.all(vals <= 2.0 * np.pi**2 * P)


def test_psi_linearity():
    xis = np.array([0.5, 4.0])
    base = psi_quad(MODEL, None, xis)
    half = psi_quad(MODEL, FreezeKernel.constant(0.5), xis)
    assert np.allclose(half, 0.5 * base, rtol=1e-13)


def test_kappa_families():
    kap = KappaSpec.cosine()
    assert kap.kappa0 == pytest.approx(0.7)
    assert kap.kappa1 == pytest.approx(1.3)
    assert kap.kappa2 == pytest.approx(0.3)
    assert kap(0.0, 5.0) == pytest.approx(1.3)
    assert kap(np.pi, 5.0) == pytest.approx(0.7)
    fz = kap.freeze(0.3)
    assert fz.is_constant
    assert fz(2.0) == pytest.approx(1.0 + 0.3 * np.cos(0.3))

    kz = KappaSpec.cosine_z()
    assert kz.z_dependent
    assert kz(0.0, 1.0) == pytest.approx(1.0 + 0.2 / 2.0)
    assert kz(0.0, -1.0) == kz(0.0, 1.0)
    with pytest.raises(ValueError):
        kz.x_part(0.0)


def test_kappa_holder():
    kap = KappaSpec.cosine()
    rng = np.random.default_rng(0)
    x, y, z = rng.uniform(-20, 20, (3, 10_000))
    lhs = np.abs(kap(x, z) - kap(y, z))
    assert np.all(lhs <= kap.kappa2 * np.abs(x - y) + 1e-12)


def test_config_loading(tmp_path):
    doc = {"d": 1, "alpha": 1.2, "b": 1.0, "beta": 0.5, "T": 1.0,
           "kappa": {"family": "cosine", "base": 1.0, "amplitude": 0.3}}
    path = tmp_path / "model.json"
    path.write_text(json.dumps(doc))
    models = load_model(path)
    assert len(models) == 1
    assert models[0].alpha == 1.2
    assert models[0].kappa.family == "cosine"

    multi = {"profiles": [doc, {**doc, "beta": 1.0}]}
    path.write_text(json.dumps(multi))
    models = load_model(path)
    assert len(models) == 2
    assert models[1].beta == 1.0


@pytest.mark.parametrize("patch,fld", [
    ({"alpha": 2.5}, "alpha"),
    ({"alpha": "x"}, "alpha"),
    ({"d": 0}, "d"),
    ({"beta": 1.5}, "beta"),
    ({"T": 0.5}, "T"),
    ({"a": 0.5}, "a"),
    ({"kappa": {"family": "bogus"}}, "kappa.family"),
    ({"extra_field": 1}, "extra_field"),
])
def test_config_validation_names_field(patch, fld):
    doc = {"d": 1, "alpha": 1.2, "b": 1.0, "beta": 0.5, "T": 1.0}
    doc.update(patch)
    with pytest.raises(ConfigError) as err:
        model_from_dict(doc)
    assert fld in str(err.value)


def test_small_jump_moments():
    eps = 0.01
    s2 = MODEL.small_jump_variance(eps)
    # closed-ish form: 2 int_0^eps z^(1-1.2) e^(-sqrt z) dz ~ 2 eps^0.8/0.8
    # (the tempering factor averages ~0.94 on (0, 0.01))
    approx = 2.0 * eps**0.8 / 0.8
    assert s2 == pytest.approx(approx, rel=0.08)
    lam = MODEL.levy_mass_above(eps)
    # independent reference: fine log-grid trapezoid of the tail mass
    zg = np.exp(np.linspace(np.log(eps), np.log(6400.0), 40000))
    ref = 2.0 * np.trapezoid(MODEL.J(zg), zg)
    assert lam == pytest.approx(ref, rel=1e-4)
