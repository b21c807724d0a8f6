import numpy as np
import pytest

from levikernel.fields import KernelField
from levikernel.fourier import (KernelTables, PsiTable, SymmetricKernel,
                                generator_apply_callable)
from levikernel.model import FreezeKernel, ModelSpec, psi_quad

MODEL = ModelSpec()


@pytest.fixture(scope="module")
def kernel():
    return SymmetricKernel(MODEL)


@pytest.fixture(scope="module")
def kernel_beta1():
    return SymmetricKernel(ModelSpec(beta=1.0))


def test_psi_table_accuracy(kernel):
    xis = np.array([3e-4, 0.02, 1.0, 50.0, 5e4])
    direct = psi_quad(MODEL, None, xis)
    assert np.abs(kernel.psi(xis) / direct - 1.0).max() < 1e-5


def test_mass_and_shape(kernel):
    for t in (1e-3, 0.05, 0.5):
        out = kernel.mass(t)
        assert abs(out["mass"] - 1.0) < 1e-6, (t, out)
    xs = np.linspace(-4.0, 4.0, 401)
    p = kernel.p(0.1, xs)
    assert p.min() > 0
    assert np.abs(p - p[::-1]).max() < 1e-12          # even in x
    half = p[xs >= 0]
    assert np.diff(half).max() <= 1e-10               # radially non-increasing


def test_mass_beta1(kernel_beta1):
    for t in (1e-3, 0.25):
        assert abs(kernel_beta1.mass(t)["mass"] - 1.0) < 1e-6


def test_chapman_kolmogorov(kernel):
    for t, s in ((0.1, 0.1), (0.1, 0.4), (0.25, 0.25)):
        assert kernel.chapman_kolmogorov(t, s)["sup_error"] < 1e-4


def test_derivatives_vs_fd(kernel):
    pts = np.array([0.05, 0.4, 1.3])
    assert kernel.derivative_vs_fd(0.1, pts, k=1) < 1e-4
    assert kernel.derivative_vs_fd(0.1, pts, k=2, fd_h=3e-4) < 1e-4
    assert abs(kernel.p(0.2, 0.0, k=1)) < 1e-13


def test_delta_p(kernel):
    t = 0.1
    assert kernel.delta_p(t, 0.7, 0.0) == pytest.approx(0.0, abs=1e-14)
    # at the origin the second difference is nonpositive for unimodal kernels
    assert kernel.delta_p(t, 0.0, 0.5) <= 0
    assert kernel.delta_p(t, 0.0, 0.5) == pytest.approx(
        2.0 * (kernel.p(t, 0.5) - kernel.p(t, 0.0)), rel=1e-10)


def test_generator_cosine_eigenfunction():
    psi1 = psi_quad(MODEL, None, 1.0)
    for x in (0.0, 0.9):
        val = generator_apply_callable(MODEL, None, np.cos, x,
                                       fpp=lambda u: -np.cos(u))
        assert val == pytest.approx(-np.cos(x) * psi1, rel=1e-7, abs=1e-9)
    cval = generator_apply_callable(MODEL, None, lambda u: np.ones_like(u) if
                                    np.ndim(u) else 1.0, 0.3,
                                    fpp=lambda u: 0.0)
    assert cval == pytest.approx(0.0, abs=1e-10)


def test_generator_vs_time_derivative(kernel):
    t, x = 0.2, 0.8
    fd = (kernel.p(1.01 * t, x) - kernel.p(0.99 * t, x)) / (0.02 * t)
    gen = generator_apply_callable(MODEL, None, lambda u: kernel.p(t, u), x,
                                   fpp=lambda u: kernel.p(t, u, k=2))
    assert fd == pytest.approx(gen, rel=1e-3)
    # multiplier route gives the same number much faster
    assert kernel.p(t, x, k=-1) == pytest.approx(gen, rel=1e-6)


def test_convolution_identity(kernel):
    k0 = 0.7
    k_small = SymmetricKernel(MODEL, psi=kernel.psi.scaled(0.5 * k0))
    k_hat = SymmetricKernel(MODEL, psi=kernel.psi.scaled(1.0 - 0.5 * k0))
    for t in (0.1, 0.5):
        assert kernel.convolution_identity(k_small, k_hat, t)["sup_error"] < 1e-4
    # degenerate split of a constant coefficient: exact semigroup property
    base = SymmetricKernel(MODEL, psi=kernel.psi.scaled(0.5))
    out = kernel.convolution_identity(base, base, 0.3)
    assert out["sup_error"] < 1e-6


def test_dimension_shift_identity(kernel):
    out = kernel.dplus2_identity(0.2)
    assert out["min_q"] >= -1e-10
    assert out["mass_error"] < 1e-3


def test_kernel_tables_interp(kernel):
    kt = KernelTables(kernel, h=0.1, L=6.0, eta_min=1e-4, eta_max=0.6,
                      per_octave=16)
    for eta in (3.3e-4, 0.041, 0.37):
        direct = kernel._transform(eta, kt.us, k=0)
        rows = kt.rows(eta, "p")[0]
        scale = np.abs(direct).max()
        assert np.abs(rows - direct).max() / scale < 2e-4
    # pdot rows match finite differences of p rows
    eta = 0.09
    fd = (kernel._transform(1.002 * eta, kt.us) -
          kernel._transform(0.998 * eta, kt.us)) / (0.004 * eta)
    pd = kt.rows(eta, "pdot")[0]
    assert np.abs(pd - fd).max() < 1e-3 * np.abs(fd).max() + 1e-8


def test_field_serialization(tmp_path, kernel):
    fld = kernel.field(np.array([0.05, 0.2]), xs=np.linspace(-5, 5, 101))
    assert fld.check_nonnegative() >= -1e-10
    assert fld.symmetry_defect() < 1e-10
    base = str(tmp_path / "field")
    fld.save(base)
    back = KernelField.load(base)
    assert np.allclose(back.values, fld.values, rtol=1e-15)
    assert np.array_equal(back.ts, fld.ts)


def test_continuity_in_coefficient():
    K1 = FreezeKernel(fn=lambda z: 1.0 + 0.2 * z * z / (1.0 + z * z),
                      kappa0=1.0, kappa1=1.2)
    K2 = FreezeKernel(fn=lambda z: K1(z) + 0.1, kappa0=1.1, kappa1=1.3)
    k1 = SymmetricKernel(MODEL, K1)
    k2 = SymmetricKernel(MODEL, K2)
    bounds = MODEL.bounds()
    xs = np.linspace(0.0, 5.0, 60)
    t = 0.1
    diff = np.abs(k1.p(t, xs) - k2.p(t, xs))
    ratio = diff / (0.1 * t * bounds.G(t, xs))
    assert np.isfinite(ratio).all()
    assert ratio.max() > 0
