import numpy as np
import pytest

from levikernel.model import ModelSpec
from levikernel.simulate import (LevySampler, SamplerConfig, kde_density,
                                 wilson_interval)

MODEL = ModelSpec()


@pytest.fixture(scope="module")
def sampler():
    cfg = SamplerConfig.for_model(MODEL, eps_jump=0.01, n_paths=20_000, seed=7)
    return LevySampler(MODEL, cfg)


def test_config_moments():
    cfg = SamplerConfig.for_model(MODEL, eps_jump=0.01)
    assert cfg.sigma2 > 0
    assert np.isfinite(cfg.rate) and cfg.rate > 0
    # the two pieces recover the full second moment up to the cutoff split
    cut = (80.0 / MODEL.b) ** (1.0 / MODEL.beta)
    total = cfg.sigma2 + 2 * MODEL._radial_moment(0.01, cut, 2)
    assert total == pytest.approx(MODEL.second_moment(), rel=1e-6)


def test_determinism(sampler):
    a = sampler.sample_increment(0.1, n=2000)
    b = LevySampler(MODEL, sampler.config).sample_increment(0.1, n=2000)
    assert np.array_equal(a, b)
    c = sampler.sample_increment(0.1, n=2000, stream=1)
    assert not np.array_equal(a, c)


def test_increment_statistics(sampler):
    t = 0.05
    x = sampler.sample_increment(t, n=120_000)
    se_mean = x.std(ddof=1) / np.sqrt(x.size)
    assert abs(x.mean()) < 4 * se_mean
    v = x * x
    m2 = MODEL.second_moment()
    se_var = v.std(ddof=1) / np.sqrt(v.size)
    assert abs(v.mean() - t * m2) < 4 * se_var


def test_variance_halves(sampler):
    x1 = sampler.sample_increment(0.08, n=120_000, stream=2)
    x2 = sampler.sample_increment(0.04, n=120_000, stream=3)
    v1, v2 = (x1**2).mean(), (x2**2).mean()
    se = np.sqrt((x1**2).var() / x1.size + 4 * (x2**2).var() / x2.size)
    assert abs(v1 - 2 * v2) < 4 * se


def test_jump_sizes_respect_cutoff(sampler):
    rng = np.random.default_rng(0)
    sizes = sampler.sample_jump_sizes(50_000, rng)
    assert np.abs(sizes).min() >= sampler.config.eps_jump * (1 - 1e-9)
    # symmetric signs
    frac = (sizes > 0).mean()
    assert abs(frac - 0.5) < 0.01
    # tail frequency matches the rate profile: P(|size| > 1) = tail(1)/rate
    expect = np.interp(1.0, sampler._jump_rs,
                       sampler._jump_tail) / sampler._one_sided_rate
    assert (np.abs(sizes) > 1.0).mean() == pytest.approx(expect, abs=0.01)


def test_empirical_cf(sampler):
    t = 0.1
    from levikernel.model import psi_quad

    target = np.exp(-t * psi_quad(MODEL, None, 1.0))
    cf, se = sampler.empirical_cf(t, 1.0, n=150_000)
    assert abs(cf - target) < 4 * se


def test_kde_mass_and_symmetry(sampler):
    x = sampler.sample_increment(0.25, n=80_000, stream=4)
    grid = np.linspace(-8.0, 8.0, 161)
    out = kde_density(x, grid)
    mass = np.trapezoid(out["density"], grid)
    assert abs(mass - 1.0) < 2e-3
    assert out["bandwidth"] > 0
    assert out["se"].shape == grid.shape


def test_exit_time_monotone(sampler):
    r = 0.3
    phi_r = MODEL.bounds().Phi(r)
    data = sampler.exit_times(r, horizon=phi_r, n_steps=400, n_paths=8000)
    probs = [sampler.exit_probability(r, lam, phi_r, exit_data=data)
             ["probability"] for lam in (0.1, 0.3, 0.6, 0.95)]
    assert all(p2 >= p1 for p1, p2 in zip(probs, probs[1:]))
    assert data["times"].min() > 0


def test_wilson_interval():
    lo, hi = wilson_interval(50, 100)
    assert lo < 0.5 < hi
    lo0, hi0 = wilson_interval(0, 100)
    assert lo0 == pytest.approx(0.0, abs=1e-12) and hi0 < 0.06
