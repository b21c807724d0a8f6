"""Acceptance gate: one test per criterion, each asserting its stated
tolerance and printing a PASS/FAIL line with the measured runtime.

Criteria are verified on the shipped default configuration (d = 1,
alpha = 1.2, b = 1, beta in {0.5, 1}, cosine coefficient, T = 1).  Heavy
objects (characteristic-exponent tables, kernel tables, the solved Levi
construction) are shared across criteria through a session context.
"""

import os
import time

import numpy as np
import pytest

from levikernel.model import load_model
from levikernel.verify import suites
from levikernel.verify.report import Report

CONFIG = os.path.join(os.path.dirname(__file__), "..", "configs",
                      "default.json")
OUT = os.environ.get("LEVIKERNEL_ACCEPT_OUT", "/tmp/levikernel-acceptance")


class _Session:
    def __init__(self):
        self.ctx = suites.Context(models=load_model(CONFIG), out_dir=OUT,
                                  seed=0, refine=0)
        self.reports = {}
        self.timings = {}

    def suite(self, name):
        if name not in self.reports:
            rep = Report(name, {}, seed=0)
            t0 = time.time()
            getattr(suites, f"run_{name}")(self.ctx, rep)
            self.timings[name] = time.time() - t0
            self.reports[name] = {r.check_id: r for r in rep.results}
        return self.reports[name]


@pytest.fixture(scope="session")
def session():
    os.makedirs(OUT, exist_ok=True)
    return _Session()


def _verdict(n, label, results, budget_s):
    elapsed = sum(r.wall_time for r in results)
    ok = all(r.passed for r in results)
    status = "PASS" if ok and elapsed < budget_s else "FAIL"
    print(f"\nACCEPTANCE {n} [{status}] {label} "
          f"({elapsed:.1f}s < {budget_s:.0f}s budget)")
    for r in results:
        if not r.passed:
            print(f"    failed: {r.check_id}: {r.detail or r.observed}")
    assert ok, [r.check_id for r in results if not r.passed]
    assert elapsed < budget_s, f"runtime {elapsed:.1f}s over {budget_s}s"


def test_criterion_1_exact_scaling_inequalities(session):
    checks = session.suite("scale")
    ids = ["scale.two_sided_scaling_Phi", "scale.Phi_below_phi",
           "scale.inverse_scaling", "scale.subexponent_split",
           "scale.weighted_envelope_orderings"]
    results = [checks[i] for i in ids]
    for r in results:
        assert r.tolerance == 1e-10
        assert r.grid.get("samples", 0) >= 10_000
    _verdict(1, "exact scaling inequalities (>=1e4 samples, 1e-10 rel)",
             results, 30.0)


def test_criterion_2_explicit_constant_convolutions(session):
    checks = session.suite("scale")
    ids = ["scale.time_convolution_beta_bound",
           "scale.exp_convolution_constant",
           "scale.power_tail_convolution"]
    results = [checks[i] for i in ids]
    for r in results[:2]:
        assert r.tolerance == 1e-6
    _verdict(2, "explicit-constant convolution bounds (1e-6 budget)",
             results, 120.0)


def test_criterion_3_symmetric_kernel_correctness(session):
    checks = session.suite("symkernel")
    ids = ["symkernel.density_basic.beta0.5",
           "symkernel.density_basic.beta1",
           "symkernel.chapman_kolmogorov.beta0.5",
           "symkernel.chapman_kolmogorov.beta1",
           "symkernel.derivative_multipliers.beta0.5",
           "symkernel.derivative_multipliers.beta1",
           "symkernel.generator_consistency.beta0.5",
           "symkernel.generator_consistency.beta1",
           "symkernel.monte_carlo_agreement"]
    results = [checks[i] for i in ids]
    _verdict(3, "symmetric kernel: mass/shape/semigroup/derivatives/MC",
             results, 600.0)


def test_criterion_4_envelope_fits(session):
    checks = session.suite("symkernel")
    ids = ["symkernel.envelope_fits.beta0.5", "symkernel.envelope_fits.beta1",
           "symkernel.absolute_difference_integral.beta0.5",
           "symkernel.absolute_difference_integral.beta1"]
    results = [checks[i] for i in ids]
    for r in results:
        assert r.stability_delta is not None and r.stability_delta < 0.1
    _verdict(4, "envelope ratio fits finite and refinement-stable (<10%)",
             results, 900.0)


def test_criterion_5_reduction_and_series(session):
    checks = session.suite("parametrix")
    ids = ["parametrix.constant_coefficient_reduction",
           "parametrix.series_trace", "parametrix.first_term_linearity"]
    results = [checks[i] for i in ids]
    assert checks["parametrix.constant_coefficient_reduction"].tolerance == 1e-6
    _verdict(5, "constant-coefficient reduction (1e-6) and series decay",
             results, 300.0)


def test_criterion_6_nonsymmetric_kernel(session):
    checks = session.suite("parametrix")
    ids = ["parametrix.conservativeness", "parametrix.chapman_kolmogorov",
           "parametrix.nonnegativity", "parametrix.two_sided_bounds",
           "parametrix.pde_residual", "parametrix.generator_envelope",
           "parametrix.holder_in_x", "parametrix.identity_limit",
           "parametrix.generator_limit"]
    results = [checks[i] for i in ids]
    assert checks["parametrix.conservativeness"].tolerance == 1e-3
    assert checks["parametrix.chapman_kolmogorov"].tolerance == 1e-3
    assert checks["parametrix.pde_residual"].tolerance == 5e-3
    total = sum(r.wall_time for r in session.reports["parametrix"].values())
    print(f"\n    parametrix suite total (incl. criteria 5/7): {total:.0f}s")
    _verdict(6, "non-symmetric kernel: conservation/semigroup/bounds/PDE",
             results, 3600.0)
    assert total < 3600.0


def test_criterion_7_sharp_two_sided(session):
    checks = session.suite("parametrix")
    results = [checks["parametrix.sharp_two_sided_smalljump"]]
    _verdict(7, "sharp two-sided comparability and tempered lower tail",
             results, 300.0)


def test_criterion_8_continuity_in_coefficient(session):
    checks = session.suite("symkernel")
    results = [checks["symkernel.continuity_in_coefficient"]]
    r = results[0]
    slopes = r.fitted.get("slope_ratios", [])
    assert all(abs(s - 1.0) <= 0.3 for s in slopes)
    _verdict(8, "coefficient continuity: linear difference ratios (1 +- 0.3)",
             results, 300.0)


def test_criterion_9_exit_time(session):
    checks = session.suite("simulate")
    results = [checks["simulate.exit_time_bound"]]
    _verdict(9, "exit-time bound: common lambda with P <= 1/2 (Wilson 95%)",
             results, 600.0)
