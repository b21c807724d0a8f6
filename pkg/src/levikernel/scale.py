"""Scale and bound functions for tempered jump models.

A scale function ``phi`` is strictly increasing on (0, 1] with phi(0+) = 0 and
satisfies a weak lower scaling condition ``a1 * (R/r)**alpha1 <= phi(R)/phi(r)``
together with integrability of ``s/phi(s)`` at zero.  From it we derive

* ``Phi(r) = r**2 / (2 * int_0^r s/phi(s) ds)`` on (0, 1], extended by
  ``Phi(1) * r**2`` beyond 1 (continuous, strictly increasing, invertible),
* the tail profile ``theta`` (power-law body, exponential or subexponential
  tail depending on the tempering exponent ``beta``),
* the space-time envelope ``G(t, r) = min(1/(t * Phi_inv(t)**d), theta(r))``
  and its relatives ``G_T`` (continuous-in-r variant up to a horizon T),
  ``G_tilde`` (pure power-law tail) and the weighted family
  ``G_gd(gamma, delta, t, r) = Phi_inv(t)**gamma * (r**delta ^ 1) * G(t, r)``.

Everything here is exact-formula or cached-quadrature work; no kernel data is
involved.  Instances are immutable after construction and cheap to share.
"""

from dataclasses import dataclass, field
from typing import Optional

import numpy as np
from scipy import integrate
from scipy.interpolate import PchipInterpolator
from scipy.special import gammaln

__all__ = [
    "ScaleFunction",
    "BoundFunctions",
    "beta_fn",
    "exp2_gap",
    "surface_area",
]


def beta_fn(a, b):
    """Euler beta function B(a, b) = int_0^1 s**(a-1) (1-s)**(b-1) ds.

    Evaluated through log-gamma for stability.  Arguments must be positive.
    """
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    if np.any(a <= 0) or np.any(b <= 0):
        raise ValueError("beta_fn requires positive arguments")
    out = np.exp(gammaln(a) + gammaln(b) - gammaln(a + b))
    return float(out) if out.ndim == 0 else out


def exp2_gap(t, s, beta):
    """t**beta + s**beta - (t+s)**beta - (2 - 2**beta) * min(t,s)**beta.

    Nonnegative for every t, s > 0 and beta in (0, 1); used as an exact
    inequality check for the subexponential tail algebra.
    """
    t = np.asarray(t, dtype=float)
    s = np.asarray(s, dtype=float)
    return t**beta + s**beta - (t + s) ** beta - (2.0 - 2.0**beta) * np.minimum(t, s) ** beta


def surface_area(d):
    """Surface measure of the unit sphere in R^d (2 for d=1, 2*pi for d=2...)."""
    return float(2.0 * np.pi ** (d / 2.0) / np.exp(gammaln(d / 2.0)))


@dataclass(frozen=True)
class ScaleFunction:
    """Strictly increasing scale function on (0, 1] with phi(0+) = 0.

    Two families are supported:

    * power law ``phi(r) = r**alpha`` with ``0 < alpha < 2`` (closed forms
      everywhere, lower scaling holds exactly with a1 = 1, alpha1 = alpha);
    * user-tabulated monotone samples, interpolated by a monotone cubic,
      with (a1, alpha1) estimated from log-slopes.
    """

    family: str
    alpha: float = float("nan")
    a1: float = 1.0
    alpha1: float = float("nan")
    _interp: Optional[PchipInterpolator] = field(default=None, repr=False, compare=False)

    @classmethod
    def power(cls, alpha: float) -> "ScaleFunction":
        if not (0.0 < alpha < 2.0):
            raise ValueError(f"power family needs 0 < alpha < 2, got {alpha}")
        return cls(family="power", alpha=float(alpha), a1=1.0, alpha1=float(alpha))

    @classmethod
    def from_table(cls, r, values) -> "ScaleFunction":
        r = np.asarray(r, dtype=float)
        values = np.asarray(values, dtype=float)
        if r.ndim != 1 or r.shape != values.shape or r.size < 4:
            raise ValueError("need matching 1-d arrays with at least 4 samples")
        if r[0] <= 0 or r[-1] < 1.0 or np.any(np.diff(r) <= 0):
            raise ValueError("radii must be increasing, start above 0 and reach 1")
        if np.any(values <= 0) or np.any(np.diff(values) <= 0):
            raise ValueError("tabulated phi must be positive and strictly increasing")
        interp = PchipInterpolator(np.log(r), np.log(values), extrapolate=True)
        # empirical lower-scaling exponent from chordal log-slopes
        slopes = np.diff(np.log(values)) / np.diff(np.log(r))
        alpha1 = float(max(min(slopes.min(), 2.0), 1e-3))
        obj = cls(family="table", alpha=float("nan"), a1=1.0, alpha1=alpha1, _interp=interp)
        return obj

    def __call__(self, r):
        r = np.asarray(r, dtype=float)
        if np.any(r <= 0) or np.any(r > 1.0):
            raise ValueError("phi is defined on (0, 1]")
        if self.family == "power":
            out = r**self.alpha
        else:
            out = np.exp(self._interp(np.log(r)))
        return float(out) if out.ndim == 0 else out

    def c0(self) -> float:
        """int_0^1 s / phi(s) ds, finite by the lower scaling condition."""
        if self.family == "power":
            return 1.0 / (2.0 - self.alpha)
        return self._integral_s_over_phi(1.0)

    def _integral_s_over_phi(self, r: float) -> float:
        # substitution s = r * u**q with q = 2/(2 - alpha1) keeps the
        # integrand bounded even when alpha1 is close to 2
        q = 2.0 / (2.0 - min(self.alpha1, 1.95))

        def integrand(u):
            s = r * u**q
            return q * r * r * u ** (2.0 * q - 1.0) / self(s)

        val, err = integrate.quad(integrand, 0.0, 1.0, limit=200, epsabs=0.0, epsrel=1e-12)
        if not np.isfinite(val) or val <= 0 or err > 1e-6 * abs(val):
            raise ArithmeticError(
                f"quadrature of s/phi(s) failed on (0, {r}] (value={val}, err={err})"
            )
        return val


class BoundFunctions:
    """Evaluators for Phi, Phi_inv, theta, G, G_T, G_tilde and friends.

    Bound to a scale function, a dimension ``d``, tempering parameters
    ``(b, beta)`` and a horizon ``T``.  All evaluators are pure and accept
    scalars or arrays.  Construction precomputes C0, Phi(1), C_T and, for
    tabulated scale functions, a monotone inverse cache for Phi.
    """

    def __init__(self, phi: ScaleFunction, d: int, b: float, beta: float, T: float):
        if d < 1 or int(d) != d:
            raise ValueError("dimension d must be a positive integer")
        if b <= 0:
            raise ValueError("tempering rate b must be positive")
        if not (0.0 < beta <= 1.0):
            raise ValueError("tempering exponent beta must lie in (0, 1]")
        self.phi = phi
        self.d = int(d)
        self.b = float(b)
        self.beta = float(beta)
        self.C0 = phi.c0()
        self.Phi1 = 1.0 / (2.0 * self.C0)
        if T < self.Phi1:
            raise ValueError(f"horizon T={T} must be at least Phi(1)={self.Phi1}")
        self.T = float(T)
        self._phi_inv_cache = None
        if phi.family != "power":
            self._build_inverse_cache()
        RT = self.Phi_inv(self.T)
        self.RT = float(RT)
        if self.beta < 1.0:
            self.C_T = np.exp(self.b * RT**self.beta) / (self.T * RT**self.d)
        else:
            # rate b/5 matches the tail branch of theta, making r -> G_T(t, r)
            # continuous and non-increasing across R_T
            self.C_T = RT * np.exp(self.b * RT / 5.0) / self.T

    # -- Phi and its inverse ------------------------------------------------

    def Phi(self, r):
        r = np.asarray(r, dtype=float)
        if np.any(r <= 0):
            raise ValueError("Phi requires r > 0")
        if self.phi.family == "power":
            a = self.phi.alpha
            body = 0.5 * (2.0 - a) * np.minimum(r, 1.0) ** a
        else:
            body = self._phi_table_eval(np.minimum(r, 1.0))
        out = np.where(r <= 1.0, body, self.Phi1 * r**2)
        return float(out) if out.ndim == 0 else out

    def _build_inverse_cache(self):
        rs = np.exp(np.linspace(np.log(1e-8), 0.0, 600))
        vals = np.array([r * r / (2.0 * self.phi._integral_s_over_phi(r)) for r in rs])
        self._phi_body = PchipInterpolator(np.log(rs), np.log(vals))
        self._phi_inv_cache = PchipInterpolator(np.log(vals), np.log(rs))
        self._phi_cache_lo = vals[0]

    def _phi_table_eval(self, r):
        return np.exp(self._phi_body(np.log(np.maximum(r, 1e-8))))

    def Phi_inv(self, t):
        t = np.asarray(t, dtype=float)
        if np.any(t <= 0):
            raise ValueError("Phi_inv requires t > 0")
        if self.phi.family == "power":
            a = self.phi.alpha
            body = (t / self.Phi1) ** (1.0 / a)
        else:
            body = np.exp(self._phi_inv_cache(np.log(np.maximum(np.minimum(t, self.Phi1), self._phi_cache_lo))))
            small = t < self._phi_cache_lo
            if np.any(small):
                body = np.where(small, self._phi_inv_bisect(t), body)
        out = np.where(t <= self.Phi1, body, np.sqrt(t / self.Phi1))
        return float(out) if out.ndim == 0 else out

    def _phi_inv_bisect(self, t):
        t = np.atleast_1d(np.asarray(t, dtype=float))
        lo = np.full_like(t, 1e-16)
        hi = np.ones_like(t)
        for _ in range(60):
            mid = 0.5 * (lo + hi)
            above = self.Phi(mid) > t
            hi = np.where(above, mid, hi)
            lo = np.where(above, lo, mid)
        return 0.5 * (lo + hi)

    # -- tail profile and envelopes ------------------------------------------

    def theta(self, r):
        """Tail profile: 1/(r^d Phi(r)) for r <= 1, tempered branch beyond."""
        r = np.asarray(r, dtype=float)
        if np.any(r < 0):
            raise ValueError("theta requires r >= 0")
        rr = np.maximum(r, 1e-300)
        with np.errstate(divide="ignore", over="ignore"):
            body = 1.0 / (rr**self.d * self.Phi(np.minimum(rr, 1.0)))
        if self.beta < 1.0:
            tail = np.exp(-self.b * rr**self.beta)
        else:
            tail = rr ** (-self.d - 1.0) * np.exp(-self.b * rr / 5.0)
        out = np.where(rr <= 1.0, body, tail)
        out = np.where(r == 0.0, np.inf, out)
        return float(out) if out.ndim == 0 else out

    def on_diag(self, t):
        """1 / (t * Phi_inv(t)**d), the spatially-constant branch of G."""
        t = np.asarray(t, dtype=float)
        out = 1.0 / (t * self.Phi_inv(t) ** self.d)
        return float(out) if out.ndim == 0 else out

    def G(self, t, r):
        """Envelope G(t, r) = min(on-diagonal rate, theta(r)); finite for r=0 too."""
        t = np.asarray(t, dtype=float)
        r = np.asarray(r, dtype=float)
        if np.any(t <= 0):
            raise ValueError("G requires t > 0")
        out = np.minimum(self.on_diag(t), self.theta(np.abs(r)))
        return float(out) if out.ndim == 0 else out

    def G_T(self, t, r):
        """Continuous-in-r variant of G on (0, T]; rejects t > T."""
        t = np.asarray(t, dtype=float)
        r = np.asarray(r, dtype=float)
        if np.any(t <= 0) or np.any(t > self.T):
            raise ValueError("G_T requires 0 < t <= T")
        r = np.abs(np.asarray(r, dtype=float))
        t, r = np.broadcast_arrays(t, r)
        rin = self.Phi_inv(t)
        rr = np.maximum(r, 1e-300)
        mid = 1.0 / (rr**self.d * self.Phi(rr))
        if self.beta < 1.0:
            far = self.C_T * np.exp(-self.b * rr**self.beta)
        else:
            far = self.C_T * rr ** (-self.d - 1.0) * np.exp(-self.b * rr / 5.0)
        out = np.where(r <= rin, self.on_diag(t), np.where(r <= self.RT, mid, far))
        return float(out) if out.ndim == 0 else out

    def G_tilde(self, t, r):
        """Power-law-tail envelope min(on-diagonal rate, 1/(r^d Phi(r)))."""
        t = np.asarray(t, dtype=float)
        r = np.abs(np.asarray(r, dtype=float))
        if np.any(t <= 0):
            raise ValueError("G_tilde requires t > 0")
        rr = np.maximum(r, 1e-300)
        tail = 1.0 / (rr**self.d * self.Phi(rr))
        out = np.minimum(self.on_diag(t), tail)
        return float(out) if out.ndim == 0 else out

    def G_gd(self, gamma, delta, t, r):
        """Weighted envelope Phi_inv(t)**gamma * (r**delta ^ 1) * G(t, r)."""
        t = np.asarray(t, dtype=float)
        r = np.abs(np.asarray(r, dtype=float))
        w = self.Phi_inv(t) ** gamma
        if delta != 0.0:
            w = w * np.minimum(r**delta, 1.0)
        out = w * self.G(t, r)
        return float(out) if out.ndim == 0 else out

    def G_tilde_gd(self, gamma, delta, t, r):
        t = np.asarray(t, dtype=float)
        r = np.abs(np.asarray(r, dtype=float))
        w = self.Phi_inv(t) ** gamma
        if delta != 0.0:
            w = w * np.minimum(r**delta, 1.0)
        out = w * self.G_tilde(t, r)
        return float(out) if out.ndim == 0 else out

    # -- explicit-constant inequalities ---------------------------------------

    def time_convolution_lhs(self, gamma, delta, eta, theta_, t, epsrel=1e-10):
        """int_0^t s**(-eta) Phi_inv(s)**gamma (t-s)**(-theta) Phi_inv(t-s)**delta ds."""

        def integrand(s):
            return (
                s ** (-eta)
                * self.Phi_inv(s) ** gamma
                * (t - s) ** (-theta_)
                * self.Phi_inv(t - s) ** delta
            )

        # substitution regularizes both algebraic endpoints
        def left(u):
            s = 0.5 * t * u * u
            return integrand(s) * t * u

        def right(u):
            s = t - 0.5 * t * u * u
            return integrand(s) * t * u

        v1, e1 = integrate.quad(left, 0.0, 1.0, limit=200, epsrel=epsrel)
        v2, e2 = integrate.quad(right, 0.0, 1.0, limit=200, epsrel=epsrel)
        return v1 + v2

    def time_convolution_rhs(self, gamma, delta, eta, theta_, t):
        """Beta-function bound for `time_convolution_lhs` (gamma, delta >= 0)."""
        if gamma < 0 or delta < 0:
            raise ValueError("explicit constant requires gamma, delta >= 0")
        if delta / 2.0 + 1.0 - theta_ <= 0 or gamma / 2.0 + 1.0 - eta <= 0:
            raise ValueError("beta-function arguments must be positive")
        return (
            beta_fn(delta / 2.0 + 1.0 - theta_, gamma / 2.0 + 1.0 - eta)
            * t ** (1.0 - eta - theta_)
            * self.Phi_inv(t) ** (gamma + delta)
        )

    def exp_convolution_constant(self) -> float:
        """2 * int exp(-b (2 - 2**beta) |z|**beta) dz over R^d, closed form."""
        if self.beta >= 1.0:
            raise ValueError("exponential convolution constant needs beta < 1")
        c = self.b * (2.0 - 2.0**self.beta)
        radial = np.exp(gammaln(self.d / self.beta)) / (self.beta * c ** (self.d / self.beta))
        return 2.0 * surface_area(self.d) * radial
