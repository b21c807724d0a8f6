"""Jump-kernel model: J, kappa coefficients, and Fourier-side quantities.

The built-in jumping kernel is the tempered family

    J(r) = r**(-d - alpha) * exp(-b * r**beta),   alpha in (0, 2), beta in (0, 1],

which matches the power scale function ``phi(r) = r**alpha`` with comparability
constant ``a = exp(b)`` on (0, 1] and has an analytic derivative, so the
monotonicity condition on ``-J'(r)/r`` can be verified directly.  On top of J
sits a bounded symmetric coefficient: either the state-dependent
``kappa(x, z)`` (non-symmetric operator) or a frozen/space-free ``K(z)``
(symmetric operator).

Fourier-side objects (d = 1 quadratures unless noted):

* ``psi_quad``     characteristic exponent of the symmetric process with
                   jumping kernel K(z) J(|z|),
* ``pruitt``       P(r) = int (1 ^ |y|^2/r^2) nu(|y|) dy   (any d),
* ``varphi``       auxiliary scale r^2 / int_0^r s^(d+1) nu(s) ds  (any d),
* ``nu1``          the (d+2)-dimensional companion kernel -nu'(r)/(2 pi r).
"""

import json
import math
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np
from scipy import integrate
from scipy.interpolate import PchipInterpolator

from .scale import BoundFunctions, ScaleFunction, surface_area

__all__ = [
    "ModelSpec",
    "KappaSpec",
    "FreezeKernel",
    "ConfigError",
    "load_model",
    "psi_quad",
]


class ConfigError(ValueError):
    """Raised when a model configuration document is invalid."""


# ---------------------------------------------------------------------------
# coefficients
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class FreezeKernel:
    """Symmetric bounded coefficient K(z) for a translation-invariant operator.

    ``constant_value`` is set when K does not actually depend on z; downstream
    code then uses exact time-scaling shortcuts instead of fresh quadratures.
    """

    fn: Callable[[np.ndarray], np.ndarray]
    kappa0: float
    kappa1: float
    provenance: str = "user"
    constant_value: Optional[float] = None

    def __call__(self, z):
        z = np.asarray(z, dtype=float)
        if self.constant_value is not None:
            out = np.full_like(z, self.constant_value, dtype=float)
        else:
            out = np.asarray(self.fn(z), dtype=float)
        return float(out) if out.ndim == 0 else out

    @property
    def is_constant(self) -> bool:
        return self.constant_value is not None

    @classmethod
    def constant(cls, value: float, kappa0=None, kappa1=None) -> "FreezeKernel":
        k0 = value if kappa0 is None else kappa0
        k1 = value if kappa1 is None else kappa1
        return cls(fn=lambda z: np.full_like(np.asarray(z, float), value),
                   kappa0=k0, kappa1=k1, provenance="constant",
                   constant_value=float(value))


@dataclass(frozen=True)
class KappaSpec:
    """State-dependent coefficient kappa(x, z) with ellipticity and Hoelder data.

    Families:

    * ``cosine``    kappa(x, z) = base + amplitude * cos(frequency * x)
                    (independent of z; the shipped default),
    * ``constant``  kappa == base,
    * ``cosine-z``  base + amplitude * cos(frequency * x) * w(z) with the even
                    window w(z) = 1/(1 + z^2)  (genuinely z-dependent),
    * ``custom``    arbitrary callable; bounds must be supplied.
    """

    family: str
    base: float = 1.0
    amplitude: float = 0.0
    frequency: float = 1.0
    fn: Optional[Callable] = field(default=None, repr=False, compare=False)
    kappa0: float = 1.0
    kappa1: float = 1.0
    kappa2: float = 0.0
    delta: float = 1.0

    @classmethod
    def cosine(cls, base=1.0, amplitude=0.3, frequency=1.0) -> "KappaSpec":
        if base - abs(amplitude) <= 0:
            raise ValueError("cosine kappa must stay positive")
        return cls(family="cosine", base=float(base), amplitude=float(amplitude),
                   frequency=float(frequency),
                   kappa0=base - abs(amplitude), kappa1=base + abs(amplitude),
                   kappa2=abs(amplitude) * frequency, delta=1.0)

    @classmethod
    def constant(cls, value=1.0) -> "KappaSpec":
        return cls(family="constant", base=float(value),
                   kappa0=float(value), kappa1=float(value), kappa2=0.0, delta=1.0)

    @classmethod
    def cosine_z(cls, base=1.0, amplitude=0.2, frequency=1.0) -> "KappaSpec":
        if base - abs(amplitude) <= 0:
            raise ValueError("cosine-z kappa must stay positive")
        return cls(family="cosine-z", base=float(base), amplitude=float(amplitude),
                   frequency=float(frequency),
                   kappa0=base - abs(amplitude), kappa1=base + abs(amplitude),
                   kappa2=abs(amplitude) * frequency, delta=1.0)

    @property
    def z_dependent(self) -> bool:
        return self.family not in ("cosine", "constant")

    def x_part(self, x):
        """kappa(x, z) for z-independent families (rejects the others)."""
        x = np.asarray(x, dtype=float)
        if self.family == "constant":
            out = np.full_like(x, self.base, dtype=float)
        elif self.family == "cosine":
            out = self.base + self.amplitude * np.cos(self.frequency * x)
        else:
            raise ValueError(f"kappa family '{self.family}' depends on z")
        return float(out) if out.ndim == 0 else out

    def __call__(self, x, z):
        x = np.asarray(x, dtype=float)
        z = np.asarray(z, dtype=float)
        if self.family in ("cosine", "constant"):
            out = np.broadcast_arrays(self.x_part(x) + 0.0 * z)[0]
        elif self.family == "cosine-z":
            out = self.base + (self.amplitude * np.cos(self.frequency * x)) / (1.0 + z**2)
        elif self.family == "custom":
            out = np.asarray(self.fn(x, z), dtype=float)
        else:
            raise ValueError(f"unknown kappa family '{self.family}'")
        return float(out) if np.ndim(out) == 0 else out

    def freeze(self, y: float) -> "FreezeKernel":
        """K_y(z) = kappa(y, z), the coefficient frozen at the anchor y."""
        if not self.z_dependent:
            return FreezeKernel.constant(self.x_part(float(y)),
                                         kappa0=self.kappa0, kappa1=self.kappa1)
        yv = float(y)
        return FreezeKernel(fn=lambda z: self(yv, z), kappa0=self.kappa0,
                            kappa1=self.kappa1, provenance=f"frozen@{yv:g}")


# ---------------------------------------------------------------------------
# model
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ModelSpec:
    """Dimension, jump family, tempering parameters, horizon and kappa."""

    d: int = 1
    alpha: float = 1.2
    b: float = 1.0
    beta: float = 0.5
    T: float = 1.0
    a: Optional[float] = None
    kappa: KappaSpec = field(default_factory=KappaSpec.cosine)
    jump_family: str = "tempered"
    jump_table: Optional[tuple] = field(default=None, repr=False)

    def __post_init__(self):
        if self.d < 1 or int(self.d) != self.d:
            raise ConfigError("field 'd': must be a positive integer")
        if not (0.0 < self.alpha < 2.0):
            raise ConfigError("field 'alpha': must lie in (0, 2)")
        if self.b <= 0:
            raise ConfigError("field 'b': must be positive")
        if not (0.0 < self.beta <= 1.0):
            raise ConfigError("field 'beta': must lie in (0, 1]")
        if self.T < 1.0:
            raise ConfigError("field 'T': horizon must be at least 1")

    # -- scale-side objects -------------------------------------------------

    @property
    def phi(self) -> ScaleFunction:
        return ScaleFunction.power(self.alpha)

    @property
    def a1(self) -> float:
        return 1.0

    @property
    def alpha1(self) -> float:
        return self.alpha

    @property
    def comparability(self) -> float:
        """The constant a with a^-1/(r^d phi) <= J <= a/(r^d phi) on (0,1]."""
        return float(self.a) if self.a is not None else math.exp(self.b)

    def bounds(self) -> BoundFunctions:
        return BoundFunctions(self.phi, self.d, self.b, self.beta, self.T)

    # -- jumping kernel -----------------------------------------------------

    def J(self, r):
        """Radial jumping kernel, positive and non-increasing on (0, inf)."""
        r = np.asarray(r, dtype=float)
        if np.any(r <= 0):
            raise ValueError("J requires r > 0")
        if self.jump_family == "tempered":
            out = r ** (-self.d - self.alpha) * np.exp(-self.b * r**self.beta)
        else:
            out = np.exp(self._jump_interp(np.log(r)))
        return float(out) if out.ndim == 0 else out

    def J_prime(self, r):
        r = np.asarray(r, dtype=float)
        if self.jump_family == "tempered":
            out = -self.J(r) * ((self.d + self.alpha) / r
                                + self.b * self.beta * r ** (self.beta - 1.0))
        else:
            out = self.J(r) * self._jump_interp.derivative()(np.log(r)) / r
        return float(out) if out.ndim == 0 else out

    def nu1(self, r):
        """(d+2)-dimensional companion kernel -J'(r) / (2 pi r); >= 0 iff J' <= 0."""
        r = np.asarray(r, dtype=float)
        out = -self.J_prime(r) / (2.0 * np.pi * r)
        return float(out) if out.ndim == 0 else out

    @property
    def _jump_interp(self):
        r, v = self.jump_table
        return PchipInterpolator(np.log(np.asarray(r, float)),
                                 np.log(np.asarray(v, float)))

    def j2_check(self, grid=None, rel_tol=1e-12) -> dict:
        """Verify -J'(r)/r is non-increasing on a geometric grid.

        Returns a report dict with the maximal relative violation; a model
        whose violation exceeds ``rel_tol`` is outside the admissible class.
        """
        if grid is None:
            grid = np.exp(np.linspace(np.log(1e-4), np.log(50.0), 4000))
        vals = -self.J_prime(grid) / grid
        rel_increase = np.diff(vals) / vals[:-1]
        worst = float(np.max(rel_increase, initial=-np.inf))
        return {
            "max_relative_increase": worst,
            "passed": bool(worst <= rel_tol),
            "grid_span": (float(grid[0]), float(grid[-1])),
        }

    def fit_comparability(self, n=2000) -> float:
        """Empirical a for (e:J1)-style two-sided comparison on (0, 1]."""
        r = np.exp(np.linspace(np.log(1e-6), 0.0, n))
        ratio = self.J(r) * r**self.d * self.phi(r)
        a_fit = max(float(ratio.max()), 1.0 / float(ratio.min()))
        return a_fit

    # -- radial integrals of nu = J -----------------------------------------

    def _radial_moment(self, r_lo, r_hi, power):
        """int_{r_lo}^{r_hi} s**power * J(s) ds for the built-in family."""

        def f(s):
            return s**power * self.J(s)

        # geometric panels: the integrand spans many decades
        lo = max(r_lo, 1e-300)
        knots = [r_lo]
        if r_hi / max(lo, 1e-12) > 20.0 and r_lo > 0:
            knots = list(np.exp(np.linspace(np.log(lo), np.log(r_hi), 24)))
            knots[0], knots[-1] = r_lo, r_hi
        else:
            knots = sorted({r_lo, min(max(1.0, r_lo), r_hi), r_hi})
        total = 0.0
        for a_, b_ in zip(knots[:-1], knots[1:]):
            val, _ = integrate.quad(f, a_, b_, limit=200, epsrel=1e-11,
                                    epsabs=1e-300)
            total += val
        return float(total)

    def pruitt(self, r):
        """P(r) = int (1 ^ |y|^2 / r^2) J(|y|) dy; positive, non-increasing."""
        scalar = np.ndim(r) == 0
        rs = np.atleast_1d(np.asarray(r, dtype=float))
        if np.any(rs <= 0):
            raise ValueError("pruitt requires r > 0")
        omega = surface_area(self.d)
        tail_cut = (60.0 / self.b) ** (1.0 / self.beta)
        out = np.empty_like(rs)
        for i, rv in enumerate(rs):
            near = self._radial_moment(0.0, rv, self.d + 1) / rv**2
            far = self._radial_moment(rv, max(tail_cut, 2.0 * rv), self.d - 1)
            out[i] = omega * (near + far)
        return float(out[0]) if scalar else out

    def varphi(self, r):
        """Auxiliary scale r^2 / int_0^r s^(d+1) J(s) ds, quadratic beyond 1."""
        scalar = np.ndim(r) == 0
        rs = np.atleast_1d(np.asarray(r, dtype=float))
        if np.any(rs <= 0):
            raise ValueError("varphi requires r > 0")
        body = np.minimum(rs, 1.0)
        out = np.empty_like(rs)
        for i, rv in enumerate(body):
            out[i] = rv**2 / self._radial_moment(0.0, rv, self.d + 1)
        out = np.where(rs > 1.0, out * rs**2, out)
        return float(out[0]) if scalar else out

    def second_moment(self) -> float:
        """int |y|^2 J(|y|) dy over R^d (finite for tempered tails)."""
        tail_cut = (80.0 / self.b) ** (1.0 / self.beta)
        return surface_area(self.d) * self._radial_moment(0.0, tail_cut, self.d + 1)

    def levy_mass_above(self, r0, K: Optional[FreezeKernel] = None) -> float:
        """int_{|z| >= r0} K(z) J(|z|) dz (d = 1)."""
        self._require_d1()
        kfun = K if K is not None else (lambda z: 1.0)

        def f(z):
            return kfun(z) * self.J(z)

        tail_cut = max((80.0 / self.b) ** (1.0 / self.beta), 2.0 * r0)
        edges = np.exp(np.linspace(np.log(r0), np.log(tail_cut), 24))
        val = 0.0
        for a_, b_ in zip(edges[:-1], edges[1:]):
            piece, _ = integrate.quad(f, a_, b_, limit=200, epsrel=1e-11)
            val += piece
        return 2.0 * val

    def small_jump_variance(self, r0, K: Optional[FreezeKernel] = None) -> float:
        """int_{|z| < r0} z^2 K(z) J(|z|) dz (d = 1)."""
        self._require_d1()
        kfun = K if K is not None else (lambda z: 1.0)

        def f(z):
            return z * z * kfun(z) * self.J(z)

        val, _ = integrate.quad(f, 0.0, r0, limit=200, epsrel=1e-11, epsabs=1e-300)
        return 2.0 * val

    def _require_d1(self):
        if self.d != 1:
            raise ValueError("this operation requires d = 1")


# ---------------------------------------------------------------------------
# characteristic exponent (d = 1)
# ---------------------------------------------------------------------------


def psi_quad(model: ModelSpec, K: Optional[FreezeKernel], xi) -> np.ndarray:
    """psi(xi) = int (1 - cos(xi z)) K(z) J(|z|) dz for d = 1, by quadrature.

    The singular region xi*z < 1e-3 uses the Taylor form of 1 - cos to avoid
    cancellation against the z**(-1-alpha) blow-up; the oscillatory region is
    integrated with a cosine-weighted rule per panel.
    """
    model._require_d1()
    if K is not None and K.is_constant:
        base = psi_quad(model, None, xi)
        return K.constant_value * base
    kfun = (lambda z: np.asarray(K(z)) if K is not None else np.ones_like(np.asarray(z, float)))

    scalar = np.ndim(xi) == 0
    xis = np.atleast_1d(np.asarray(xi, dtype=float))
    if np.any(xis < 0):
        raise ValueError("psi is even; evaluate at xi >= 0")
    out = np.empty_like(xis)
    z_tail = (50.0 / model.b) ** (1.0 / model.beta)

    def g(z):
        return kfun(z) * model.J(z)

    for i, x in enumerate(xis):
        if x == 0.0:
            out[i] = 0.0
            continue
        z_a = min(1e-3 / x, 1.0)

        # Taylor-guarded core: (1 - cos u) = u^2/2 * (1 - u^2/12 * (1 - u^2/30))
        def core(z):
            u = x * z
            return g(z) * (u * u / 2.0) * (1.0 - u * u / 12.0 * (1.0 - u * u / 30.0))

        total, _ = integrate.quad(core, 0.0, z_a, limit=200, epsrel=1e-12, epsabs=1e-300)

        # oscillatory body: one panel per period keeps 1 - cos intact, so no
        # cancellation against the z**(-1-alpha) blow-up
        def body(z):
            return g(z) * (1.0 - np.cos(x * z))

        period = 2.0 * np.pi / x
        n_panels = int(min(np.ceil((z_tail - z_a) / period), 60))
        edges = z_a + period * np.arange(n_panels + 1)
        edges = np.minimum(edges, z_tail)
        for a_, b_ in zip(edges[:-1], edges[1:]):
            if b_ <= a_:
                break
            val, _ = integrate.quad(body, a_, b_, limit=60, epsrel=1e-11, epsabs=1e-14)
            total += val

        # far tail: g is small and decaying there, so the 1/cos split is safe
        z_c = edges[-1]
        if z_c < z_tail:
            knots = sorted({z_c, min(max(1.0, z_c), z_tail), z_tail})
            for a_, b_ in zip(knots[:-1], knots[1:]):
                v_flat, _ = integrate.quad(g, a_, b_, limit=300, epsrel=1e-11,
                                           epsabs=1e-300)
                v_osc, _ = integrate.quad(g, a_, b_, weight="cos", wvar=x,
                                          limit=800, epsrel=1e-10, epsabs=1e-14)
                total += v_flat - v_osc
        out[i] = 2.0 * total
        if not np.isfinite(out[i]):
            raise ArithmeticError(f"psi quadrature failed at xi={x}")
    return float(out[0]) if scalar else out


# ---------------------------------------------------------------------------
# configuration loading
# ---------------------------------------------------------------------------

_KAPPA_FACTORIES = {
    "cosine": KappaSpec.cosine,
    "constant": KappaSpec.constant,
    "cosine-z": KappaSpec.cosine_z,
}


def _kappa_from_dict(doc: dict) -> KappaSpec:
    if not isinstance(doc, dict):
        raise ConfigError("field 'kappa': must be an object")
    family = doc.get("family")
    if family not in _KAPPA_FACTORIES:
        raise ConfigError(
            f"field 'kappa.family': unknown family {family!r}; "
            f"expected one of {sorted(_KAPPA_FACTORIES)}"
        )
    kwargs = {}
    for key in ("base", "amplitude", "frequency"):
        if key in doc:
            if not isinstance(doc[key], (int, float)):
                raise ConfigError(f"field 'kappa.{key}': must be a number")
            kwargs[key] = float(doc[key])
    if family == "constant":
        kwargs = {"value": kwargs.get("base", 1.0)}
    try:
        return _KAPPA_FACTORIES[family](**kwargs)
    except ValueError as exc:
        raise ConfigError(f"field 'kappa': {exc}") from exc


def model_from_dict(doc: dict) -> ModelSpec:
    if not isinstance(doc, dict):
        raise ConfigError("model document must be a JSON object")
    known = {"d", "alpha", "b", "beta", "T", "a", "kappa", "name"}
    unknown = set(doc) - known
    if unknown:
        raise ConfigError(f"field '{sorted(unknown)[0]}': unknown field")
    kwargs = {}
    for key in ("alpha", "b", "beta", "T"):
        if key in doc:
            if not isinstance(doc[key], (int, float)):
                raise ConfigError(f"field '{key}': must be a number")
            kwargs[key] = float(doc[key])
    if "d" in doc:
        if not isinstance(doc["d"], int):
            raise ConfigError("field 'd': must be an integer")
        kwargs["d"] = doc["d"]
    if "a" in doc and doc["a"] is not None:
        if not isinstance(doc["a"], (int, float)) or doc["a"] < 1.0:
            raise ConfigError("field 'a': must be a number >= 1")
        kwargs["a"] = float(doc["a"])
    if "kappa" in doc:
        kwargs["kappa"] = _kappa_from_dict(doc["kappa"])
    return ModelSpec(**kwargs)


def load_model(path) -> list:
    """Load one or more model profiles from a JSON configuration file.

    The document is either a single model object or ``{"profiles": [...]}``.
    Validation failures raise ConfigError naming the offending field.
    """
    with open(path) as fh:
        try:
            doc = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"invalid JSON: {exc}") from exc
    if isinstance(doc, dict) and "profiles" in doc:
        profiles = doc["profiles"]
        if not isinstance(profiles, list) or not profiles:
            raise ConfigError("field 'profiles': must be a non-empty list")
        return [model_from_dict(p) for p in profiles]
    return [model_from_dict(doc)]
