"""Fourier inversion of characteristic exponents and symmetric kernel ops.

The transition density of the symmetric process with jumping kernel
K(z) J(|z|) in d = 1 is

    p(t, x) = (1/pi) int_0^inf cos(xi x) exp(-t psi(xi)) dxi,

with spatial derivatives obtained through (i xi)^k multipliers.  Oscillatory
integrals are computed with a per-panel quadratic Filon rule whose error is
independent of the oscillation frequency, over a xi-grid graded so that the
exponent t * psi(xi) moves by a controlled amount per panel (this also
resolves the |xi|^alpha cusp of psi at zero, which plain FFT quadrature
smears into the far tails where the density is exponentially small).

`PsiTable` caches the exponent on a log grid with monotone interpolation and
quadratic / power-law extensions outside.  `SymmetricKernel` bundles the
table with inversion helpers, both pointwise and on uniform lattices.
"""

import math
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np
from scipy import integrate
from scipy.interpolate import PchipInterpolator

from ._accel import njit, prange
from .model import FreezeKernel, ModelSpec, psi_quad

__all__ = [
    "PsiTable",
    "SymmetricKernel",
    "filon_transform",
    "generator_apply_callable",
]


# ---------------------------------------------------------------------------
# Filon-quadratic transform
# ---------------------------------------------------------------------------


@njit(cache=True)
def _filon_kernel(nodes, F, us, mode, out):  # pragma: no cover - jitted
    """Accumulate int F(xi) trig(xi*u) dxi for each u (mode 0: cos, 1: sin).

    ``nodes``/``F`` hold 2*K+1 points: panel j uses indices (2j, 2j+1, 2j+2)
    with the middle node at the panel centre.  F is interpolated by the
    Lagrange quadratic on each panel; the trig moments are exact, using
    series for small angle * halfwidth.
    """
    n_panels = (nodes.shape[0] - 1) // 2
    for iu in prange(us.shape[0]):
        u = us[iu]
        acc = 0.0
        for j in range(n_panels):
            x0 = nodes[2 * j]
            x2 = nodes[2 * j + 2]
            c = 0.5 * (x0 + x2)
            dlt = 0.5 * (x2 - x0)
            if dlt <= 0.0:
                continue
            fm = F[2 * j]
            f0 = F[2 * j + 1]
            fp = F[2 * j + 2]
            th = u * dlt
            if abs(th) < 0.05:
                th2 = th * th
                m0 = 2.0 * (1.0 - th2 / 6.0 * (1.0 - th2 / 20.0 * (1.0 - th2 / 42.0)))
                m1 = 2.0 * th * (1.0 / 3.0 - th2 / 30.0 + th2 * th2 / 840.0)
                m2 = 2.0 * (1.0 / 3.0 - th2 / 10.0 + th2 * th2 / 168.0)
            else:
                s = math.sin(th)
                co = math.cos(th)
                m0 = 2.0 * s / th
                m1 = 2.0 * (s - th * co) / (th * th)
                m2 = 2.0 * ((th * th - 2.0) * s + 2.0 * th * co) / (th * th * th)
            even = f0 * (m0 - m2) + 0.5 * (fm + fp) * m2
            odd = 0.5 * (fp - fm) * m1
            if mode == 0:
                acc += dlt * (math.cos(u * c) * even - math.sin(u * c) * odd)
            else:
                acc += dlt * (math.sin(u * c) * even + math.cos(u * c) * odd)
        out[iu] = acc


def _filon_numpy(nodes, F, us, mode):
    """Vectorized fallback with identical panel rule (used without numba)."""
    c = 0.5 * (nodes[0:-2:2] + nodes[2::2])
    dlt = 0.5 * (nodes[2::2] - nodes[0:-2:2])
    fm, f0, fp = F[0:-2:2], F[1:-1:2], F[2::2]
    keep = dlt > 0
    c, dlt, fm, f0, fp = c[keep], dlt[keep], fm[keep], f0[keep], fp[keep]
    out = np.empty_like(us)
    block = max(1, int(2e6 / max(c.size, 1)))
    for b0 in range(0, us.size, block):
        u = us[b0:b0 + block][:, None]
        th = u * dlt[None, :]
        small = np.abs(th) < 0.05
        th2 = th * th
        with np.errstate(divide="ignore", invalid="ignore"):
            s = np.sin(th)
            co = np.cos(th)
            m0 = np.where(small,
                          2.0 * (1.0 - th2 / 6.0 * (1.0 - th2 / 20.0 * (1.0 - th2 / 42.0))),
                          2.0 * s / np.where(small, 1.0, th))
            m1 = np.where(small,
                          2.0 * th * (1.0 / 3.0 - th2 / 30.0 + th2 * th2 / 840.0),
                          2.0 * (s - th * co) / np.where(small, 1.0, th2))
            m2 = np.where(small,
                          2.0 * (1.0 / 3.0 - th2 / 10.0 + th2 * th2 / 168.0),
                          2.0 * ((th2 - 2.0) * s + 2.0 * th * co)
                          / np.where(small, 1.0, th2 * th))
        even = f0[None, :] * (m0 - m2) + 0.5 * (fm + fp)[None, :] * m2
        odd = 0.5 * (fp - fm)[None, :] * m1
        uc = u * c[None, :]
        if mode == 0:
            vals = dlt[None, :] * (np.cos(uc) * even - np.sin(uc) * odd)
        else:
            vals = dlt[None, :] * (np.sin(uc) * even + np.cos(uc) * odd)
        out[b0:b0 + block] = vals.sum(axis=1)
    return out


def filon_transform(nodes, F, us, mode=0):
    """Oscillatory integral int F(xi) cos/sin(xi u) dxi for a vector of u."""
    from ._accel import NUMBA_ENABLED

    us = np.atleast_1d(np.asarray(us, dtype=float))
    nodes = np.ascontiguousarray(nodes, dtype=float)
    F = np.ascontiguousarray(F, dtype=float)
    if not NUMBA_ENABLED:
        return _filon_numpy(nodes, F, us, int(mode))
    out = np.empty_like(us)
    _filon_kernel(nodes, F, us, int(mode), out)
    return out


# ---------------------------------------------------------------------------
# characteristic exponent table
# ---------------------------------------------------------------------------


class PsiTable:
    """Tabulated characteristic exponent with monotone log-log interpolation.

    Below the table the exact quadratic limit psi ~ xi^2 * (second moment)/2
    is used; above it, power-law extrapolation of the last decade.  For a
    constant coefficient the table is shared and scaled exactly (psi is
    linear in K).
    """

    XI_LO = 1e-4
    XI_HI = 3e6
    PER_DECADE = 24

    def __init__(self, model: ModelSpec, K: Optional[FreezeKernel] = None,
                 scale: float = 1.0, _shared=None):
        self.model = model
        self.K = K
        self.scale = float(scale)
        if _shared is not None:
            (self._interp, self._c_small, self._hi_slope, self._hi_anchor) = _shared
            return
        if K is not None and K.is_constant:
            base = PsiTable(model, None)
            self._interp = base._interp
            self._c_small = base._c_small
            self._hi_slope = base._hi_slope
            self._hi_anchor = base._hi_anchor
            self.scale = self.scale * K.constant_value
            return
        n = int(np.ceil(np.log10(self.XI_HI / self.XI_LO) * self.PER_DECADE))
        xi = np.exp(np.linspace(np.log(self.XI_LO), np.log(self.XI_HI), n))
        vals = psi_quad(model, K, xi)
        if np.any(vals <= 0) or np.any(np.diff(np.log(vals)) <= 0):
            raise ArithmeticError("psi table is not positive increasing")
        self._interp = PchipInterpolator(np.log(xi), np.log(vals))
        self._c_small = vals[0] / xi[0] ** 2
        self._hi_slope = (np.log(vals[-1]) - np.log(vals[-2])) / (np.log(xi[-1]) - np.log(xi[-2]))
        self._hi_anchor = (np.log(xi[-1]), np.log(vals[-1]))

    def scaled(self, factor: float) -> "PsiTable":
        tab = PsiTable(self.model, None, scale=self.scale * factor,
                       _shared=(self._interp, self._c_small, self._hi_slope, self._hi_anchor))
        return tab

    def __call__(self, xi):
        xi = np.abs(np.asarray(xi, dtype=float))
        out = np.empty_like(xi)
        lo = xi < self.XI_LO
        hi = xi > self.XI_HI
        mid = ~(lo | hi)
        out[lo] = self._c_small * xi[lo] ** 2
        if np.any(mid):
            out[mid] = np.exp(self._interp(np.log(xi[mid])))
        if np.any(hi):
            lx, lv = self._hi_anchor
            out[hi] = np.exp(lv + self._hi_slope * (np.log(xi[hi]) - lx))
        out *= self.scale
        return float(out) if out.ndim == 0 else out

    def inv(self, w):
        """Monotone inverse: xi with psi(xi) = w (bisection in log space)."""
        w = np.atleast_1d(np.asarray(w, dtype=float)) / self.scale
        lo = np.full_like(w, np.log(1e-8))
        hi = np.full_like(w, np.log(1e9))
        for _ in range(80):
            mid = 0.5 * (lo + hi)
            above = self(np.exp(mid)) / self.scale > w
            hi = np.where(above, mid, hi)
            lo = np.where(above, lo, mid)
        out = np.exp(0.5 * (lo + hi))
        return float(out[0]) if out.shape == (1,) else out


# ---------------------------------------------------------------------------
# symmetric kernel
# ---------------------------------------------------------------------------


def _exponent_nodes(psi: PsiTable, eta: float, w_max: float = 42.0,
                    n_panels: int = 1200, n_body: int = 900) -> np.ndarray:
    """xi panel nodes for the inversion at time eta.

    Two gradings are merged: exponent levels w_i = w_max * (i/n)^2 resolve
    where exp(-eta psi) decays, and a uniform body grid on [0, 24] resolves
    the moderate-xi structure of the symbol that carries the jump tail of
    the density (essential when eta is small and the exponent grading alone
    would leave that region almost node-free).  Panel midpoints are inserted
    so each consecutive triple forms one quadratic Filon panel.
    """
    i = np.arange(n_panels + 1, dtype=float)
    w = w_max * (i / n_panels) ** 2
    edges = psi.inv(np.maximum(w, 1e-14) / eta)
    edges[0] = 0.0
    xi_max = edges[-1]
    body = np.linspace(0.0, min(24.0, xi_max), n_body + 1)
    edges = np.unique(np.concatenate([edges, body]))
    nodes = np.empty(2 * edges.size - 1)
    nodes[0::2] = edges
    nodes[1::2] = 0.5 * (edges[:-1] + edges[1:])
    return nodes


class SymmetricKernel:
    """Transition density machinery for one symmetric coefficient K.

    All evaluators take the time argument ``eta`` in absolute units; the
    kernel is even in x, so only |u| matters.
    """

    def __init__(self, model: ModelSpec, K: Optional[FreezeKernel] = None,
                 psi: Optional[PsiTable] = None, n_panels: int = 1200,
                 n_body: int = 900):
        self.model = model
        self.K = K
        self.psi = psi if psi is not None else PsiTable(model, K)
        self.n_panels = int(n_panels)
        self.n_body = int(n_body)

    # multiplier codes: k=0 density, k=1 first derivative, k=2 second
    # derivative, k=-1 time derivative (multiplier -psi)
    def _transform(self, eta: float, us: np.ndarray, k: int = 0) -> np.ndarray:
        nodes = _exponent_nodes(self.psi, eta, n_panels=self.n_panels,
                                n_body=self.n_body)
        F = np.exp(-eta * self.psi(nodes))
        if k == 0:
            mode = 0
        elif k == 1:
            F = -nodes * F
            mode = 1
        elif k == 2:
            F = -nodes * nodes * F
            mode = 0
        elif k == -1:
            F = -self.psi(nodes) * F
            mode = 0
        else:
            raise ValueError("k must be in {-1, 0, 1, 2}")
        return filon_transform(nodes, F, us, mode=mode) / np.pi

    def p(self, eta, u, k: int = 0):
        """k-th spatial derivative of the density at time eta (k=-1: d/dt)."""
        if eta <= 0:
            raise ValueError("time must be positive")
        scalar = np.ndim(u) == 0
        us = np.abs(np.atleast_1d(np.asarray(u, dtype=float)))
        out = self._transform(float(eta), us, k=k)
        if k == 1:
            out = out * np.sign(np.atleast_1d(np.asarray(u, dtype=float)))
        return float(out[0]) if scalar else out

    def delta_p(self, eta, x, z):
        """Second symmetric difference p(eta, x+z) + p(eta, x-z) - 2 p(eta, x)."""
        x = np.asarray(x, dtype=float)
        z = np.asarray(z, dtype=float)
        xb, zb = np.broadcast_arrays(x, z)
        pts = np.stack([xb + zb, xb - zb, xb], axis=0).ravel()
        vals = self.p(eta, pts).reshape(3, *xb.shape)
        out = vals[0] + vals[1] - 2.0 * vals[2]
        return float(out) if out.ndim == 0 else out

    # -- field construction and field-level checks ----------------------------

    def grid_for(self, t_min: float, tail_level: float = 1e-12,
                 h_cap: float = 0.02, L_cap: float = 80.0):
        """Uniform grid resolving the smallest time and the far tail.

        Spacing keeps the alias sum 2 sum_k exp(-t psi(2 pi k / h)) below
        1e-14 for the mass trapezoid; the extent is capped (an analytic tail
        estimate covers what lies beyond).
        """
        h = min(h_cap, 2.0 * np.pi / float(self.psi.inv(34.0 / t_min)))
        bounds = self.model.bounds()
        L = L_cap
        # smallest L with t * theta(L) below the tail level
        for cand in np.arange(10.0, L_cap + 1e-9, 2.0):
            if t_min * bounds.theta(cand) < tail_level and \
                    1.0 * bounds.theta(cand) < tail_level:
                L = cand
                break
        n = int(np.ceil(L / h))
        return np.arange(-n, n + 1) * h

    def field(self, ts, xs=None, k: int = 0, tail_level: float = 1e-12):
        """KernelField of the k-th derivative on a shared uniform grid."""
        from .fields import KernelField

        ts = np.atleast_1d(np.asarray(ts, dtype=float))
        if xs is None:
            xs = self.grid_for(float(ts.min()), tail_level=tail_level)
        vals = np.empty((ts.size, xs.size))
        for i, t in enumerate(ts):
            vals[i] = self.p(t, xs, k=k)
        meta = {"coefficient": getattr(self.K, "provenance", "unit"),
                "derivative_order": k,
                "model": {"alpha": self.model.alpha, "b": self.model.b,
                          "beta": self.model.beta, "d": self.model.d}}
        return KernelField(ts, xs, vals, meta)

    def mass(self, t: float, xs: Optional[np.ndarray] = None) -> dict:
        """Grid trapezoid of the density plus a jump-envelope tail estimate."""
        if xs is None:
            xs = self.grid_for(t)
        vals = self.p(t, xs)
        body = float(np.trapezoid(vals, xs))
        L = float(xs.max())
        tail_ratio_num, _ = integrate.quad(self.model.J, L, 40.0 * L, limit=200)
        tail = 2.0 * max(float(self.p(t, L)), 0.0) * tail_ratio_num / self.model.J(L)
        return {"mass": body + tail, "body": body, "tail_estimate": tail}

    def chapman_kolmogorov(self, t: float, s: float, L: float = 30.0,
                           h: float = 0.02) -> dict:
        """sup_x |int p(t, x - z) p(s, z) dz - p(t + s, x)| on |x| <= L/2."""
        n = int(round(L / h))
        xs = np.arange(-n, n + 1) * h
        pt = self.p(t, xs)
        ps = self.p(s, xs)
        conv = np.convolve(pt, ps, mode="same") * h
        target = self.p(t + s, xs)
        sel = np.abs(xs) <= 0.5 * L
        err = np.abs(conv - target)[sel]
        return {"sup_error": float(err.max()), "t": t, "s": s}

    def derivative_vs_fd(self, t: float, points, k: int = 1,
                         fd_h: float = 1e-4) -> float:
        """Max relative error of the multiplier derivative against central
        finite differences of the density."""
        pts = np.atleast_1d(np.asarray(points, dtype=float))
        exact = self.p(t, pts, k=k)
        if k == 1:
            fd = (self.p(t, pts + fd_h) - self.p(t, pts - fd_h)) / (2 * fd_h)
        elif k == 2:
            fd = (self.p(t, pts + fd_h) + self.p(t, pts - fd_h)
                  - 2 * self.p(t, pts)) / fd_h**2
        else:
            raise ValueError("k must be 1 or 2")
        scale = np.maximum(np.abs(exact), np.abs(fd)).max()
        return float(np.abs(exact - fd).max() / scale)

    def dplus2_identity(self, t: float, n_r: int = 400) -> dict:
        """Radial-derivative companion kernel: nonnegativity and unit mass.

        q_t(r) = -p'(t, r) / (2 pi r) must be nonnegative (unimodality) and
        integrate to 1 against the (d+2)-dimensional volume element.
        """
        if self.model.d != 1:
            raise ValueError("companion identity implemented for d = 1")
        bounds = self.model.bounds()
        L = 60.0
        rs = np.concatenate([np.linspace(1e-4, 2.0, n_r // 2, endpoint=False),
                             np.exp(np.linspace(np.log(2.0), np.log(L), n_r // 2))])
        dp = self.p(t, rs, k=1)
        q = -dp / (2.0 * np.pi * rs)
        # d = 1 -> companion lives in R^3, volume element 4 pi r^2 dr
        mass = 4.0 * np.pi * np.trapezoid(rs**2 * q, rs)
        return {"min_q": float(q.min()), "mass": float(mass),
                "mass_error": float(abs(mass - 1.0))}

    def convolution_identity(self, other_small: "SymmetricKernel",
                             other_hat: "SymmetricKernel", t: float,
                             L: float = 30.0, h: float = 0.02) -> dict:
        """|p_K(t, .) - p_{k0/2}(t, .) * p_{K - k0/2}(t, .)|_sup on the grid."""
        n = int(round(L / h))
        xs = np.arange(-n, n + 1) * h
        ps = other_small.p(t, xs)
        ph = other_hat.p(t, xs)
        conv = np.convolve(ps, ph, mode="same") * h
        target = self.p(t, xs)
        sel = np.abs(xs) <= 0.5 * L
        return {"sup_error": float(np.abs(conv - target)[sel].max()), "t": t}


# ---------------------------------------------------------------------------
# dense kernel tables
# ---------------------------------------------------------------------------


class KernelTables:
    """Dense (eta, u) tables of the density and its time derivative.

    ``us`` is the union of the coarse difference lattice k*h (k = 0..n_lat-1)
    with a fine centre zone (spacing ``h_fine`` on [0, fine_span]) so the
    near-diagonal spike of small-time kernels can be interpolated in u.
    Rows are cubically interpolated in log(eta); values at lattice offsets
    are exact table entries, never u-interpolated.

    Tables for the base coefficient (K constant or None) are cached on disk
    keyed by the model and grid parameters.
    """

    def __init__(self, kernel: SymmetricKernel, h: float, L: float,
                 h_fine: float = 0.005, fine_span: float = 2.0,
                 eta_min: float = 7e-5, eta_max: float = 0.9,
                 per_octave: int = 16, cache_dir: Optional[str] = None):
        self.kernel = kernel
        self.h = float(h)
        self.n_lat = int(round(2.0 * L / h)) + 1  # offsets 0 .. 2L
        lattice = np.arange(self.n_lat) * self.h
        fine = np.arange(0.0, fine_span, h_fine)
        us = np.unique(np.round(np.concatenate([lattice, fine]), 12))
        self.us = us
        self.lat_idx = np.searchsorted(us, np.round(lattice, 12))
        n_eta = int(np.ceil(np.log2(eta_max / eta_min) * per_octave)) + 1
        self.log_etas = np.linspace(np.log(eta_min), np.log(eta_max), n_eta)
        self.etas = np.exp(self.log_etas)
        self._dlog = self.log_etas[1] - self.log_etas[0]
        arrs = self._load_cache(cache_dir)
        if arrs is None:
            P = np.empty((n_eta, us.size))
            Pdot = np.empty((n_eta, us.size))
            for i, eta in enumerate(self.etas):
                P[i] = kernel._transform(eta, us, k=0)
                Pdot[i] = kernel._transform(eta, us, k=-1)
            self.P, self.Pdot = P, Pdot
            self._store_cache(cache_dir)
        else:
            self.P, self.Pdot = arrs

    # -- disk cache ----------------------------------------------------------

    def _cache_key(self):
        K = self.kernel.K
        if K is not None and not K.is_constant:
            return None
        m = self.kernel.model
        parts = (
            "v3", m.d, m.alpha, m.b, m.beta,
            None if K is None else K.constant_value,
            self.h, self.n_lat, self.us.size,
            float(self.log_etas[0]), float(self.log_etas[-1]), len(self.etas),
            self.kernel.n_panels, self.kernel.n_body,
        )
        import hashlib

        return hashlib.sha1(repr(parts).encode()).hexdigest()[:20]

    def _cache_path(self, cache_dir):
        import os

        key = self._cache_key()
        if key is None:
            return None
        root = cache_dir or os.environ.get("LEVIKERNEL_CACHE",
                                           os.path.join(os.path.expanduser("~"),
                                                        ".cache", "levikernel"))
        return os.path.join(root, f"ktab_{key}.npz")

    def _load_cache(self, cache_dir):
        import os

        path = self._cache_path(cache_dir)
        if path is None or not os.path.exists(path):
            return None
        try:
            with np.load(path) as z:
                return z["P"], z["Pdot"]
        except Exception:
            return None

    def _store_cache(self, cache_dir):
        import os

        path = self._cache_path(cache_dir)
        if path is None:
            return
        os.makedirs(os.path.dirname(path), exist_ok=True)
        try:
            np.savez_compressed(path, P=self.P, Pdot=self.Pdot)
        except OSError:
            pass

    # -- interpolation ---------------------------------------------------------

    def _weights(self, eta):
        """4-point Lagrange weights in log(eta) for each requested eta."""
        le = np.log(np.asarray(eta, dtype=float))
        if np.any(le < self.log_etas[0] - 1e-9) or np.any(le > self.log_etas[-1] + 1e-9):
            raise ValueError(
                f"eta outside table range [{self.etas[0]:.3g}, {self.etas[-1]:.3g}]"
            )
        pos = (le - self.log_etas[0]) / self._dlog
        i1 = np.clip(np.floor(pos).astype(int), 1, len(self.etas) - 3)
        s = pos - i1
        w = np.empty(le.shape + (4,))
        w[..., 0] = -s * (s - 1.0) * (s - 2.0) / 6.0
        w[..., 1] = (s + 1.0) * (s - 1.0) * (s - 2.0) / 2.0
        w[..., 2] = -(s + 1.0) * s * (s - 2.0) / 2.0
        w[..., 3] = (s + 1.0) * s * (s - 1.0) / 6.0
        return i1, w

    def rows(self, eta, kind: str = "p") -> np.ndarray:
        """Interpolated table rows at the requested times (shape: eta x u)."""
        tab = self.P if kind == "p" else self.Pdot
        eta = np.atleast_1d(np.asarray(eta, dtype=float))
        i1, w = self._weights(eta)
        out = (w[:, 0, None] * tab[i1 - 1] + w[:, 1, None] * tab[i1]
               + w[:, 2, None] * tab[i1 + 1] + w[:, 3, None] * tab[i1 + 2])
        return out

    def rows_at_lattice(self, eta, kind: str = "p") -> np.ndarray:
        """Interpolated rows restricted to the coarse offsets 0, h, 2h, ..."""
        return self.rows(eta, kind)[:, self.lat_idx]

    def value(self, eta: float, u, kind: str = "p"):
        """Pointwise values at one time by PCHIP in u over the interpolated row."""
        row = self.rows(np.atleast_1d(float(eta)), kind)[0]
        u = np.abs(np.asarray(u, dtype=float))
        out = PchipInterpolator(self.us, row, extrapolate=False)(u)
        out = np.where(np.isnan(out), 0.0, out)
        return float(out) if out.ndim == 0 else out

    def tail_second_moment(self, etas, w_cut: float, kind: str = "p") -> np.ndarray:
        """2 * int_{u >= w_cut} u^2 f(eta, u) du from the table rows (per eta)."""
        rows = self.rows(etas, kind)
        mask = self.us >= w_cut - 1e-12
        us = self.us[mask]
        return 2.0 * np.trapezoid(us * us * rows[:, mask], us, axis=1)

    def tail_mass(self, etas, w_cut: float, kind: str = "p") -> np.ndarray:
        """2 * int_{u >= w_cut} f(eta, u) du from the table rows (per eta)."""
        rows = self.rows(etas, kind)
        mask = self.us >= w_cut - 1e-12
        us = self.us[mask]
        return 2.0 * np.trapezoid(rows[:, mask], us, axis=1)


# ---------------------------------------------------------------------------
# generator applied to a smooth callable
# ---------------------------------------------------------------------------


def generator_apply_callable(model: ModelSpec, K, f: Callable, x: float,
                             eps: float = 0.0, fpp: Optional[Callable] = None,
                             rel_tol: float = 1e-9) -> float:
    """(1/2) int_{|z|>eps} (f(x+z)+f(x-z)-2f(x)) K(z) J(|z|) dz for d = 1.

    The second-difference form is absolutely integrable at 0, so eps = 0 is
    allowed.  Below z = 1e-4 the difference is replaced by z^2 f''(x) to
    avoid cancellation (f'' by central differences unless supplied).
    """
    model._require_d1()
    kf = K if K is not None else (lambda z: 1.0)
    x = float(x)

    def dd(z):
        return f(x + z) + f(x - z) - 2.0 * f(x)

    z_guard = max(1e-4, eps)
    total = 0.0
    if eps < z_guard:
        if fpp is not None:
            f2 = fpp(x)
        else:
            hh = 1e-4
            f2 = (f(x + hh) + f(x - hh) - 2.0 * f(x)) / hh**2
        lo = eps

        def guarded(z):
            return f2 * z * z * kf(z) * model.J(z)

        val, _ = integrate.quad(guarded, lo, z_guard, limit=100,
                                epsrel=rel_tol, epsabs=1e-300)
        total += val
    z_tail = (60.0 / model.b) ** (1.0 / model.beta)
    knots = sorted({max(z_guard, eps), 1.0, 4.0, z_tail})
    knots = [k for k in knots if k >= max(z_guard, eps)]
    if knots[0] > max(z_guard, eps):
        knots.insert(0, max(z_guard, eps))
    for a_, b_ in zip(knots[:-1], knots[1:]):
        val, _ = integrate.quad(lambda z: dd(z) * kf(z) * model.J(z), a_, b_,
                                limit=300, epsrel=rel_tol, epsabs=1e-13)
        total += val
    # the quadrature runs over z > 0 only; with the symmetrized second
    # difference this already equals the full principal-value integral
    return total
