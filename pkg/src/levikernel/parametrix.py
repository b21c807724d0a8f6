"""Levi construction of the heat kernel for the non-symmetric operator.

With ``p_y`` the kernel of the coefficient frozen at y, the kernel is built
as

    p(t, x, y) = p_y(t, x - y) + phi_y(t, x),
    phi_y(t, x) = int_0^t int p_z(t-s, x-z) q(s, z, y) dz ds,

where q solves a Volterra equation through the series q = sum_n q_n,

    q_0(t, x, y) = (1/2) int delta_{p_y}(t, x-y; z) (kappa(x,z) - kappa(y,z)) J(|z|) dz,
    q_n(t, x, y) = int_0^t int q_0(t-s, x, z) q_{n-1}(s, z, y) dz ds.

Discretization.  Fields live on a uniform space grid (spacing h) and q on a
geometric time lattice.  Time integrals use the lattice itself below s = t/2
(exact slices, kernel at off-lattice time gaps) and a mirrored lattice in
tau = t - s above (cached kernel slices, integrand slices interpolated in
log time), with short analytic stubs at both endpoints.  Space contractions
are plain h-weighted matrix products plus moment-matching corrections: for
each kernel slice the zeroth and first moments of the true kernel row
(computed on a fine auxiliary grid, with exact-identity fixes below its
resolution) are compared against the discrete row moments, and the
difference is applied to the integrand value and slope at the diagonal.
This keeps small-time kernel spikes, which the coarse grid cannot resolve,
from corrupting the integrals.

When kappa does not depend on z (the shipped default) every frozen kernel
is an exact time scaling of the base symmetric kernel and the construction
uses shared tables (`LeviParametrix`).  The general z-dependent case runs
through a per-anchor `FrozenKernelBank` (`GenericLevi`), practical at coarse
test resolutions.
"""

import math
from dataclasses import dataclass, replace
from typing import Dict, List, Optional

import numpy as np
from scipy.interpolate import PchipInterpolator

from .fourier import KernelTables, PsiTable, SymmetricKernel
from .model import FreezeKernel, ModelSpec
from .scale import BoundFunctions

__all__ = ["Resolution", "LeviParametrix", "FrozenKernelBank", "GenericLevi"]


@dataclass(frozen=True)
class Resolution:
    """Grid parameters for the construction; `coarsened` gives the stability mate."""

    L: float = 18.0
    h: float = 0.06
    sigma_min: float = 1e-4
    sigma_max: float = 0.56
    lattice_per_octave: int = 4
    table_per_octave: int = 16
    n_panels: int = 1200
    n_body: int = 900

    def coarsened(self) -> "Resolution":
        return replace(self, h=self.h * np.sqrt(2.0),
                       lattice_per_octave=max(self.lattice_per_octave - 1, 2),
                       table_per_octave=max(self.table_per_octave // 2, 8))


class LeviParametrix:
    """Fast-path construction for z-independent kappa (frozen kernels are
    time scalings of one base kernel)."""

    def __init__(self, model: ModelSpec, res: Resolution = Resolution(),
                 tables: Optional[KernelTables] = None, quiet: bool = True):
        if model.kappa.z_dependent:
            raise ValueError("LeviParametrix requires z-independent kappa; "
                             "use GenericLevi")
        model._require_d1()
        self.model = model
        self.res = res
        self.bounds: BoundFunctions = model.bounds()
        n_side = int(round(res.L / res.h))
        self.x = np.arange(-n_side, n_side + 1) * res.h
        self.N = self.x.size
        self.h = res.h
        self.c = model.kappa.x_part(self.x)
        self.cprime = self._c_first_derivative()
        self.cpp = self._c_second_derivative()
        # time lattice for q slices
        ratio = 2.0 ** (1.0 / res.lattice_per_octave)
        n_lat = int(np.ceil(np.log(res.sigma_max / res.sigma_min) / np.log(ratio))) + 1
        self.sigmas = res.sigma_min * ratio ** np.arange(n_lat)
        self.log_sigmas = np.log(self.sigmas)
        self._dls = np.log(ratio)
        if tables is None:
            psi = PsiTable(model)
            kernel = SymmetricKernel(model, psi=psi, n_panels=res.n_panels,
                                     n_body=res.n_body)
            tables = KernelTables(kernel, h=res.h, L=res.L,
                                  eta_min=0.9 * self.c.min() * res.sigma_min,
                                  eta_max=1.1 * self.c.max() * self.sigmas[-1],
                                  per_octave=res.table_per_octave)
        self.tables = tables
        self.quiet = quiet
        # index helpers
        idx = np.arange(self.N)
        self._absdiff = np.abs(idx[:, None] - idx[None, :]).astype(np.int32)
        self._colj = np.broadcast_to(idx[None, :], (self.N, self.N))
        self._fine_mask = self.tables.us <= 2.0 + 1e-12
        self._us_fine = self.tables.us[self._fine_mask]
        self._m2 = model.second_moment()
        # restricted subtables: coarse-lattice and fine-centre columns, full
        # second-moment integrals, and tail masses at the core cut choices
        tb = self.tables
        self._tab = {
            ("p", "lat"): np.ascontiguousarray(tb.P[:, tb.lat_idx]),
            ("pdot", "lat"): np.ascontiguousarray(tb.Pdot[:, tb.lat_idx]),
            ("p", "fine"): np.ascontiguousarray(tb.P[:, self._fine_mask]),
            ("pdot", "fine"): np.ascontiguousarray(tb.Pdot[:, self._fine_mask]),
        }
        self._t2_pdot = 2.0 * np.trapezoid(tb.us**2 * tb.Pdot, tb.us, axis=1)
        self._wc_grid = np.arange(2, int(round(0.9 / self.h)) + 1) * self.h
        tm = []
        for wc in self._wc_grid:
            mask = tb.us >= wc - 1e-12
            tm.append(2.0 * np.trapezoid(tb.P[:, mask], tb.us[mask], axis=1))
        self._tailmass_p = np.stack(tm, axis=1)  # (n_eta, n_wc)
        self._q0_cache: Dict[int, tuple] = {}
        self._p_cache: Dict[int, tuple] = {}
        self.q_slices: Optional[np.ndarray] = None
        self.trace: List[dict] = []

    # -- helpers --------------------------------------------------------------

    def _c_first_derivative(self):
        k = self.model.kappa
        if k.family == "cosine":
            return -k.amplitude * k.frequency * np.sin(k.frequency * self.x)
        return np.gradient(self.c, self.x)

    def _c_second_derivative(self):
        k = self.model.kappa
        if k.family == "cosine":
            return -k.amplitude * k.frequency**2 * np.cos(k.frequency * self.x)
        return np.gradient(np.gradient(self.c, self.x), self.x)

    def _log(self, msg):
        if not self.quiet:
            print(f"[parametrix] {msg}", flush=True)

    def _core_halfwidth(self, tau: float) -> float:
        w = 5.0 * self.bounds.Phi_inv(min(max(self.c.max() * tau, 1e-12), 0.9))
        w = min(max(w, 2.0 * self.h), self._wc_grid[-1])
        return float(self._wc_grid[np.argmin(np.abs(self._wc_grid - w))])

    def _resolution_gate(self, tau: float) -> float:
        """1 when the kernel spike at time gap tau is below grid resolution,
        fading to 0 once the grid resolves it.

        Moment corrections carry their own small model error (first-order
        frozen-coefficient expansion, fine-grid quadrature); once the plain
        h-trapezoid resolves the kernel it is more accurate than they are,
        so they are switched off.
        """
        width = self.bounds.Phi_inv(min(max(self.c.max() * tau, 1e-12), 0.9))
        u = width / self.h
        return float(np.clip((4.0 - u) / 2.0, 0.0, 1.0))

    def _combine(self, key, i1, w) -> np.ndarray:
        """4-point combination of a restricted subtable at precomputed weights."""
        tab = self._tab[key]
        return (w[:, 0, None] * tab[i1 - 1] + w[:, 1, None] * tab[i1]
                + w[:, 2, None] * tab[i1 + 1] + w[:, 3, None] * tab[i1 + 2])

    def _combine_1d(self, arr, i1, w) -> np.ndarray:
        return (w[:, 0] * arr[i1 - 1] + w[:, 1] * arr[i1]
                + w[:, 2] * arr[i1 + 1] + w[:, 3] * arr[i1 + 2])

    # -- kernel slices ----------------------------------------------------------

    def _kernel_slice(self, tau: float, kind: str):
        """Kernel matrix at time gap tau plus diagonal moment corrections.

        kind "q0": rows (c(x) - c(z)) * pdot(c(z) tau, x - z)  [x, z]
        kind "p" : rows p(c(z) tau, x - z)                      [x, z]
        Returns (M, a, b): contraction of a field G is
        h * M @ G + a * G + b * dG/dz|_diag.
        """
        eta = self.c * tau
        i1, w = self.tables._weights(eta)
        rows_lat = self._combine(("pdot" if kind == "q0" else "p", "lat"), i1, w)
        vals = rows_lat[self._colj, self._absdiff]
        if kind == "q0":
            M = (self.c[:, None] - self.c[None, :]) * vals
        else:
            M = vals
        gate = self._resolution_gate(tau)
        if gate > 0.0:
            a, b = self._corrections(tau, kind, M, i1, w)
            a *= gate
            b *= gate
        else:
            a = np.zeros(self.N)
            b = np.zeros(self.N)
        return M, a, b

    def _corrections(self, tau: float, kind: str, M: np.ndarray, i1, w):
        """Zeroth/first moment mismatch of the discrete kernel rows near the
        diagonal, used to correct the h-trapezoid against the unresolved
        kernel spike."""
        N, h = self.N, self.h
        wc = self._core_halfwidth(tau)
        kc = int(round(wc / h))

        # discrete core moments: sum over |z - x| <= wc of h * M * (z-x)^m
        m0_dis = np.zeros(N)
        m1_dis = np.zeros(N)
        for k in range(-kc, kc + 1):
            row_idx = np.arange(max(0, -k), N - max(0, k))
            dvals = M[row_idx, row_idx + k]
            m0_dis[row_idx] += h * dvals
            m1_dis[row_idx] += h * dvals * (k * h)

        # true core moments on the fine grid with eta frozen at x (first-order
        # eta correction) and exact sub-resolution identities
        eta_x = self.c * tau
        wf = self._us_fine
        sel = wf <= wc + 1e-12
        wf = wf[sel]
        rows_dot = self._combine(("pdot", "fine"), i1, w)[:, sel]
        eps = 0.05
        i1p, wp = self.tables._weights(eta_x * (1 + eps))
        i1m, wm = self.tables._weights(eta_x * (1 - eps))
        rows_ddot = (self._combine(("pdot", "fine"), i1p, wp)[:, sel]
                     - self._combine(("pdot", "fine"), i1m, wm)[:, sel]) \
            / (2 * eps * eta_x[:, None])
        cm = self.model.kappa.x_part(self.x[:, None] - wf[None, :])
        cp = self.model.kappa.x_part(self.x[:, None] + wf[None, :])
        cx = self.c[:, None]
        # sub-fine-resolution second moment of pdot (exact total equals m2)
        miss2 = self._m2 - self._combine_1d(self._t2_pdot, i1, w)
        if kind == "q0":
            dm = (cx - cm) * (rows_dot + (cm - cx) * tau * rows_ddot)
            dp = (cx - cp) * (rows_dot + (cp - cx) * tau * rows_ddot)
            m0_true = np.trapezoid(dm + dp, wf, axis=1) - 0.5 * self.cpp * miss2
            m1_true = np.trapezoid(wf * (dp - dm), wf, axis=1) \
                - self.cprime * miss2
        else:
            iwc = int(np.argmin(np.abs(self._wc_grid - wc)))
            core_mass = 1.0 - self._combine_1d(self._tailmass_p[:, iwc], i1, w)
            dm = (cm - cx) * tau * rows_dot
            dp = (cp - cx) * tau * rows_dot
            m0_true = core_mass + np.trapezoid(dm + dp, wf, axis=1) \
                + 0.5 * self.cpp * tau * miss2
            m1_true = np.trapezoid(wf * (dp - dm), wf, axis=1) \
                + self.cprime * tau * miss2
        return m0_true - m0_dis, m1_true - m1_dis

    def _lattice_kernel(self, k: int, kind: str):
        cache = self._q0_cache if kind == "q0" else self._p_cache
        if k not in cache:
            cache[k] = self._kernel_slice(self.sigmas[k], kind)
        return cache[k]

    def _column_corrections(self, s: float, Q0: np.ndarray):
        """Moment mismatch of the q0 spike in its first argument.

        q0(s, z, y) concentrates at z = y when s is small; integrating a
        smooth kernel against it on the h-grid misses the spike.  Returns
        (a_col, b_col): add K[x, y] * a_col[y] + dK/dz|_{z=y} * b_col[y] to
        the contraction int K(x, z) q0(s, z, y) dz.
        """
        N, h = self.N, self.h
        wc = self._core_halfwidth(s)
        kc = int(round(wc / h))
        m0_dis = np.zeros(N)
        m1_dis = np.zeros(N)
        for k in range(-kc, kc + 1):
            col_idx = np.arange(max(0, -k), N - max(0, k))
            vals = Q0[col_idx + k, col_idx]
            m0_dis[col_idx] += h * vals
            m1_dis[col_idx] += h * vals * (k * h)
        eta_y = self.c * s
        i1, w = self.tables._weights(eta_y)
        wf = self._us_fine
        sel = wf <= wc + 1e-12
        wf = wf[sel]
        rows_dot = self._combine(("pdot", "fine"), i1, w)[:, sel]
        cm = self.model.kappa.x_part(self.x[:, None] - wf[None, :])
        cp = self.model.kappa.x_part(self.x[:, None] + wf[None, :])
        cy = self.c[:, None]
        miss2 = self._m2 - self._combine_1d(self._t2_pdot, i1, w)
        dm = (cm - cy) * rows_dot     # v < 0 side: z = y - |v|
        dp = (cp - cy) * rows_dot     # v > 0 side
        m0_true = np.trapezoid(dm + dp, wf, axis=1) + 0.5 * self.cpp * miss2
        m1_true = np.trapezoid(wf * (dp - dm), wf, axis=1) + self.cprime * miss2
        gate = self._resolution_gate(s)
        return gate * (m0_true - m0_dis), gate * (m1_true - m1_dis)

    def _lattice_colcorr(self, k: int):
        if not hasattr(self, "_cc_cache"):
            self._cc_cache = {}
        if k not in self._cc_cache:
            Q0 = self._lattice_kernel(k, "q0")[0]
            self._cc_cache[k] = self._column_corrections(self.sigmas[k], Q0)
        return self._cc_cache[k]

    def _colcorr_at(self, s: float):
        """Column corrections at arbitrary s by interpolation of the lattice
        values (same log-time scheme as the slices)."""
        if not hasattr(self, "_cc_stacked"):
            K = len(self.sigmas)
            for k in range(K):
                self._lattice_colcorr(k)
            self._cc_stacked = (
                np.stack([self._cc_cache[k][0] for k in range(K)]),
                np.stack([self._cc_cache[k][1] for k in range(K)]))
        a_all, b_all = self._cc_stacked
        return (self._slice_at(a_all, s), self._slice_at(b_all, s))

    def _contract(self, kern, G, colcorr=None, taper: float = 0.0):
        M, a, b = kern
        out = self.h * (M @ G)
        out += a[:, None] * G
        gprime = np.empty_like(G)
        gprime[1:-1] = (G[2:] - G[:-2]) / (2.0 * self.h)
        gprime[0] = (G[1] - G[0]) / self.h
        gprime[-1] = (G[-1] - G[-2]) / self.h
        out += b[:, None] * gprime
        if colcorr is not None:
            ac, bc = colcorr
            dM = np.empty_like(M)
            dM[:, 1:-1] = (M[:, 2:] - M[:, :-2]) / (2.0 * self.h)
            dM[:, 0] = (M[:, 1] - M[:, 0]) / self.h
            dM[:, -1] = (M[:, -1] - M[:, -2]) / self.h
            corr = M * ac[None, :] + dM * bc[None, :]
            if taper > 0.0:
                # the column fix assumes the kernel row varies slowly across
                # the integrand spike; fade it out where both are localized
                r = self._absdiff * self.h
                corr = corr * np.clip(r / taper - 1.0, 0.0, 1.0)
            out += corr
        return out

    # -- q slices: interpolation in log time ------------------------------------

    def _slice_at(self, field: np.ndarray, s: float) -> np.ndarray:
        """Cubic interpolation of lattice slices in log time (power-law
        extrapolation below the lattice)."""
        ls = math.log(s)
        K = len(self.sigmas)
        if ls <= self.log_sigmas[0]:
            lo = np.abs(field[0]).max()
            hi = np.abs(field[1]).max()
            om = (math.log(max(hi, 1e-300)) - math.log(max(lo, 1e-300))) / self._dls
            om = min(max(om, -0.95), 3.0)
            return field[0] * (s / self.sigmas[0]) ** om
        pos = (ls - self.log_sigmas[0]) / self._dls
        i1 = int(np.clip(np.floor(pos), 1, K - 3))
        u = pos - i1
        w0 = -u * (u - 1.0) * (u - 2.0) / 6.0
        w1 = (u + 1.0) * (u - 1.0) * (u - 2.0) / 2.0
        w2 = -(u + 1.0) * u * (u - 2.0) / 2.0
        w3 = (u + 1.0) * u * (u - 1.0) / 6.0
        return (w0 * field[i1 - 1] + w1 * field[i1] + w2 * field[i1 + 1]
                + w3 * field[i1 + 2])

    def _time_nodes(self, t: float):
        """Integration nodes for int_0^t ds: tuples (s, lattice_idx, on_lattice, weight).

        Below t/2 the nodes are exact lattice times (integrand slices exact,
        kernel gap off-lattice); above, mirrored lattice gaps tau = t - s
        (kernel slices cached, integrand interpolated).  Endpoint stubs: a
        power-law panel at 0 and a short rectangle at t.
        """
        half = 0.5 * t
        lower = [(float(s), int(k), True) for k, s in enumerate(self.sigmas)
                 if s <= half]
        s_cut = lower[-1][0] if lower else 0.0
        upper = sorted((float(t - tau), int(k), False)
                       for k, tau in enumerate(self.sigmas)
                       if tau < half and t - tau > s_cut)
        nodes = lower + upper
        if not nodes:
            return []
        ss = np.array([n[0] for n in nodes])
        w = np.zeros_like(ss)
        if len(ss) > 1:
            d = np.diff(ss)
            w[:-1] += 0.5 * d
            w[1:] += 0.5 * d
        # bottom stub [0, s_0]: power-law profile ~ s**(1/alpha1 - 1)
        om = 1.0 / self.model.alpha1 - 1.0
        w[0] += ss[0] / (1.0 + om)
        # top stub [s_last, t]: integrand continuous up to t
        w[-1] += t - ss[-1]
        return [(s, k, lat, float(wt)) for (s, k, lat), wt in zip(nodes, w)]

    # -- Picard iteration ---------------------------------------------------

    def _weight_envelope(self, k: int) -> np.ndarray:
        """(G_{d0}^0 + G_0^{d0})(sigma_k, r) on the offset lattice (1-d)."""
        d0 = min(self.model.kappa.delta, self.model.alpha1 / 4.0)
        r = np.arange(self.N) * self.h
        s = self.sigmas[k]
        return (self.bounds.G_gd(d0, 0.0, s, r) + self.bounds.G_gd(0.0, d0, s, r))

    def _norm(self, field: np.ndarray) -> float:
        out = 0.0
        for k in range(len(self.sigmas)):
            env = self._weight_envelope(k)[self._absdiff]
            out = max(out, float(np.max(np.abs(field[k]) / env)))
        return out

    def solve(self, tol: float = 1e-8, max_terms: int = 24):
        """Run the Picard iteration; stores q slices and the term trace."""
        K, N = len(self.sigmas), self.N
        term = np.empty((K, N, N))
        for k in range(K):
            M, _, _ = self._lattice_kernel(k, "q0")
            term[k] = M
        total = term.copy()
        n0 = self._norm(term)
        self.trace = [{"term": 0, "weighted_norm": n0, "ratio": float("nan")}]
        self._log(f"q0 norm {n0:.4g}")
        if n0 == 0.0:
            self.q_slices = total
            return self
        prev_norm = n0
        for n in range(1, max_terms + 1):
            new = np.zeros_like(term)
            for i in range(K):
                t = self.sigmas[i]
                for s, kidx, is_lat, wt in self._time_nodes(t):
                    tau = t - s
                    if is_lat:
                        G = term[kidx]
                        kern = self._kernel_slice(tau, "q0")
                    else:
                        G = self._slice_at(term, s)
                        kern = self._lattice_kernel(kidx, "q0")
                    new[i] += wt * self._contract(kern, G)
            nn = self._norm(new)
            ratio = nn / prev_norm if prev_norm > 0 else 0.0
            self.trace.append({"term": n, "weighted_norm": nn, "ratio": ratio})
            self._log(f"term {n}: norm {nn:.4g} ratio {ratio:.3f}")
            total += new
            term = new
            if nn <= tol * n0:
                break
            if n >= 3 and ratio >= 1.0:
                raise ArithmeticError(
                    "Picard iteration is not contracting; refine the grid or "
                    "check that kappa lies in the admissible class")
            prev_norm = max(nn, 1e-300)
        self.q_slices = total
        return self

    # -- assembled kernel ----------------------------------------------------

    def q_at(self, s: float) -> np.ndarray:
        if self.q_slices is None:
            raise RuntimeError("call solve() first")
        return self._slice_at(self.q_slices, s)

    def phi_field(self, t: float) -> np.ndarray:
        """Correction phi_y(t, x) on the grid, indexed [x, y]."""
        if self.q_slices is None:
            raise RuntimeError("call solve() first")
        out = np.zeros((self.N, self.N))
        for s, kidx, is_lat, wt in self._time_nodes(t):
            tau = t - s
            if is_lat:
                G = self.q_slices[kidx]
                kern = self._kernel_slice(tau, "p")
                cc = self._lattice_colcorr(kidx)
            else:
                G = self._slice_at(self.q_slices, s)
                kern = self._lattice_kernel(kidx, "p")
                cc = self._colcorr_at(s)
            taper = self._core_halfwidth(tau) + self._core_halfwidth(s)
            out += wt * self._contract(kern, G, colcorr=cc, taper=taper)
        return out

    def frozen_field(self, t: float) -> np.ndarray:
        """p_y(t, x - y) on the grid, indexed [x, y]."""
        rows_lat = self.tables.rows_at_lattice(self.c * t, "p")
        return rows_lat[self._colj, self._absdiff]

    def p_field(self, t: float) -> np.ndarray:
        """Non-symmetric heat kernel p(t, x, y) on the grid, indexed [x, y]."""
        return self.frozen_field(t) + self.phi_field(t)


# ---------------------------------------------------------------------------
# generic (z-dependent kappa) path
# ---------------------------------------------------------------------------


class FrozenKernelBank:
    """Per-anchor frozen kernels p_y for z-dependent kappa.

    For separable coefficients kappa(x, z) = ka(x) + kb(x) w(z) the anchor
    symbols are exact linear combinations of two base symbols, so only two
    quadrature tables are built; a fully general callable falls back to one
    symbol table per anchor (slow, intended for coarse grids).
    """

    def __init__(self, model: ModelSpec, anchors: np.ndarray,
                 n_panels: int = 400, n_body: int = 250):
        self.model = model
        self.anchors = np.asarray(anchors, dtype=float)
        self.n_panels = n_panels
        self.n_body = n_body
        kap = model.kappa
        if kap.family == "cosine-z":
            base = PsiTable(model, None)
            wk = FreezeKernel(fn=lambda z: 1.0 / (1.0 + z**2), kappa0=0.0,
                              kappa1=1.0, provenance="window")
            wtab = PsiTable(model, wk)
            amp = kap.amplitude * np.cos(kap.frequency * self.anchors)
            self._psis = [_MixedPsi(base, wtab, kap.base, float(a)) for a in amp]
        elif not kap.z_dependent:
            base = PsiTable(model, None)
            self._psis = [base.scaled(float(v)) for v in kap.x_part(self.anchors)]
        else:
            self._psis = [PsiTable(model, kap.freeze(float(y))) for y in self.anchors]
        self.kernels = [SymmetricKernel(model, psi=ps, n_panels=n_panels,
                                        n_body=n_body) for ps in self._psis]

    def p_rows(self, tau: float, us: np.ndarray, kind: str = "p") -> np.ndarray:
        """Row m: p_{y_m}(tau, us) (kind "p") or its time derivative ("pdot")."""
        k = 0 if kind == "p" else -1
        return np.stack([sk._transform(tau, us, k=k) for sk in self.kernels])


class _MixedPsi:
    """psi = base_weight * psi_base + window_weight * psi_window."""

    def __init__(self, base: PsiTable, window: PsiTable, wb: float, ww: float):
        self.base, self.window, self.wb, self.ww = base, window, wb, ww

    def __call__(self, xi):
        return self.wb * self.base(xi) + self.ww * self.window(xi)

    def inv(self, w):
        w = np.atleast_1d(np.asarray(w, dtype=float))
        lo = np.full_like(w, np.log(1e-8))
        hi = np.full_like(w, np.log(1e9))
        for _ in range(80):
            mid = 0.5 * (lo + hi)
            above = self(np.exp(mid)) > w
            hi = np.where(above, mid, hi)
            lo = np.where(above, lo, mid)
        out = np.exp(0.5 * (lo + hi))
        return float(out[0]) if out.shape == (1,) else out


class GenericLevi:
    """Reference-grade construction for z-dependent kappa on coarse grids.

    Kernel slices are built by per-anchor Fourier inversion; no spike
    corrections are applied, so the grid must resolve the smallest lattice
    time (width(sigma_min) >~ h).  Used for cross-validation of the fast
    path and for genuinely z-dependent coefficients.
    """

    def __init__(self, model: ModelSpec, L: float = 6.0, h: float = 0.15,
                 sigma_min: float = 8e-3, sigma_max: float = 0.3,
                 per_octave: int = 3):
        model._require_d1()
        self.model = model
        n_side = int(round(L / h))
        self.x = np.arange(-n_side, n_side + 1) * h
        self.h = h
        self.N = self.x.size
        ratio = 2.0 ** (1.0 / per_octave)
        n_lat = int(np.ceil(np.log(sigma_max / sigma_min) / np.log(ratio))) + 1
        self.sigmas = sigma_min * ratio ** np.arange(n_lat)
        self.log_sigmas = np.log(self.sigmas)
        self._dls = np.log(ratio)
        self.bank = FrozenKernelBank(model, self.x)
        idx = np.arange(self.N)
        self._absdiff = np.abs(idx[:, None] - idx[None, :])
        self._offsets = np.arange(self.N) * h
        self.bounds = model.bounds()
        self._q0_cache: Dict[float, np.ndarray] = {}
        self.q_slices = None

    def _anchor_rows(self, tau: float, u_max: float, kind: str = "p"):
        """Per-anchor density rows on a fine shared offset grid (0 .. u_max)."""
        ug = np.concatenate([np.linspace(0.0, 1.0, 301),
                             np.linspace(1.0, u_max, 260)[1:]])
        rows = self.bank.p_rows(tau, ug, kind)
        return ug, rows

    def q0_slice(self, tau: float) -> np.ndarray:
        """q_0(tau, x, z) by the generator-difference quadrature.

        delta_{p_z} is evaluated through interpolated per-anchor rows, and
        the jump integral uses the same guarded geometric quadrature as
        `generator_apply_callable` (coarse cross-check quality).
        """
        key = round(float(tau), 12)
        if key in self._q0_cache:
            return self._q0_cache[key]
        mdl = self.model
        w_nodes = np.unique(np.concatenate([
            np.exp(np.linspace(np.log(1e-4), np.log(0.5), 40)),
            np.linspace(0.5, 6.0, 45)[1:],
            np.exp(np.linspace(np.log(6.0),
                               np.log((60.0 / mdl.b) ** (1 / mdl.beta)), 25))[1:],
        ]))
        Jw = mdl.J(w_nodes)
        span = 2.0 * abs(self.x[-1]) + w_nodes[-1] + 1.0
        ug, rows = self._anchor_rows(tau, span)
        out = np.empty((self.N, self.N))
        for m in range(self.N):  # anchor index (second argument)
            spl = PchipInterpolator(ug, rows[m], extrapolate=False)
            u = self.x - self.x[m]
            pp = np.nan_to_num(spl(np.abs(u[:, None] + w_nodes[None, :])))
            pm = np.nan_to_num(spl(np.abs(u[:, None] - w_nodes[None, :])))
            p0 = np.nan_to_num(spl(np.abs(u)))
            dd = pp + pm - 2.0 * p0[:, None]
            dk = (mdl.kappa(self.x[:, None], w_nodes[None, :])
                  - mdl.kappa(self.x[m], w_nodes[None, :]))
            out[:, m] = np.trapezoid(dd * dk * Jw[None, :], w_nodes, axis=1)
        self._q0_cache[key] = out
        return out

    def _slice_at(self, field, s):
        return LeviParametrix._slice_at(self, field, s)

    def _time_nodes(self, t):
        return LeviParametrix._time_nodes(self, t)

    def solve(self, tol: float = 1e-6, max_terms: int = 12):
        K, N = len(self.sigmas), self.N
        term = np.stack([self.q0_slice(s) for s in self.sigmas])
        total = term.copy()
        n0 = np.abs(term).max()
        if n0 == 0.0:
            self.q_slices = total
            return self
        for n in range(1, max_terms + 1):
            new = np.zeros_like(term)
            for i in range(K):
                t = self.sigmas[i]
                for s, kidx, is_lat, wt in self._time_nodes(t):
                    G = term[kidx] if is_lat else self._slice_at(term, s)
                    Q0 = self.q0_slice(t - s if is_lat else self.sigmas[kidx])
                    new[i] += wt * self.h * (Q0 @ G)
            total += new
            nn = np.abs(new).max()
            term = new
            if nn <= tol * n0:
                break
        self.q_slices = total
        return self

    def _p_matrix(self, tau: float) -> np.ndarray:
        prow = self.bank.p_rows(tau, self._offsets, "p")
        P = np.empty((self.N, self.N))
        for m in range(self.N):
            P[:, m] = prow[m][self._absdiff[:, m]]
        return P

    def p_field(self, t: float) -> np.ndarray:
        frozen = self._p_matrix(t)
        phi = np.zeros((self.N, self.N))
        for s, kidx, is_lat, wt in self._time_nodes(t):
            tau = t - s
            G = self.q_slices[kidx] if is_lat else self._slice_at(self.q_slices, s)
            phi += wt * self.h * (self._p_matrix(tau) @ G)
        return frozen + phi
