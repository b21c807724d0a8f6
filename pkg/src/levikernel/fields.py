"""Sampled kernel fields and their CSV + JSON-sidecar serialization."""

import json
import os
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

__all__ = ["KernelField", "PairField"]


@dataclass
class KernelField:
    """Function sampled on a (t, x) grid: rows are time slices.

    Values are expected to be densities up to inversion error: slightly
    negative entries (above -1e-10) are tolerated and reported; deeper
    negativity indicates a broken inversion.
    """

    ts: np.ndarray
    xs: np.ndarray
    values: np.ndarray
    meta: dict = field(default_factory=dict)

    NEG_TOL = 1e-10

    def __post_init__(self):
        self.ts = np.asarray(self.ts, dtype=float)
        self.xs = np.asarray(self.xs, dtype=float)
        self.values = np.asarray(self.values, dtype=float)
        if self.values.shape != (self.ts.size, self.xs.size):
            raise ValueError("values must have shape (len(ts), len(xs))")

    def worst_negativity(self) -> float:
        return float(min(self.values.min(), 0.0))

    def check_nonnegative(self):
        worst = self.worst_negativity()
        if worst < -self.NEG_TOL:
            raise ArithmeticError(f"field negativity {worst} below -{self.NEG_TOL}")
        return worst

    def symmetry_defect(self) -> float:
        """sup |v(t, x) - v(t, -x)| over grid points with a mirrored partner."""
        xs = self.xs
        order = np.argsort(xs)
        mirror = np.searchsorted(xs[order], -xs)
        ok = (mirror >= 0) & (mirror < xs.size)
        ok &= np.abs(xs[order][np.clip(mirror, 0, xs.size - 1)] + xs) < 1e-12
        cols = np.flatnonzero(ok)
        mcols = order[mirror[cols]]
        return float(np.abs(self.values[:, cols] - self.values[:, mcols]).max())

    def clamped(self) -> "KernelField":
        """Copy with negativity within tolerance clamped to zero."""
        self.check_nonnegative()
        out = KernelField(self.ts, self.xs, np.maximum(self.values, 0.0),
                          dict(self.meta))
        return out

    def save(self, path_base: str):
        """Write <base>.csv (t, x, value; 17 significant digits) and <base>.json."""
        os.makedirs(os.path.dirname(path_base) or ".", exist_ok=True)
        with open(path_base + ".csv", "w") as fh:
            fh.write("t,x,value\n")
            for i, t in enumerate(self.ts):
                for j, x in enumerate(self.xs):
                    fh.write(f"{t:.17g},{x:.17g},{self.values[i, j]:.17g}\n")
        with open(path_base + ".json", "w") as fh:
            json.dump({"ts": self.ts.tolist(), "xs": self.xs.tolist(),
                       "meta": self.meta}, fh, indent=2, sort_keys=True)

    @classmethod
    def load(cls, path_base: str) -> "KernelField":
        with open(path_base + ".json") as fh:
            side = json.load(fh)
        ts = np.asarray(side["ts"])
        xs = np.asarray(side["xs"])
        data = np.loadtxt(path_base + ".csv", delimiter=",", skiprows=1)
        vals = data[:, 2].reshape(ts.size, xs.size)
        return cls(ts, xs, vals, side.get("meta", {}))


@dataclass
class PairField:
    """Kernel sampled on a (t; x, y) grid for one time slice per row file.

    Serialized as CSV columns t, x, y, value with a JSON sidecar carrying
    construction metadata (iteration trace, fitted constants, tolerances).
    """

    t: float
    xs: np.ndarray
    ys: np.ndarray
    values: np.ndarray
    meta: dict = field(default_factory=dict)

    def save(self, path_base: str):
        os.makedirs(os.path.dirname(path_base) or ".", exist_ok=True)
        with open(path_base + ".csv", "w") as fh:
            fh.write("t,x,y,value\n")
            for i, x in enumerate(self.xs):
                for j, y in enumerate(self.ys):
                    fh.write(f"{self.t:.17g},{x:.17g},{y:.17g},"
                             f"{self.values[i, j]:.17g}\n")
        with open(path_base + ".json", "w") as fh:
            json.dump({"t": self.t, "xs": list(map(float, self.xs)),
                       "ys": list(map(float, self.ys)), "meta": self.meta},
                      fh, indent=2, sort_keys=True)
