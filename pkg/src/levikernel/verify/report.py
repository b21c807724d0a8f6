"""Verification report plumbing: per-check records, constant fits, output files.

Every "there exists a constant c > 0" claim is operationalized as a finite
fitted constant (sup or inf of a ratio field over the grid) together with
its relative change under one refinement level; a check passes when the fit
is finite and, where stated, refinement-stable and within tolerance.
"""

import json
import os
import time
from dataclasses import asdict, dataclass, field
from typing import List, Optional

import numpy as np

SCHEMA_VERSION = 2

__all__ = ["CheckResult", "Report", "fit_constant", "FitError"]


class FitError(ArithmeticError):
    """A ratio field contained NaN/inf; carries the offending location."""


def fit_constant(ratio_field, grid_location=None):
    """(sup, inf, stability placeholder) of a finite ratio field.

    NaN or infinite entries abort with the flattened index (and the grid
    location when coordinate arrays are supplied).
    """
    arr = np.asarray(ratio_field, dtype=float)
    bad = ~np.isfinite(arr)
    if bad.any():
        idx = int(np.flatnonzero(bad.ravel())[0])
        loc = np.unravel_index(idx, arr.shape)
        where = f"index {tuple(int(v) for v in loc)}"
        if grid_location is not None:
            where += f" at {grid_location(loc)}"
        raise FitError(f"non-finite ratio ({arr.ravel()[idx]}) at {where}")
    return float(arr.max()), float(arr.min())


@dataclass
class CheckResult:
    check_id: str
    anchor: str                      # short tag of the estimate being verified
    passed: bool
    fitted: dict = field(default_factory=dict)
    tolerance: Optional[float] = None
    observed: Optional[float] = None
    stability_delta: Optional[float] = None
    grid: dict = field(default_factory=dict)
    wall_time: float = 0.0
    detail: str = ""

    def line(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        extra = ""
        if self.observed is not None and self.tolerance is not None:
            extra = f" observed={self.observed:.3g} tol={self.tolerance:g}"
        if self.stability_delta is not None:
            extra += f" stability={self.stability_delta:.3g}"
        return f"[{status}] {self.check_id}{extra}"


class Report:
    """Collects check results; serializes to a versioned report.json."""

    def __init__(self, suite: str, config: dict, seed: int = 0):
        self.suite = suite
        self.config = config
        self.seed = seed
        self.results: List[CheckResult] = []
        self._started = time.time()

    def add(self, result: CheckResult):
        self.results.append(result)
        print(result.line(), flush=True)

    def run_check(self, check_id, anchor, fn, **kw):
        """Run fn() -> CheckResult fields dict; time it; record failures."""
        t0 = time.time()
        try:
            fields = fn()
            res = CheckResult(check_id=check_id, anchor=anchor,
                              wall_time=time.time() - t0, **fields)
        except Exception as exc:  # noqa: BLE001 - report and continue
            res = CheckResult(check_id=check_id, anchor=anchor, passed=False,
                              wall_time=time.time() - t0,
                              detail=f"{type(exc).__name__}: {exc}")
        self.add(res)
        return res

    @property
    def all_passed(self) -> bool:
        return all(r.passed for r in self.results)

    def to_dict(self) -> dict:
        return {
            "schema_version": SCHEMA_VERSION,
            "suite": self.suite,
            "seed": self.seed,
            "config": self.config,
            "timestamp": time.strftime("%Y-%m-%dT%H:%M:%SZ", time.gmtime()),
            "wall_time": time.time() - self._started,
            "all_passed": self.all_passed,
            "checks": [asdict(r) for r in self.results],
        }

    def save(self, out_dir: str):
        os.makedirs(out_dir, exist_ok=True)
        path = os.path.join(out_dir, "report.json")
        with open(path, "w") as fh:
            json.dump(self.to_dict(), fh, indent=2, sort_keys=True,
                      default=_json_default)
            fh.write("\n")
        return path


def _json_default(obj):
    if isinstance(obj, (np.floating, np.integer)):
        return obj.item()
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    raise TypeError(f"not JSON serializable: {type(obj)}")


def write_csv(out_dir: str, name: str, header: str, rows) -> str:
    os.makedirs(out_dir, exist_ok=True)
    path = os.path.join(out_dir, name)
    with open(path, "w") as fh:
        fh.write(header.rstrip("\n") + "\n")
        for row in rows:
            fh.write(",".join(f"{v:.17g}" if isinstance(v, float) else str(v)
                              for v in row) + "\n")
    return path
