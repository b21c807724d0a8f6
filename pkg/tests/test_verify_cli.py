import json
import os
import re
import subprocess
import sys

import numpy as np
import pytest

from levikernel.verify.cli import main
from levikernel.verify.report import CheckResult, FitError, Report, fit_constant

CONFIG = os.path.join(os.path.dirname(__file__), "..", "configs",
                      "default.json")


def test_fit_constant_cases():
    sup, inf = fit_constant(np.full((4, 5), 2.5))
    assert sup == 2.5 and inf == 2.5
    field = np.ones((3, 3))
    field[1, 2] = np.inf
    with pytest.raises(FitError) as err:
        fit_constant(field, grid_location=lambda loc: f"t=0.1 x={loc[1]}")
    assert "(1, 2)" in str(err.value)
    assert "x=2" in str(err.value)


def test_unknown_suite_exit_code(tmp_path):
    rc = main(["run", "--config", CONFIG, "--suite", "bogus",
               "--out", str(tmp_path)])
    assert rc == 2


def test_bad_config_exit_code(tmp_path):
    bad = tmp_path / "bad.json"
    bad.write_text(json.dumps({"alpha": 3.0}))
    rc = main(["run", "--config", str(bad), "--suite", "scale",
               "--out", str(tmp_path)])
    assert rc == 2
    missing = tmp_path / "nope.json"
    rc = main(["run", "--config", str(missing), "--suite", "scale",
               "--out", str(tmp_path)])
    assert rc == 2


def test_scale_suite_green_and_idempotent(tmp_path):
    out1 = tmp_path / "run1"
    out2 = tmp_path / "run2"
    rc1 = main(["run", "--config", CONFIG, "--suite", "scale",
                "--out", str(out1), "--seed", "3"])
    rc2 = main(["run", "--config", CONFIG, "--suite", "scale",
                "--out", str(out2), "--seed", "3"])
    assert rc1 == 0 and rc2 == 0
    r1 = json.loads((out1 / "report.json").read_text())
    r2 = json.loads((out2 / "report.json").read_text())
    assert r1["all_passed"] and r2["all_passed"]

    def strip(doc):
        doc = dict(doc)
        doc.pop("timestamp")
        doc.pop("wall_time")
        for c in doc["checks"]:
            c.pop("wall_time")
        return doc

    assert strip(r1) == strip(r2)
    # schema basics
    assert r1["schema_version"] >= 1
    ids = [c["check_id"] for c in r1["checks"]]
    assert len(ids) == len(set(ids))
    # per-check CSV artifacts exist
    assert (out1 / "scale_time_convolution.csv").exists()


def test_report_records_failures(tmp_path):
    rep = Report("demo", {})

    def boom():
        raise ArithmeticError("synthetic failure")

    res = rep.run_check("demo.boom", "none", boom)
    assert not res.passed
    assert "synthetic failure" in res.detail
    assert not rep.all_passed
    path = rep.save(str(tmp_path))
    doc = json.loads(open(path).read())
    assert doc["all_passed"] is False


def test_cli_entrypoint_help():
    proc = subprocess.run([sys.executable, "-m", "levikernel.verify.cli"],
                          capture_output=True, text=True)
    assert proc.returncode == 2
