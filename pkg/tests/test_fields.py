import json

import numpy as np
import pytest

from levikernel.fields import KernelField, PairField


def test_kernel_field_validation():
    ts = np.array([0.1, 0.2])
    xs = np.linspace(-1, 1, 5)
    with pytest.raises(ValueError):
        KernelField(ts, xs, np.zeros((3, 5)))
    fld = KernelField(ts, xs, np.zeros((2, 5)))
    assert fld.worst_negativity() == 0.0


def test_negativity_policy():
    ts = np.array([0.1])
    xs = np.linspace(-1, 1, 5)
    vals = np.full((1, 5), 0.5)
    vals[0, 2] = -5e-11
    fld = KernelField(ts, xs, vals)
    assert fld.check_nonnegative() == pytest.approx(-5e-11)
    clamped = fld.clamped()
    assert clamped.values.min() == 0.0
    vals[0, 2] = -1e-8
    bad = KernelField(ts, xs, vals)
    with pytest.raises(ArithmeticError):
        bad.check_nonnegative()


def test_symmetry_defect():
    xs = np.linspace(-2, 2, 9)
    vals = np.exp(-xs**2)[None, :].copy()
    fld = KernelField(np.array([0.1]), xs, vals)
    assert fld.symmetry_defect() == 0.0
    vals2 = vals.copy()
    vals2[0, -1] += 1e-3
    assert KernelField(np.array([0.1]), xs, vals2).symmetry_defect() == \
        pytest.approx(1e-3)


def test_roundtrip_precision(tmp_path):
    ts = np.array([0.123456789012345])
    xs = np.linspace(-1, 1, 11)
    vals = np.sin(xs)[None, :] * np.pi
    fld = KernelField(ts, xs, vals, meta={"note": "test"})
    base = str(tmp_path / "f")
    fld.save(base)
    back = KernelField.load(base)
    # 17 significant digits round-trip doubles exactly
    assert np.array_equal(back.values, vals)
    assert back.meta["note"] == "test"


def test_pair_field_export(tmp_path):
    xs = np.linspace(-1, 1, 4)
    pf = PairField(0.25, xs, xs, np.outer(xs, xs), meta={"k": 1})
    base = str(tmp_path / "pair")
    pf.save(base)
    doc = json.loads(open(base + ".json").read())
    assert doc["t"] == 0.25
    lines = open(base + ".csv").read().strip().split("\n")
    assert lines[0] == "t,x,y,value"
    assert len(lines) == 17
