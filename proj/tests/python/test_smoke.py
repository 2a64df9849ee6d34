import json
import math

import pytest

import pulselab


def test_catalog_lists_the_shipped_pulses():
    names = pulselab.catalog_names()
    for n in ("RECT", "CORPSE", "SCORPSE", "SYM2ND", "ASYM2ND", "CLASS2ND"):
        assert n in names
    assert [p["name"] for p in json.loads(pulselab.catalog_json())] == names


def test_first_order_integrals():
    s, c = pulselab.first_order_integrals("SCORPSE", 1.0)
    tau = pulselab.tau_p("SCORPSE", 1.0)
    assert abs(s) < 1e-9 * tau and abs(c) < 1e-9 * tau
    s, _ = pulselab.first_order_integrals("RECT", 1.0)
    assert s == pytest.approx(2 * pulselab.tau_p("RECT", 1.0) / math.pi, rel=1e-12)


@pytest.mark.parametrize("name,factor", [("CORPSE", 3.0), ("SCORPSE", 2.0)])
def test_i32_closed_forms(name, factor):
    got = pulselab.evaluate_i32(name, v=10.0, model="exponential", gamma=0.01)
    assert got == pytest.approx(factor * math.pi * 0.01 / 1000.0, rel=1e-6)


def test_gaussian_has_no_anomalous_term():
    assert pulselab.evaluate_i32("CORPSE", model="gaussian", gamma=0.1) == 0.0


def test_frobenius_of_a_z_rotation():
    eps = 1e-3
    df2, partials = pulselab.frobenius(
        complex(math.cos(eps), -math.sin(eps)), 0, 0, complex(math.cos(eps), math.sin(eps))
    )
    assert df2 == pytest.approx(4.0 / 3.0 * math.sin(eps) ** 2, rel=1e-12)
    assert partials[0] == pytest.approx(2 * math.sin(eps) ** 2, rel=1e-12)


def test_nogo_report_is_positive():
    r = json.loads(pulselab.nogo_report("SCORPSE", 512))
    assert r["i32_from_b"] > 0.0


def test_small_scaling_run_is_deterministic():
    kw = dict(model="gaussian", gamma=0.1, inv_v=[1e-2, 2e-2, 4e-2], realizations=2000, steps=64, seed=3)
    a = pulselab.scaling(["RECT"], **kw)
    b = pulselab.scaling(["RECT"], workers=1, **kw)
    assert a == b
    assert a[1]["RECT"] == pytest.approx(1.0, abs=0.1)


def test_bad_input_raises():
    with pytest.raises(ValueError):
        pulselab.evaluate_i32("CORPSE", gamma=-1.0)
    with pytest.raises(Exception):
        pulselab.tau_p("NOPE", 1.0)
