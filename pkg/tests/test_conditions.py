import numpy as np
import pytest

from orlicz_kit.conditions import (Condition, SampleSpec, check_condition, check_equivalence,
                                   rescaled_beta)
from orlicz_kit.errors import InputError, UnsupportedError
from orlicz_kit.phi import phi_from_descriptor

WINDOW = ((-1.0, 1.0), (0.0, 1.0))
UNIT = ((0.0, 1.0), (0.0, 1.0))


@pytest.fixture(scope="module")
def window():
    return SampleSpec(WINDOW)


@pytest.fixture(scope="module")
def unit():
    return SampleSpec(UNIT)


def phi(desc, box=WINDOW):
    return phi_from_descriptor(desc, box)


def test_sample_spec_defaults(window):
    assert window.x_per_axis == 33 and window.t_count == 65 and window.beta_count == 129
    t = window.t_grid()
    assert t[0] == pytest.approx(1e-4) and t[-1] == pytest.approx(1e4) and len(t) == 65
    assert np.allclose(np.diff(np.log(t)), np.log(t[1] / t[0]))


def test_weak_a0_power(window):
    rep = check_condition(phi("power:p=2"), "weakA0", window)
    assert rep.verdict == "pass" and rep.witness["beta"] == pytest.approx(1.0, rel=1e-9)


def test_weak_a0_ramp_against_scan(window):
    rep = check_condition(phi("ramp"), "weakA0", window)
    # oracle: smallest t on a fine scan with max(t - 1, 0) >= 1
    t = np.linspace(0, 5, 500001)
    assert rep.verdict == "pass"
    assert rep.witness["beta"] == pytest.approx(t[np.argmax(np.maximum(t - 1, 0) >= 1)], abs=1e-5)


def test_weak_a0_gate_fails_with_witnesses(window):
    rep = check_condition(phi("radial_gate"), "weakA0", window)
    assert rep.verdict == "fail"
    assert rep.witness["refuted_candidates"] == window.beta_count
    for ce in rep.witness["counterexamples"]:
        assert ce["phi"] < 1.0
        y = abs(ce["x"][0])
        assert y == 0 or ce["beta"] <= 1 / y


def test_fixed_beta_failure_carries_point(window):
    rep = check_condition(phi("power:p=2"), Condition("weakA0", beta=0.5), window)
    assert rep.verdict == "fail" and "x" in rep.witness


def test_a0(unit):
    assert check_condition(phi("power:p=3", UNIT), "A0", unit).witness["beta"] == pytest.approx(1.0, rel=1e-9)
    rep = check_condition(phi("ramp", UNIT), "A0", unit)
    assert rep.verdict == "pass" and rep.witness["beta"] == pytest.approx(0.5, rel=1e-6)


def test_almost_monotone(unit):
    p2 = phi("power:p=2", UNIT)
    assert check_condition(p2, Condition("aInc", p=1.5), unit).verdict == "pass"
    assert check_condition(p2, Condition("aDec", p=2), unit).verdict == "pass"
    bad = check_condition(p2, Condition("aInc", p=3), unit)
    assert bad.verdict == "fail" and "t" in bad.witness or "x" in bad.witness


def test_a1(unit):
    assert check_condition(phi("power:p=2", UNIT), "A1", unit).verdict == "pass"
    assert check_condition(phi("radial_gate"), "A1", SampleSpec(WINDOW)).verdict == "fail"


def test_a2_unsupported():
    with pytest.raises(UnsupportedError):
        Condition("A2")


def test_unknown_condition():
    with pytest.raises(InputError):
        Condition("B7")


def test_equivalence_examples(unit):
    p2 = phi("power:p=2", UNIT)
    assert check_equivalence(p2, p2, 1.0, unit).verdict == "pass"
    two = phi("power:p=2,scale=2", UNIT)
    assert check_equivalence(p2, two, 2.0, unit).verdict == "pass"
    rep = check_equivalence(p2, phi("power:p=3", UNIT), 10.0, unit)
    assert rep.verdict == "fail" and "t" in rep.witness
    # oracle: at the witness the sandwich really fails
    t, x = rep.witness["t"], np.array(rep.witness["x"])
    lo, hi = phi("power:p=3", UNIT)(x, t / 10.0), phi("power:p=3", UNIT)(x, t * 10.0)
    assert not (lo <= p2(x, t) <= hi)


CORPUS = ["power:p=1", "power:p=2", "ramp", "orlicz:profile=exp",
          "double_phase:p=2,q=4,a=affine,a.c0=0,a.c1=1", "variable_exponent:p=affine,p.c0=1.5,p.c1=1"]


@pytest.mark.parametrize("desc", CORPUS)
def test_equivalence_reflexive(desc, unit):
    f = phi(desc, UNIT)
    assert check_equivalence(f, f, 1.0, unit).verdict == "pass"


@pytest.mark.parametrize("a,b,L", [("power:p=2", "power:p=2,scale=2", 2.0), ("power:p=2", "power:p=3", 10.0),
                                   ("ramp", "power:p=1", 4.0)])
def test_equivalence_symmetric(a, b, L, unit):
    fa, fb = phi(a, UNIT), phi(b, UNIT)
    assert check_equivalence(fa, fb, L, unit).verdict == check_equivalence(fb, fa, L, unit).verdict


def test_deterministic(window):
    a = check_condition(phi("radial_gate"), "weakA0", window).as_dict()
    b = check_condition(phi("radial_gate"), "weakA0", window).as_dict()
    assert a == b


@pytest.mark.parametrize("desc", ["ramp", "double_phase:p=2,q=4,a=affine,a.c0=0,a.c1=1"])
@pytest.mark.parametrize("delta", [0.5, 0.25])
def test_delta_rescaling(desc, delta, unit):
    f = phi(desc, UNIT)
    low = check_condition(f, Condition("weakA0", delta=delta), unit)
    assert low.verdict == "pass"
    a = check_condition(f, Condition("aInc", p=1), unit).witness["L"]
    beta = rescaled_beta(low.witness["beta"], delta, a)
    assert check_condition(f, Condition("weakA0", beta=beta), unit).verdict == "pass"


def test_rescaled_beta_formula():
    assert rescaled_beta(1.5, 0.5, 1.0) == 3.0
    assert rescaled_beta(1.0, 1.5, 1.0) == 1.0
    with pytest.raises(InputError):
        rescaled_beta(1.0, 0.0, 1.0)


def test_ramp_low_level_beta(unit):
    # max(t - 1, 0) >= 1/2 at t = 3/2
    rep = check_condition(phi("ramp", UNIT), Condition("weakA0", delta=0.5), unit)
    assert rep.witness["beta"] == pytest.approx(1.5, rel=1e-9)
