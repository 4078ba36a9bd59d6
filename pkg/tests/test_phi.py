import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from orlicz_kit.errors import InputError, IntegrityError
from orlicz_kit.phi import (ConjugatePhi, PhiFunction, conjugate_phi, eval_phi, left_inverse,
                            parse_descriptor, phi_from_descriptor)

BOX = ((-1.0, 1.0), (0.0, 1.0))

DESCRIPTORS = [
    "power:p=1",
    "power:p=2.5",
    "orlicz:profile=exp",
    "orlicz:profile=tlog",
    "variable_exponent:p=affine,p.c0=2.5,p.c1=1",
    "double_phase:p=2,q=4,a=affine,a.c0=1.2,a.c1=1",
    "ramp",
    "radial_gate",
    "power:p=2,scale=3",
    "ramp:dilate=2",
]

points = st.tuples(st.floats(-1, 1), st.floats(0, 1)).map(np.array)
ts = st.floats(0, 1e3, allow_nan=False)


def scan_inverse(phi, x, tau, hi, n=2_000_001):
    t = np.linspace(0.0, hi, n)
    v = phi(x, t)
    return t[np.argmax(v >= tau)]


def scan_conjugate(phi, x, s, hi, n=2_000_001):
    t = np.linspace(0.0, hi, n)
    return max(float(np.max(s * t - phi(x, t))), 0.0)


# ---------------------------------------------------------------- evaluation

def test_power_value():
    assert eval_phi(phi_from_descriptor("power:p=2"), [0.3, 0.4], 3.0) == 9.0


def test_ramp_values():
    phi = phi_from_descriptor("ramp")
    assert eval_phi(phi, [0.2, 0.2], 0.5) == 0.0
    assert eval_phi(phi, [0.2, 0.2], 2.0) == 1.0


def test_radial_gate_values():
    phi = phi_from_descriptor("radial_gate", BOX)
    assert eval_phi(phi, [0.5, 0.3], 1.0) == 0.0
    assert eval_phi(phi, [0.5, 0.3], 3.0) == 3.0
    # exactly at the threshold the integrand is still off
    assert eval_phi(phi, [0.5, 0.3], 2.0) == 0.0
    assert eval_phi(phi, [0.0, 0.3], 0.1) == 0.1


def test_domain_violation_is_input_error():
    phi = phi_from_descriptor("power:p=2", BOX)
    with pytest.raises(InputError):
        eval_phi(phi, [1.5, 0.5], 1.0)
    with pytest.raises(InputError):
        eval_phi(phi, [0.5, 0.5], -1.0)


def test_vectorized_evaluation_matches_pointwise():
    phi = phi_from_descriptor("double_phase:p=2,q=3,a=affine,a.c0=0.5,a.c1=1")
    x = np.array([[0.1, 0.2], [0.7, 0.9]])
    t = np.array([0.5, 2.0])
    vec = eval_phi(phi, x, t)
    for i in range(2):
        assert vec[i] == eval_phi(phi, x[i], t[i])


@pytest.mark.parametrize("desc", DESCRIPTORS)
def test_descriptor_round_trip(desc):
    phi = phi_from_descriptor(desc, BOX)
    again = phi_from_descriptor(phi.describe(), BOX)
    x = np.array([[0.3, 0.2], [-0.7, 0.9]])
    t = np.geomspace(1e-3, 1e3, 13)
    assert np.array_equal(phi(x[:, None, :], t[None, :]), again(x[:, None, :], t[None, :]))


@pytest.mark.parametrize("bad", ["", "nope:p=2", "power:p", "power:p=abc", "power:q=2", "double_phase:a=mystery"])
def test_bad_descriptors(bad):
    with pytest.raises(InputError):
        phi_from_descriptor(bad)


def test_invalid_coefficients_on_box():
    with pytest.raises(InputError):
        phi_from_descriptor("variable_exponent:p=affine,p.c0=1.5,p.c1=1", BOX)
    with pytest.raises(InputError):
        phi_from_descriptor("double_phase:p=2,q=4,a=affine,a.c0=0.2,a.c1=1", BOX)


def test_parse_descriptor_parts():
    assert parse_descriptor("power: p = 3 ") == ("power", {"p": "3"})


def test_scaled_and_dilated():
    base = phi_from_descriptor("power:p=2")
    s = phi_from_descriptor("power:p=2,scale=3")
    d = phi_from_descriptor("power:p=2,dilate=2")
    x = np.array([0.5, 0.5])
    assert eval_phi(s, x, 2.0) == 3 * eval_phi(base, x, 2.0)
    assert eval_phi(d, x, 2.0) == eval_phi(base, x, 4.0)


# ---------------------------------------------------------------- axioms

@pytest.mark.parametrize("desc", DESCRIPTORS)
@given(x=points)
def test_vanishes_at_zero(desc, x):
    assert eval_phi(phi_from_descriptor(desc, BOX), x, 0.0) == 0.0


@pytest.mark.parametrize("desc", DESCRIPTORS)
@given(x=points, a=ts, b=ts)
def test_non_decreasing(desc, x, a, b):
    phi = phi_from_descriptor(desc, BOX)
    lo, hi = min(a, b), max(a, b)
    assert eval_phi(phi, x, lo) <= eval_phi(phi, x, hi)


@pytest.mark.parametrize("desc", DESCRIPTORS)
@given(x=points, a=st.floats(1e-4, 1e3), b=st.floats(1e-4, 1e3))
def test_almost_increasing_quotient(desc, x, a, b):
    phi = phi_from_descriptor(desc, BOX)
    s, t = min(a, b), max(a, b)
    L = phi.L or 1.0
    lhs = eval_phi(phi, x, s) / s
    rhs = L * eval_phi(phi, x, t) / t
    assert lhs <= rhs * (1 + 1e-12) + 1e-300


@pytest.mark.parametrize("desc", DESCRIPTORS)
def test_unbounded(desc):
    phi = phi_from_descriptor(desc, BOX)
    x = np.array([[0.25, 0.5], [-0.9, 0.1], [0.0, 0.5]])
    assert np.all(phi(x, 1e8) > 1e6)


# ---------------------------------------------------------------- left inverse

def test_left_inverse_power():
    assert left_inverse(phi_from_descriptor("power:p=2"), [0.5, 0.5], 4.0) == pytest.approx(2.0, abs=1e-10)


@pytest.mark.parametrize("desc", DESCRIPTORS)
def test_left_inverse_of_zero(desc):
    assert left_inverse(phi_from_descriptor(desc, BOX), [0.5, 0.5], 0.0) == 0.0


def test_left_inverse_ramp_against_scan():
    phi = phi_from_descriptor("ramp")
    x = np.array([0.5, 0.5])
    got = left_inverse(phi, x, 0.5)
    assert got == pytest.approx(1.5, abs=1e-10)
    assert abs(got - scan_inverse(phi, x, 0.5, 4.0)) <= 4.0 / 2e6


def test_left_inverse_gate_jumps_to_threshold():
    phi = phi_from_descriptor("radial_gate", BOX)
    # for tau > 0 the smallest t with phi >= tau is the gate threshold 1/|y| (or tau above it)
    assert left_inverse(phi, [0.5, 0.5], 0.1) == pytest.approx(2.0, abs=1e-9)
    assert left_inverse(phi, [0.5, 0.5], 5.0) == pytest.approx(5.0, abs=1e-9)


def test_left_inverse_beyond_t_max_is_inf():
    phi = phi_from_descriptor("power:p=1")
    assert left_inverse(phi, [0.5, 0.5], 10.0, t_max=5.0) == math.inf


@given(tau=st.floats(0, 1e6), p=st.sampled_from([1.0, 1.5, 2.0, 3.0, 4.5]))
def test_left_inverse_power_closed_form(tau, p):
    phi = phi_from_descriptor(f"power:p={p}")
    got = left_inverse(phi, [0.5, 0.5], tau, tol=1e-10)
    assert abs(got - tau ** (1 / p)) <= 1e-10 * max(1.0, tau ** (1 / p)) + 1e-10


@pytest.mark.parametrize("desc", DESCRIPTORS)
@given(x=points, tau=st.floats(0, 1e4))
def test_left_inverse_consistency(desc, x, tau):
    phi = phi_from_descriptor(desc, BOX)
    tol = 1e-10
    t = left_inverse(phi, x, tau, tol)
    if math.isfinite(t):
        assert eval_phi(phi, x, t + 2 * tol) >= tau
        if t > 4 * tol:
            assert eval_phi(phi, x, max(t - 4 * tol * max(1, t), 0.0)) < tau or tau == 0


class _Decreasing(PhiFunction):
    def _value(self, x, t):
        return np.where(t > 5, 0.0, t) * np.ones(x.shape[:-1])


def test_left_inverse_detects_non_monotone():
    with pytest.raises(IntegrityError):
        left_inverse(_Decreasing(), [0.5, 0.5], 10.0)


# ---------------------------------------------------------------- conjugate

def test_conjugate_power_two():
    phi = phi_from_descriptor("power:p=2")
    x = np.array([0.5, 0.5])
    got = conjugate_phi(phi, x, 2.0)
    assert got == pytest.approx(1.0, abs=1e-9)
    assert got == pytest.approx(scan_conjugate(phi, x, 2.0, 4.0), abs=1e-9)


@pytest.mark.parametrize("desc", DESCRIPTORS)
def test_conjugate_at_zero(desc):
    assert conjugate_phi(phi_from_descriptor(desc, BOX), [0.5, 0.5], 0.0) == 0.0


def test_conjugate_ramp():
    phi = phi_from_descriptor("ramp")
    x = np.array([0.5, 0.5])
    got = conjugate_phi(phi, x, 0.5)
    assert got == pytest.approx(0.5, abs=1e-9)
    assert got == pytest.approx(scan_conjugate(phi, x, 0.5, 10.0), abs=1e-5)


@given(s=st.floats(0, 50), p=st.sampled_from([1.5, 2.0, 3.0]))
def test_conjugate_power_closed_form(s, p):
    # (t^p)^*(s) = (p - 1) (s / p)^(p / (p - 1))
    q = p / (p - 1)
    exact = (p - 1) * (s / p) ** q
    got = conjugate_phi(phi_from_descriptor(f"power:p={p}"), [0.5, 0.5], s)
    assert got == pytest.approx(exact, rel=1e-9, abs=1e-12)


@given(x=points, s=st.floats(0, 20), t=st.floats(0, 100))
def test_fenchel_young(x, s, t):
    phi = phi_from_descriptor("double_phase:p=2,q=3,a=affine,a.c0=1.5,a.c1=1", BOX)
    assert s * t <= eval_phi(phi, x, t) + conjugate_phi(phi, x, s) + 1e-9 * (1 + s * t)


def test_conjugate_integrand_is_a_phi_function():
    conj = ConjugatePhi(phi_from_descriptor("power:p=2"))
    x = np.array([0.5, 0.5])
    vals = conj(x, np.linspace(0, 10, 21))
    assert vals[0] == 0.0 and np.all(np.diff(vals) >= 0)
    assert conj(x, 4.0) == pytest.approx(4.0, abs=1e-9)
