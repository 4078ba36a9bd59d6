import math

import numpy as np
import pytest
from hypothesis import given, strategies as st
from hypothesis.extra.numpy import arrays
from scipy import integrate

from orlicz_kit import generators as gen
from orlicz_kit.errors import InputError, IntegrityError, UnsupportedError
from orlicz_kit.field import (BoxGrid, ScalarField, format_field, holder_check, in_lphi, luxemburg_norm,
                              modular, norm_modular_bounds, parse_field, read_field, write_field)
from orlicz_kit.phi import PhiFunction, phi_from_descriptor

P2 = phi_from_descriptor("power:p=2")
RAMP = phi_from_descriptor("ramp")


def trapz_nd(grid, vals):
    """Independent tensor trapezoid rule via scipy."""
    out = vals
    for k in reversed(range(grid.n)):
        out = integrate.trapezoid(out, grid.axis(k), axis=k)
    return float(out)


# ---------------------------------------------------------------- grids

def test_grid_parse_and_spec():
    g = BoxGrid.parse("-1:1:5, 0:2:3")
    assert g.n == 2 and g.shape == (5, 3) and g.size == 15
    assert g.spacing == (0.5, 1.0) and g.cell_volume == 0.5 and g.volume == 4.0
    assert BoxGrid.parse(g.spec()) == g


@pytest.mark.parametrize("bad", ["", "0:1", "1:0:5", "0:1:1", "0:1:5,0:1:5,0:1:5,0:1:5", "a:b:c"])
def test_grid_parse_errors(bad):
    with pytest.raises(InputError):
        BoxGrid.parse(bad)


@given(st.lists(st.integers(2, 9), min_size=1, max_size=3))
def test_grid_weights_sum_to_volume(counts):
    g = BoxGrid([(0.0, 1.5)] * len(counts), counts)
    assert g.weights.sum() == pytest.approx(g.volume, rel=1e-12)


@given(st.integers(2, 20), st.integers(2, 20))
def test_node_bijection(m1, m2):
    g = BoxGrid([(0.0, 1.0), (-2.0, 3.0)], [m1, m2])
    pts = g.points.reshape(-1, 2)
    assert len({tuple(p) for p in pts}) == g.size
    idx = (m1 - 1, m2 // 2)
    assert np.allclose(g.node(idx), g.points[idx], rtol=0, atol=1e-14)


def test_refine():
    g = BoxGrid.parse("0:1:5,0:2:9")
    r = g.refine()
    assert r.counts == (9, 17) and r.is_refinement_of(g) and not g.is_refinement_of(r)
    assert np.array_equal(r.points[::2, ::2], g.points)


# ---------------------------------------------------------------- modular

def test_modular_zero_field(unit33):
    for desc in ("power:p=2", "ramp", "orlicz:profile=exp"):
        assert modular(phi_from_descriptor(desc), ScalarField.zeros(unit33)) == 0.0


def test_modular_ramp_of_one_is_zero(unit33):
    assert modular(RAMP, gen.const(unit33, 1.0)) == 0.0


@given(c=st.floats(0, 100))
def test_modular_power_two_constant(c):
    g = BoxGrid.parse("0:1:9,0:1:9")
    assert modular(P2, gen.const(g, c)) == pytest.approx(c * c, rel=1e-12, abs=1e-300)


def test_modular_matches_independent_trapezoid(unit33):
    f = gen.sine(unit33, offset=1.0)
    phi = phi_from_descriptor("double_phase:p=2,q=3,a=affine,a.c0=0.5,a.c1=1")
    ref = trapz_nd(unit33, phi(unit33.points, np.abs(f.values)))
    assert modular(phi, f) == pytest.approx(ref, rel=1e-12)


def test_modular_infinite_node_with_weight(unit33):
    vals = np.ones(unit33.shape)
    vals[3, 3] = math.inf
    assert modular(P2, ScalarField(unit33, vals)) == math.inf


def test_null_mask_removes_singular_nodes(unit33):
    v = gen.inv_abs(unit33, 0, 0.5, 0.5)
    assert v.null_mask.sum() == 33 and np.isinf(v.values[16]).all()
    assert math.isfinite(modular(P2, v))


def test_grid_domain_mismatch():
    g = BoxGrid.parse("0:3:5,0:1:5")
    phi = phi_from_descriptor("power:p=2", ((0.0, 1.0), (0.0, 1.0)))
    with pytest.raises(InputError):
        modular(phi, gen.const(g, 1.0))


# ---------------------------------------------------------------- norm

def test_norm_power_two_of_one(unit33):
    r = luxemburg_norm(P2, gen.const(unit33, 1.0))
    assert r.value == pytest.approx(1.0, abs=1e-9)
    assert r.lam_lo <= r.value <= r.lam_hi and r.modular_at_hi <= 1.0


def test_norm_ramp_of_one(unit33):
    # max(1/lam - 1, 0) <= 1 iff lam >= 1/2
    assert luxemburg_norm(RAMP, gen.const(unit33, 1.0)).value == pytest.approx(0.5, abs=1e-9)


def test_gate_witness_norm_and_modular():
    g = BoxGrid.parse("-1:1:129,0:1:65")
    gate = phi_from_descriptor("radial_gate", g.extents)
    v = gen.inv_abs(g, 0, 0.0, 1.0)
    assert modular(gate, v) == 0.0
    assert luxemburg_norm(gate, v).value == pytest.approx(1.0, abs=1e-9)


def test_norm_zero_and_infinite(unit33):
    assert luxemburg_norm(P2, ScalarField.zeros(unit33)).value == 0.0
    vals = np.ones(unit33.shape)
    vals[0, 0] = math.inf
    assert luxemburg_norm(P2, ScalarField(unit33, vals)).value == math.inf


class _Bumpy(PhiFunction):
    """Decreasing on part of the range: the bracket search sees rho grow with lambda."""

    def _value(self, x, t):
        t = np.asarray(t, dtype=float)
        return np.where(t <= 2, t * t, np.where(t <= 8, 3.0, 2.0)) * np.ones(x.shape[:-1])


def test_norm_detects_non_monotone_modular(unit33):
    with pytest.raises(IntegrityError):
        luxemburg_norm(_Bumpy(), gen.const(unit33, 10.0))


fields = arrays(np.float64, (7, 6), elements=st.floats(0, 50, allow_nan=False))
NORM_PHIS = ["power:p=1", "power:p=2", "power:p=3.5", "orlicz:profile=exp", "orlicz:profile=tlog",
             "double_phase:p=2,q=3,a=affine,a.c0=0.5,a.c1=1", "variable_exponent:p=affine,p.c0=1.5,p.c1=1", "ramp"]
SMALL = BoxGrid.parse("0:1:7,0:1:6")


@pytest.mark.parametrize("desc", NORM_PHIS)
@given(vals=fields)
def test_unit_ball(desc, vals):
    phi = phi_from_descriptor(desc)
    f = ScalarField(SMALL, vals)
    n = luxemburg_norm(phi, f).value
    if 0 < n < math.inf:
        assert modular(phi, f.scaled(1 / n)) <= 1 + 1e-6


@pytest.mark.parametrize("desc", NORM_PHIS)
@given(vals=fields, c=st.sampled_from([0.5, 2.0, 10.0]))
def test_homogeneity(desc, vals, c):
    phi = phi_from_descriptor(desc)
    f = ScalarField(SMALL, vals)
    n = luxemburg_norm(phi, f).value
    assert abs(luxemburg_norm(phi, f.scaled(c)).value - c * n) <= 1e-6 * c * n + 1e-300


@pytest.mark.parametrize("desc", NORM_PHIS)
@given(vals=fields)
def test_bisection_trace_monotone(desc, vals):
    phi = phi_from_descriptor(desc)
    r = luxemburg_norm(phi, ScalarField(SMALL, vals))
    pts = sorted(r.trace)
    for (l1, r1), (l2, r2) in zip(pts, pts[1:]):
        assert r1 >= r2
    assert r.lam_lo <= r.value <= r.lam_hi


@pytest.mark.parametrize("p", [1.0, 2.0, 3.0])
@given(vals=fields)
def test_p_power_matches_classical(p, vals):
    f = ScalarField(SMALL, vals)
    classical = trapz_nd(SMALL, vals ** p) ** (1 / p)
    assert luxemburg_norm(phi_from_descriptor(f"power:p={p}"), f).value == pytest.approx(
        classical, rel=1e-9, abs=1e-12)


@given(vals=fields, other=fields)
def test_norm_triangle(vals, other):
    f, g = ScalarField(SMALL, vals), ScalarField(SMALL, other)
    for desc in ("power:p=1.5", "orlicz:profile=exp"):
        phi = phi_from_descriptor(desc)
        assert luxemburg_norm(phi, f + g).value <= (luxemburg_norm(phi, f).value
                                                    + luxemburg_norm(phi, g).value) * (1 + 1e-8)


def test_in_lphi(unit33):
    m = in_lphi(P2, gen.const(unit33, 3.0))
    assert m["member"] and m["vanishes"] and m["norm"] == pytest.approx(3.0)
    vals = np.ones(unit33.shape)
    vals[5, 5] = math.inf
    assert not in_lphi(P2, ScalarField(unit33, vals))["member"]


# ---------------------------------------------------------------- Hoelder

def test_holder_equality_case(unit33):
    one = gen.const(unit33, 1.0)
    r = holder_check(P2, one, one)
    assert r.lhs == pytest.approx(1.0) and r.norm_g_conjugate == pytest.approx(0.5, abs=1e-9)
    assert r.rhs == pytest.approx(1.0, abs=1e-9) and r.passed


def test_holder_zero(unit33):
    r = holder_check(P2, ScalarField.zeros(unit33), gen.quadratic(unit33))
    assert r.lhs == 0.0 and r.passed


def test_holder_coordinates(unit33):
    r = holder_check(P2, gen.coordinate(unit33, 0), gen.coordinate(unit33, 1))
    assert r.lhs == pytest.approx(0.25, abs=1e-14) and r.passed


def test_holder_rejects_nonconvex(unit33):
    gate = phi_from_descriptor("radial_gate")
    with pytest.raises(UnsupportedError):
        holder_check(gate, gen.const(unit33, 1.0), gen.const(unit33, 1.0))


@given(vals=fields, other=fields, desc=st.sampled_from(NORM_PHIS))
def test_holder_property(vals, other, desc):
    r = holder_check(phi_from_descriptor(desc), ScalarField(SMALL, vals), ScalarField(SMALL, other))
    assert r.lhs <= r.rhs + 1e-6


# ---------------------------------------------------------------- norm vs modular

def test_bounds_small_norm(unit33):
    r = norm_modular_bounds(P2, gen.const(unit33, 0.25))
    assert r["norm"] == pytest.approx(0.25) and r["modular"] == pytest.approx(0.0625)
    assert r["small_norm"]["constant"] == pytest.approx(0.25) and not r["small_norm"]["violated"]


def test_bounds_growth(unit33):
    r = norm_modular_bounds(P2, gen.const(unit33, 4.0))
    assert r["norm"] == pytest.approx(4.0) and r["growth"]["rhs"] == pytest.approx(16.0)
    assert r["growth"]["constant"] == pytest.approx(0.25) and not r["growth"]["violated"]


def test_bounds_zero(unit33):
    r = norm_modular_bounds(P2, ScalarField.zeros(unit33))
    assert r["norm"] == 0.0 and r["modular"] == 0.0


def test_bounds_without_exponent(unit33):
    r = norm_modular_bounds(phi_from_descriptor("orlicz:profile=exp"), gen.const(unit33, 2.0))
    assert any("skipped" in n for n in r["notes"])


# ---------------------------------------------------------------- fieldv1

@given(vals=arrays(np.float64, (4, 3), elements=st.floats(-1e300, 1e300, allow_nan=False)))
def test_fieldv1_round_trip_bit_exact(vals):
    g = BoxGrid([(-0.1, 0.7), (1e-3, 3.0)], [4, 3])
    f = ScalarField(g, vals, "signed")
    back = parse_field(format_field(f))
    assert back.grid == g and np.array_equal(back.values, vals)


def test_fieldv1_header_and_inf(tmp_path):
    g = BoxGrid.parse("0:1:2,0:2:3")
    vals = np.arange(6.0).reshape(2, 3)
    vals[1, 2] = math.inf
    f = ScalarField(g, vals)
    text = format_field(f)
    assert text.splitlines()[0] == "fieldv1 2 2 3 0 1 0 2"
    assert "inf" in text
    path = tmp_path / "f.txt"
    write_field(f, path)
    back = read_field(path, inf_is_null=True)
    assert back.null_mask[1, 2] and back.null_mask.sum() == 1


@pytest.mark.parametrize("text", ["", "fieldv2 1 2 0 1\n1 2", "fieldv1 1 3 0 1\n1 2", "fieldv1 1 2 0 1\n1 x",
                                  "fieldv1 4 2 2 2 2 0 1 0 1 0 1 0 1"])
def test_fieldv1_malformed(text):
    with pytest.raises(InputError):
        parse_field(text)


def test_read_missing_file(tmp_path):
    with pytest.raises(InputError):
        read_field(tmp_path / "nope.txt")
