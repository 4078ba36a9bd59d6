import math

import cvxpy as cp
import numpy as np
import pytest
from hypothesis import given, strategies as st

from orlicz_kit import generators as gen
from orlicz_kit.curve import Curve, CurveFamily, diagonal_family, segment_family, star_family
from orlicz_kit.errors import InputError, UnsupportedError
from orlicz_kit.field import BoxGrid, luxemburg_norm, modular
from orlicz_kit.modulus import (DiscreteProblem, SolverOptions, estimate_modulus_modular, estimate_modulus_norm,
                                modulus_properties_suite, verify_exceptional_witness)
from orlicz_kit.phi import phi_from_descriptor

UNIT = ((0.0, 1.0), (0.0, 1.0))
G17 = BoxGrid.parse("0:1:17,0:1:17")


def cvx_modular(phi_desc, family, grid):
    """Independent convex solve of the same discrete program."""
    prob = DiscreteProblem(phi_from_descriptor(phi_desc), family, grid)
    A = prob.A.toarray()
    w = grid.weights.reshape(-1)
    u = cp.Variable(A.shape[1], nonneg=True)
    kind, _, rest = phi_desc.partition(":")
    if kind == "power":
        p = float(rest.split("=")[1])
        obj = cp.sum(cp.multiply(w, u)) if p == 1 else cp.sum(cp.multiply(w, cp.power(u, p)))
    elif kind == "ramp":
        obj = cp.sum(cp.multiply(w, cp.pos(u - 1)))
    else:
        raise AssertionError(phi_desc)
    val = cp.Problem(cp.Minimize(obj), [A @ u >= 1]).solve(solver=cp.CLARABEL)
    return float(val)


FAMILIES = {
    "vertical": lambda: segment_family(1, 17, UNIT),
    "horizontal-sparse": lambda: segment_family(0, 5, UNIT),
    "diagonals": lambda: diagonal_family(9, UNIT, 0.5),
    "star": lambda: star_family(8, UNIT),
}


@pytest.mark.parametrize("fam", sorted(FAMILIES))
@pytest.mark.parametrize("phi_desc", ["power:p=2", "power:p=1.5", "power:p=3"])
def test_modular_matches_convex_oracle(fam, phi_desc):
    family = FAMILIES[fam]()
    ref = cvx_modular(phi_desc, family, G17)
    got = estimate_modulus_modular(phi_from_descriptor(phi_desc), family, G17)
    assert got.min_residual >= -1e-9
    assert got.modular_estimate >= ref * (1 - 1e-6)
    assert got.modular_estimate == pytest.approx(ref, rel=2e-2)


@pytest.mark.parametrize("fam", sorted(FAMILIES))
def test_power_norm_matches_oracle_root(fam):
    # for t^p the norm problem is the p-th root of the modular problem
    family = FAMILIES[fam]()
    ref = cvx_modular("power:p=2", family, G17) ** 0.5
    got = estimate_modulus_norm(phi_from_descriptor("power:p=2"), family, G17)
    lo, hi = got.norm_bracket
    assert hi == got.norm_estimate
    assert lo <= ref * (1 + 1e-6)
    assert got.norm_estimate == pytest.approx(ref, rel=3e-2)


def test_ramp_modular_oracle_is_zero():
    fam = segment_family(1, 17, UNIT)
    assert cvx_modular("ramp", fam, G17) == pytest.approx(0.0, abs=1e-7)
    got = estimate_modulus_modular(phi_from_descriptor("ramp"), fam, G17)
    assert got.modular_estimate <= 1e-3


def test_dense_vertical_power2_near_one():
    g = BoxGrid.parse("0:1:65,0:1:65")
    fam = segment_family(1, 129, g.extents)
    phi = phi_from_descriptor("power:p=2")
    a = estimate_modulus_modular(phi, fam, g)
    b = estimate_modulus_norm(phi, fam, g)
    assert a.modular_estimate == pytest.approx(1.0, abs=0.05)
    assert b.norm_estimate == pytest.approx(1.0, abs=0.05)


def test_ramp_norm_is_one_half():
    g = BoxGrid.parse("0:1:33,0:1:33")
    fam = segment_family(1, 65, g.extents)
    phi = phi_from_descriptor("ramp")
    a = estimate_modulus_modular(phi, fam, g)
    b = estimate_modulus_norm(phi, fam, g)
    # modular zero yet the norm modulus stays near 1/2: the converse implication fails
    assert a.modular_estimate <= 1e-3
    assert b.norm_estimate == pytest.approx(0.5, abs=0.05)


def test_single_curve_power1_shrinks_with_refinement():
    phi = phi_from_descriptor("power:p=1")
    fam = CurveFamily([Curve([[0.5, 0.0], [0.5, 1.0]])])
    vals = []
    for m in (17, 33, 65):
        g = BoxGrid.parse(f"0:1:{m},0:1:{m}")
        h = 1.0 / (m - 1)
        est = estimate_modulus_modular(phi, fam, g).modular_estimate
        # the unit column on the curve's nodes is admissible with modular h
        assert est <= h * (1 + 1e-2)
        vals.append(est)
    assert vals[0] > vals[1] > vals[2]


def test_small_norm_gives_small_modular():
    # single curve under t^2: norm modulus below 0.1 forces modular modulus below it too
    g = BoxGrid.parse("0:1:129,0:1:129")
    fam = CurveFamily([Curve([[0.5, 0.0], [0.5, 1.0]])])
    phi = phi_from_descriptor("power:p=2")
    n = estimate_modulus_norm(phi, fam, g).norm_estimate
    m = estimate_modulus_modular(phi, fam, g).modular_estimate
    assert n <= 0.1
    assert m <= n


@pytest.mark.parametrize("est", [estimate_modulus_modular, estimate_modulus_norm])
def test_empty_family_is_zero(est):
    r = est(phi_from_descriptor("power:p=2"), CurveFamily([]), G17)
    value = r.norm_estimate if est is estimate_modulus_norm else r.modular_estimate
    assert value == 0.0
    assert np.all(r.density.values == 0)


def test_nonconvex_phi_unsupported():
    with pytest.raises(UnsupportedError):
        estimate_modulus_modular(phi_from_descriptor("power:p=0.5"), segment_family(1, 3, UNIT), G17)


def test_curve_outside_box_rejected():
    fam = CurveFamily([Curve([[0.5, 0.0], [0.5, 1.5]])])
    with pytest.raises(InputError):
        estimate_modulus_modular(phi_from_descriptor("power:p=2"), fam, G17)


def test_unknown_method_rejected():
    with pytest.raises(InputError):
        SolverOptions(method="newton")


def test_density_norm_is_reported_upper_estimate():
    phi = phi_from_descriptor("power:p=2")
    fam = star_family(8, UNIT)
    r = estimate_modulus_norm(phi, fam, G17)
    assert luxemburg_norm(phi, r.density).value == pytest.approx(r.norm_estimate, rel=1e-9)
    assert r.min_residual >= -1e-9
    r2 = estimate_modulus_modular(phi, fam, G17)
    assert modular(phi, r2.density) == pytest.approx(r2.modular_estimate, rel=1e-9)
    assert r2.norm_estimate == pytest.approx(luxemburg_norm(phi, r2.density).value, rel=1e-12)


def test_subgradient_method_admissible():
    phi = phi_from_descriptor("power:p=2")
    fam = diagonal_family(9, UNIT, 0.5)
    r = estimate_modulus_modular(phi, fam, G17, SolverOptions(method="subgradient"))
    ref = cvx_modular("power:p=2", fam, G17)
    assert r.min_residual >= -1e-9
    assert ref * (1 - 1e-6) <= r.modular_estimate <= ref * 1.2


def test_refinement_does_not_increase_much():
    phi = phi_from_descriptor("power:p=2")
    fam = star_family(6, UNIT)
    a = estimate_modulus_norm(phi, fam, G17).norm_estimate
    b = estimate_modulus_norm(phi, fam, BoxGrid.parse("0:1:33,0:1:33")).norm_estimate
    assert b <= a * 1.02


def test_deterministic_runs():
    phi = phi_from_descriptor("power:p=2")
    fam = star_family(6, UNIT)
    a = estimate_modulus_norm(phi, fam, G17).as_dict(with_density=True)
    b = estimate_modulus_norm(phi, fam, G17).as_dict(with_density=True)
    assert a == b
    assert "extremal_density_fieldv1" in a


@given(st.lists(st.integers(0, 16), min_size=1, max_size=8, unique=True))
def test_subfamily_monotone(idx):
    phi = phi_from_descriptor("power:p=2")
    full = segment_family(1, 17, UNIT)
    sub = full.subset(idx)
    opts = SolverOptions(max_iter=4000)
    a = estimate_modulus_modular(phi, sub, G17, opts).modular_estimate
    b = estimate_modulus_modular(phi, full, G17, opts).modular_estimate
    assert a <= b * 1.02 + 1e-3


@given(st.sampled_from(sorted(FAMILIES)), st.sampled_from([1.5, 2.0, 3.0]))
def test_residuals_nonnegative(fam, p):
    r = estimate_modulus_modular(phi_from_descriptor(f"power:p={p}"), FAMILIES[fam](), G17,
                                 SolverOptions(max_iter=2000))
    assert r.min_residual >= -1e-9


def test_gate_witness_certified():
    g = BoxGrid([(-1.0, 1.0), (0.0, 1.0)], [65, 33])
    gf = g.refine()
    fam = segment_family(0, 9, g.extents)
    rep = verify_exceptional_witness(gen.inv_abs(g, 0, 0.0, 1.0), fam, phi_from_descriptor("radial_gate"),
                                     v_fine=gen.inv_abs(gf, 0, 0.0, 1.0))
    assert rep["certified"]
    assert rep["verdict"] == "certified-at-scale"
    assert rep["diverging"] == len(fam)


def test_bounded_witness_not_certified():
    rep = verify_exceptional_witness(gen.const(G17, 1.0), segment_family(1, 5, UNIT), phi_from_descriptor("power:p=2"))
    assert not rep["certified"]
    assert rep["diverging"] == 0


def test_witness_must_be_nonneg():
    with pytest.raises(InputError):
        verify_exceptional_witness(gen.coordinate(G17, 0, -0.5), segment_family(1, 3, UNIT),
                                   phi_from_descriptor("power:p=2"))


def test_properties_suite_nested_pairs():
    phi = phi_from_descriptor("power:p=2")
    full = segment_family(1, 17, UNIT)
    pairs = [(full.subset(range(0, 17, 2)), full), (full, full), (star_family(4, UNIT), star_family(8, UNIT))]
    rep = modulus_properties_suite(phi, pairs, G17)
    assert rep["pass"]
    assert all(r["monotone"] for r in rep["inclusion"])
    a, b = rep["inclusion"][1]["modular"]
    assert a == pytest.approx(b, rel=1e-9)


def test_properties_suite_union_of_exceptional():
    g = BoxGrid([(-1.0, 1.0), (0.0, 1.0)], [65, 33])
    phi = phi_from_descriptor("power:p=1.5")
    v1 = gen.inv_abs(g, 0, -0.5, 0.5)
    v2 = gen.inv_abs(g, 0, 0.5, 0.5)
    f1 = CurveFamily([Curve([[-0.5, 0.0], [-0.5, 1.0]]), Curve([[-0.5, 0.2], [-0.5, 0.7]])])
    f2 = CurveFamily([Curve([[0.5, 0.0], [0.5, 1.0]])])
    rep = modulus_properties_suite(phi, [], g, exceptional=[((f1, v1), (f2, v2))])
    u = rep["unions"][0]
    assert u["curves"] == 3
    assert u["certified"]
    assert u["triangle"]
    assert all(math.isfinite(n) for n in u["norms"])
