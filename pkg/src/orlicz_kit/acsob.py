"""Absolute continuity diagnostics on lines and curves, gradients, Sobolev
reports and the geometric-subsequence construction for sequences tending to
zero in norm.

Absolute continuity is judged at two resolutions: a genuine jump keeps its
size when the grid is refined, while the increments of a Lipschitz function
shrink with the spacing.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from typing import Iterable, Optional

import numpy as np

from .curve import CurveFamily, constraint_matrix, default_step, sample_along
from .errors import InputError
from .field import BoxGrid, ScalarField, in_lphi, luxemburg_norm
from .modulus import SolverOptions, estimate_modulus_norm, verify_exceptional_witness
from .phi import PhiFunction

AC, NAC, INDETERMINATE = "AC-at-scale", "NAC", "indeterminate"

JUMP_FACTOR = 10.0   # default jump tolerance relative to the median fine increment
SHRINK = 1.5         # a jump that shrinks less than this between resolutions persists


@dataclass
class LineSlice:
    """Values of a field along one grid line parallel to ``axis``."""

    axis: int
    index: tuple          # node indices on the other axes
    coords: np.ndarray    # transverse coordinates
    z: np.ndarray         # coordinates along the axis
    values: np.ndarray

    def point(self, j: int) -> np.ndarray:
        """Grid node of the ``j``-th sample."""
        p = list(self.coords)
        p.insert(self.axis, self.z[j])
        return np.array(p)


def line_slices(u: ScalarField, axis: int, stride: int = 1):
    """All lines parallel to ``axis``; ``stride`` subsamples the transverse lattice."""
    g = u.grid
    others = [k for k in range(g.n) if k != axis]
    moved = np.moveaxis(u.values, axis, -1)
    z = g.axis(axis)
    ranges = [range(0, g.counts[k], stride) for k in others]
    for idx in itertools.product(*ranges):
        coords = np.array([g.axis(k)[i] for k, i in zip(others, idx)])
        yield LineSlice(axis, tuple(idx), coords, z, moved[idx])


def _increments(vals: np.ndarray) -> np.ndarray:
    with np.errstate(invalid="ignore"):
        d = np.abs(np.diff(vals))
    return np.where(np.isnan(d), np.inf, d)


def _classify(coarse: np.ndarray, fine: np.ndarray, h_c: float, h_f: float,
              jump_tol: Optional[float], scale: float):
    """Verdict for one line sampled at spacings ``h_c`` and ``h_f = h_c / 2``."""
    d_c = _increments(coarse)
    d_f = _increments(fine)
    if d_f.size == 0:
        return AC, {}
    fine_max = float(d_f.max())
    coarse_max = float(d_c.max()) if d_c.size else 0.0
    atol = 1e-12 * (1.0 + scale)
    tol = max(JUMP_FACTOR * float(np.median(d_f)), atol) if jump_tol is None else jump_tol
    slope = float(np.median(d_c)) / h_c if d_c.size else 0.0
    detail = {"fine_max": fine_max, "coarse_max": coarse_max, "jump_tol": tol,
              "location": int(np.argmax(d_f))}
    if fine_max <= max(tol, 2.0 * slope * h_f):
        return AC, detail
    if fine_max > tol and (math.isinf(fine_max) or coarse_max / fine_max < SHRINK):
        return NAC, detail
    return INDETERMINATE, detail


@dataclass
class ACReport:
    """Per-axis slice verdicts; ``axes[k]`` summarizes lines parallel to axis ``k``."""

    axes: list = field(default_factory=list)
    verdicts: dict = field(default_factory=dict)

    def nac_fraction(self, axis: int) -> float:
        return self.axes[axis]["nac_fraction"]

    def ac_fraction(self, axis: int) -> float:
        return self.axes[axis]["ac_fraction"]

    @property
    def acl(self) -> bool:
        """No axis has a positive (weighted) fraction of NAC slices."""
        return all(a["nac_fraction"] == 0 for a in self.axes)

    def as_dict(self, max_failing: int = 20) -> dict:
        axes = []
        for a in self.axes:
            d = dict(a)
            d["failing"] = a["failing"][:max_failing]
            d["failing_total"] = len(a["failing"])
            axes.append(d)
        return {"acl_at_scale": self.acl, "axes": axes}


def acl_check(coarse: ScalarField, fine: ScalarField, jump_tol: Optional[float] = None) -> ACReport:
    """Two-resolution ACL diagnostic.

    ``fine`` must live on ``coarse.grid.refine()``.  Lines are taken at the
    coarse transverse lattice (shared by both grids).  Fractions are weighted
    by the transverse trapezoid weights, as a surrogate for the measure of
    the set of bad lines.
    """
    if not fine.grid.is_refinement_of(coarse.grid):
        raise InputError("the fine field must sample the coarse grid refined once (m -> 2m - 1)")
    g = coarse.grid
    finite = np.abs(fine.values[np.isfinite(fine.values)])
    scale = float(finite.max()) if finite.size else 0.0
    report = ACReport()
    for k in range(g.n):
        h_c = g.spacing[k]
        h_f = fine.grid.spacing[k]
        others = [j for j in range(g.n) if j != k]
        tw = np.ones(())
        for j in others:
            tw = np.multiply.outer(tw, _w1d(g, j))
        tw = np.atleast_1d(tw).reshape(-1)
        verdicts = []
        failing = []
        for s_c, s_f in zip(line_slices(coarse, k), line_slices(fine, k, stride=2)):
            v, det = _classify(s_c.values, s_f.values, h_c, h_f, jump_tol, scale)
            verdicts.append(v)
            if v != AC:
                loc = det["location"]
                failing.append({"transverse": s_c.coords.tolist(), "verdict": v,
                                "between": [float(s_f.z[loc]), float(s_f.z[loc + 1])],
                                "fine_max": det["fine_max"], "coarse_max": det["coarse_max"]})
        verdicts = np.array(verdicts)
        total = tw.sum()
        frac = {name: float(tw[verdicts == name].sum() / total) for name in (AC, NAC, INDETERMINATE)}
        report.axes.append({"axis": k, "slices": int(verdicts.size), "nac_fraction": frac[NAC],
                            "ac_fraction": frac[AC], "indeterminate_fraction": frac[INDETERMINATE],
                            "nac_slices": int(np.sum(verdicts == NAC)), "failing": failing})
        report.verdicts[k] = verdicts
    return report


def _w1d(g: BoxGrid, k: int) -> np.ndarray:
    w = np.full(g.counts[k], g.spacing[k])
    w[[0, -1]] *= 0.5
    return w


# ---------------------------------------------------------------------------
# gradients and Sobolev reports


@dataclass
class GradientField:
    components: list
    magnitude: ScalarField


def gradient(u: ScalarField) -> GradientField:
    """Central differences inside, second-order one-sided differences at faces."""
    if not np.all(np.isfinite(u.values)):
        raise InputError("gradient needs a finite-valued field")
    g = u.grid
    parts = np.gradient(u.values, *g.spacing, edge_order=2)
    if g.n == 1:
        parts = [parts]
    comps = [ScalarField(g, p, "signed") for p in parts]
    mag = np.sqrt(sum(p * p for p in parts))
    return GradientField(comps, ScalarField(g, mag, "nonneg"))


def sobolev_report(phi: PhiFunction, coarse: ScalarField, fine: ScalarField,
                   jump_tol: Optional[float] = None) -> dict:
    """Orlicz class membership of ``u`` and ``|grad u|`` plus the ACL verdict.

    Norms are computed on the fine field.  Membership in the Sobolev class
    is reported as established only through the ACL route: both functions in
    the Orlicz class and no axis with NAC slices.
    """
    acl = acl_check(coarse, fine, jump_tol)
    u_member = in_lphi(phi, fine)
    finite = np.all(np.isfinite(fine.values))
    if finite:
        grad = gradient(fine)
        g_member = in_lphi(phi, grad.magnitude)
        g_norm = g_member["norm"]
    else:
        g_member = {"member": False, "norm": math.inf, "note": "field takes infinite values"}
        g_norm = math.inf
    established = bool(u_member["member"] and g_member["member"] and acl.acl)
    return {
        "u_in_lphi": u_member,
        "grad_in_lphi": g_member,
        "acl": acl.as_dict(),
        "sobolev_norm": u_member["norm"] + g_norm,
        "membership": "established via ACL route" if established else "not established via ACL route",
    }


# ---------------------------------------------------------------------------
# curves


def acc_check(coarse: ScalarField, fine: ScalarField, family: CurveFamily, phi: Optional[PhiFunction] = None,
              witness: Optional[ScalarField] = None, witness_fine: Optional[ScalarField] = None,
              jump_tol: Optional[float] = None, growth: float = 4.0, absolute: float = 1e3,
              estimate_modulus: bool = False, grid: Optional[BoxGrid] = None,
              opts: Optional[SolverOptions] = None) -> dict:
    """Flag curves along which ``u`` jumps persistently, then try to cover them
    by an exceptional-family witness.

    The coarse field is sampled at arc-length step ``h_c`` (its finest
    spacing) and the fine field at ``h_c / 2``; the slice criterion is then
    applied along arc length.  With ``estimate_modulus`` the norm-based
    modulus of the flagged family is estimated on ``grid`` (default: the
    coarse grid) when no witness certifies it.
    """
    if not fine.grid.is_refinement_of(coarse.grid):
        raise InputError("the fine field must sample the coarse grid refined once (m -> 2m - 1)")
    family.check_inside(coarse.grid)
    h_c = min(coarse.grid.spacing)
    h_f = h_c / 2
    finite = np.abs(fine.values[np.isfinite(fine.values)])
    scale = float(finite.max()) if finite.size else 0.0
    flagged, details = [], []
    for j, gamma in enumerate(family):
        _, vc, _ = sample_along(coarse, gamma, h_c)
        _, vf, _ = sample_along(fine, gamma, h_f)
        # the sample spacing along the curve may be below the nominal step
        sc = gamma.length / max(len(vc) - 1, 1)
        sf = gamma.length / max(len(vf) - 1, 1)
        v, det = _classify(vc, vf, sc, sf, jump_tol, scale)
        details.append({"curve": j, "verdict": v, **{k: det[k] for k in ("fine_max", "coarse_max") if k in det}})
        if v == NAC:
            flagged.append(j)
    nac = family.subset(flagged, "nac")
    out = {"curves": len(family), "nac_curves": flagged, "per_curve": details}
    if not flagged:
        out["verdict"] = "vacuously ACC"
        return out
    if witness is not None:
        if phi is None:
            raise InputError("a witness check needs the integrand")
        rep = verify_exceptional_witness(witness, nac, phi, growth, absolute, v_fine=witness_fine)
        out["witness"] = {k: rep[k] for k in ("verdict", "certified", "in_lphi", "curves", "diverging")}
        out["verdict"] = "ACC-certified-at-scale" if rep["certified"] else "ACC-violated-at-scale"
    else:
        out["verdict"] = "ACC-violated-at-scale"
    if out["verdict"] != "ACC-certified-at-scale" and estimate_modulus and phi is not None and phi.is_convex:
        res = estimate_modulus_norm(phi, nac, grid or coarse.grid, opts)
        out["nac_modulus_estimate"] = res.norm_estimate
    return out


# ---------------------------------------------------------------------------
# subsequences of sequences tending to zero in norm


def fuglede_subsequence(phi: PhiFunction, seq: Iterable[ScalarField], family: CurveFamily,
                        decay_tol: float = 1e-3, step: Optional[float] = None,
                        max_k: Optional[int] = None) -> dict:
    """Greedy geometric subsequence ``||v_k|| <= 2^-k`` and its majorant.

    ``seq`` may be any iterable (fields are consumed once; only selected
    members are kept).  For every curve the integrals ``int v_k ds`` are
    tracked; a curve is flagged when its terms fail to decay (the last one
    is at least ``decay_tol`` and the late terms average no less than the
    early ones), the discrete sign of a divergent majorant integral.  The flagged family is certified by ``w / m`` with
    ``w = sum v_k`` and ``m`` the smallest integral of ``w`` over it.
    """
    selected, norms_seen = [], []
    k = 1
    grid = None
    for i, u in enumerate(seq, start=1):
        if u.kind != "nonneg":
            raise InputError("sequence members must be nonneg")
        if grid is None:
            grid = u.grid
        elif u.grid != grid:
            raise InputError("sequence members must share a grid")
        nrm = luxemburg_norm(phi, u).value
        norms_seen.append(nrm)
        if nrm <= 2.0 ** -k:
            selected.append((i, nrm, u))
            k += 1
            if max_k is not None and k > max_k:
                break
    K = len(selected)
    report = {"indices": [s[0] for s in selected], "norms": [s[1] for s in selected],
              "bounds": [2.0 ** -(j + 1) for j in range(K)], "achieved_k": K,
              "sequence_length_scanned": len(norms_seen),
              "complete": max_k is None or K >= max_k}
    if K == 0:
        report.update({"cauchy": [], "flagged": [], "per_curve": [], "note": "no member met the first bound"})
        return report
    fields = [s[2] for s in selected]
    step = default_step(grid) if step is None else step
    w = fields[0]
    for f in fields[1:]:
        w = w + f
    # tails w_K - w_j, accumulated from the end
    tails = [None] * K
    acc = None
    for j in range(K - 1, 0, -1):
        acc = fields[j] if acc is None else acc + fields[j]
        tails[j] = acc
    cauchy = []
    for j in range(1, K):
        t = luxemburg_norm(phi, tails[j]).value
        cauchy.append({"j": j, "tail_norm": t, "bound": 2.0 ** -j, "ratio": t / 2.0 ** -j})
    report["cauchy"] = cauchy
    report["cauchy_constant"] = max((c["ratio"] for c in cauchy), default=0.0)
    per_curve, flagged = [], []
    A = constraint_matrix(family, grid, step)
    table = np.stack([A @ f.values.reshape(-1) for f in fields], axis=1) if len(family) else np.zeros((0, K))
    for c in range(len(family)):
        ints = [float(v) for v in table[c]]
        total = float(np.sum(ints))
        first = None
        for j in range(K):
            if all(v < decay_tol for v in ints[j:]):
                first = j + 1
                break
        third = max(1, K // 3)
        early, late = np.mean(ints[:third]), np.mean(ints[-third:])
        is_flagged = bool(ints[-1] >= decay_tol and late >= early)
        if is_flagged:
            flagged.append(c)
        per_curve.append({"curve": c, "integrals": ints, "majorant_integral": total,
                          "decayed_from_k": first, "flagged": bool(is_flagged)})
    report["per_curve"] = per_curve
    report["flagged"] = flagged
    w_norm = luxemburg_norm(phi, w).value
    if flagged:
        m = min(per_curve[c]["majorant_integral"] for c in flagged)
        report["certificate"] = {"m": m, "majorant_norm": w_norm,
                                 "scaled_norm": w_norm / m if m > 0 else math.inf,
                                 "admissible": bool(m > 0)}
    else:
        report["certificate"] = None
    report["majorant_norm"] = w_norm
    tail = fields[K // 2:]
    rep = tail[0].values
    for f in tail[1:]:
        rep = np.minimum(rep, f.values)
    report["liminf_representative"] = ScalarField(grid, rep)
    return report
