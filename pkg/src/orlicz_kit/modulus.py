"""Modulus of finite curve families as a convex program on a grid.

The discrete problem is

    minimize  sum_i w_i phi(x_i, u_i)   subject to  A u >= c,  u >= 0,

where ``w`` are the grid's trapezoid weights and row ``j`` of ``A`` integrates
a grid field along curve ``j``.  The norm-based modulus is reduced to a
sequence of such problems through the substitution ``v = u / tau``.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .curve import CurveFamily, constraint_matrix, curve_integral, default_step
from .errors import InputError, UnsupportedError
from .field import BoxGrid, ScalarField, in_lphi, luxemburg_norm
from .phi import PhiFunction

log = logging.getLogger(__name__)

METHODS = ("pdhg", "subgradient")


@dataclass
class SolverOptions:
    """Knobs for the modulus solvers.

    ``tol`` is the relative stall tolerance on the best admissible objective,
    measured over ``patience`` checks spaced ``check_every`` iterations apart.
    ``norm_rtol`` and ``inner_slack`` control the outer bisection of the
    norm-based modulus.  ``balance`` trades primal against dual step length
    in the primal-dual method; by default it is ``2 / h`` with ``h`` the
    finest grid spacing, which matches the scale ratio of densities to curve
    multipliers.
    """

    method: str = "pdhg"
    max_iter: int = 20000
    min_iter: int = 200
    tol: float = 1e-6
    check_every: int = 25
    patience: int = 20
    step: Optional[float] = None
    alpha0: float = 0.5
    balance: Optional[float] = None
    norm_rtol: float = 1e-2
    inner_slack: float = 1e-3
    tau_min: float = 1e-8

    def __post_init__(self):
        if self.method not in METHODS:
            raise InputError(f"unknown solver method {self.method!r}; known: {METHODS}")
        if self.max_iter < 1 or self.check_every < 1:
            raise InputError("solver iteration counts must be positive")


@dataclass
class ModulusResult:
    norm_estimate: Optional[float]
    norm_bracket: Optional[tuple]
    modular_estimate: Optional[float]
    density: ScalarField
    residuals: np.ndarray
    trace: dict = field(default_factory=dict)

    @property
    def min_residual(self) -> float:
        return float(self.residuals.min()) if self.residuals.size else 0.0

    def as_dict(self, with_density: bool = False) -> dict:
        from .field import format_field
        d = {
            "norm_modulus_estimate": self.norm_estimate,
            "norm_modulus_bracket": list(self.norm_bracket) if self.norm_bracket else None,
            "modular_modulus_estimate": self.modular_estimate,
            "min_residual": self.min_residual,
            "curves": int(self.residuals.size),
            "label": "estimate for the sampled family",
            "trace": self.trace,
        }
        if with_density:
            d["extremal_density_fieldv1"] = format_field(self.density)
        return d


class DiscreteProblem:
    """Assembled data of the discrete modulus problem for one (phi, family, grid)."""

    def __init__(self, phi: PhiFunction, family: CurveFamily, grid: BoxGrid, step: Optional[float] = None):
        if not phi.is_convex:
            raise UnsupportedError(f"{phi.describe()} is not declared convex; the modulus program needs convexity")
        family.check_inside(grid)
        self.phi = phi
        self.family = family
        self.grid = grid
        self.step = default_step(grid) if step is None else step
        self.A = constraint_matrix(family, grid, self.step)
        self.AT = self.A.T.tocsr()
        self.rowsum = np.asarray(self.A.sum(axis=1)).ravel()
        if np.any(self.rowsum <= 0):
            bad = int(np.argmin(self.rowsum))
            raise InputError(f"curve {bad} has no quadrature weight on the grid; the discretization is infeasible")
        colsum = np.asarray(self.A.sum(axis=0)).ravel()
        self.active = np.flatnonzero(colsum > 0)
        self.colsum = colsum[self.active]
        self.w = grid.weights.reshape(-1)[self.active]
        self.pts = grid.points.reshape(-1, grid.n)[self.active]
        self.Aa = self.A[:, self.active].tocsr()
        self.ATa = self.Aa.T.tocsr()

    @property
    def m(self) -> int:
        return self.A.shape[0]

    def objective(self, ua: np.ndarray) -> float:
        vals = self.phi(self.pts, ua)
        if np.any(np.isinf(vals)):
            return math.inf
        return float(np.sum(self.w * vals))

    def constant_candidate(self, c: float) -> np.ndarray:
        """Smallest admissible constant density on the active nodes."""
        return np.full(self.active.size, c / self.rowsum.min())

    def lift(self, ua: np.ndarray, c: float) -> np.ndarray:
        """Make ``ua`` admissible by rescaling it along every violated curve.

        Values only grow, so curves repaired early stay repaired; a curve
        carrying no mass receives the constant ``c / rowsum`` on its support.
        """
        u = ua.copy()
        target = c * (1 + 1e-12)
        r = self.Aa @ u
        A = self.Aa
        for j in np.flatnonzero(r < c):
            lo, hi = A.indptr[j], A.indptr[j + 1]
            cols, vals = A.indices[lo:hi], A.data[lo:hi]
            rj = float(vals @ u[cols])
            if rj >= c:
                continue
            if rj <= 0:
                u[cols] += target / self.rowsum[j]
            else:
                u[cols] *= target / rj
        return u

    def full(self, ua: np.ndarray) -> np.ndarray:
        u = np.zeros(self.grid.size)
        u[self.active] = ua
        return u


def _pdhg(prob: DiscreteProblem, c: float, u0, lam0, opts: SolverOptions, stop_below=None):
    """Diagonally preconditioned primal-dual iteration for ``min F(u)`` s.t. ``A u >= c``."""
    theta = opts.balance if opts.balance is not None else 2.0 / min(prob.grid.spacing)
    T = theta / prob.colsum
    S = 1.0 / (theta * prob.rowsum)
    Tw = T * prob.w
    u = u0.copy()
    lam = np.zeros(prob.m) if lam0 is None else lam0.copy()
    best_u = prob.lift(u, c)
    best = prob.objective(best_u)
    history = [best]
    k = 0
    stall = 0
    avg = np.zeros_like(u)
    for k in range(1, opts.max_iter + 1):
        u_new = prob.phi.prox(prob.pts, u + T * (prob.ATa @ lam), Tw)
        lam = np.maximum(lam + S * (c - prob.Aa @ (2.0 * u_new - u)), 0.0)
        u = u_new
        avg += u
        if k % opts.check_every == 0:
            # the running mean converges for piecewise linear objectives where
            # the last iterate may oscillate
            f, cand = min(((prob.objective(x), x) for x in (prob.lift(u, c), prob.lift(avg / k, c))),
                          key=lambda p: p[0])
            if f < best - opts.tol * abs(best):
                stall = 0
            else:
                stall += 1
            if f < best:
                best, best_u = f, cand
            history.append(best)
            if stop_below is not None and best <= stop_below:
                break
            if best == 0 or (k >= opts.min_iter and stall >= opts.patience):
                break
    return best_u, best, lam, {"iterations": k, "history": history[-5:]}


def _subgradient(prob: DiscreteProblem, c: float, u0, lam0, opts: SolverOptions, stop_below=None):
    """Projected subgradient with steps ``alpha0 / sqrt(k)`` and the lift as projection."""
    u = prob.lift(u0, c)
    best_u, best = u, prob.objective(u)
    history = [best]
    scale = float(np.mean(u)) if u.size else 1.0
    stall = 0
    k = 0
    alpha = 0.0
    for k in range(1, opts.max_iter + 1):
        g = prob.w * prob.phi.derivative(prob.pts, u)
        gmax = float(np.max(np.abs(g))) if g.size else 0.0
        if gmax == 0:
            break
        alpha = opts.alpha0 * scale / math.sqrt(k)
        u = prob.lift(np.maximum(u - alpha * g / gmax, 0.0), c)
        f = prob.objective(u)
        if f < best:
            if best - f > opts.tol * abs(best):
                stall = 0
            best, best_u = f, u
        if k % opts.check_every == 0:
            stall += 1
            history.append(best)
            if stop_below is not None and best <= stop_below:
                break
            if best == 0 or (k >= opts.min_iter and stall >= opts.patience):
                break
    return best_u, best, lam0, {"iterations": k, "history": history[-5:], "final_step": alpha}


def _solve(prob, c, u0, lam0, opts, stop_below=None):
    if opts.method == "pdhg":
        return _pdhg(prob, c, u0, lam0, opts, stop_below)
    return _subgradient(prob, c, u0, lam0, opts, stop_below)


def _empty_result(grid: BoxGrid, norm: bool) -> ModulusResult:
    zero = ScalarField.zeros(grid)
    return ModulusResult(0.0 if norm else None, (0.0, 0.0) if norm else None, 0.0, zero,
                         np.zeros(0), {"note": "empty family: u = 0 is admissible"})


def estimate_modulus_modular(phi: PhiFunction, family: CurveFamily, grid: BoxGrid,
                             opts: Optional[SolverOptions] = None, problem: Optional[DiscreteProblem] = None
                             ) -> ModulusResult:
    """Minimize the discrete modular over admissible densities.

    The reported density is the best admissible iterate; its Luxemburg norm
    is reported as an upper estimate of the norm-based modulus.
    """
    opts = opts or SolverOptions()
    if len(family) == 0:
        return _empty_result(grid, norm=False)
    prob = problem or DiscreteProblem(phi, family, grid, opts.step)
    u0 = prob.constant_candidate(1.0)
    ua, f, _, trace = _solve(prob, 1.0, u0, None, opts)
    u = ScalarField(grid, prob.full(ua))
    norm = luxemburg_norm(phi, u).value
    trace.update({"method": opts.method, "constant_candidate_modular": prob.objective(u0)})
    return ModulusResult(norm, None, f, u, prob.A @ u.values.reshape(-1) - 1.0, trace)


def estimate_modulus_norm(phi: PhiFunction, family: CurveFamily, grid: BoxGrid,
                          opts: Optional[SolverOptions] = None, problem: Optional[DiscreteProblem] = None
                          ) -> ModulusResult:
    """Smallest ``tau`` for which some admissible ``u`` has ``rho(u / tau) <= 1``.

    Outer bisection on ``tau``; the inner problem minimizes ``rho(v)`` subject
    to ``A v >= 1/tau``.  The upper estimate is the Luxemburg norm of the
    admissible witness found at the best feasible ``tau``.
    """
    opts = opts or SolverOptions()
    if len(family) == 0:
        return _empty_result(grid, norm=True)
    prob = problem or DiscreteProblem(phi, family, grid, opts.step)
    limit = 1.0 + opts.inner_slack
    u_const = prob.constant_candidate(1.0)
    witness = u_const
    hi = luxemburg_norm(phi, ScalarField(grid, prob.full(u_const))).value
    if not math.isfinite(hi):
        return ModulusResult(math.inf, (math.inf, math.inf), None, ScalarField(grid, prob.full(u_const)),
                             prob.A @ prob.full(u_const) - 1.0, {"note": "no admissible density with finite norm"})
    steps = []
    warm_v, warm_c, warm_lam = u_const / hi, 1.0 / hi, None

    def inner(tau):
        nonlocal warm_v, warm_c, warm_lam
        c = 1.0 / tau
        v0 = warm_v * (c / warm_c)
        v, r, lam, tr = _solve(prob, c, v0, warm_lam, opts, stop_below=1.0)
        warm_v, warm_c, warm_lam = v, c, lam
        steps.append({"tau": tau, "inner_modular": r, "iterations": tr["iterations"]})
        return v, r

    lo = hi / 2
    while True:
        if lo < opts.tau_min:
            lo = 0.0
            break
        v, r = inner(lo)
        if r <= limit:
            u = lo * v
            hi, witness = min(lo, _norm_of(prob, u)), u
            lo = hi / 2
        else:
            break
    while lo > 0 and hi - lo > opts.norm_rtol * hi:
        mid = 0.5 * (lo + hi)
        v, r = inner(mid)
        if r <= limit:
            u = mid * v
            hi, witness = min(mid, _norm_of(prob, u)), u
        else:
            lo = mid
    dens = ScalarField(grid, prob.full(witness))
    upper = luxemburg_norm(phi, dens).value
    trace = {"method": opts.method, "outer_steps": len(steps), "steps": steps,
             "inner_limit": limit, "norm_rtol": opts.norm_rtol}
    return ModulusResult(upper, (lo, upper), None, dens, prob.A @ dens.values.reshape(-1) - 1.0, trace)


def _norm_of(prob: DiscreteProblem, ua: np.ndarray) -> float:
    return luxemburg_norm(prob.phi, ScalarField(prob.grid, prob.full(ua))).value


# ---------------------------------------------------------------------------
# exceptional families


def verify_exceptional_witness(v: ScalarField, family: CurveFamily, phi: PhiFunction,
                               growth: float = 4.0, absolute: float = 1e3, step: Optional[float] = None,
                               v_fine: Optional[ScalarField] = None) -> dict:
    """Check that ``v`` is in the Orlicz class and that every curve integral
    of ``v`` diverges under refinement.

    The integral at the finer level (step halved, and ``v_fine`` if given)
    must be infinite, or at least ``growth`` times the coarse one and at
    least ``absolute``.
    """
    if v.kind != "nonneg":
        raise InputError("witness must be nonneg")
    member = in_lphi(phi, v)
    step = default_step(v.grid) if step is None else step
    fine = v if v_fine is None else v_fine
    per_curve = []
    for j, gamma in enumerate(family):
        coarse = curve_integral(v, gamma, step)
        refined = curve_integral(fine, gamma, step / 2)
        diverges = math.isinf(refined) or (refined >= growth * coarse and refined >= absolute)
        per_curve.append({"curve": j, "coarse": coarse, "fine": refined, "diverges": bool(diverges)})
    all_div = all(c["diverges"] for c in per_curve)
    certified = bool(member["member"] and all_div)
    return {
        "verdict": "certified-at-scale" if certified else "not certified",
        "certified": certified,
        "in_lphi": member,
        "curves": len(per_curve),
        "diverging": sum(c["diverges"] for c in per_curve),
        "per_curve": per_curve,
        "thresholds": {"growth": growth, "absolute": absolute, "step": step},
    }


def modulus_properties_suite(phi: PhiFunction, pairs: Sequence, grid: BoxGrid,
                             exceptional: Sequence = (), opts: Optional[SolverOptions] = None,
                             rtol: float = 2e-2, atol: float = 1e-3) -> dict:
    """Inclusion monotonicity on nested pairs and witness sums on unions.

    ``pairs`` holds ``(small, large)`` families with ``small`` a subfamily of
    ``large``; ``exceptional`` holds ``((family_1, v_1), (family_2, v_2))``
    entries whose union is certified by ``v_1 + v_2``.
    """
    opts = opts or SolverOptions()
    rows = []
    for i, (small, large) in enumerate(pairs):
        a = estimate_modulus_modular(phi, small, grid, opts)
        b = estimate_modulus_modular(phi, large, grid, opts)
        na = estimate_modulus_norm(phi, small, grid, opts)
        nb = estimate_modulus_norm(phi, large, grid, opts)
        ok_mod = a.modular_estimate <= b.modular_estimate * (1 + rtol) + atol
        ok_norm = na.norm_estimate <= nb.norm_estimate * (1 + rtol) + atol
        rows.append({"pair": i, "small_curves": len(small), "large_curves": len(large),
                     "modular": [a.modular_estimate, b.modular_estimate],
                     "norm": [na.norm_estimate, nb.norm_estimate],
                     "monotone": bool(ok_mod and ok_norm)})
    unions = []
    for i, ((fam1, v1), (fam2, v2)) in enumerate(exceptional):
        total = v1 + v2
        union = fam1.union(fam2)
        rep = verify_exceptional_witness(total, union, phi)
        n1 = luxemburg_norm(phi, v1).value
        n2 = luxemburg_norm(phi, v2).value
        n12 = luxemburg_norm(phi, total).value
        unions.append({"union": i, "curves": len(union), "certified": rep["certified"],
                       "norms": [n1, n2, n12],
                       "triangle": bool(n12 <= (n1 + n2) * (1 + 1e-9))})
    ok = all(r["monotone"] for r in rows) and all(u["certified"] for u in unions)
    return {"pass": bool(ok), "inclusion": rows, "unions": unions,
            "tolerance": {"rtol": rtol, "atol": atol}}
