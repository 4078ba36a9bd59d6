"""Sampled verification of structural conditions on integrands.

All checks are deterministic functions of a :class:`SampleSpec`.  "For almost
every x" is replaced by "at every sampled x"; a ``fail`` verdict always comes
with a concrete sample witnessing it.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import asdict, dataclass, field
from typing import Optional, Sequence

import numpy as np

from .errors import InputError, UnsupportedError
from .phi import PhiFunction, left_inverse

SUPPORTED = ("A0", "weakA0", "A1", "aInc", "aDec")

PASS, FAIL, INDETERMINATE = "pass", "fail", "indeterminate"

# cap on sub-boxes at the finest dyadic level, and the per-level shrink
# factor that counts as a degenerating constant
A1_MAX_CELLS = 4096
A1_DECAY = 0.75


@dataclass(frozen=True)
class SampleSpec:
    """Sampling design for condition checks.

    ``x_per_axis`` uniform nodes per axis are augmented, axis by axis, with
    points at distances ``probe_offsets`` from every uniform node; singular
    behaviour concentrated on coordinate hyperplanes through grid nodes is
    then seen at every scale down to the smallest offset.
    """

    box: tuple
    x_per_axis: int = 33
    t_min: float = 1e-4
    t_max: float = 1e4
    t_count: int = 65
    beta_min: float = 1e-4
    beta_max: float = 1e4
    beta_count: int = 129
    probe_offsets: tuple = tuple(10.0 ** -k for k in range(1, 9))

    def __post_init__(self):
        box = tuple((float(a), float(b)) for a, b in self.box)
        if not box or any(a >= b for a, b in box):
            raise InputError(f"sample box must have a < b on every axis, got {self.box}")
        object.__setattr__(self, "box", box)
        if self.x_per_axis < 2 or self.t_count < 2 or self.beta_count < 1:
            raise InputError("sample counts too small")

    def t_grid(self) -> np.ndarray:
        return np.geomspace(self.t_min, self.t_max, self.t_count)

    def beta_grid(self) -> np.ndarray:
        return np.geomspace(self.beta_min, self.beta_max, self.beta_count)

    def axis_nodes(self, k: int) -> np.ndarray:
        a, b = self.box[k]
        i = np.arange(self.x_per_axis)
        return a + (b - a) * i / (self.x_per_axis - 1)

    def x_points(self) -> np.ndarray:
        n = len(self.box)
        uniform = [self.axis_nodes(k) for k in range(n)]
        blocks = [_product(uniform)]
        offsets = np.asarray(self.probe_offsets, dtype=float)
        for k in range(n):
            a, b = self.box[k]
            base = uniform[k]
            probes = (base[:, None] + np.concatenate([offsets, -offsets])[None, :]).ravel()
            probes = probes[(probes >= a) & (probes <= b)]
            axes = list(uniform)
            axes[k] = np.unique(probes)
            blocks.append(_product(axes))
        pts = np.concatenate(blocks)
        return np.unique(pts, axis=0)

    def as_dict(self) -> dict:
        d = asdict(self)
        d["box"] = [list(b) for b in self.box]
        d["probe_offsets"] = list(self.probe_offsets)
        return d


def _product(axes: Sequence[np.ndarray]) -> np.ndarray:
    mesh = np.meshgrid(*axes, indexing="ij")
    return np.stack([m.ravel() for m in mesh], axis=-1)


@dataclass(frozen=True)
class Condition:
    """Which condition to check and with which constants.

    ``p`` is the exponent for ``aInc``/``aDec``; ``L`` the almost-monotonicity
    constant to certify (``None``: report the sampled constant and accept it
    when it is at most ``L_cap``).  ``beta`` fixes the constant for
    ``A0``/``weakA0``/``A1`` instead of searching; ``delta`` is the level in
    the rescaled weak (A0) form ``phi(x, beta) >= delta``.
    """

    name: str
    p: Optional[float] = None
    L: Optional[float] = None
    beta: Optional[float] = None
    delta: float = 1.0
    L_cap: float = 100.0
    levels: Optional[int] = None

    def __post_init__(self):
        if self.name == "A2":
            raise UnsupportedError(
                "condition A2 quantifies over an auxiliary L1 and L-infinity function and has no "
                "effective sampled check; it is out of scope"
            )
        if self.name not in SUPPORTED:
            raise InputError(f"unknown condition {self.name!r}; supported: {SUPPORTED}")
        if self.name in ("aInc", "aDec") and self.p is None:
            raise InputError(f"{self.name} needs an exponent p")
        if self.delta <= 0:
            raise InputError("delta must be positive")


@dataclass
class ConditionReport:
    condition: str
    verdict: str
    witness: dict = field(default_factory=dict)
    samples: dict = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return self.verdict == PASS

    def as_dict(self) -> dict:
        return {"condition": self.condition, "verdict": self.verdict,
                "witness": self.witness, "samples": self.samples}


def _point(x) -> list:
    return [float(v) for v in np.atleast_1d(x)]


def _min_over_x(phi, xs, ts):
    """For each t in ``ts``: (min over xs of phi(x, t), argmin index)."""
    vals = phi(xs[:, None, :], ts[None, :])
    vals = np.where(np.isnan(vals), -math.inf, vals)
    idx = np.argmin(vals, axis=0)
    return vals[idx, np.arange(len(ts))], idx


def _max_over_x(phi, xs, ts):
    vals = phi(xs[:, None, :], ts[None, :])
    vals = np.where(np.isnan(vals), math.inf, vals)
    idx = np.argmax(vals, axis=0)
    return vals[idx, np.arange(len(ts))], idx


def _refine_threshold(ok, lo, hi, iterations=60):
    """Bisect a monotone predicate ``ok`` between a failing ``lo`` and a passing ``hi``."""
    for _ in range(iterations):
        mid = 0.5 * (lo + hi)
        if mid <= lo or mid >= hi:
            break
        if ok(mid):
            hi = mid
        else:
            lo = mid
    return hi


def _check_weak_a0(phi, cond, spec, xs):
    delta = cond.delta
    name = "weakA0" if delta == 1.0 else f"weakA0(delta={delta:g})"

    def holds(beta):
        vals, _ = _min_over_x(phi, xs, np.array([beta]))
        return bool(vals[0] >= delta)

    if cond.beta is not None:
        mins, idx = _min_over_x(phi, xs, np.array([cond.beta]))
        if mins[0] >= delta:
            return ConditionReport(name, PASS, {"beta": cond.beta, "delta": delta})
        x = xs[idx[0]]
        return ConditionReport(name, FAIL, {"beta": cond.beta, "delta": delta, "x": _point(x),
                                            "phi": float(mins[0])})
    betas = spec.beta_grid()
    mins, idx = _min_over_x(phi, xs, betas)
    ok = mins >= delta
    if np.any(ok):
        j = int(np.argmax(ok))
        beta = float(betas[j])
        if j > 0 and holds(beta):
            beta = _refine_threshold(holds, float(betas[j - 1]), beta)
        return ConditionReport(name, PASS, {"beta": beta, "delta": delta,
                                            "min_phi_at_beta": float(_min_over_x(phi, xs, np.array([beta]))[0][0])})
    refuted = ~np.isnan(mins) & (mins < delta)
    counter = [{"beta": float(b), "x": _point(xs[i]), "phi": float(v)}
               for b, i, v in zip(betas, idx, mins)]
    verdict = FAIL if np.all(refuted) else INDETERMINATE
    return ConditionReport(name, verdict, {"delta": delta, "refuted_candidates": int(np.sum(refuted)),
                                           "candidates": len(betas), "counterexamples": counter})


def _check_a0(phi, cond, spec, xs):
    def pair(beta):
        low, i_low = _max_over_x(phi, xs, np.array([beta]))
        high, i_high = _min_over_x(phi, xs, np.array([1.0 / beta]))
        return low[0], i_low[0], high[0], i_high[0]

    def holds(beta):
        low, _, high, _ = pair(beta)
        return low <= 1.0 <= high

    if cond.beta is not None:
        betas = np.array([cond.beta])
    else:
        betas = spec.beta_grid()
        betas = np.append(betas[(betas > 0) & (betas < 1)], 1.0)
    passing = [b for b in betas if holds(b)]
    if passing:
        beta = float(max(passing))
        larger = betas[betas > beta]
        if cond.beta is None and larger.size:
            # passing set is an interval (0, beta*]; sharpen its right end
            lo, hi = beta, float(larger[0])
            for _ in range(60):
                mid = 0.5 * (lo + hi)
                if holds(mid):
                    lo = mid
                else:
                    hi = mid
            beta = lo
        return ConditionReport("A0", PASS, {"beta": beta})
    counter = []
    for b in betas:
        low, il, high, ih = pair(b)
        if low > 1.0:
            counter.append({"beta": float(b), "x": _point(xs[il]), "side": "phi(x,beta)>1", "phi": float(low)})
        else:
            counter.append({"beta": float(b), "x": _point(xs[ih]), "side": "phi(x,1/beta)<1", "phi": float(high)})
    return ConditionReport("A0", FAIL, {"counterexamples": counter})


def _check_almost_monotone(phi, cond, spec, xs, increasing):
    p = float(cond.p)
    ts = spec.t_grid()
    vals = phi(xs[:, None, :], ts[None, :])
    ratio = vals / ts[None, :] ** p
    if increasing:
        # need ratio(s) <= L ratio(t) for s <= t
        ref = np.maximum.accumulate(ratio, axis=1)
        num, den = ref, ratio
    else:
        # need ratio(t) <= L ratio(s) for s <= t
        ref = np.minimum.accumulate(ratio, axis=1)
        num, den = ratio, ref
    with np.errstate(divide="ignore", invalid="ignore"):
        quot = np.where(num == 0, 0.0, num / den)
    quot = np.where(np.isnan(quot), math.inf, quot)
    flat = int(np.argmax(quot))
    i, j = np.unravel_index(flat, quot.shape)
    L_emp = float(max(quot[i, j], 1.0))
    name = f"{'aInc' if increasing else 'aDec'}_{p:g}"
    # the earlier t realising the extreme of the running max/min
    row = ratio[i, : j + 1]
    s_idx = int(np.argmax(row) if increasing else np.argmin(row))
    pair = {"x": _point(xs[i]), "s": float(ts[s_idx]), "t": float(ts[j])}
    limit = cond.L if cond.L is not None else cond.L_cap
    if L_emp <= limit:
        return ConditionReport(name, PASS, {"L": L_emp, "p": p})
    return ConditionReport(name, FAIL, {"L_sampled": L_emp, "L_limit": limit, "p": p, **pair})


def _check_a1(phi, cond, spec):
    """Dyadic sub-boxes stand in for balls; ``t`` ranges over ``[1, 1/|B|]``.

    With a fixed ``beta`` the sampled ratio must reach it.  Without one, the
    sampled constant must stay bounded away from zero under refinement: a
    ratio that keeps shrinking from one dyadic level to the next marks a
    non-uniform constant and fails.
    """
    box = spec.box
    n = len(box)
    levels = cond.levels if cond.levels is not None else max(1, int(math.log2(A1_MAX_CELLS) // n))
    worst = {"beta": 1.0}
    per_level = []
    for level in range(levels + 1):
        parts = 2 ** level
        sides = [(b - a) / parts for a, b in box]
        vol = float(np.prod(sides))
        if vol > 1.0:
            per_level.append({"level": level, "volume": vol, "beta": None})
            continue
        ts = np.geomspace(1.0, 1.0 / vol, 9) if vol < 1.0 else np.array([1.0])
        local = np.linspace(0.0, 1.0, 5)
        cells = np.array(list(itertools.product(range(parts), repeat=n)), dtype=float)
        offs = _product([local] * n)
        lows = np.array([a for a, _ in box])
        pts = lows + (cells[:, None, :] + offs[None, :, :]) * np.asarray(sides)
        inv = left_inverse(phi, pts[:, :, None, :], ts[None, None, :], tol=1e-9)
        lo = np.min(inv, axis=1)
        hi = np.max(inv, axis=1)
        with np.errstate(divide="ignore", invalid="ignore"):
            ratio = np.where(hi == 0, 1.0, lo / hi)
        ratio = np.where(np.isnan(ratio), 0.0, ratio)
        c, m = np.unravel_index(int(np.argmin(ratio)), ratio.shape)
        level_beta = float(ratio[c, m])
        if level_beta < worst["beta"]:
            worst = {"beta": level_beta, "t": float(ts[m]), "cell_level": level,
                     "x": _point(pts[c, int(np.argmax(inv[c, :, m]))]),
                     "y": _point(pts[c, int(np.argmin(inv[c, :, m]))])}
        per_level.append({"level": level, "volume": vol, "beta": level_beta})
    witness = dict(worst)
    witness["levels"] = per_level
    betas = [lv["beta"] for lv in per_level if lv["beta"] is not None]
    if cond.beta is not None:
        ok = worst["beta"] >= cond.beta
        witness["beta_required"] = cond.beta
    else:
        decaying = len(betas) >= 2 and betas[-1] < A1_DECAY * betas[-2]
        ok = worst["beta"] > 0 and not decaying
        if decaying:
            witness["note"] = "sampled constant shrinks under dyadic refinement"
    return ConditionReport("A1", PASS if ok else FAIL, witness)


def check_condition(phi: PhiFunction, cond, samples: SampleSpec) -> ConditionReport:
    """Check one structural condition on ``phi`` at the sampled points.

    ``cond`` may be a :class:`Condition` or a bare condition name.
    """
    if isinstance(cond, str):
        cond = Condition(cond)
    xs = samples.x_points() if cond.name != "A1" else None
    if cond.name == "weakA0":
        report = _check_weak_a0(phi, cond, samples, xs)
    elif cond.name == "A0":
        report = _check_a0(phi, cond, samples, xs)
    elif cond.name == "aInc":
        report = _check_almost_monotone(phi, cond, samples, xs, increasing=True)
    elif cond.name == "aDec":
        report = _check_almost_monotone(phi, cond, samples, xs, increasing=False)
    else:
        report = _check_a1(phi, cond, samples)
    report.samples = samples.as_dict()
    return report


def check_equivalence(phi: PhiFunction, psi: PhiFunction, L: float, samples: SampleSpec) -> ConditionReport:
    """Check ``psi(x, t/L) <= phi(x, t) <= psi(x, L t)`` at every sampled pair."""
    if L < 1:
        raise InputError("equivalence constant L must be >= 1")
    xs = samples.x_points()
    ts = samples.t_grid()
    mid = phi(xs[:, None, :], ts[None, :])
    low = psi(xs[:, None, :], ts[None, :] / L)
    high = psi(xs[:, None, :], ts[None, :] * L)
    bad_low = low > mid
    bad_high = mid > high
    witness = {"L": float(L)}
    if np.any(bad_low) or np.any(bad_high):
        bad = bad_low | bad_high
        i, j = np.unravel_index(int(np.argmax(bad)), bad.shape)
        side = "psi(x,t/L)>phi(x,t)" if bad_low[i, j] else "phi(x,t)>psi(x,Lt)"
        witness.update({"x": _point(xs[i]), "t": float(ts[j]), "side": side,
                        "violations": int(np.sum(bad))})
        report = ConditionReport("equivalence", FAIL, witness)
    else:
        report = ConditionReport("equivalence", PASS, witness)
    report.samples = samples.as_dict()
    return report


def rescaled_beta(beta: float, delta: float, a: float) -> float:
    """Constant for ``phi(x, .) >= 1`` obtained from ``phi(x, beta) >= delta``.

    With ``a`` the almost-increasing constant of ``phi(x, t)/t``, the level
    ``delta < 1`` is lifted to ``1`` at ``t = a beta / delta``.
    """
    if not 0 < delta:
        raise InputError("delta must be positive")
    if delta >= 1:
        return beta
    return a * beta / delta
