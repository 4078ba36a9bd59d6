"""Sampled fields on box grids, modulars and Luxemburg norms."""

from __future__ import annotations

import math
import os
from dataclasses import dataclass, field as dc_field
from functools import cached_property
from typing import Callable, Optional, Sequence

import numpy as np

from .errors import InputError, IntegrityError, UnsupportedError
from .phi import ConjugatePhi, PhiFunction

LAMBDA_MIN = 1e-8
LAMBDA_MAX = 1e8
NORM_TOL = 1e-10


class BoxGrid:
    """Uniform tensor grid over ``prod [a_i, b_i]`` with ``m_i >= 2`` nodes per axis.

    Node ``(i_1, .., i_n)`` sits at ``a_k + i_k h_k``; values attached to the
    grid are arrays of shape :attr:`shape` in C (row-major) order.
    """

    def __init__(self, extents: Sequence[Sequence[float]], counts: Sequence[int]):
        extents = tuple((float(a), float(b)) for a, b in extents)
        counts = tuple(int(m) for m in counts)
        if not 1 <= len(extents) <= 3:
            raise InputError(f"grid dimension must be 1, 2 or 3, got {len(extents)}")
        if len(counts) != len(extents):
            raise InputError("one node count per axis is required")
        for k, ((a, b), m) in enumerate(zip(extents, counts)):
            if not (math.isfinite(a) and math.isfinite(b)) or a >= b:
                raise InputError(f"axis {k}: need finite a < b, got [{a}, {b}]")
            if m < 2:
                raise InputError(f"axis {k}: need at least 2 nodes, got {m}")
        self.extents = extents
        self.counts = counts

    @classmethod
    def parse(cls, spec: str) -> "BoxGrid":
        """Parse ``a:b:m`` per axis, comma separated, e.g. ``0:1:65,0:1:65``."""
        extents, counts = [], []
        for part in spec.split(","):
            bits = part.strip().split(":")
            if len(bits) != 3:
                raise InputError(f"grid axis spec must be a:b:m, got {part.strip()!r}")
            try:
                extents.append((float(bits[0]), float(bits[1])))
                counts.append(int(bits[2]))
            except ValueError:
                raise InputError(f"bad number in grid spec {part.strip()!r}") from None
        return cls(extents, counts)

    def spec(self) -> str:
        return ",".join(f"{a:.17g}:{b:.17g}:{m}" for (a, b), m in zip(self.extents, self.counts))

    @property
    def n(self) -> int:
        return len(self.extents)

    @property
    def shape(self) -> tuple:
        return self.counts

    @property
    def size(self) -> int:
        return int(np.prod(self.counts))

    @property
    def spacing(self) -> tuple:
        return tuple((b - a) / (m - 1) for (a, b), m in zip(self.extents, self.counts))

    @property
    def cell_volume(self) -> float:
        return float(np.prod(self.spacing))

    @property
    def volume(self) -> float:
        return float(np.prod([b - a for a, b in self.extents]))

    def axis(self, k: int) -> np.ndarray:
        (a, b), m = self.extents[k], self.counts[k]
        return a + (b - a) * np.arange(m) / (m - 1)

    @cached_property
    def points(self) -> np.ndarray:
        """Node coordinates, shape ``counts + (n,)``."""
        mesh = np.meshgrid(*[self.axis(k) for k in range(self.n)], indexing="ij")
        pts = np.stack(mesh, axis=-1)
        pts.flags.writeable = False
        return pts

    @cached_property
    def weights(self) -> np.ndarray:
        """Tensor trapezoid weights; they sum to the box volume."""
        w = np.ones(())
        for k, h in enumerate(self.spacing):
            wk = np.full(self.counts[k], h)
            wk[[0, -1]] = 0.5 * h
            w = np.multiply.outer(w, wk)
        w.flags.writeable = False
        return w

    def node(self, index) -> np.ndarray:
        return np.array([self.extents[k][0] + i * self.spacing[k] for k, i in enumerate(index)])

    def refine(self) -> "BoxGrid":
        """Halve the spacing on every axis (``m -> 2m - 1``)."""
        return BoxGrid(self.extents, [2 * m - 1 for m in self.counts])

    def is_refinement_of(self, other: "BoxGrid") -> bool:
        return self.extents == other.extents and all(
            m == 2 * mo - 1 for m, mo in zip(self.counts, other.counts))

    def contains(self, pts, atol: float = 1e-12) -> np.ndarray:
        pts = np.asarray(pts, dtype=float)
        ok = np.ones(pts.shape[:-1], dtype=bool)
        for k, (a, b) in enumerate(self.extents):
            slack = atol * max(1.0, b - a)
            ok &= (pts[..., k] >= a - slack) & (pts[..., k] <= b + slack)
        return ok

    def __eq__(self, other):
        return isinstance(other, BoxGrid) and self.extents == other.extents and self.counts == other.counts

    def __hash__(self):
        return hash((self.extents, self.counts))

    def __repr__(self):
        return f"BoxGrid({self.spec()})"


class ScalarField:
    """Extended-real values at the nodes of a :class:`BoxGrid`.

    ``null_mask`` flags nodes lying on a Lebesgue-null singular set (for
    example the hyperplane where ``|y|^-1`` blows up).  Such nodes take part in
    pointwise evaluation and curve sampling but carry no quadrature weight.
    """

    def __init__(self, grid: BoxGrid, values, kind: str = "nonneg", null_mask=None):
        values = np.array(values, dtype=float)
        if values.size != grid.size:
            raise InputError(f"field has {values.size} values but the grid has {grid.size} nodes")
        values = values.reshape(grid.shape)
        if np.any(np.isnan(values)):
            raise InputError("field values must not be NaN")
        if kind not in ("nonneg", "signed"):
            raise InputError(f"field kind must be 'nonneg' or 'signed', got {kind!r}")
        if kind == "nonneg" and np.any(values < 0):
            raise InputError("nonneg field has negative entries")
        self.grid = grid
        self.values = values
        self.kind = kind
        if null_mask is None:
            self.null_mask = None
        else:
            mask = np.asarray(null_mask, dtype=bool)
            if mask.size != grid.size:
                raise InputError("null mask does not match the grid")
            self.null_mask = mask.reshape(grid.shape) if mask.any() else None

    @classmethod
    def from_function(cls, grid: BoxGrid, fn: Callable[[np.ndarray], np.ndarray], kind: Optional[str] = None,
                      null_mask=None) -> "ScalarField":
        """Sample ``fn`` at the nodes; ``fn`` receives points of shape ``(..., n)``."""
        with np.errstate(divide="ignore", invalid="ignore"):
            vals = np.broadcast_to(np.asarray(fn(grid.points), dtype=float), grid.shape)
        if kind is None:
            kind = "signed" if np.any(vals < 0) else "nonneg"
        return cls(grid, vals, kind, null_mask)

    @classmethod
    def zeros(cls, grid: BoxGrid) -> "ScalarField":
        return cls(grid, np.zeros(grid.shape))

    @property
    def weights(self) -> np.ndarray:
        """Quadrature weights with null nodes removed."""
        w = self.grid.weights
        if self.null_mask is not None:
            w = np.where(self.null_mask, 0.0, w)
        return w

    def abs(self) -> "ScalarField":
        return ScalarField(self.grid, np.abs(self.values), "nonneg", self.null_mask)

    def scaled(self, c: float) -> "ScalarField":
        if c < 0 and self.kind == "nonneg":
            return ScalarField(self.grid, _mul(self.values, c), "signed", self.null_mask)
        return ScalarField(self.grid, _mul(self.values, c), self.kind, self.null_mask)

    def __mul__(self, c):
        return self.scaled(float(c))

    __rmul__ = __mul__

    def __add__(self, other: "ScalarField") -> "ScalarField":
        if not isinstance(other, ScalarField) or other.grid != self.grid:
            raise InputError("fields must share a grid to be added")
        kind = "nonneg" if self.kind == other.kind == "nonneg" else "signed"
        with np.errstate(invalid="ignore"):
            vals = self.values + other.values
        if np.any(np.isnan(vals)):
            raise InputError("sum of fields is undefined (inf - inf)")
        mask = _merge_masks(self.null_mask, other.null_mask)
        return ScalarField(self.grid, vals, kind, mask)

    def __repr__(self):
        return f"ScalarField({self.grid.spec()}, kind={self.kind})"


def _mul(values, c):
    # 0 * inf = 0 as in the modular convention
    if c == 0:
        return np.zeros_like(values)
    return values * c


def _merge_masks(a, b):
    if a is None:
        return b
    if b is None:
        return a
    return a | b


# ---------------------------------------------------------------------------
# modular and norm


def _check_phi_domain(phi: PhiFunction, grid: BoxGrid):
    if phi.box is None:
        return
    if len(phi.box) != grid.n:
        raise InputError(f"integrand lives in dimension {len(phi.box)} but the grid in {grid.n}")
    for k, ((a, b), (ga, gb)) in enumerate(zip(phi.box, grid.extents)):
        if ga < a or gb > b:
            raise InputError(f"grid axis {k} [{ga}, {gb}] leaves the integrand's domain [{a}, {b}]")


def _weighted_sum(w: np.ndarray, vals: np.ndarray) -> float:
    live = w > 0
    vals = vals[live]
    if np.any(np.isinf(vals)):
        return math.inf
    # np.sum uses pairwise summation: fixed order, deterministic
    return float(np.sum(w[live] * vals))


def _support(phi: PhiFunction, f: ScalarField, a: np.ndarray):
    """Points, weights and values restricted to nodes that can contribute.

    ``phi(x, 0) = 0``, so zero nodes and nodes without weight drop out.
    """
    w = f.weights
    live = (w > 0) & (a != 0)
    return f.grid.points[live], w[live], a[live]


def _modular_on(phi: PhiFunction, pts, w, a, scale: float = 1.0) -> float:
    if a.size == 0:
        return 0.0
    t = a if scale == 1.0 else a * scale
    with np.errstate(invalid="ignore", over="ignore"):
        vals = phi(pts, t)
    if np.any(np.isnan(vals)):
        raise IntegrityError("integrand returned NaN on the field")
    if np.any(np.isinf(vals)):
        return math.inf
    # np.sum uses pairwise summation: fixed order, deterministic
    return float(np.sum(w * vals))


def _modular_abs(phi: PhiFunction, f: ScalarField, a: np.ndarray, scale: float = 1.0) -> float:
    if scale == 0:
        return 0.0
    return _modular_on(phi, *_support(phi, f, a), scale)


def modular(phi: PhiFunction, f: ScalarField) -> float:
    """Trapezoid quadrature of ``x -> phi(x, |f(x)|)`` over the grid box."""
    _check_phi_domain(phi, f.grid)
    return _modular_abs(phi, f, np.abs(f.values))


@dataclass
class NormResult:
    value: float
    lam_lo: float
    lam_hi: float
    modular_at_hi: float
    iterations: int
    trace: list = dc_field(default_factory=list)

    def as_dict(self, with_trace: bool = False) -> dict:
        d = {"value": self.value, "lambda_bracket": [self.lam_lo, self.lam_hi],
             "modular_at_hi": self.modular_at_hi, "iterations": self.iterations}
        if with_trace:
            d["trace"] = [list(p) for p in self.trace]
        return d


def _check_trace(trace):
    pts = sorted(trace)
    for (l1, r1), (l2, r2) in zip(pts, pts[1:]):
        if l2 > l1 and r2 > r1 * (1 + 1e-9) + 1e-300:
            raise IntegrityError(
                f"modular increased in lambda: rho(f/{l1:.6g})={r1:.6g} < rho(f/{l2:.6g})={r2:.6g}")


def luxemburg_norm(phi: PhiFunction, f: ScalarField, tol: float = NORM_TOL,
                   lam_min: float = LAMBDA_MIN, lam_max: float = LAMBDA_MAX) -> NormResult:
    """``inf{lam > 0 : rho(f / lam) <= 1}`` by bracketing and bisection.

    ``tol`` is relative to the bracket's upper end; the returned value is that
    upper end, so ``rho(f / value) <= 1`` holds whenever it is finite.
    """
    if tol <= 0:
        raise InputError("tol must be positive")
    if not 0 < lam_min < lam_max:
        raise InputError("need 0 < lam_min < lam_max")
    _check_phi_domain(phi, f.grid)
    sup = _support(phi, f, np.abs(f.values))
    trace = []

    def rho(lam):
        r = _modular_on(phi, *sup, 1.0 / lam)
        trace.append((lam, r))
        return r

    lam = 1.0
    r = rho(lam)
    if r <= 1:
        hi, r_hi = lam, r
        while True:
            lo = hi / 2
            if lo < lam_min:
                _check_trace(trace)
                return NormResult(0.0, 0.0, hi, r_hi, len(trace), trace)
            r_lo = rho(lo)
            if r_lo > 1:
                break
            hi, r_hi = lo, r_lo
    else:
        lo = lam
        while True:
            hi = lo * 2
            if hi > lam_max:
                _check_trace(trace)
                return NormResult(math.inf, lo, math.inf, math.inf, len(trace), trace)
            r_hi = rho(hi)
            if r_hi <= 1:
                break
            lo = hi
    while hi - lo > tol * hi:
        mid = 0.5 * (lo + hi)
        if mid <= lo or mid >= hi:
            break
        r_mid = rho(mid)
        if r_mid <= 1:
            hi, r_hi = mid, r_mid
        else:
            lo = mid
    _check_trace(trace)
    return NormResult(hi, lo, hi, r_hi, len(trace), trace)


def in_lphi(phi: PhiFunction, f: ScalarField, lam_min: float = LAMBDA_MIN, vanish_tol: float = 1e-6) -> dict:
    """Membership in the Orlicz class at desk scale.

    Requires a finite Luxemburg norm and ``rho(lam f)`` decreasing to (near)
    zero along ``lam = 1, 1/2, 1/4, ...`` down to ``lam_min``.
    """
    norm = luxemburg_norm(phi, f)
    sup = _support(phi, f, np.abs(f.values))
    lam, seq = 1.0, []
    while lam >= lam_min:
        seq.append(_modular_on(phi, *sup, lam))
        lam /= 2
    vanishes = bool(np.isfinite(seq[-1]) and seq[-1] <= vanish_tol)
    member = bool(math.isfinite(norm.value) and vanishes)
    return {"member": member, "norm": norm.value, "small_lambda_modular": seq[-1],
            "vanishes": vanishes}


# ---------------------------------------------------------------------------
# inequalities


@dataclass
class HolderResult:
    lhs: float
    rhs: float
    passed: bool
    norm_f: float
    norm_g_conjugate: float

    def as_dict(self) -> dict:
        return {"lhs": self.lhs, "rhs": self.rhs, "pass": self.passed,
                "norm_f": self.norm_f, "norm_g_conjugate": self.norm_g_conjugate}


def holder_check(phi: PhiFunction, f: ScalarField, g: ScalarField, tol: float = 1e-6,
                 t_max: Optional[float] = None) -> HolderResult:
    """Compare ``int |f||g|`` with ``2 ||f||_phi ||g||_phi*``."""
    if not phi.is_convex:
        raise UnsupportedError(f"{phi.describe()} is not declared convex; its conjugate is not meaningful here")
    if f.grid != g.grid:
        raise InputError("f and g must share a grid")
    w = f.grid.weights
    with np.errstate(invalid="ignore"):
        prod = np.abs(f.values) * np.abs(g.values)
    prod = np.where((f.values == 0) | (g.values == 0), 0.0, prod)
    mask = _merge_masks(f.null_mask, g.null_mask)
    if mask is not None:
        w = np.where(mask, 0.0, w)
    lhs = _weighted_sum(w, prod)
    nf = luxemburg_norm(phi, f).value
    conj = ConjugatePhi(phi) if t_max is None else ConjugatePhi(phi, t_max)
    ng = luxemburg_norm(conj, g).value
    if nf == 0 or ng == 0:
        rhs = 0.0 if math.isfinite(nf) and math.isfinite(ng) else math.inf
    else:
        rhs = 2.0 * nf * ng
    return HolderResult(lhs, rhs, bool(lhs <= rhs + tol), nf, ng)


def norm_modular_bounds(phi: PhiFunction, f: ScalarField, tol: float = 1e-6) -> dict:
    """Both sides of the norm/modular comparison inequalities.

    * for ``||f|| < 1``: ``rho(f) <= C ||f||`` (``C = 1`` for convex ``phi``);
    * with ``(aDec)_q``: ``||f|| <= C max(rho(f), rho(f)^(1/q))``
      (``C = L^(1/q)`` for convex ``phi``).

    ``constant`` entries are the empirical ratios; ``violated`` is set only
    when a convex integrand breaks the sharp constant beyond ``tol``.
    """
    norm = luxemburg_norm(phi, f).value
    rho = modular(phi, f)
    report = {"norm": norm, "modular": rho, "notes": []}
    if norm < 1:
        const = rho / norm if norm > 0 else 0.0
        report["small_norm"] = {"lhs": rho, "rhs": norm, "constant": const,
                                "violated": bool(phi.is_convex and rho > norm * (1 + tol) + tol)}
    else:
        report["notes"].append("norm >= 1: small-norm bound not applicable")
    q = phi.q_dec
    if q is None:
        report["notes"].append("no (aDec) exponent declared: growth bound skipped")
    else:
        bound = max(rho, rho ** (1.0 / q)) if math.isfinite(rho) else math.inf
        const = norm / bound if bound > 0 else (0.0 if norm == 0 else math.inf)
        sharp = max(1.0, phi.L or 1.0) ** (1.0 / q)
        report["growth"] = {"lhs": norm, "rhs": bound, "q": q, "constant": const,
                            "violated": bool(phi.is_convex and norm > sharp * bound * (1 + tol) + tol)}
    return report


# ---------------------------------------------------------------------------
# fieldv1


def _fmt_value(v: float) -> str:
    if v == math.inf:
        return "inf"
    if v == -math.inf:
        return "-inf"
    return "%.17g" % v


def format_field(f: ScalarField) -> str:
    g = f.grid
    head = ["fieldv1", str(g.n), *map(str, g.counts)]
    for a, b in g.extents:
        head += [_fmt_value(a), _fmt_value(b)]
    rows = f.values.reshape(-1, g.counts[-1])
    body = "\n".join(" ".join(_fmt_value(v) for v in row) for row in rows)
    return " ".join(head) + "\n" + body + "\n"


def write_field(f: ScalarField, path) -> None:
    with open(path, "w") as fh:
        fh.write(format_field(f))


def parse_field(text: str, inf_is_null: bool = False, source: str = "<field>") -> ScalarField:
    """Parse fieldv1 text.

    With ``inf_is_null`` the ``inf`` nodes are treated as a null set (kept for
    pointwise use, excluded from quadrature).
    """
    tokens = text.split()
    if not tokens or tokens[0] != "fieldv1":
        raise InputError(f"{source}: line 1: expected 'fieldv1' header")
    try:
        n = int(tokens[1])
        if not 1 <= n <= 3:
            raise ValueError
        counts = [int(t) for t in tokens[2:2 + n]]
        ext = [float(t) for t in tokens[2 + n:2 + 3 * n]]
    except (ValueError, IndexError):
        raise InputError(f"{source}: line 1: malformed fieldv1 header") from None
    if len(counts) != n or len(ext) != 2 * n:
        raise InputError(f"{source}: line 1: truncated fieldv1 header")
    grid = BoxGrid(list(zip(ext[0::2], ext[1::2])), counts)
    raw = tokens[2 + 3 * n:]
    if len(raw) != grid.size:
        raise InputError(f"{source}: expected {grid.size} values, found {len(raw)}")
    try:
        vals = np.array([float(t) for t in raw])
    except ValueError as exc:
        raise InputError(f"{source}: bad value: {exc}") from None
    mask = np.isposinf(vals) if inf_is_null else None
    kind = "signed" if np.any(vals < 0) else "nonneg"
    return ScalarField(grid, vals, kind, mask)


def read_field(path, inf_is_null: bool = False) -> ScalarField:
    if not os.path.exists(path):
        raise InputError(f"field file not found: {path}")
    with open(path) as fh:
        return parse_field(fh.read(), inf_is_null, str(path))
