"""Polyline curves, curve integrals and generated curve families."""

from __future__ import annotations

import math
import os
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np
import scipy.sparse as sp

from .errors import InputError
from .field import BoxGrid, ScalarField

DEFAULT_STEP_FACTOR = 0.5  # default sampling step relative to the finest grid spacing


class Curve:
    """Arc-length parametrized polyline on ``[0, length]``."""

    def __init__(self, vertices):
        v = np.array(vertices, dtype=float)
        if v.ndim != 2 or v.shape[0] < 2:
            raise InputError("a curve needs at least two vertices")
        if not np.all(np.isfinite(v)):
            raise InputError("curve vertices must be finite")
        seg = np.linalg.norm(np.diff(v, axis=0), axis=1)
        if np.any(seg == 0):
            raise InputError("consecutive curve vertices must be distinct")
        self.vertices = v
        self.seg_lengths = seg
        self.arclength = np.concatenate([[0.0], np.cumsum(seg)])

    @property
    def n(self) -> int:
        return self.vertices.shape[1]

    @property
    def length(self) -> float:
        return float(self.arclength[-1])

    def point_at(self, s) -> np.ndarray:
        s = np.clip(np.asarray(s, dtype=float), 0.0, self.length)
        j = np.clip(np.searchsorted(self.arclength, s, side="right") - 1, 0, len(self.seg_lengths) - 1)
        frac = (s - self.arclength[j]) / self.seg_lengths[j]
        v = self.vertices
        return v[j] + frac[..., None] * (v[j + 1] - v[j])

    def sample(self, step: float):
        """Nodes and trapezoid weights along the curve at spacing ``<= step``.

        Every vertex is a node, so corners are resolved exactly.  Returns
        ``(s, points, weights)`` with ``sum(weights) == length``.
        """
        if not step > 0:
            raise InputError("step must be positive")
        s_parts, w_parts = [], []
        for j, L in enumerate(self.seg_lengths):
            k = max(1, int(math.ceil(L / step - 1e-9)))
            loc = np.linspace(0.0, L, k + 1)
            h = L / k
            w = np.full(k + 1, h)
            w[[0, -1]] = 0.5 * h
            if j > 0:
                w_parts[-1][-1] += w[0]
                loc, w = loc[1:], w[1:]
            s_parts.append(self.arclength[j] + loc)
            w_parts.append(w)
        s = np.concatenate(s_parts)
        return s, self.point_at(s), np.concatenate(w_parts)

    def restrict(self, a: float, b: float) -> "Curve":
        """The sub-curve ``gamma|[a, b]``."""
        if not 0 <= a < b <= self.length:
            raise InputError(f"restriction [{a}, {b}] outside [0, {self.length}]")
        inner = self.vertices[1:-1][(self.arclength[1:-1] > a) & (self.arclength[1:-1] < b)]
        return Curve(np.vstack([self.point_at(a), inner, self.point_at(b)]))

    def reversed(self) -> "Curve":
        return Curve(self.vertices[::-1])

    def subdivided(self, pieces: int = 2) -> "Curve":
        """Same image with every segment split into ``pieces`` collinear parts."""
        t = np.linspace(0.0, 1.0, pieces + 1)[:-1]
        v = self.vertices
        parts = [v[j] + t[:, None] * (v[j + 1] - v[j]) for j in range(len(v) - 1)]
        return Curve(np.vstack(parts + [v[-1:]]))

    def __repr__(self):
        return f"Curve({len(self.vertices)} vertices, length={self.length:.6g})"


@dataclass
class CurveFamily:
    curves: list
    provenance: dict = field(default_factory=dict)

    def __len__(self):
        return len(self.curves)

    def __iter__(self):
        return iter(self.curves)

    def __getitem__(self, i):
        return self.curves[i]

    def subset(self, indices, tag: Optional[str] = None) -> "CurveFamily":
        prov = dict(self.provenance)
        if tag:
            prov["subset"] = tag
        return CurveFamily([self.curves[i] for i in indices], prov)

    def union(self, other: "CurveFamily") -> "CurveFamily":
        return CurveFamily(self.curves + other.curves, {"union": [self.provenance, other.provenance]})

    def check_inside(self, grid: BoxGrid):
        for i, c in enumerate(self.curves):
            if not np.all(grid.contains(c.vertices)):
                raise InputError(f"curve {i} leaves the grid box")


# ---------------------------------------------------------------------------
# interpolation and integrals


def default_step(grid: BoxGrid) -> float:
    return DEFAULT_STEP_FACTOR * min(grid.spacing)


def stencil(grid: BoxGrid, pts: np.ndarray):
    """Multilinear interpolation stencil: flat node indices and weights, shape ``(P, 2**n)``."""
    pts = np.atleast_2d(np.asarray(pts, dtype=float))
    if not np.all(grid.contains(pts)):
        raise InputError("sample point outside the grid box")
    n = grid.n
    base, frac = [], []
    for k in range(n):
        a = grid.extents[k][0]
        h = grid.spacing[k]
        pos = np.clip((pts[:, k] - a) / h, 0.0, grid.counts[k] - 1)
        i = np.minimum(np.floor(pos).astype(np.int64), grid.counts[k] - 2)
        base.append(i)
        frac.append(pos - i)
    strides = np.array([int(np.prod(grid.counts[k + 1:])) for k in range(n)], dtype=np.int64)
    idx = np.zeros((pts.shape[0], 2 ** n), dtype=np.int64)
    wts = np.ones((pts.shape[0], 2 ** n))
    for c in range(2 ** n):
        for k in range(n):
            bit = (c >> (n - 1 - k)) & 1
            idx[:, c] += (base[k] + bit) * strides[k]
            wts[:, c] *= frac[k] if bit else 1.0 - frac[k]
    return idx, wts


def _interp(u: ScalarField, idx, wts) -> np.ndarray:
    # stencil nodes with zero weight never contribute, even when infinite
    vals = np.where(wts > 0, u.values.reshape(-1)[idx], 0.0)
    return np.sum(vals * wts, axis=1)


def sample_along(u: ScalarField, gamma: Curve, step: float):
    """``(s, u(gamma(s)), weights)`` at the curve's quadrature nodes."""
    s, pts, w = gamma.sample(step)
    idx, wts = stencil(u.grid, pts)
    return s, _interp(u, idx, wts), w


def curve_integral(u: ScalarField, gamma: Curve, step: Optional[float] = None) -> float:
    """Composite trapezoid of ``u o gamma`` in arc length.

    ``inf`` when a sample with positive weight touches an infinite node.
    """
    if u.kind != "nonneg":
        raise InputError("curve integrals are taken of nonneg fields")
    if gamma.n != u.grid.n:
        raise InputError("curve and field dimensions differ")
    step = default_step(u.grid) if step is None else step
    _, vals, w = sample_along(u, gamma, step)
    if np.any(np.isinf(vals)):
        return math.inf
    return float(np.sum(w * vals))


def constraint_matrix(family: CurveFamily, grid: BoxGrid, step: Optional[float] = None) -> sp.csr_matrix:
    """Sparse ``A`` with ``(A u)_j`` the discrete curve integral of ``u`` along curve ``j``."""
    step = default_step(grid) if step is None else step
    rows, cols, data = [], [], []
    for j, gamma in enumerate(family):
        if gamma.n != grid.n:
            raise InputError(f"curve {j} has dimension {gamma.n}, grid has {grid.n}")
        _, pts, w = gamma.sample(step)
        idx, wts = stencil(grid, pts)
        vals = (w[:, None] * wts).ravel()
        keep = vals > 0
        cols.append(idx.ravel()[keep])
        data.append(vals[keep])
        rows.append(np.full(int(keep.sum()), j, dtype=np.int64))
    if not rows:
        return sp.csr_matrix((0, grid.size))
    A = sp.coo_matrix((np.concatenate(data), (np.concatenate(rows), np.concatenate(cols))),
                      shape=(len(family), grid.size))
    return A.tocsr()


def curves_meeting_set(family: CurveFamily, mask: ScalarField, step: Optional[float] = None) -> CurveFamily:
    """Curves whose sampled image has a nearest grid node inside the mask."""
    grid = mask.grid
    m = np.asarray(mask.values != 0).reshape(-1)
    step = default_step(grid) if step is None else step
    keep = []
    if m.any():
        for j, gamma in enumerate(family):
            _, pts, _ = gamma.sample(step)
            if m[nearest_nodes(grid, pts)].any():
                keep.append(j)
    return family.subset(keep, "meeting-set")


def nearest_nodes(grid: BoxGrid, pts: np.ndarray) -> np.ndarray:
    pts = np.atleast_2d(pts)
    flat = np.zeros(pts.shape[0], dtype=np.int64)
    for k in range(grid.n):
        a = grid.extents[k][0]
        i = np.clip(np.rint((pts[:, k] - a) / grid.spacing[k]), 0, grid.counts[k] - 1).astype(np.int64)
        flat = flat * grid.counts[k] + i
    return flat


# ---------------------------------------------------------------------------
# generators


def _transverse_coords(box, axis: int, count: int):
    others = [k for k in range(len(box)) if k != axis]
    axes = []
    for k in others:
        a, b = box[k]
        axes.append(np.array([0.5 * (a + b)]) if count == 1 else np.linspace(a, b, count))
    if not axes:
        return others, np.zeros((1, 0))
    mesh = np.meshgrid(*axes, indexing="ij")
    return others, np.stack([m.ravel() for m in mesh], axis=-1)


def segment_family(axis: int, count: int, box: Sequence[Sequence[float]]) -> CurveFamily:
    """Full-length segments parallel to ``axis`` (0-based) at ``count`` uniformly
    spaced positions per transverse axis, endpoints included; ``count = 1``
    places the single segment at the midpoint.
    """
    box = [tuple(map(float, b)) for b in box]
    if not 0 <= axis < len(box):
        raise InputError(f"axis {axis} out of range for a {len(box)}-d box")
    if count < 1:
        raise InputError("count must be >= 1")
    others, coords = _transverse_coords(box, axis, count)
    curves = []
    for c in coords:
        lo = np.empty(len(box))
        hi = np.empty(len(box))
        lo[others] = c
        hi[others] = c
        lo[axis], hi[axis] = box[axis]
        curves.append(Curve([lo, hi]))
    return CurveFamily(curves, {"generator": "segments", "axis": axis, "count": count,
                                "box": [list(b) for b in box]})


def diagonal_family(count: int, box: Sequence[Sequence[float]], slope: float = 0.5,
                    axis: int = 1) -> CurveFamily:
    """Straight segments crossing the box along ``axis`` with transverse drift
    ``slope`` per unit length in axis 0 (axis 1 when ``axis = 0``).

    Start points are uniformly spaced so that every segment stays inside the
    box; further axes sit at their midpoints.
    """
    box = [tuple(map(float, b)) for b in box]
    n = len(box)
    if n < 2:
        raise InputError("diagonal families need at least two axes")
    if count < 1:
        raise InputError("count must be >= 1")
    drift_axis = 0 if axis != 0 else 1
    a, b = box[axis]
    da, db = box[drift_axis]
    shift = slope * (b - a)
    lo_start, hi_start = (da, db - shift) if shift >= 0 else (da - shift, db)
    if lo_start > hi_start:
        raise InputError("slope too steep for the box")
    starts = [0.5 * (lo_start + hi_start)] if count == 1 else np.linspace(lo_start, hi_start, count)
    mid = np.array([0.5 * (p + q) for p, q in box])
    curves = []
    for y0 in starts:
        p, q = mid.copy(), mid.copy()
        p[axis], q[axis] = a, b
        p[drift_axis], q[drift_axis] = y0, y0 + shift
        curves.append(Curve([p, q]))
    return CurveFamily(curves, {"generator": "diagonals", "axis": axis, "count": count,
                                "slope": slope, "box": [list(b) for b in box]})


def star_family(count: int, box: Sequence[Sequence[float]], center: Optional[Sequence[float]] = None,
                radius: Optional[float] = None) -> CurveFamily:
    """Segments through ``center`` at ``count`` angles in ``[0, pi)`` (planar, axes 0 and 1).

    Each segment extends ``radius`` to both sides, clipped to the box.
    """
    box = [tuple(map(float, b)) for b in box]
    if len(box) < 2:
        raise InputError("star families need at least two axes")
    c = np.array([0.5 * (p + q) for p, q in box]) if center is None else np.asarray(center, dtype=float)
    if radius is None:
        radius = 0.5 * min(q - p for p, q in box[:2])
    curves = []
    for th in np.pi * np.arange(count) / max(count, 1):
        d = np.zeros(len(box))
        d[0], d[1] = math.cos(th), math.sin(th)
        lo_t, hi_t = -radius, radius
        for k in range(2):
            if abs(d[k]) > 1e-15:
                t1 = (box[k][0] - c[k]) / d[k]
                t2 = (box[k][1] - c[k]) / d[k]
                lo_t = max(lo_t, min(t1, t2))
                hi_t = min(hi_t, max(t1, t2))
        curves.append(Curve([c + lo_t * d, c + hi_t * d]))
    return CurveFamily(curves, {"generator": "star", "count": count, "center": c.tolist(),
                                "radius": radius})


# ---------------------------------------------------------------------------
# curvev1


def format_family(family: CurveFamily) -> str:
    blocks = []
    for c in family:
        lines = [f"curvev1 {c.n} {len(c.vertices)}"]
        lines += [" ".join("%.17g" % x for x in v) for v in c.vertices]
        blocks.append("\n".join(lines))
    return "\n---\n".join(blocks) + ("\n" if blocks else "")


def write_family(family: CurveFamily, path) -> None:
    with open(path, "w") as fh:
        fh.write(format_family(family))


def parse_family(text: str, source: str = "<curves>") -> CurveFamily:
    curves = []
    lines = text.splitlines()
    i = 0
    while i < len(lines):
        line = lines[i].strip()
        if not line or line == "---":
            i += 1
            continue
        head = line.split()
        if head[0] != "curvev1" or len(head) != 3:
            raise InputError(f"{source}: line {i + 1}: expected 'curvev1 n V'")
        try:
            n, V = int(head[1]), int(head[2])
        except ValueError:
            raise InputError(f"{source}: line {i + 1}: bad curvev1 header") from None
        pts = []
        for j in range(V):
            k = i + 1 + j
            if k >= len(lines):
                raise InputError(f"{source}: line {k + 1}: expected {V} vertices, file ended")
            try:
                row = [float(t) for t in lines[k].split()]
            except ValueError:
                raise InputError(f"{source}: line {k + 1}: bad vertex") from None
            if len(row) != n:
                raise InputError(f"{source}: line {k + 1}: expected {n} coordinates")
            pts.append(row)
        try:
            curves.append(Curve(pts))
        except InputError as exc:
            raise InputError(f"{source}: line {i + 1}: {exc}") from None
        i += 1 + V
    return CurveFamily(curves, {"source": source})


def read_family(path) -> CurveFamily:
    if not os.path.exists(path):
        raise InputError(f"curve file not found: {path}")
    with open(path) as fh:
        return parse_family(fh.read(), str(path))
