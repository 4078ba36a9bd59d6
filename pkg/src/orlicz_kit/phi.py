"""Pointwise integrands ``phi(x, t)`` of generalized Orlicz type.

An integrand is a callable ``phi(x, t)`` where ``x`` is an array of points with
the coordinate axis last (shape ``S + (n,)``) and ``t`` is an array of
non-negative magnitudes that broadcasts against ``S``.  Values lie in
``[0, inf]``; ``math.inf`` is a legal value everywhere.

Structural metadata (convexity, left-continuity, known almost-monotonicity
exponents) is declared, not detected.  :mod:`orlicz_kit.conditions` verifies
declared properties by sampling.
"""

from __future__ import annotations

import math
from typing import Callable, Optional, Sequence

import numpy as np

from .errors import InputError, IntegrityError

INF = math.inf

#: default ceiling for the left-inverse bracket search
T_MAX = 1e8
#: default upper end of the grid scan used by :func:`conjugate_phi`
CONJUGATE_T_MAX = 1e4

_GOLDEN = (math.sqrt(5.0) - 1.0) / 2.0


def _points(x) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    if x.ndim == 0:
        x = x.reshape(1)
    return x


def _broadcast(x: np.ndarray, t: np.ndarray, value):
    shape = np.broadcast_shapes(x.shape[:-1], np.shape(t))
    return np.broadcast_to(value, shape)


# ---------------------------------------------------------------------------
# coefficient fields (a(x) in the double phase case, p(x) for variable exponents)


class Coefficient:
    """A named scalar function of position used to parametrize integrands."""

    kind = "const"

    def __init__(self, **params):
        self.params = {k: float(v) for k, v in params.items()}

    def __call__(self, x: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def describe(self, prefix: str) -> list[str]:
        out = [f"{prefix}={self.kind}"]
        out += [f"{prefix}.{k}={_fmt(v)}" for k, v in sorted(self.params.items())]
        return out

    def bounds(self, box) -> tuple[float, float]:
        """Range of the coefficient over ``box``, used for declared metadata."""
        pts = np.array(np.meshgrid(*[np.linspace(a, b, 9) for a, b in box])).reshape(len(box), -1).T
        vals = self(pts)
        return float(np.min(vals)), float(np.max(vals))


class ConstCoefficient(Coefficient):
    kind = "const"

    def __init__(self, value: float = 1.0):
        super().__init__(value=value)

    def __call__(self, x):
        return np.full(np.shape(x)[:-1], self.params["value"])


class AffineCoefficient(Coefficient):
    """``c0 + c1 * x[axis]``."""

    kind = "affine"

    def __init__(self, c0: float = 0.0, c1: float = 1.0, axis: float = 0):
        super().__init__(c0=c0, c1=c1, axis=axis)

    def __call__(self, x):
        axis = int(self.params["axis"])
        return self.params["c0"] + self.params["c1"] * x[..., axis]


class DistanceCoefficient(Coefficient):
    """``c0 + c1 * |x[axis] - center|`` (a kink along a hyperplane)."""

    kind = "distance"

    def __init__(self, c0: float = 0.0, c1: float = 1.0, center: float = 0.0, axis: float = 0):
        super().__init__(c0=c0, c1=c1, center=center, axis=axis)

    def __call__(self, x):
        axis = int(self.params["axis"])
        return self.params["c0"] + self.params["c1"] * np.abs(x[..., axis] - self.params["center"])


class CallableCoefficient(Coefficient):
    kind = "callable"

    def __init__(self, fn: Callable[[np.ndarray], np.ndarray], name: str = "callable"):
        super().__init__()
        self.fn = fn
        self.kind = name

    def __call__(self, x):
        return np.asarray(self.fn(x), dtype=float)


COEFFICIENTS = {
    "const": ConstCoefficient,
    "affine": AffineCoefficient,
    "distance": DistanceCoefficient,
}


def as_coefficient(value) -> Coefficient:
    if isinstance(value, Coefficient):
        return value
    if callable(value):
        return CallableCoefficient(value)
    return ConstCoefficient(float(value))


def _fmt(v) -> str:
    if isinstance(v, float) and v.is_integer() and abs(v) < 1e15:
        return str(int(v))
    return repr(v)


# ---------------------------------------------------------------------------
# integrands


class PhiFunction:
    """Base class for integrands ``phi: Omega x [0, inf) -> [0, inf]``.

    Subclasses implement :meth:`_value`; :meth:`derivative` and :meth:`prox`
    have generic fallbacks that closed-form families override.
    """

    family = "custom"
    is_convex = False
    is_left_continuous = True

    def __init__(self, box=None, p_inc=None, q_dec=None, L=None):
        self.box = None if box is None else tuple((float(a), float(b)) for a, b in box)
        self.p_inc = p_inc
        self.q_dec = q_dec
        self.L = L

    def __call__(self, x, t) -> np.ndarray:
        x = _points(x)
        t = np.asarray(t, dtype=float)
        return self._value(x, t)

    def _value(self, x: np.ndarray, t: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def derivative(self, x, t) -> np.ndarray:
        """Right derivative in ``t`` (forward difference unless overridden)."""
        x = _points(x)
        t = np.asarray(t, dtype=float)
        eps = 1e-7 * (1.0 + t)
        return (self(x, t + eps) - self(x, t)) / eps

    def prox(self, x, v, step) -> np.ndarray:
        """``argmin_{t >= 0} step * phi(x, t) + (t - v)**2 / 2``, elementwise.

        The generic version bisects on the monotone optimality map
        ``t - v + step * phi'(x, t)``; it is exact up to float resolution for
        convex integrands, including ones with kinks.
        """
        x = _points(x)
        v = np.asarray(v, dtype=float)
        step = np.asarray(step, dtype=float)
        shape = np.broadcast_shapes(x.shape[:-1], v.shape, step.shape)
        v = np.broadcast_to(v, shape)
        step = np.broadcast_to(step, shape)
        lo = np.zeros(shape)
        hi = np.maximum(v, 0.0)
        for _ in range(64):
            mid = 0.5 * (lo + hi)
            g = mid - v + step * self.derivative(x, mid)
            up = g >= 0
            hi = np.where(up, mid, hi)
            lo = np.where(up, lo, mid)
        return hi

    def params(self) -> list[str]:
        return []

    def describe(self) -> str:
        params = self.params()
        return self.family + (":" + ",".join(params) if params else "")

    def __repr__(self):
        return f"<{type(self).__name__} {self.describe()}>"


class Power(PhiFunction):
    """``t**p``."""

    family = "power"

    def __init__(self, p: float = 2.0, box=None):
        if p <= 0:
            raise InputError(f"power exponent must be positive, got {p}")
        super().__init__(box=box, p_inc=p, q_dec=p, L=1.0)
        self.p = float(p)
        self.is_convex = self.p >= 1.0

    def _value(self, x, t):
        return _broadcast(x, t, np.power(t, self.p))

    def derivative(self, x, t):
        t = np.asarray(t, dtype=float)
        if self.p == 1.0:
            d = np.ones_like(t)
        else:
            d = self.p * np.power(t, self.p - 1.0)
        return _broadcast(_points(x), t, d)

    def prox(self, x, v, step):
        v = np.asarray(v, dtype=float)
        if self.p == 1.0:
            return np.maximum(v - step, 0.0)
        if self.p == 2.0:
            return np.maximum(v, 0.0) / (1.0 + 2.0 * np.asarray(step, dtype=float))
        if self.p > 2.0:
            # t + step p t^(p-1) = v is convex in t: Newton from an upper bound
            # decreases monotonically onto the root
            v = np.maximum(v, 0.0)
            sp_ = self.p * np.asarray(step, dtype=float)
            with np.errstate(divide="ignore"):
                t = np.minimum(v, np.power(v / sp_, 1.0 / (self.p - 1.0)))
            for _ in range(40):
                g = t + sp_ * np.power(t, self.p - 1.0) - v
                dg = 1.0 + sp_ * (self.p - 1.0) * np.power(t, self.p - 2.0)
                t_new = np.maximum(t - g / dg, 0.0)
                if np.all(np.abs(t_new - t) <= 1e-15 * (1.0 + t)):
                    t = t_new
                    break
                t = t_new
            return _broadcast(_points(x), t, t)
        return super().prox(x, v, step)

    def params(self):
        return [f"p={_fmt(self.p)}"]


class Orlicz(PhiFunction):
    """An ``x``-independent profile ``phi(t)``.

    Named profiles: ``exp`` (``e^t - 1``) and ``tlog`` (``t log(1 + t)``).
    Arbitrary profiles can be passed as callables.
    """

    family = "orlicz"
    PROFILES = {
        "exp": (lambda t: np.expm1(t), lambda t: np.exp(t)),
        "tlog": (lambda t: t * np.log1p(t), lambda t: np.log1p(t) + t / (1.0 + t)),
    }

    def __init__(self, profile="exp", derivative=None, convex=True, box=None, **meta):
        super().__init__(box=box, **meta)
        if isinstance(profile, str):
            if profile not in self.PROFILES:
                raise InputError(f"unknown orlicz profile {profile!r}; known: {sorted(self.PROFILES)}")
            self.profile = profile
            self._fn, self._dfn = self.PROFILES[profile]
        else:
            self.profile = getattr(profile, "__name__", "callable")
            self._fn, self._dfn = profile, derivative
        self.is_convex = bool(convex)

    def _value(self, x, t):
        with np.errstate(over="ignore"):
            return _broadcast(x, t, self._fn(t))

    def derivative(self, x, t):
        if self._dfn is None:
            return super().derivative(x, t)
        with np.errstate(over="ignore"):
            return _broadcast(_points(x), np.asarray(t, float), self._dfn(np.asarray(t, dtype=float)))

    def params(self):
        return [f"profile={self.profile}"]


class VariableExponent(PhiFunction):
    """``t**p(x)`` for an exponent field ``p(x) >= 1``."""

    family = "variable_exponent"

    def __init__(self, p=2.0, box=None, convex=True):
        super().__init__(box=box, L=1.0)
        self.p_field = as_coefficient(p)
        self.is_convex = bool(convex)
        if box is not None:
            lo, hi = self.p_field.bounds(box)
            if lo < 1.0:
                raise InputError(f"variable exponent drops to {lo:g} < 1 on the domain box")
            self.p_inc, self.q_dec = lo, hi

    def _value(self, x, t):
        return np.power(t, self.p_field(x))

    def derivative(self, x, t):
        p = self.p_field(_points(x))
        t = np.asarray(t, dtype=float)
        return p * np.power(t, p - 1.0)

    def params(self):
        return self.p_field.describe("p")


class DoublePhase(PhiFunction):
    """``t**p + a(x) t**q`` with ``1 <= p <= q`` and ``a >= 0``."""

    family = "double_phase"
    is_convex = True

    def __init__(self, p: float = 2.0, q: float = 4.0, a=1.0, box=None):
        if not 1.0 <= p <= q:
            raise InputError(f"double phase needs 1 <= p <= q, got p={p}, q={q}")
        super().__init__(box=box, p_inc=p, q_dec=q, L=1.0)
        self.p, self.q = float(p), float(q)
        self.a_field = as_coefficient(a)
        if box is not None and self.a_field.bounds(box)[0] < 0:
            raise InputError("double phase weight a(x) is negative somewhere on the domain box")

    def _value(self, x, t):
        a = self.a_field(x)
        with np.errstate(invalid="ignore"):
            high = np.where(a > 0, a * np.power(t, self.q), 0.0)
        return np.power(t, self.p) + high

    def derivative(self, x, t):
        a = self.a_field(_points(x))
        t = np.asarray(t, dtype=float)
        return self.p * np.power(t, self.p - 1.0) + a * self.q * np.power(t, self.q - 1.0)

    def params(self):
        return [f"p={_fmt(self.p)}", f"q={_fmt(self.q)}"] + self.a_field.describe("a")


class Ramp(PhiFunction):
    """``max(t - 1, 0)``: vanishes on ``[0, 1]``, grows linearly afterwards."""

    family = "ramp"
    is_convex = True

    def __init__(self, box=None):
        super().__init__(box=box, p_inc=1.0, L=1.0)

    def _value(self, x, t):
        return _broadcast(x, t, np.maximum(t - 1.0, 0.0))

    def derivative(self, x, t):
        t = np.asarray(t, dtype=float)
        return _broadcast(_points(x), t, (t >= 1.0).astype(float))

    def prox(self, x, v, step):
        v = np.asarray(v, dtype=float)
        step = np.asarray(step, dtype=float)
        out = np.where(v <= 1.0, v, np.where(v <= 1.0 + step, 1.0, v - step))
        return np.maximum(out, 0.0)


class RadialGate(PhiFunction):
    """Integrand that is switched off below the threshold ``|y|**-1``.

    With ``y = x[axis]``: ``t`` on the hyperplane ``y = 0``; otherwise ``0``
    for ``t <= 1/|y|`` and ``t`` above.  Left-continuous, not convex.
    """

    family = "radial_gate"
    is_convex = False

    def __init__(self, axis: int = 0, box=None):
        super().__init__(box=box, p_inc=1.0, L=1.0)
        self.axis = int(axis)

    def threshold(self, x) -> np.ndarray:
        y = np.abs(_points(x)[..., self.axis])
        with np.errstate(divide="ignore", over="ignore"):
            return np.where(y == 0, 0.0, 1.0 / y)

    def _value(self, x, t):
        thr = self.threshold(x)
        t = np.asarray(t, dtype=float)
        return np.where(t <= thr, 0.0, t) * np.ones_like(thr)

    def derivative(self, x, t):
        thr = self.threshold(x)
        t = np.asarray(t, dtype=float)
        return np.where(t < thr, 0.0, 1.0) * np.ones_like(thr)

    def params(self):
        return [f"axis={self.axis}"] if self.axis else []


class Scaled(PhiFunction):
    """``c * phi(x, t)``."""

    family = "scaled"

    def __init__(self, base: PhiFunction, c: float):
        if c <= 0:
            raise InputError("scale factor must be positive")
        super().__init__(box=base.box, p_inc=base.p_inc, q_dec=base.q_dec, L=base.L)
        self.base, self.c = base, float(c)
        self.is_convex = base.is_convex
        self.is_left_continuous = base.is_left_continuous

    def _value(self, x, t):
        return self.c * self.base(x, t)

    def derivative(self, x, t):
        return self.c * self.base.derivative(x, t)

    def prox(self, x, v, step):
        return self.base.prox(x, v, self.c * np.asarray(step, dtype=float))

    def describe(self) -> str:
        return _with_param(self.base.describe(), "scale", self.c)


class Dilated(PhiFunction):
    """``phi(x, c * t)``."""

    family = "dilated"

    def __init__(self, base: PhiFunction, c: float):
        if c <= 0:
            raise InputError("dilation factor must be positive")
        super().__init__(box=base.box, p_inc=base.p_inc, q_dec=base.q_dec, L=base.L)
        self.base, self.c = base, float(c)
        self.is_convex = base.is_convex
        self.is_left_continuous = base.is_left_continuous

    def _value(self, x, t):
        return self.base(x, self.c * np.asarray(t, dtype=float))

    def derivative(self, x, t):
        return self.c * self.base.derivative(x, self.c * np.asarray(t, dtype=float))

    def describe(self) -> str:
        return _with_param(self.base.describe(), "dilate", self.c)


def _with_param(desc: str, key: str, value: float) -> str:
    return desc + ("," if ":" in desc else ":") + f"{key}={_fmt(value)}"


class ConjugatePhi(PhiFunction):
    """Conjugate integrand ``sup_{0 <= t <= t_max} (s t - phi(x, t))``.

    The supremum is located by a geometric grid scan followed by a
    golden-section refinement around the best grid point, so for convex
    ``phi`` it converges to the Fenchel conjugate restricted to
    ``[0, t_max]``.
    """

    family = "conjugate"
    is_convex = True

    def __init__(self, base: PhiFunction, t_max: float = CONJUGATE_T_MAX):
        super().__init__(box=base.box)
        self.base = base
        self.t_max = float(t_max)

    def _value(self, x, s):
        return conjugate_phi(self.base, x, s, t_max=self.t_max, _checked=True)

    def params(self):
        return [f"of={self.base.describe()}", f"t_max={_fmt(self.t_max)}"]


FAMILIES = {
    "power": Power,
    "orlicz": Orlicz,
    "variable_exponent": VariableExponent,
    "double_phase": DoublePhase,
    "ramp": Ramp,
    "radial_gate": RadialGate,
}


# ---------------------------------------------------------------------------
# operations


def _check_domain(phi: PhiFunction, x: np.ndarray):
    if phi.box is None:
        return
    for k, (a, b) in enumerate(phi.box):
        xs = x[..., k]
        if np.any(xs < a) or np.any(xs > b):
            raise InputError(f"point outside the integrand's domain box on axis {k}: [{a}, {b}]")


def eval_phi(phi: PhiFunction, x, t):
    """Evaluate ``phi(x, t)`` after validating ``t >= 0`` and the domain box.

    Scalar inputs give a Python float; array inputs give an array.
    """
    x = _points(x)
    t_arr = np.asarray(t, dtype=float)
    if np.any(np.isnan(t_arr)) or np.any(t_arr < 0):
        raise InputError("t must be non-negative")
    _check_domain(phi, x)
    out = phi(x, t_arr)
    return float(out) if np.ndim(out) == 0 else out


def left_inverse(phi: PhiFunction, x, tau, tol: float = 1e-10, t_max: float = T_MAX):
    """Generalized inverse ``inf{t >= 0 : phi(x, t) >= tau}``.

    Vectorized over broadcast ``x`` and ``tau``.  The value returned is the
    upper end of the final bisection bracket, so ``phi(x, result) >= tau``
    whenever the result is finite.  ``inf`` is returned when no ``t <= t_max``
    reaches ``tau``.

    Raises
    ------
    IntegrityError
        If ``t -> phi(x, t)`` is observed to decrease.
    """
    if tol <= 0:
        raise InputError("tol must be positive")
    x = _points(x)
    tau = np.asarray(tau, dtype=float)
    if np.any(tau < 0):
        raise InputError("tau must be non-negative")
    shape = np.broadcast_shapes(x.shape[:-1], tau.shape)
    xb = np.broadcast_to(x, shape + x.shape[-1:])
    tau_b = np.broadcast_to(tau, shape).astype(float)
    scalar = shape == ()
    xb = xb.reshape(-1, x.shape[-1])
    tau_b = tau_b.reshape(-1)

    result = np.zeros(tau_b.shape)
    todo = tau_b > 0
    if np.any(todo):
        xs, ts = xb[todo], tau_b[todo]
        lo = np.zeros(ts.shape)
        f_lo = np.zeros(ts.shape)
        hi = np.ones(ts.shape)
        f_hi = phi(xs, hi)
        # bracket by doubling
        growing = f_hi < ts
        while np.any(growing):
            nxt = np.where(growing, np.minimum(hi * 2.0, t_max * 2.0), hi)
            f_nxt = phi(xs, nxt)
            if np.any(f_nxt[growing] < f_hi[growing] - 1e-12 * np.abs(f_hi[growing])):
                raise IntegrityError("phi(x, .) decreased during the bracket search")
            lo = np.where(growing, hi, lo)
            f_lo = np.where(growing, f_hi, f_lo)
            hi, f_hi = nxt, f_nxt
            growing = (f_hi < ts) & (hi <= t_max)
        unreachable = f_hi < ts
        if np.any(unreachable):
            # one last probe exactly at t_max
            f_cap = phi(xs, np.full(ts.shape, t_max))
            ok = unreachable & (f_cap >= ts)
            hi = np.where(ok, t_max, hi)
            f_hi = np.where(ok, f_cap, f_hi)
            unreachable &= ~ok
        for _ in range(200):
            width = hi - lo
            active = (~unreachable) & (width > tol)
            if not np.any(active):
                break
            mid = lo + 0.5 * width
            stuck = (mid <= lo) | (mid >= hi)
            active &= ~stuck
            if not np.any(active):
                break
            f_mid = phi(xs, mid)
            bad = active & ((f_mid < f_lo - 1e-12 * np.abs(f_lo)) | (f_mid > f_hi + 1e-12 * np.abs(f_hi)))
            if np.any(bad):
                raise IntegrityError("phi(x, .) is not monotone on the bisection bracket")
            up = active & (f_mid >= ts)
            down = active & ~up
            hi = np.where(up, mid, hi)
            f_hi = np.where(up, f_mid, f_hi)
            lo = np.where(down, mid, lo)
            f_lo = np.where(down, f_mid, f_lo)
        result[todo] = np.where(unreachable, INF, hi)
    if scalar:
        return float(result[0])
    return result.reshape(shape)


def conjugate_phi(phi: PhiFunction, x, s, t_max: float = CONJUGATE_T_MAX, _checked: bool = False):
    """``sup_{0 <= t <= t_max} (s t - phi(x, t))`` clipped below at zero.

    Vectorized over broadcast ``x`` and ``s``.
    """
    if t_max <= 0:
        raise InputError("t_max must be positive")
    x = _points(x)
    s = np.asarray(s, dtype=float)
    if not _checked and np.any(s < 0):
        raise InputError("s must be non-negative")
    shape = np.broadcast_shapes(x.shape[:-1], s.shape)
    scalar = shape == ()
    xb = np.broadcast_to(x, shape + x.shape[-1:]).reshape(-1, x.shape[-1])
    sb = np.broadcast_to(s, shape).reshape(-1)
    out = np.zeros(sb.shape)
    finite = np.isfinite(sb)
    out[~finite] = INF
    live = finite & (sb > 0)
    if np.any(live):
        xs, ss = xb[live], sb[live]
        grid = np.concatenate([[0.0], np.geomspace(t_max * 1e-9, t_max, 240)])
        with np.errstate(invalid="ignore"):
            vals = ss[:, None] * grid[None, :] - phi(xs[:, None, :], grid[None, :])
        vals = np.where(np.isnan(vals), -INF, vals)
        k = np.argmax(vals, axis=1)
        best = vals[np.arange(len(k)), k]
        a = grid[np.maximum(k - 1, 0)]
        b = grid[np.minimum(k + 1, len(grid) - 1)]

        def gain(t):
            with np.errstate(invalid="ignore"):
                g = ss * t - phi(xs, t)
            return np.where(np.isnan(g), -INF, g)

        c = b - _GOLDEN * (b - a)
        d = a + _GOLDEN * (b - a)
        fc, fd = gain(c), gain(d)
        for _ in range(80):
            left = fc >= fd
            a, b = np.where(left, a, c), np.where(left, d, b)
            c_new = np.where(left, b - _GOLDEN * (b - a), d)
            d_new = np.where(left, c, a + _GOLDEN * (b - a))
            f_new = gain(np.where(left, c_new, d_new))
            fc, fd = np.where(left, f_new, fd), np.where(left, fc, f_new)
            c, d = c_new, d_new
        best = np.maximum(best, np.maximum(fc, fd))
        best = np.maximum(best, gain(0.5 * (a + b)))
        out[live] = np.maximum(best, 0.0)
    if scalar:
        return float(out[0])
    return out.reshape(shape)


# ---------------------------------------------------------------------------
# descriptors


def parse_descriptor(desc: str) -> tuple[str, dict[str, str]]:
    """Split ``family:key=value,key=value`` into its parts."""
    desc = desc.strip()
    if not desc:
        raise InputError("empty integrand descriptor")
    family, _, rest = desc.partition(":")
    params: dict[str, str] = {}
    if rest.strip():
        for item in rest.split(","):
            key, eq, value = item.partition("=")
            if not eq or not key.strip():
                raise InputError(f"malformed descriptor parameter {item!r} in {desc!r}")
            params[key.strip()] = value.strip()
    return family.strip(), params


def _coefficient_from(params: dict[str, str], name: str, default: float) -> Coefficient:
    raw = params.pop(name, None)
    sub = {k[len(name) + 1:]: params.pop(k) for k in list(params) if k.startswith(name + ".")}
    if raw is None:
        return ConstCoefficient(default)
    try:
        return ConstCoefficient(float(raw))
    except ValueError:
        pass
    if raw not in COEFFICIENTS:
        raise InputError(f"unknown coefficient field {raw!r}; known: {sorted(COEFFICIENTS)}")
    try:
        return COEFFICIENTS[raw](**{k: float(v) for k, v in sub.items()})
    except (TypeError, ValueError) as exc:
        raise InputError(f"bad parameters for coefficient {raw!r}: {exc}") from None


def phi_from_descriptor(desc: str, box: Optional[Sequence[tuple[float, float]]] = None) -> PhiFunction:
    """Build an integrand from a descriptor such as ``power:p=2`` or
    ``double_phase:p=2,q=4,a=affine,a.c0=0,a.c1=1``.

    ``scale=c`` and ``dilate=c`` wrap any family into ``c*phi(x,t)`` and
    ``phi(x,c*t)`` respectively.
    """
    family, params = parse_descriptor(desc)
    scale = params.pop("scale", None)
    dilate = params.pop("dilate", None)
    try:
        if family == "power":
            phi = Power(float(params.pop("p", 2.0)), box=box)
        elif family == "ramp":
            phi = Ramp(box=box)
        elif family == "radial_gate":
            phi = RadialGate(axis=int(float(params.pop("axis", 0))), box=box)
        elif family == "orlicz":
            phi = Orlicz(params.pop("profile", "exp"), box=box)
        elif family == "double_phase":
            p = float(params.pop("p", 2.0))
            q = float(params.pop("q", 4.0))
            phi = DoublePhase(p, q, _coefficient_from(params, "a", 1.0), box=box)
        elif family == "variable_exponent":
            phi = VariableExponent(_coefficient_from(params, "p", 2.0), box=box)
        else:
            raise InputError(f"unknown integrand family {family!r}; known: {sorted(FAMILIES)}")
    except ValueError as exc:
        if isinstance(exc, InputError):
            raise
        raise InputError(f"bad numeric parameter in descriptor {desc!r}: {exc}") from None
    if params:
        raise InputError(f"unused descriptor parameters for {family}: {sorted(params)}")
    try:
        if dilate is not None:
            phi = Dilated(phi, float(dilate))
        if scale is not None:
            phi = Scaled(phi, float(scale))
    except ValueError as exc:
        if isinstance(exc, InputError):
            raise
        raise InputError(f"bad scale or dilation in descriptor {desc!r}") from None
    return phi
