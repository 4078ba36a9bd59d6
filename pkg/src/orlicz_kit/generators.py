"""Named field generators used by scenarios, tests and the CLI.

Each generator takes a :class:`BoxGrid` plus keyword parameters and returns a
:class:`ScalarField`.  Smooth members also expose their analytic gradient
through :data:`GRADIENTS` for convergence studies.
"""

from __future__ import annotations

import math

import numpy as np

from .errors import InputError
from .field import BoxGrid, ScalarField


def const(grid: BoxGrid, c: float = 1.0) -> ScalarField:
    return ScalarField(grid, np.full(grid.shape, float(c)), "nonneg" if c >= 0 else "signed")


def coordinate(grid: BoxGrid, axis: int = 0, shift: float = 0.0) -> ScalarField:
    """``x_axis + shift``."""
    return ScalarField.from_function(grid, lambda x: x[..., int(axis)] + shift)


def linear(grid: BoxGrid, c0: float = 0.0, c1: float = 1.0, c2: float = 0.0, c3: float = 0.0) -> ScalarField:
    """``c0 + c1 x_0 + c2 x_1 + c3 x_2`` (missing axes ignored)."""
    coeffs = [c1, c2, c3][: grid.n]
    return ScalarField.from_function(grid, lambda x: c0 + x @ np.asarray(coeffs, dtype=float))


def quadratic(grid: BoxGrid, c: float = 1.0) -> ScalarField:
    """``c |x|^2``."""
    return ScalarField.from_function(grid, lambda x: c * np.sum(x * x, axis=-1))


def sine(grid: BoxGrid, freq: float = 1.0, amp: float = 1.0, offset: float = 0.0) -> ScalarField:
    """``offset + amp prod_k sin(freq pi x_k)``."""
    return ScalarField.from_function(grid, lambda x: offset + amp * np.prod(np.sin(freq * math.pi * x), axis=-1))


def gauss(grid: BoxGrid, c: float = 1.0, amp: float = 1.0) -> ScalarField:
    """``amp exp(-c |x|^2)``."""
    return ScalarField.from_function(grid, lambda x: amp * np.exp(-c * np.sum(x * x, axis=-1)))


def product(grid: BoxGrid, c: float = 1.0) -> ScalarField:
    """``c x_0 x_1`` (the ``yz`` field)."""
    if grid.n < 2:
        raise InputError("product field needs at least two axes")
    return ScalarField.from_function(grid, lambda x: c * x[..., 0] * x[..., 1])


def abs_coord(grid: BoxGrid, axis: int = 0, center: float = 0.0) -> ScalarField:
    return ScalarField.from_function(grid, lambda x: np.abs(x[..., int(axis)] - center))


def step(grid: BoxGrid, axis: int = 0, at: float = 0.0, low: float = 0.0, mid: float = 1.0,
         high: float = 2.0) -> ScalarField:
    """``low`` below ``at`` on the chosen axis, ``mid`` on it, ``high`` above."""
    def fn(x):
        y = x[..., int(axis)]
        return np.where(y < at, low, np.where(y > at, high, mid))
    return ScalarField.from_function(grid, fn)


def inv_abs(grid: BoxGrid, axis: int = 0, center: float = 0.0, power: float = 1.0) -> ScalarField:
    """``|x_axis - center|^-power`` with ``inf`` on the hyperplane, flagged as null."""
    y = grid.points[..., int(axis)] - center
    on_set = y == 0
    with np.errstate(divide="ignore"):
        vals = np.where(on_set, math.inf, np.abs(y) ** -power)
    return ScalarField(grid, vals, "nonneg", on_set)


def point_log(grid: BoxGrid, c0: float = 0.0, c1: float = 0.0, c2: float = 0.0) -> ScalarField:
    """``log(1 + 1/|x - c|)``: unbounded at a point, integrable in every power."""
    center = np.asarray([c0, c1, c2][: grid.n])
    r = np.sqrt(np.sum((grid.points - center) ** 2, axis=-1))
    at = r == 0
    with np.errstate(divide="ignore"):
        vals = np.where(at, math.inf, np.log1p(1.0 / r))
    return ScalarField(grid, vals, "nonneg", at)


def strip(grid: BoxGrid, axis: int = 0, center: float = 0.0, width: float = 0.1,
          height: float = 1.0) -> ScalarField:
    """``height`` on the nodes with ``|x_axis - center| <= width/2``, zero elsewhere."""
    y = grid.points[..., int(axis)] - center
    return ScalarField(grid, np.where(np.abs(y) <= 0.5 * width, float(height), 0.0))


def strip_sequence(grid: BoxGrid, count: int, axis: int = 0, center: float = 0.0,
                   width_power: float = 3.0, start: int = 1) -> list:
    """``u_i = i * 1{|x_axis - center| <= i^-width_power / 2}`` for ``i = start..start+count-1``."""
    return [strip(grid, axis, center, float(i) ** -width_power, float(i)) for i in range(start, start + count)]


GENERATORS = {
    "const": const,
    "coordinate": coordinate,
    "linear": linear,
    "quadratic": quadratic,
    "sine": sine,
    "gauss": gauss,
    "product": product,
    "abs": abs_coord,
    "step": step,
    "inv_abs": inv_abs,
    "point_log": point_log,
    "strip": strip,
}

#: closed forms of the smooth generators, as functions of points ``(..., n)``
ANALYTIC = {
    "quadratic": lambda x, c=1.0: c * np.sum(x * x, axis=-1),
    "product": lambda x, c=1.0: c * x[..., 0] * x[..., 1],
    "sine": lambda x, freq=1.0, amp=1.0, offset=0.0: offset + amp * np.prod(np.sin(freq * math.pi * x), axis=-1),
    "gauss": lambda x, c=1.0, amp=1.0: amp * np.exp(-c * np.sum(x * x, axis=-1)),
}


def _sine_grad(x, freq=1.0, amp=1.0, offset=0.0):
    s = np.sin(freq * math.pi * x)
    c = np.cos(freq * math.pi * x)
    parts = []
    for k in range(x.shape[-1]):
        others = np.prod(np.delete(s, k, axis=-1), axis=-1)
        parts.append(amp * freq * math.pi * c[..., k] * others)
    return np.stack(parts, axis=-1)


def _product_grad(x, c=1.0):
    parts = [c * x[..., 1], c * x[..., 0]] + [np.zeros(x.shape[:-1])] * (x.shape[-1] - 2)
    return np.stack(parts, axis=-1)


#: analytic gradients of the smooth generators
GRADIENTS = {
    "quadratic": lambda x, c=1.0: 2.0 * c * x,
    "gauss": lambda x, c=1.0, amp=1.0: -2.0 * c * x * (amp * np.exp(-c * np.sum(x * x, axis=-1)))[..., None],
    "product": _product_grad,
    "sine": _sine_grad,
}

_INT_PARAMS = {"axis"}


def generate(name: str, grid: BoxGrid, **params) -> ScalarField:
    """Build a named field, converting string parameters to numbers."""
    if name not in GENERATORS:
        raise InputError(f"unknown field generator {name!r}; known: {sorted(GENERATORS)}")
    kwargs = {}
    for k, v in params.items():
        try:
            kwargs[k] = int(float(v)) if k in _INT_PARAMS else float(v)
        except (TypeError, ValueError):
            raise InputError(f"generator {name}: parameter {k}={v!r} is not a number") from None
    if "axis" in kwargs and not 0 <= kwargs["axis"] < grid.n:
        raise InputError(f"generator {name}: axis {kwargs['axis']} out of range for a {grid.n}-d grid")
    try:
        return GENERATORS[name](grid, **kwargs)
    except TypeError as exc:
        raise InputError(f"generator {name}: {exc}") from None
