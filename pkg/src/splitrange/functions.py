"""Built-in convex functions and a derivative-free proximal solver."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from .cloud import Box, as_points
from .errors import DimensionMismatchError, SpecError, WindowExhaustedError
from .sets import BoxSet, Cylinder, ImageSet, PredicateSet

DEFAULT_DEPTH = 60


@dataclass(frozen=True)
class BuiltinFunction:
    """A proper lsc convex function known by name.

    `value` evaluates row-wise on ``(n, dim)`` arrays and is only called
    inside the box given by `domain_lo` and `domain_hi`.  `prox` is a closed form when one is known.
    `minimizer` is any minimizer of the function; it bounds the search
    window of the numeric prox because prox_f fixes it.
    """

    name: str
    dim: Optional[int]
    value: Callable[[np.ndarray], np.ndarray]
    minimizer: Callable[[int], np.ndarray]
    prox: Optional[Callable[[np.ndarray], np.ndarray]] = None
    domain_lo: Optional[Callable[[int], np.ndarray]] = None
    domain_hi: Optional[Callable[[int], np.ndarray]] = None
    subdiff_domain: Optional[Callable[[int], object]] = None
    subdiff_range: Optional[Callable[[int], object]] = None

    def resolve_dim(self, dim):
        if self.dim is not None:
            if dim is not None and dim != self.dim:
                raise DimensionMismatchError(f"{self.name} is defined on R^{self.dim}")
            return self.dim
        if dim is None:
            raise SpecError(f"{self.name} needs an explicit dimension", field="dim")
        return int(dim)

    def bounds(self, dim):
        lo = self.domain_lo(dim) if self.domain_lo else np.full(dim, -np.inf)
        hi = self.domain_hi(dim) if self.domain_hi else np.full(dim, np.inf)
        return lo, hi


def _bh_value(y):
    y1 = np.maximum(y[:, 0], 0.0)
    return np.maximum(1.0 - np.sqrt(y1), np.abs(y[:, 1]))


def bh_range_predicate(points, tol=0.0):
    """Membership in ``{xi1 > 0} U {(0, xi2) : |xi2| >= 1}`` at tolerance `tol`.

    A point passes when it lies within `tol` of the set.  Because the set
    is dense in the closed half plane, this only tests ``xi1 >= -tol``;
    use :func:`bh_gap_violations` for the excluded segment.
    """
    p = as_points(points, 2)
    return p[:, 0] >= -tol


def bh_gap_violations(points, axis_tol, gap_margin):
    """Rows that sit on the axis ``xi1 ~ 0`` inside the excluded segment ``|xi2| < 1``."""
    p = as_points(points, 2)
    return (np.abs(p[:, 0]) <= axis_tol) & (np.abs(p[:, 1]) < 1.0 - gap_margin)


def bh_strict_predicate(points):
    """Exact (tolerance-free) predicate of the same set."""
    p = as_points(points, 2)
    return (p[:, 0] > 0) | ((p[:, 0] == 0) & (np.abs(p[:, 1]) >= 1.0))


def _bh_subdiff_domain(dim):
    fn = BUILTINS["brezis-haraux"]
    return PredicateSet(
        2, bh_range_predicate,
        lambda n, w, rng: numeric_prox(fn, w.uniform(n, rng)),
        label="dom subdiff f (brezis-haraux)",
        closure=Cylinder(np.array([0.5, 0.0]), [[0.0, 1.0]], 0.5))


def _bh_subdiff_range(dim):
    fn = BUILTINS["brezis-haraux"]
    return ImageSet(lambda x: x - numeric_prox(fn, x), 2, Box.cube(2, 10.0),
                    reference_count=1000, label="ran subdiff f (brezis-haraux)")


BUILTINS = {
    "half-square": BuiltinFunction(
        "half-square", None,
        value=lambda y: 0.5 * np.sum(y * y, axis=1),
        minimizer=np.zeros,
        prox=lambda x: 0.5 * np.asarray(x, dtype=float),
        subdiff_domain=Cylinder.whole,
        subdiff_range=Cylinder.whole),
    "abs": BuiltinFunction(
        "abs", None,
        value=lambda y: np.sum(np.abs(y), axis=1),
        minimizer=np.zeros,
        prox=lambda x: np.sign(x) * np.maximum(np.abs(x) - 1.0, 0.0),
        subdiff_domain=Cylinder.whole,
        subdiff_range=lambda d: BoxSet(-np.ones(d), np.ones(d), label="[-1,1]^d")),
    "brezis-haraux": BuiltinFunction(
        "brezis-haraux", 2,
        value=_bh_value,
        minimizer=lambda d: np.array([1.0, 0.0]),
        domain_lo=lambda d: np.array([0.0, -np.inf]),
        subdiff_domain=_bh_subdiff_domain,
        subdiff_range=_bh_subdiff_range),
}


def get_function(name):
    try:
        return BUILTINS[name]
    except KeyError:
        raise SpecError(f"unknown builtin function {name!r}; known: {sorted(BUILTINS)}",
                        field="function") from None


def default_prox_window(f, x):
    """Per-row search boxes guaranteed to contain prox_f(x).

    With m a minimizer, prox_f(m) = m and nonexpansiveness give
    ``||prox_f(x) - x|| <= 2 ||x - m||``.
    """
    x = as_points(x)
    m = f.minimizer(x.shape[1])
    r = 2.0 * np.linalg.norm(x - m, axis=1, keepdims=True) + 1.0
    return x - r, x + r


def numeric_prox(f, x, window=None, depth=DEFAULT_DEPTH):
    """argmin_y f(y) + 1/2 ||y - x||^2 by nested ternary search.

    Each axis is cut into thirds and the outer third on the worse side is
    discarded, recursing over the remaining axes for every trial value.
    Partial minimization of a jointly convex function is convex, so the
    search is exact up to ``width * (2/3)**depth`` per axis and floating
    point flatness near the minimum (about 1e-8 relative).

    Parameters
    ----------
    f : BuiltinFunction or str
    x : array, shape (dim,) or (n, dim)
    window : Box or (lo, hi) pair, optional
        Search window; arrays of shape (n, dim) give one window per row.
        Defaults to :func:`default_prox_window`.
    depth : int
        Refinement levels per axis.

    Raises
    ------
    WindowExhaustedError
        If the result sits on a window face that is not a domain boundary.
    """
    if isinstance(f, str):
        f = get_function(f)
    single = np.ndim(x) == 1
    xs = as_points(x)
    n, dim = xs.shape
    f.resolve_dim(dim)
    if window is None:
        lo, hi = default_prox_window(f, xs)
    elif isinstance(window, Box):
        lo, hi = window.lo, window.hi
    else:
        lo, hi = window
    lo = np.broadcast_to(np.asarray(lo, dtype=float), (n, dim)).copy()
    hi = np.broadcast_to(np.asarray(hi, dtype=float), (n, dim)).copy()
    dlo, dhi = f.bounds(dim)
    on_dlo = lo <= dlo
    on_dhi = hi >= dhi
    lo = np.maximum(lo, dlo)
    hi = np.minimum(hi, dhi)

    def objective(y):
        return f.value(y) + 0.5 * np.sum((y - xs) ** 2, axis=1)

    def search(fixed):
        k = fixed.shape[1]
        if k == dim:
            return fixed, objective(fixed)
        a, b = lo[:, k].copy(), hi[:, k].copy()
        for _ in range(depth):
            third = (b - a) / 3.0
            m1, m2 = a + third, b - third
            _, f1 = search(np.column_stack([fixed, m1]))
            _, f2 = search(np.column_stack([fixed, m2]))
            keep_left = f1 <= f2
            b = np.where(keep_left, m2, b)
            a = np.where(keep_left, a, m1)
        return search(np.column_stack([fixed, 0.5 * (a + b)]))

    y, _ = search(np.zeros((n, 0)))
    step = (hi - lo) * (2.0 / 3.0) ** depth
    slack = 4.0 * step + 1e-12 * (1.0 + np.abs(y))
    hit = ((y - lo <= slack) & ~on_dlo) | ((hi - y <= slack) & ~on_dhi)
    if np.any(hit):
        rows = np.flatnonzero(hit.any(axis=1))
        raise WindowExhaustedError(
            f"prox minimizer on the search-window boundary for rows {rows[:5].tolist()}; "
            "enlarge the window")
    return y[0] if single else y
