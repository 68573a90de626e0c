"""Set descriptors: membership, sampling and (where exact) projection.

The exact family is built around :class:`Cylinder`, the closed set
``center + L + B(0, r)`` with ``L`` a linear subspace.  Balls (``L = {0}``),
affine subspaces (``r = 0``), points and the whole space are all cylinders,
and cylinders are closed under negation, translation and Minkowski sums,
which covers every domain/range algebra the built-in operators need.
"""

from __future__ import annotations

import math

import numpy as np
from scipy.linalg import null_space, orth
from scipy.spatial import cKDTree

from .cloud import Box, PointCloud, as_points, as_vector
from .errors import DimensionMismatchError, EmptySampleError, UnsupportedSetError

EXACT = "exact-closed-form"
SAMPLED = "sampled"

MEMBERSHIP_TOL = 1e-6
MINKOWSKI_CAP = 100_000


def _orthonormal_rows(basis, dim):
    if basis is None:
        return np.zeros((0, dim))
    b = np.asarray(basis, dtype=float)
    if b.size == 0:
        return np.zeros((0, dim))
    b = np.atleast_2d(b)
    if b.shape[1] != dim:
        raise DimensionMismatchError(f"basis rows must have length {dim}")
    q = orth(b.T, rcond=1e-10)
    return q.T.copy()


def _random_unit(rng, count, dim):
    g = rng.normal(size=(count, dim))
    n = np.linalg.norm(g, axis=1, keepdims=True)
    n[n == 0] = 1.0
    return g / n


class SetDescriptor:
    """Base class.  Subclasses implement :meth:`contains` and :meth:`sample`."""

    dim: int
    kind_tag: str = SAMPLED
    label: str = "set"

    def contains(self, x, tol=MEMBERSHIP_TOL):
        """Membership test; returns a bool for one vector, a bool array for rows."""
        raise NotImplementedError

    def sample(self, count, window, rng):
        """Return a :class:`PointCloud` of `count` (or fewer) members near `window`."""
        raise NotImplementedError

    def project(self, x):
        raise UnsupportedSetError(f"{self.label}: projection not available")

    def map_affine(self, sign=1.0, shift=None):
        """The image ``{sign * x + shift : x in self}``."""
        raise NotImplementedError

    def as_cylinder(self):
        return None

    @property
    def affine_basis(self):
        """``(base, orthonormal rows)`` of the affine hull, or None if unknown."""
        c = self.as_cylinder()
        return None if c is None else c.affine_basis

    @property
    def is_whole_space(self):
        c = self.as_cylinder()
        return c is not None and c.is_whole_space

    def translate(self, w):
        return self.map_affine(1.0, w)

    def negate(self):
        return self.map_affine(-1.0, None)

    def _result(self, x, mask):
        return bool(mask[0]) if np.ndim(x) == 1 else mask

    def __repr__(self):
        return f"<{type(self).__name__} {self.label} dim={self.dim}>"


class Cylinder(SetDescriptor):
    """Closed convex set ``center + span(basis) + B(0, radius)``."""

    kind_tag = EXACT

    def __init__(self, center, basis=None, radius=0.0, label=None):
        center = as_vector(center, name="center")
        self.dim = center.shape[0]
        self.basis = _orthonormal_rows(basis, self.dim)
        if radius < 0 or not math.isfinite(radius):
            raise ValueError("radius must be finite and nonnegative")
        self.radius = float(radius)
        self.center = center - self.basis.T @ (self.basis @ center)
        self.label = label or self._default_label()

    @classmethod
    def ball(cls, center, radius):
        if radius <= 0:
            raise ValueError("ball radius must be positive")
        return cls(center, None, radius, label="ball")

    @classmethod
    def affine(cls, base, basis):
        return cls(base, basis, 0.0, label="affine")

    @classmethod
    def subspace(cls, basis, dim):
        return cls(np.zeros(dim), basis, 0.0, label="subspace")

    @classmethod
    def whole(cls, dim):
        return cls(np.zeros(dim), np.eye(dim), 0.0, label="whole-space")

    @classmethod
    def point(cls, p):
        return cls(p, None, 0.0, label="point")

    def _default_label(self):
        if self.is_whole_space:
            return "whole-space"
        if self.rank == 0:
            return "ball" if self.radius > 0 else "point"
        return "cylinder" if self.radius > 0 else "affine"

    @property
    def rank(self):
        return self.basis.shape[0]

    @property
    def complement(self):
        """Orthonormal rows spanning the orthogonal complement of the direction space."""
        if self.rank == 0:
            return np.eye(self.dim)
        return null_space(self.basis).T

    @property
    def is_whole_space(self):
        return self.rank == self.dim

    @property
    def is_bounded(self):
        return self.rank == 0

    @property
    def is_affine(self):
        return self.radius == 0.0 or self.is_whole_space

    @property
    def is_linear_subspace(self):
        return self.is_affine and np.allclose(self.center, 0.0, atol=1e-12)

    @property
    def affine_basis(self):
        if self.is_affine:
            return self.center.copy(), self.basis.copy()
        return np.zeros(self.dim), np.eye(self.dim)

    def as_cylinder(self):
        return self

    def _perp(self, x):
        r = np.asarray(x, dtype=float) - self.center
        return r - (r @ self.basis.T) @ self.basis

    def distance(self, x):
        d = np.linalg.norm(self._perp(x), axis=-1) - self.radius
        return np.maximum(d, 0.0)

    def contains(self, x, tol=MEMBERSHIP_TOL):
        p = as_points(x, self.dim)
        return self._result(x, self.distance(p) <= tol)

    def project(self, x):
        x = np.asarray(x, dtype=float)
        if self.rank == 0:
            perp = x - self.center
        else:
            perp = self._perp(x)
        n = np.sqrt(np.einsum("...i,...i->...", perp, perp))[..., None]
        if self.radius == 0.0:
            scale = np.zeros_like(n)
        else:
            scale = np.minimum(1.0, self.radius / np.maximum(n, 1e-300))
        return x - perp + perp * scale

    def map_affine(self, sign=1.0, shift=None):
        c = sign * self.center + (0.0 if shift is None else as_vector(shift, self.dim))
        out = Cylinder(c, self.basis, self.radius)
        out.label = self.label
        return out

    def minkowski(self, other, sign=1.0):
        """``self + sign * other`` for another cylinder."""
        basis = np.vstack([self.basis, other.basis]) if other.rank or self.rank else None
        return Cylinder(self.center + sign * other.center, basis,
                        self.radius + other.radius)

    def sample(self, count, window, rng):
        # the affine part comes from projecting uniform points of a doubled
        # window (so clipping to `window` reaches its faces); the ball part
        # is half shell, half volume, in uniformly random directions
        reach = window.scaled(2.0) if not self.is_bounded else window
        y = reach.uniform(count, rng)
        along = (y - self.center) @ self.basis.T @ self.basis if self.rank else 0.0
        pts = self.center + along + np.zeros((count, self.dim))
        if self.radius > 0:
            comp = self.complement
            k = comp.shape[0]
            dirs = _random_unit(rng, count, k) @ comp
            rad = np.full((count, 1), self.radius)
            half = count // 2
            rad[half:] *= rng.uniform(size=(count - half, 1)) ** (1.0 / k)
            pts = pts + rad * dirs
        return PointCloud(pts)

    def _describe(self):
        return {"center": self.center.tolist(), "basis": self.basis.tolist(),
                "radius": self.radius}


class BoxSet(SetDescriptor):
    """Closed axis-aligned box as a set (e.g. the range of the subdifferential of ``||.||_1``)."""

    kind_tag = EXACT

    def __init__(self, lo, hi, label="box"):
        self.lo = as_vector(lo, name="lo")
        self.hi = as_vector(hi, self.lo.shape[0], name="hi")
        self.dim = self.lo.shape[0]
        self.label = label

    def contains(self, x, tol=MEMBERSHIP_TOL):
        p = as_points(x, self.dim)
        return self._result(x, np.all((p >= self.lo - tol) & (p <= self.hi + tol), axis=1))

    def project(self, x):
        return np.clip(x, self.lo, self.hi)

    def map_affine(self, sign=1.0, shift=None):
        s = np.zeros(self.dim) if shift is None else as_vector(shift, self.dim)
        lo, hi = (self.lo, self.hi) if sign > 0 else (-self.hi, -self.lo)
        return BoxSet(abs(sign) * lo + s, abs(sign) * hi + s, self.label)

    @property
    def affine_basis(self):
        flat = self.hi - self.lo <= 0
        return self.lo.copy() * flat, np.eye(self.dim)[~flat]

    def sample(self, count, window, rng):
        half = count // 2
        inner = rng.uniform(self.lo, self.hi, size=(count - half, self.dim))
        edge = self.project(window.scaled(2.0).uniform(half, rng))
        return PointCloud(np.vstack([inner, edge]))


class PredicateSet(SetDescriptor):
    """Exact membership predicate paired with a user-supplied sampler.

    `predicate(points, tol)` must return a bool array over rows;
    `sampler(count, window, rng)` returns an ``(n, dim)`` array of members.
    """

    kind_tag = EXACT

    def __init__(self, dim, predicate, sampler, label="predicate-set", closure=None):
        self.dim = dim
        self.predicate = predicate
        self.sampler = sampler
        self.closure = closure
        self.label = label

    def contains(self, x, tol=MEMBERSHIP_TOL):
        p = as_points(x, self.dim)
        return self._result(x, np.asarray(self.predicate(p, tol), dtype=bool))

    def project(self, x):
        if self.closure is None:
            return super().project(x)
        return self.closure.project(x)

    def map_affine(self, sign=1.0, shift=None):
        s = np.zeros(self.dim) if shift is None else as_vector(shift, self.dim)
        pred, samp = self.predicate, self.sampler
        clo = None if self.closure is None else self.closure.map_affine(sign, s)
        return PredicateSet(
            self.dim,
            lambda p, tol: pred((p - s) / sign, tol),
            lambda n, w, rng: sign * np.asarray(samp(n, w, rng)) + s,
            label=self.label, closure=clo)

    def sample(self, count, window, rng):
        return PointCloud(self.sampler(count, window, rng))


class ImageSet(SetDescriptor):
    """Range of a total map, known only through samples.

    Membership is approximate: a point belongs when it lies within
    ``max(tol, resolution)`` of a reference cloud of images of uniform
    inputs from `source`.
    """

    kind_tag = SAMPLED

    def __init__(self, fn, dim, source, reference_count=2000, seed=0, label="image-set"):
        self.fn = fn
        self.dim = dim
        self.source = source
        self.reference_count = reference_count
        self.seed = seed
        self.label = label
        self._tree = None
        self._resolution = None

    def _reference(self):
        if self._tree is None:
            rng = np.random.default_rng(self.seed)
            pts = as_points(self.fn(self.source.uniform(self.reference_count, rng)), self.dim)
            tree = cKDTree(pts)
            dist, _ = tree.query(pts, k=2)
            self._resolution = float(2.0 * np.median(dist[:, 1]))
            self._tree = tree
        return self._tree

    @property
    def resolution(self):
        self._reference()
        return self._resolution

    def contains(self, x, tol=MEMBERSHIP_TOL):
        p = as_points(x, self.dim)
        tree = self._reference()
        d, _ = tree.query(p)
        return self._result(x, d <= max(tol, self._resolution))

    def map_affine(self, sign=1.0, shift=None):
        s = np.zeros(self.dim) if shift is None else as_vector(shift, self.dim)
        fn = self.fn
        return ImageSet(lambda x: sign * fn(x) + s, self.dim, self.source,
                        self.reference_count, self.seed, self.label)

    def sample(self, count, window, rng):
        return PointCloud(self.fn(window.uniform(count, rng)))


class MinkowskiSet(SetDescriptor):
    """``first + sign * second``.

    Samples are all-pairs combinations of factor samples (capped, then
    deduplicated on a fine grid) and carry the ``(a, b)`` witness of each
    point.  When both factors are cylinders the exact sum is used for
    membership and projection.
    """

    def __init__(self, first, second, sign=1.0, label=None):
        if first.dim != second.dim:
            raise DimensionMismatchError("Minkowski factors differ in dimension")
        self.dim = first.dim
        self.first = first
        self.second = second
        self.sign = float(sign)
        c1, c2 = first.as_cylinder(), second.as_cylinder()
        self.exact = c1.minkowski(c2, sign) if c1 is not None and c2 is not None else None
        if self.exact is None and isinstance(first, BoxSet) and c2 is not None and c2.rank == 0 \
                and c2.radius == 0:
            self.exact_box = first.translate(sign * c2.center)
        else:
            self.exact_box = None
        self.kind_tag = EXACT if (self.exact is not None or self.exact_box is not None) else SAMPLED
        op = "+" if sign > 0 else "-"
        self.label = label or f"({first.label} {op} {second.label})"
        self._tree = None

    def as_cylinder(self):
        return self.exact

    def contains(self, x, tol=MEMBERSHIP_TOL):
        if self.exact is not None:
            return self.exact.contains(x, tol)
        if self.exact_box is not None:
            return self.exact_box.contains(x, tol)
        p = as_points(x, self.dim)
        if self._tree is None:
            rng = np.random.default_rng(0)
            cloud = self.sample(4096, Box.cube(self.dim, 10.0), rng)
            self._tree = cKDTree(cloud.points)
            dist, _ = self._tree.query(cloud.points, k=2)
            self._resolution = float(2.0 * np.median(dist[:, 1]))
        d, _ = self._tree.query(p)
        return self._result(x, d <= max(tol, self._resolution))

    def project(self, x):
        if self.exact is not None:
            return self.exact.project(x)
        if self.exact_box is not None:
            return self.exact_box.project(x)
        return super().project(x)

    def map_affine(self, sign=1.0, shift=None):
        first = self.first.map_affine(sign, shift)
        second = self.second.map_affine(sign, None)
        return MinkowskiSet(first, second, self.sign, label=self.label)

    def sample(self, count, window, rng, tol=MEMBERSHIP_TOL):
        if self.exact is not None:
            return self._sample_exact(count, window, rng)
        per = max(1, int(math.ceil(math.sqrt(count))))
        a = self.first.sample(per, window, rng).points
        b = self.second.sample(per, window, rng).points
        if len(a) == 0 or len(b) == 0:
            raise EmptySampleError(f"{self.label}: a factor sampler returned no points")
        ia, ib = np.meshgrid(np.arange(len(a)), np.arange(len(b)), indexing="ij")
        ia, ib = ia.ravel(), ib.ravel()
        if ia.size > MINKOWSKI_CAP:
            keep = rng.choice(ia.size, MINKOWSKI_CAP, replace=False)
            keep.sort()
            ia, ib = ia[keep], ib[keep]
        pts = a[ia] + self.sign * b[ib]
        pitch = tol / 10.0
        _, first_idx = np.unique(np.round(pts / pitch), axis=0, return_index=True)
        first_idx.sort()
        witnesses = np.stack([a[ia[first_idx]], b[ib[first_idx]]], axis=1)
        return PointCloud(pts[first_idx], witnesses=witnesses)


    def _sample_exact(self, count, window, rng):
        """Sample the exact sum and split every point into its two summands."""
        f, g, sg = self.first.as_cylinder(), self.second.as_cylinder(), self.sign
        pts = self.exact.sample(count, window, rng).points
        q = pts - (f.center + sg * g.center)
        stacked = np.vstack([f.basis, g.basis])
        if stacked.shape[0]:
            coef, *_ = np.linalg.lstsq(stacked.T, q.T, rcond=None)
            s1, s2 = coef[:f.rank].T, coef[f.rank:].T
            lin = (stacked.T @ coef).T
        else:
            s1, s2 = np.zeros((len(q), 0)), np.zeros((len(q), 0))
            lin = np.zeros_like(q)
        z = q - lin
        total = f.radius + g.radius
        t1 = f.radius / total if total > 0 else 1.0
        a = f.center + s1 @ f.basis + t1 * z
        b = g.center + sg * (s2 @ g.basis + (1.0 - t1) * z)
        return PointCloud(pts, witnesses=np.stack([a, b], axis=1))


class IntersectionSet(SetDescriptor):
    """Intersection of several sets; sampled by rejection, projected by Dykstra."""

    def __init__(self, members, label=None):
        self.members = list(members)
        self.dim = self.members[0].dim
        if any(m.dim != self.dim for m in self.members):
            raise DimensionMismatchError("intersection members differ in dimension")
        exact = all(m.kind_tag == EXACT for m in self.members)
        self.kind_tag = EXACT if exact else SAMPLED
        self.label = label or " & ".join(m.label for m in self.members)

    def contains(self, x, tol=MEMBERSHIP_TOL):
        p = as_points(x, self.dim)
        mask = np.ones(p.shape[0], dtype=bool)
        for m in self.members:
            mask &= np.asarray(m.contains(p, tol), dtype=bool).reshape(-1)
        return self._result(x, mask)

    def project(self, x, iters=5000, tol=1e-13):
        """Dykstra's alternating projection onto the closed intersection."""
        x = np.asarray(x, dtype=float)
        y = x.copy()
        incr = [np.zeros_like(x) for _ in self.members]
        for _ in range(iters):
            prev = y.copy()
            for i, m in enumerate(self.members):
                z = m.project(y + incr[i])
                incr[i] = y + incr[i] - z
                y = z
            if np.max(np.abs(y - prev)) <= tol:
                break
        return y

    def map_affine(self, sign=1.0, shift=None):
        return IntersectionSet([m.map_affine(sign, shift) for m in self.members], self.label)

    def sample(self, count, window, rng, tol=MEMBERSHIP_TOL):
        chunks, wits, have = [], [], 0
        for attempt in range(4):
            for i, m in enumerate(self.members):
                cloud = m.sample(count * (attempt + 1), window, rng)
                if len(cloud) == 0:
                    continue
                mask = np.ones(len(cloud), dtype=bool)
                for j, other in enumerate(self.members):
                    if j != i:
                        mask &= np.asarray(other.contains(cloud.points, tol)).reshape(-1)
                chunks.append(cloud.points[mask])
                have += int(mask.sum())
            if have >= count:
                break
        if have == 0:
            raise EmptySampleError(f"{self.label}: rejection sampling found no common points")
        pts = np.vstack(chunks)
        if len(pts) > count:
            pts = pts[rng.choice(len(pts), count, replace=False)]
        return PointCloud(pts)


def minkowski(first, second, sign=1.0):
    """``first + sign*second``, collapsing to the whole space when either factor is."""
    if first.is_whole_space or second.is_whole_space:
        return Cylinder.whole(first.dim)
    return MinkowskiSet(first, second, sign)


def affine_intersection(a, b, tol=1e-10):
    """Exact intersection of two affine cylinders, or None when empty."""
    dim = a.dim
    if a.rank + b.rank == 0:
        return a if np.allclose(a.center, b.center, atol=tol) else None
    # solve a.center + a.basis^T s = b.center + b.basis^T t
    m = np.hstack([a.basis.T, -b.basis.T])
    rhs = b.center - a.center
    sol, *_ = np.linalg.lstsq(m, rhs, rcond=None)
    if np.linalg.norm(m @ sol - rhs) > tol * max(1.0, np.linalg.norm(rhs)):
        return None
    point = a.center + a.basis.T @ sol[:a.rank]
    # direction space = (L_a^perp + L_b^perp)^perp
    perp = np.vstack([a.complement, b.complement])
    direction = null_space(perp).T if perp.size else np.eye(dim)
    return Cylinder(point, direction, 0.0)


def intersect(first, second):
    """``first & second`` with exact shortcuts (whole space, two affine sets)."""
    if first.is_whole_space:
        return second
    if second.is_whole_space:
        return first
    c1, c2 = first.as_cylinder(), second.as_cylinder()
    if c1 is not None and c2 is not None and c1.is_affine and c2.is_affine:
        out = affine_intersection(c1, c2)
        if out is None:
            raise EmptySampleError("affine sets do not intersect")
        return out
    return IntersectionSet([first, second])
