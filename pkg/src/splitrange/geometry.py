"""Sampled convex geometry: support profiles, Hausdorff gaps and near equality.

Two sets are *nearly equal* when their closures and relative interiors
agree.  For nearly convex sets (domains and ranges of maximally monotone
operators, and ``ran(Id - T)``) equal closures already imply equal
relative interiors, so :func:`near_equal` compares closures only: it
compares support functions of the sampled clouds inside a window and
checks that the affine hulls have the same dimension.  Verdicts are
window-relative for unbounded sets.
"""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass

import numpy as np

from .cloud import Box, PointCloud
from .errors import DimensionMismatchError, EmptySampleError, UnsupportedSetError
from .sets import BoxSet, Cylinder

DEFAULT_SET_TOL = 0.05
DEFAULT_HALF_WIDTH = 10.0
AFFINE_TOL = 1e-6


def _cloud(c):
    cloud = c if isinstance(c, PointCloud) else PointCloud(np.asarray(c, dtype=float))
    if len(cloud) == 0:
        raise EmptySampleError("cloud is empty")
    return cloud


def default_window(dim):
    return Box.cube(dim, DEFAULT_HALF_WIDTH)


def directions(dim, n_random=None, seed=0):
    """Seeded random unit directions followed by the 2*dim signed axes."""
    n_random = 64 * dim if n_random is None else int(n_random)
    rng = np.random.default_rng(seed)
    g = rng.normal(size=(n_random, dim))
    g /= np.linalg.norm(g, axis=1, keepdims=True)
    eye = np.eye(dim)
    return np.vstack([g, eye, -eye])


@dataclass
class SupportProfile:
    """Support values ``h(d) = max_p <p, d>`` of a window-clipped cloud."""

    directions: np.ndarray
    values: np.ndarray
    window: Box


def support_profile(cloud, n_directions=None, window=None, seed=0):
    """Support function of `cloud` after projecting its points onto `window`."""
    cloud = _cloud(cloud)
    window = default_window(cloud.dim) if window is None else window
    if window.dim != cloud.dim:
        raise DimensionMismatchError("window and cloud differ in dimension")
    dirs = directions(cloud.dim, n_directions, seed)
    pts = window.clip(cloud.points)
    return SupportProfile(dirs, np.max(pts @ dirs.T, axis=0), window)


def _paired_profiles(c, d, n_directions, window, seed):
    c, d = _cloud(c), _cloud(d)
    if c.dim != d.dim:
        raise DimensionMismatchError(f"clouds live in R^{c.dim} and R^{d.dim}")
    window = default_window(c.dim) if window is None else window
    return (support_profile(c, n_directions, window, seed),
            support_profile(d, n_directions, window, seed))


def hausdorff_estimate(cloud_c, cloud_d, n_directions=None, window=None, seed=0):
    """Largest support-function gap over shared directions.

    For convex bodies this is the Hausdorff distance of the closed convex
    hulls, up to the direction sampling.
    """
    pc, pd = _paired_profiles(cloud_c, cloud_d, n_directions, window, seed)
    return float(np.max(np.abs(pc.values - pd.values)))


def affine_hull(cloud, tol=1e-8):
    """Affine hull of a cloud by thresholded SVD.

    Returns ``(base, basis, dim)`` with `base` the centroid and `basis` the
    orthonormal rows for singular values above ``tol * largest``.
    """
    cloud = _cloud(cloud)
    base = cloud.points.mean(axis=0)
    centered = cloud.points - base
    if len(centered) < 2:
        return base, np.zeros((0, cloud.dim)), 0
    _, s, vt = np.linalg.svd(centered, full_matrices=False)
    if s[0] == 0.0:
        return base, np.zeros((0, cloud.dim)), 0
    k = int(np.sum(s > tol * s[0]))
    return base, vt[:k].copy(), k


@dataclass
class NearEqualityReport:
    """Verdict of the closure comparison and its diagnostics."""

    verdict: bool
    max_support_gap: float
    worst_direction: np.ndarray
    affine_dims: tuple
    tolerance_used: float
    window: Box
    nearly_convex_assumed: bool = True
    profile_c: SupportProfile = None
    profile_d: SupportProfile = None

    def to_dict(self):
        return {"verdict": self.verdict, "max_support_gap": self.max_support_gap,
                "worst_direction": self.worst_direction.tolist(),
                "affine_dims": list(self.affine_dims), "tolerance_used": self.tolerance_used,
                "window": self.window.to_list(),
                "nearly_convex_assumed": self.nearly_convex_assumed}

    def to_json(self):
        return json.dumps(self.to_dict(), sort_keys=True)

    def export_support_csv(self, path):
        """Columns: direction components, value_C, value_D, gap."""
        dirs = self.profile_c.directions
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow([f"d{i}" for i in range(dirs.shape[1])] + ["value_C", "value_D", "gap"])
            for d, a, b in zip(dirs, self.profile_c.values, self.profile_d.values):
                w.writerow([repr(float(v)) for v in d] + [repr(float(a)), repr(float(b)),
                                                           repr(float(abs(a - b)))])


def near_equal(cloud_c, cloud_d, tol=DEFAULT_SET_TOL, n_directions=None, window=None,
               seed=0, nearly_convex=True, affine_tol=AFFINE_TOL):
    """Compare the closures of two sampled nearly convex sets.

    The verdict is true when the support gap inside `window` is at most
    `tol` and the affine hulls of the raw clouds have equal dimension.
    Passing ``nearly_convex=False`` records that the caller compares sets
    for which closure equality does not imply near equality; the verdict
    is still computed but only speaks about closures.
    """
    pc, pd = _paired_profiles(cloud_c, cloud_d, n_directions, window, seed)
    gaps = np.abs(pc.values - pd.values)
    worst = int(np.argmax(gaps))
    dims = (affine_hull(cloud_c, affine_tol)[2], affine_hull(cloud_d, affine_tol)[2])
    gap = float(gaps[worst])
    return NearEqualityReport(bool(gap <= tol and dims[0] == dims[1]), gap,
                              pc.directions[worst].copy(), dims, float(tol), pc.window,
                              bool(nearly_convex), pc, pd)


def recession_polar(s):
    """``(rec C)^polar`` for exact cylinders (balls, affine and linear subspaces) and boxes.

    For ``C = c + L + B(0, r)`` the recession cone is L, so the polar is
    the orthogonal complement of L; bounded sets give the whole space.
    """
    if isinstance(s, BoxSet):
        return Cylinder.whole(s.dim)
    cyl = s.as_cylinder()
    if cyl is None:
        raise UnsupportedSetError(
            f"recession polar needs an exact ball, affine set or box, got {s.label}")
    if cyl.rank == 0:
        return Cylinder.whole(cyl.dim)
    comp = cyl.complement
    return Cylinder.subspace(comp if comp.size else None, cyl.dim)
