"""Vectors, axis-aligned windows and point clouds."""

from __future__ import annotations

import csv
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .errors import DimensionMismatchError, EmptySampleError


def as_vector(x, dim=None, name="x"):
    """Return `x` as a finite 1-D float array, checking its dimension."""
    v = np.asarray(x, dtype=float)
    if v.ndim == 0:
        v = v.reshape(1)
    if v.ndim != 1:
        raise DimensionMismatchError(f"{name} must be a vector, got shape {v.shape}")
    if dim is not None and v.shape[0] != dim:
        raise DimensionMismatchError(f"{name} has dimension {v.shape[0]}, expected {dim}")
    if not np.all(np.isfinite(v)):
        raise ValueError(f"{name} has non-finite entries")
    return v


def as_points(x, dim=None, name="x"):
    """Return `x` as an ``(n, dim)`` float array (a single vector becomes one row)."""
    p = np.asarray(x, dtype=float)
    if p.ndim == 1:
        p = p[None, :]
    if p.ndim != 2:
        raise DimensionMismatchError(f"{name} must be a point array, got shape {p.shape}")
    if dim is not None and p.shape[1] != dim:
        raise DimensionMismatchError(f"{name} has dimension {p.shape[1]}, expected {dim}")
    return p


def check_dim(x, dim, name="x"):
    """Raise unless the trailing axis of `x` has length `dim`."""
    x = np.asarray(x, dtype=float)
    if x.ndim == 0 or x.shape[-1] != dim:
        raise DimensionMismatchError(
            f"{name} has shape {x.shape}, expected trailing dimension {dim}")
    return x


@dataclass(frozen=True)
class Box:
    """Axis-aligned box ``[lo, hi]`` used as a sampling and comparison window."""

    lo: np.ndarray
    hi: np.ndarray

    def __post_init__(self):
        lo = np.asarray(self.lo, dtype=float)
        hi = np.asarray(self.hi, dtype=float)
        if lo.shape != hi.shape or lo.ndim != 1:
            raise DimensionMismatchError("window bounds must be vectors of equal length")
        if np.any(lo >= hi):
            raise ValueError("window requires lo < hi on every axis")
        object.__setattr__(self, "lo", lo)
        object.__setattr__(self, "hi", hi)

    @classmethod
    def cube(cls, dim, half_width=10.0, center=None):
        c = np.zeros(dim) if center is None else np.asarray(center, dtype=float)
        return cls(c - half_width, c + half_width)

    @property
    def dim(self):
        return self.lo.shape[0]

    @property
    def center(self):
        return 0.5 * (self.lo + self.hi)

    @property
    def diameter(self):
        return float(np.linalg.norm(self.hi - self.lo))

    def scaled(self, factor):
        """Box with the same center and every side scaled by `factor`."""
        half = 0.5 * factor * (self.hi - self.lo)
        return Box(self.center - half, self.center + half)

    def uniform(self, count, rng):
        return rng.uniform(self.lo, self.hi, size=(count, self.dim))

    def clip(self, points):
        return np.clip(points, self.lo, self.hi)

    def contains(self, points, tol=0.0):
        p = as_points(points, self.dim)
        return np.all((p >= self.lo - tol) & (p <= self.hi + tol), axis=1)

    def to_list(self):
        return [self.lo.tolist(), self.hi.tolist()]


@dataclass
class PointCloud:
    """Finite sample of a set.

    `witnesses`, when present, holds per-point provenance: an array whose
    leading axis matches `points` (e.g. the inputs that produced each point,
    or stacked ``(a, b)`` pairs for a Minkowski difference).
    """

    points: np.ndarray
    witnesses: Optional[np.ndarray] = field(default=None, repr=False)

    def __post_init__(self):
        self.points = as_points(self.points, name="points")
        if not np.all(np.isfinite(self.points)):
            raise ValueError("point cloud has non-finite entries")
        if self.witnesses is not None:
            self.witnesses = np.asarray(self.witnesses, dtype=float)
            if self.witnesses.shape[0] != self.points.shape[0]:
                raise ValueError("witnesses must align with points")

    @property
    def dim(self):
        return self.points.shape[1]

    def __len__(self):
        return self.points.shape[0]

    def require_nonempty(self):
        if len(self) == 0:
            raise EmptySampleError("point cloud is empty")
        return self

    def to_csv(self, path):
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow([f"x{i}" for i in range(self.dim)])
            for row in self.points:
                writer.writerow([repr(float(v)) for v in row])

    @classmethod
    def from_csv(cls, path):
        with open(path, newline="") as fh:
            rows = [r for r in csv.reader(fh) if r]
        if rows and not _is_number(rows[0][0]):
            rows = rows[1:]
        if not rows:
            raise EmptySampleError(f"{path} contains no points")
        return cls(np.array([[float(v) for v in r] for r in rows]))


def _is_number(text):
    try:
        float(text)
    except ValueError:
        return False
    return True
