"""The Douglas-Rachford operator, its fixed-point iteration and its dual pair."""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field

import numpy as np

from .cloud import as_points, as_vector
from .errors import DimensionMismatchError, NonFiniteIterateError, SpecError
from .operators import inverse, make_operator, vee


@dataclass(frozen=True)
class OperatorPair:
    """Ordered pair (A, B); the primal problem is to find zeros of A + B."""

    A: object
    B: object

    def __post_init__(self):
        if self.A.dim != self.B.dim:
            raise DimensionMismatchError(
                f"pair operators act on R^{self.A.dim} and R^{self.B.dim}")

    @property
    def dim(self):
        return self.A.dim

    @property
    def swapped(self):
        return OperatorPair(self.B, self.A)

    @classmethod
    def from_spec(cls, spec):
        """Build from ``{"A": {...}, "B": {...}}`` or a two-element list."""
        if isinstance(spec, dict):
            if "A" not in spec:
                raise SpecError("pair spec needs operator 'A'", field="A")
            if "B" not in spec:
                raise SpecError("pair spec needs operator 'B'", field="B")
            a, b = spec["A"], spec["B"]
        elif isinstance(spec, (list, tuple)) and len(spec) == 2:
            a, b = spec
        else:
            raise SpecError("pair spec must be an object with A and B", field="A")
        try:
            op_a = make_operator(a)
        except SpecError as exc:
            raise SpecError(exc.detail, field=f"A.{exc.field}" if exc.field else "A") from None
        try:
            op_b = make_operator(b)
        except SpecError as exc:
            raise SpecError(exc.detail, field=f"B.{exc.field}" if exc.field else "B") from None
        try:
            return cls(op_a, op_b)
        except DimensionMismatchError as exc:
            raise SpecError(str(exc), field="B") from None


def _batch(pair, x):
    single = np.ndim(x) == 1
    pts = as_points(x)
    if pts.shape[1] != pair.dim:
        raise DimensionMismatchError(
            f"vector of dimension {pts.shape[1]} for a pair on R^{pair.dim}")
    return single, pts


def dr_map(pair, x):
    """``T x = x - J_A x + J_B(2 J_A x - x)``; one vector or a batch of rows."""
    single, x = _batch(pair, x)
    ja = pair.A.resolvent_map(x)
    out = x - ja + pair.B.resolvent_map(2.0 * ja - x)
    return out[0] if single else out


def dr_map_reflected(pair, x):
    """``T x = x/2 + R_B(R_A x)/2``, the algebraically equal second form."""
    single, x = _batch(pair, x)
    ra = 2.0 * pair.A.resolvent_map(x) - x
    rb = 2.0 * pair.B.resolvent_map(ra) - ra
    out = 0.5 * x + 0.5 * rb
    return out[0] if single else out


def displacement_map(pair, x):
    """``(Id - T) x``."""
    x = np.asarray(x, dtype=float)
    return x - dr_map(pair, x)


def attouch_thera_dual(pair):
    """The dual pair ``(A^{-1}, (B^{-1})^vee)``; it shares the DR operator of `pair`."""
    return OperatorPair(inverse(pair.A), vee(inverse(pair.B)))


def dr_from_firmly_nonexpansive(t1, t2):
    """``T = T2 (2 T1 - Id) + Id - T1`` built from two firmly nonexpansive maps."""
    def mapping(x):
        x = np.asarray(x, dtype=float)
        y = t1(x)
        return t2(2.0 * y - x) + x - y
    return mapping


@dataclass
class DRTrace:
    """History of a DR run.

    Rows ``governing[k]``, ``shadow[k]`` and ``displacement[k]`` belong to
    iteration ``iterations_index[k]``; with ``stride == 1`` that is k.
    `displacement_norms` is always stored at every step.
    """

    governing: np.ndarray
    shadow: np.ndarray
    displacement: np.ndarray
    displacement_norms: np.ndarray
    iterations: int
    stride: int = 1
    converged: bool = False
    iterations_index: np.ndarray = field(default=None)

    @property
    def final(self):
        return self.governing[-1]

    def to_csv(self, path):
        """Columns iter, x*, shadow*, displacement_norm."""
        dim = self.governing.shape[1]
        idx = self.iterations_index
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["iter"] + [f"x{i}" for i in range(dim)]
                       + [f"shadow{i}" for i in range(dim)] + ["displacement_norm"])
            for k in range(len(idx)):
                n = int(idx[k])
                norm = self.displacement_norms[n] if n < len(self.displacement_norms) else ""
                w.writerow([n] + [repr(float(v)) for v in self.governing[k]]
                           + [repr(float(v)) for v in self.shadow[k]]
                           + ([repr(float(norm))] if norm != "" else [""]))


def dr_iterate(pair, x0, max_iter, stop_tol=1e-12, stride=1):
    """Run ``x_{n+1} = T x_n``.

    Stops early once ``||x_n - x_{n+1}|| < stop_tol`` and that norm changed
    by less than `stop_tol` since the previous step; at step 0 the change
    test is vacuous.  Inconsistent problems therefore run to `max_iter`.

    Parameters
    ----------
    stride : int
        Keep every `stride`-th governing/shadow/displacement vector (the
        last iterate is always kept).  Norms are kept at every step.
    """
    if max_iter < 1:
        raise SpecError("max_iter must be at least 1", field="max_iter")
    if stride < 1:
        raise SpecError("stride must be at least 1", field="stride")
    x = as_vector(x0, pair.dim, name="x0")
    ja_map, jb_map = pair.A.resolvent_map, pair.B.resolvent_map
    gov, sha, dis, idx = [], [], [], []
    norms = []
    prev_norm = None
    converged = False
    n = 0
    for n in range(max_iter):
        xr = x[None, :]
        ja = ja_map(xr)
        nxt = (xr - ja + jb_map(2.0 * ja - xr))[0]
        d = x - nxt
        norm = math.sqrt(d @ d)
        if not math.isfinite(norm):
            raise NonFiniteIterateError(f"non-finite iterate at step {n + 1}")
        norms.append(norm)
        if n % stride == 0:
            gov.append(x)
            sha.append(ja[0])
            dis.append(d)
            idx.append(n)
        x = nxt
        if norm < stop_tol and (prev_norm is None or abs(prev_norm - norm) < stop_tol):
            converged = True
            break
        prev_norm = norm
    steps = n + 1
    # record the final iterate
    last_j = ja_map(x[None, :])[0]
    last_next = x - last_j + jb_map((2.0 * last_j - x)[None, :])[0]
    gov.append(x)
    sha.append(last_j)
    dis.append(x - last_next)
    idx.append(steps)
    return DRTrace(np.array(gov), np.array(sha), np.array(dis), np.array(norms),
                   steps, stride, converged, np.array(idx))
