"""Range samplers, the perturbed problem and the infimal displacement vector."""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .cloud import PointCloud, as_vector
from .errors import EmptySampleError, SpecError
from .operators import shift_inner, shift_outer
from .sets import intersect, minkowski
from .splitting import OperatorPair, dr_iterate, dr_map

SOLVED = "SOLVED"
UNSOLVED = "UNSOLVED"
INCONCLUSIVE = "INCONCLUSIVE"

DEFAULT_SOLVER_TOL = 1e-6
DEFAULT_MAX_ITER = 100_000
TAIL_FRACTION = 0.1
# relative spread of tail displacement norms still counted as "stabilized"
STABLE_SPREAD = 0.25


@dataclass
class PairSets:
    """The four Minkowski sets attached to a pair and their intersections.

    ``D = dom A - dom B`` and ``R = ran A + ran B`` bound ``ran(Id - T)``;
    ``D_dual = dom A - ran B`` and ``R_dual = ran A + dom B`` bound ``ran T``.
    The intersections are None when two exact affine sets do not meet.
    """

    D: object
    R: object
    D_dual: object
    R_dual: object
    DR: Optional[object]
    DR_dual: Optional[object]
    samples: int
    window: object

    def sample(self, which, rng, count=None):
        """Sample one of the stored sets; Minkowski samples keep their witnesses."""
        target = getattr(self, which)
        if target is None:
            raise EmptySampleError(f"{which} is empty")
        cloud = target.sample(count or self.samples, self.window, rng)
        if len(cloud) == 0:
            raise EmptySampleError(f"{which}: sampler returned no points")
        return cloud


def _safe_intersect(a, b):
    try:
        return intersect(a, b)
    except EmptySampleError:
        return None


def build_pair_sets(pair, samples, window):
    """Minkowski descriptors for D, R and the dual pair, exact where both factors are."""
    if samples < 1:
        raise SpecError("samples must be at least 1", field="samples")
    a, b = pair.A, pair.B
    d = minkowski(a.domain, b.domain, -1.0)
    r = minkowski(a.range_, b.range_, 1.0)
    dd = minkowski(a.domain, b.range_, -1.0)
    rd = minkowski(a.range_, b.domain, 1.0)
    return PairSets(d, r, dd, rd, _safe_intersect(d, r), _safe_intersect(dd, rd),
                    samples, window)


def _inputs(inputs, dim):
    cloud = inputs if isinstance(inputs, PointCloud) else PointCloud(np.asarray(inputs, float))
    cloud.require_nonempty()
    if cloud.dim != dim:
        raise SpecError(f"inputs have dimension {cloud.dim}, pair has {dim}", field="inputs")
    return cloud


def sample_displacement_range(pair, inputs):
    """Images ``x - T x`` of the input cloud; witnesses are the inputs."""
    cloud = _inputs(inputs, pair.dim)
    x = cloud.points
    return PointCloud(x - dr_map(pair, x), witnesses=x.copy())


def sample_T_range(pair, inputs):
    """Images ``T x`` of the input cloud; witnesses are the inputs."""
    cloud = _inputs(inputs, pair.dim)
    x = cloud.points
    return PointCloud(dr_map(pair, x), witnesses=x.copy())


@dataclass
class PerturbedVerdict:
    """Outcome of a DR-based existence test.

    `residual` is the final displacement norm of the shifted DR map,
    ``||J_A' x - J_B'(R_A' x)||``, which vanishes exactly at fixed points.
    """

    status: str
    witness: Optional[np.ndarray]
    residual: float
    limiting_displacement_norm: float
    iterations: int = 0

    def to_dict(self):
        return {"status": self.status,
                "witness": None if self.witness is None else self.witness.tolist(),
                "residual": self.residual,
                "limiting_displacement_norm": self.limiting_displacement_norm}

    def to_json(self):
        return json.dumps(self.to_dict(), sort_keys=True)


def _classify(norms, tol):
    tail = norms[-max(1, int(np.ceil(TAIL_FRACTION * len(norms)))):]
    lo, hi = float(tail.min()), float(tail.max())
    if lo > tol and hi - lo <= STABLE_SPREAD * hi:
        return UNSOLVED
    return INCONCLUSIVE


def _solve_pair(shifted, x0, tol, max_iter):
    if tol <= 0:
        raise SpecError("tol must be positive", field="tol")
    stride = max(1, max_iter // 1000)
    trace = dr_iterate(shifted, x0, max_iter, stop_tol=tol, stride=stride)
    norms = trace.displacement_norms
    final = float(np.linalg.norm(trace.displacement[-1]))
    if trace.converged or final <= tol:
        # the last iterate is a tol-approximate fixed point; its shadow is the witness
        return PerturbedVerdict(SOLVED, trace.shadow[-1].copy(), final, final,
                                trace.iterations)
    return PerturbedVerdict(_classify(norms, tol), None, final, final, trace.iterations)


def solve_perturbed(pair, w, x0=None, tol=DEFAULT_SOLVER_TOL, max_iter=DEFAULT_MAX_ITER):
    """Decide whether ``Z_w = {x : w in A x + B(x - w)}`` is nonempty.

    Runs DR on ``(A - w, B(. - w))``.  SOLVED when the displacement norm
    drops to `tol` (the witness is the shadow at that step), UNSOLVED when
    the norms over the last tenth of the run stay above `tol` within a
    relative spread of 25%, INCONCLUSIVE otherwise.
    """
    w = as_vector(w, pair.dim, name="w")
    x0 = np.zeros(pair.dim) if x0 is None else as_vector(x0, pair.dim, name="x0")
    shifted = OperatorPair(shift_outer(pair.A, w), shift_inner(pair.B, w))
    return _solve_pair(shifted, x0, tol, max_iter)


def sum_range_membership(pair, y, x0=None, tol=DEFAULT_SOLVER_TOL, max_iter=DEFAULT_MAX_ITER):
    """Decide ``y in ran(A + B)`` by finding a zero of the pair ``(A, B - y)``."""
    y = as_vector(y, pair.dim, name="y")
    x0 = np.zeros(pair.dim) if x0 is None else as_vector(x0, pair.dim, name="x0")
    return _solve_pair(OperatorPair(pair.A, shift_outer(pair.B, y)), x0, tol, max_iter)


@dataclass
class DisplacementEstimate:
    """Two estimates of the infimal displacement vector and their disagreement.

    `v` is the tail displacement ``x_{n-1} - x_n``; `v_cesaro` is
    ``(x_0 - x_n) / n``.  `flagged` marks a gap above ten times the tolerance.
    """

    v: np.ndarray
    v_cesaro: np.ndarray
    method: str
    iterations: int
    agreement_gap: float
    flagged: bool

    def to_dict(self):
        return {"v": self.v.tolist(), "v_cesaro": self.v_cesaro.tolist(),
                "method": self.method, "iterations": self.iterations,
                "agreement_gap": self.agreement_gap, "flagged": self.flagged}


def estimate_displacement_vector(pair, x0=None, max_iter=10_000, tol=1e-6):
    """Estimate ``v = P_{cl ran(Id - T)}(0)`` from one DR trajectory."""
    if max_iter < 100:
        raise SpecError("max_iter must be at least 100", field="max_iter")
    x0 = np.zeros(pair.dim) if x0 is None else as_vector(x0, pair.dim, name="x0")
    trace = dr_iterate(pair, x0, max_iter, stop_tol=1e-15, stride=max_iter)
    n = trace.iterations
    v = trace.displacement[-1]
    v_ces = (x0 - trace.final) / n
    gap = float(np.linalg.norm(v - v_ces))
    return DisplacementEstimate(v.copy(), v_ces, "tail-displacement", n, gap, gap > 10 * tol)
