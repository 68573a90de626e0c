"""Registry of reproducible experiments, each returning a pass/fail report.

Every experiment is a function ``fn(run, **params)`` registered with its
default parameters.  `run` collects checks, notes and exported files;
:func:`run_experiment` validates parameters, seeds the generator and
times the call.
"""

from __future__ import annotations

import json
import math
import os
import time
from dataclasses import dataclass, field
from typing import Any

import numpy as np

from . import catalog as cat
from .cloud import Box, PointCloud
from .errors import SpecError
from .functions import (BUILTINS, bh_gap_violations, bh_range_predicate, bh_strict_predicate,
                        numeric_prox)
from .geometry import affine_hull, near_equal
from .operators import (fne_violation, inverse, linear_operator, normal_cone_affine,
                        normal_cone_ball, prox_operator, resolvent, vee)
from .ranges import (SOLVED, UNSOLVED, build_pair_sets, estimate_displacement_vector,
                     sample_T_range, sample_displacement_range, solve_perturbed,
                     sum_range_membership)
from .sets import Cylinder, affine_intersection
from .splitting import (OperatorPair, attouch_thera_dual, dr_iterate, dr_map,
                        dr_map_reflected)

SCHEMA_VERSION = "1.0"


def _plain(value):
    """Convert numpy values to JSON-friendly Python objects."""
    if isinstance(value, np.ndarray):
        return [_plain(v) for v in value.tolist()]
    if isinstance(value, (np.floating, float)):
        v = float(value)
        return v if math.isfinite(v) else str(v)
    if isinstance(value, (np.integer,)):
        return int(value)
    if isinstance(value, (np.bool_,)):
        return bool(value)
    if isinstance(value, (list, tuple)):
        return [_plain(v) for v in value]
    if isinstance(value, dict):
        return {str(k): _plain(v) for k, v in value.items()}
    return value


@dataclass
class Check:
    description: str
    expected: Any
    observed: Any
    tolerance: Any
    passed: bool

    def to_dict(self):
        return {"description": self.description, "expected": _plain(self.expected),
                "observed": _plain(self.observed), "tolerance": _plain(self.tolerance),
                "pass": bool(self.passed)}


@dataclass
class ExperimentReport:
    """Outcome of one experiment; it passes when every check passes."""

    name: str
    parameters: dict
    checks: list = field(default_factory=list)
    notes: list = field(default_factory=list)
    artifacts: list = field(default_factory=list)
    runtime_ms: int = 0

    @property
    def passed(self):
        return all(c.passed for c in self.checks)

    def failed_checks(self):
        return [c for c in self.checks if not c.passed]

    def to_dict(self, include_runtime=True):
        out = {"schema_version": SCHEMA_VERSION, "name": self.name,
               "parameters": _plain(self.parameters), "pass": self.passed,
               "checks": [c.to_dict() for c in self.checks], "notes": list(self.notes),
               "artifacts": list(self.artifacts)}
        if include_runtime:
            out["runtime_ms"] = self.runtime_ms
        return out

    def to_json(self, include_runtime=True, indent=2):
        return json.dumps(self.to_dict(include_runtime), indent=indent, sort_keys=True)


class Run:
    """Mutable collector handed to experiment functions."""

    def __init__(self, report, rng, output_dir):
        self.report = report
        self.rng = rng
        self.output_dir = output_dir

    def check(self, description, expected, observed, tolerance=None, passed=None):
        if passed is None:
            if tolerance is None:
                passed = expected == observed
            else:
                diff = np.max(np.abs(np.asarray(observed, float) - np.asarray(expected, float)))
                passed = bool(diff <= tolerance)
        self.report.checks.append(Check(description, expected, observed, tolerance,
                                        bool(passed)))
        return bool(passed)

    def at_most(self, description, observed, bound):
        observed = float(observed)
        return self.check(description, f"<= {bound:g}", observed, bound, observed <= bound)

    def at_least(self, description, observed, bound):
        observed = float(observed)
        return self.check(description, f">= {bound:g}", observed, bound, observed >= bound)

    def note(self, text):
        self.report.notes.append(text)

    def export_cloud(self, filename, cloud):
        if self.output_dir is None:
            return
        path = os.path.join(self.output_dir, f"{self.report.name}_{filename}.csv")
        cloud.to_csv(path)
        self.report.artifacts.append(path)

    def export_trace(self, filename, trace):
        if self.output_dir is None:
            return
        path = os.path.join(self.output_dir, f"{self.report.name}_{filename}.csv")
        trace.to_csv(path)
        self.report.artifacts.append(path)

    def export_support(self, filename, report):
        if self.output_dir is None:
            return
        path = os.path.join(self.output_dir, f"{self.report.name}_{filename}.csv")
        report.export_support_csv(path)
        self.report.artifacts.append(path)


REGISTRY = {}


def experiment(name, **defaults):
    def register(fn):
        REGISTRY[name] = (fn, defaults)
        return fn
    return register


def _coerce(key, default, raw):
    if isinstance(raw, str):
        text = raw.strip()
        try:
            if isinstance(default, bool):
                if text.lower() in ("1", "true", "yes"):
                    return True
                if text.lower() in ("0", "false", "no"):
                    return False
                raise ValueError(text)
            if isinstance(default, int):
                return int(text)
            if isinstance(default, float):
                return float(text)
            if isinstance(default, (list, tuple)):
                if text.startswith("["):
                    return [float(v) for v in json.loads(text)]
                return [float(v) for v in text.split(",") if v.strip()]
        except (ValueError, TypeError, json.JSONDecodeError):
            raise SpecError(f"cannot parse {raw!r} for parameter {key!r}", field=key) from None
        return text
    if isinstance(default, bool):
        if not isinstance(raw, bool):
            raise SpecError(f"parameter {key!r} must be a boolean", field=key)
        return raw
    if isinstance(default, int) and not isinstance(default, bool):
        if isinstance(raw, bool) or not float(raw).is_integer():
            raise SpecError(f"parameter {key!r} must be an integer", field=key)
        return int(raw)
    if isinstance(default, float):
        if isinstance(raw, bool) or not isinstance(raw, (int, float)):
            raise SpecError(f"parameter {key!r} must be a number", field=key)
        return float(raw)
    if isinstance(default, (list, tuple)):
        if isinstance(raw, (int, float)) and not isinstance(raw, bool):
            return [float(raw)]
        try:
            return [float(v) for v in raw]
        except (TypeError, ValueError):
            raise SpecError(f"parameter {key!r} must be a list of numbers", field=key) from None
    return raw


def resolve_params(name, params=None):
    if name not in REGISTRY:
        raise SpecError(f"unknown experiment {name!r}; known: {', '.join(sorted(REGISTRY))}",
                        field="name")
    defaults = REGISTRY[name][1]
    merged = dict(defaults)
    for key, raw in (params or {}).items():
        if key not in defaults:
            raise SpecError(f"unknown parameter {key!r} for {name}; accepted: "
                            f"{', '.join(sorted(defaults)) or 'none'}", field=key)
        merged[key] = _coerce(key, defaults[key], raw)
    return merged


def run_experiment(name, params=None, seed=0, output_dir=None):
    """Run one registered experiment and return its :class:`ExperimentReport`."""
    merged = resolve_params(name, params)
    if output_dir is not None:
        os.makedirs(output_dir, exist_ok=True)
    report = ExperimentReport(name, dict(merged, seed=seed))
    run = Run(report, np.random.default_rng(seed), output_dir)
    start = time.perf_counter()
    REGISTRY[name][0](run, **merged)
    report.runtime_ms = int(round(1000 * (time.perf_counter() - start)))
    return report


def list_experiments():
    return sorted(REGISTRY)


# helpers -------------------------------------------------------------------

def _dist_to_subspace(points, basis):
    """Distances of rows to ``span(basis rows)`` (basis orthonormal)."""
    if basis.shape[0] == 0:
        return np.linalg.norm(points, axis=1)
    return np.linalg.norm(points - points @ basis.T @ basis, axis=1)


def _orth_rows(m):
    q, s, vt = np.linalg.svd(np.atleast_2d(m), full_matrices=False)
    k = int(np.sum(s > 1e-10 * max(s[0], 1e-300))) if s.size else 0
    return vt[:k]


def _sum_basis(*bases):
    return _orth_rows(np.vstack(bases))


def _complement(basis, dim):
    if basis.shape[0] == 0:
        return np.eye(dim)
    _, s, vt = np.linalg.svd(basis, full_matrices=True)
    return vt[basis.shape[0]:]


# experiments ---------------------------------------------------------------

@experiment("rotation_counterexample", samples=1000, half_width=10.0, solver_iter=2000)
def rotation_counterexample(run, samples, half_width, solver_iter):
    """Quarter turn A and B = -A: the DR operator is the identity."""
    pair = cat.rotation_pair()
    window = Box.cube(2, half_width)
    x = window.uniform(samples, run.rng)
    disp = sample_displacement_range(pair, x)
    run.export_cloud("displacements", disp)
    run.at_most("max ||(Id - T)x|| over sampled x", np.max(np.linalg.norm(disp.points, axis=1)),
                1e-12)
    trace = dr_iterate(pair, x[0], 10)
    run.at_most("displacement at step 0 of a DR run", trace.displacement_norms[0], 1e-12)
    plane = PointCloud(window.uniform(samples, run.rng))
    rep = near_equal(PointCloud(np.zeros((1, 2))), plane, window=window)
    run.check("near_equal({0}, plane samples)", False, rep.verdict)
    run.check("affine dims of {0} and the plane", [0, 2], list(rep.affine_dims))
    verdict = solve_perturbed(pair, [1.0, 0.0], max_iter=solver_iter)
    run.check("perturbed problem at w = (1, 0)", UNSOLVED, verdict.status)
    y = sum_range_membership(pair, [1.0, 0.0], max_iter=solver_iter)
    run.check("(1, 0) in ran(A + B)", UNSOLVED, y.status)


@experiment("rotation_line", samples=1000, half_width=10.0)
def rotation_line(run, samples, half_width):
    """Quarter turn A and the normal cone of the horizontal axis."""
    pair = cat.rotation_line_pair()
    run.check("J_A(1, 1)", [1.0, 0.0], resolvent(pair.A, np.array([1.0, 1.0])), 1e-12)
    run.check("T(1, 0)", [0.5, 0.5], dr_map(pair, np.array([1.0, 0.0])), 1e-12)
    window = Box.cube(2, half_width)
    disp = sample_displacement_range(pair, window.uniform(samples, run.rng))
    run.export_cloud("displacements", disp)
    line = np.array([[1.0, -1.0]]) / math.sqrt(2.0)
    run.at_most("max distance of displacements to span{(1,-1)}",
                np.max(_dist_to_subspace(disp.points, line)), 1e-9)
    _, basis, dim = affine_hull(disp, 1e-6)
    run.check("affine hull dimension", 1, dim)
    align = abs(float(basis[0] @ line[0])) if dim == 1 else 0.0
    run.check("hull direction is +-(1,-1)/sqrt2", 1.0, align, 1e-9)
    plane = PointCloud(window.uniform(samples, run.rng))
    rep = near_equal(disp, plane, window=window)
    run.check("near_equal(displacements, plane)", False, rep.verdict)
    run.check("affine dims (line, plane)", [1, 2], list(rep.affine_dims))


@experiment("two_balls", u=[0.0, 0.0], r=1.0, v=[3.0, 0.0], s=1.0, iterations=10000,
            solver_iter=100000, tol=1e-6, samples=2000, input_half_width=25.0,
            half_width=5.0, set_tol=0.05)
def two_balls(run, u, r, v, s, iterations, solver_iter, tol, samples, input_half_width,
              half_width, set_tol):
    """Normal cones of two balls; the displacement range is the open ball B(u-v, r+s) plus
    at most two boundary points."""
    u, v = np.asarray(u, float), np.asarray(v, float)
    if u.shape != v.shape or u.ndim != 1:
        raise SpecError("u and v must be vectors of equal length", field="v")
    pair = cat.two_balls_pair(u, r, v, s)
    c = u - v
    rad = r + s
    oracle = cat.two_balls_v(u, r, v, s)
    est = estimate_displacement_vector(pair, max_iter=iterations)
    run.check("tail-displacement estimate of v vs projection of 0 onto B(u-v, r+s)",
              oracle, est.v, tol)
    run.note(f"Cesaro estimate {est.v_cesaro.tolist()} (gap {est.agreement_gap:.3g}, "
             f"flagged={est.flagged})")
    run.note("The closed-form v printed with the two-ball example swaps the disjoint and "
             "overlapping cases; the check uses the projection of 0 onto B(u-v, r+s).")
    dim = u.shape[0]
    inputs = Box.cube(dim, input_half_width).uniform(samples, run.rng)
    disp = sample_displacement_range(pair, inputs)
    run.export_cloud("displacements", disp)
    dist = np.maximum(np.linalg.norm(disp.points - c, axis=1) - rad, 0.0)
    run.at_most("max distance of displacements outside B(u-v, r+s)", np.max(dist), 1e-9)
    window = Box.cube(dim, half_width)
    ball = Cylinder.ball(c, rad).sample(samples, window, run.rng)
    rep = near_equal(disp, ball, tol=set_tol, window=window)
    run.export_support("support_gap", rep)
    run.check("displacements fill B(u-v, r+s) (support gap)", True, rep.verdict)
    norm_c = np.linalg.norm(c)
    if norm_c > rad:
        for sgn in (1.0, -1.0):
            w = (1.0 + sgn * rad / norm_c) * c
            verdict = solve_perturbed(pair, w, tol=tol, max_iter=solver_iter)
            run.check(f"perturbed problem at exceptional boundary point {w.tolist()}",
                      SOLVED, verdict.status)
        perp = np.zeros(dim)
        perp[1 if abs(c[0]) > abs(c[1] if dim > 1 else 0) else 0] = 1.0
        perp -= (perp @ c) / (c @ c) * c
        w = c + rad * perp / np.linalg.norm(perp)
        verdict = solve_perturbed(pair, w, tol=tol, max_iter=solver_iter)
        run.check(f"perturbed problem at generic boundary point {w.tolist()}",
                  UNSOLVED, verdict.status)
        run.note(f"generic boundary residual after {verdict.iterations} iterations: "
                 f"{verdict.residual:.3g}")


@experiment("angle_v", theta=[0.0, math.pi / 6, math.pi / 4, math.pi / 3], iterations=1000,
            tol=1e-5, norm_tol=1e-6)
def angle_v(run, theta, iterations, tol, norm_tol):
    """Normal cone of a shifted plane against a shifted normal cone in R^4."""
    for th in theta:
        v_ab = estimate_displacement_vector(cat.angle_pair(th), max_iter=iterations).v
        v_ba = estimate_displacement_vector(cat.angle_pair(th, swap=True), max_iter=iterations).v
        n_ab, n_ba = np.linalg.norm(v_ab), np.linalg.norm(v_ba)
        inner = float(v_ab @ v_ba / (n_ab * n_ba))
        run.check(f"theta={th:.6g}: <v_AB, v_BA> normalized", math.cos(2 * th), inner, tol)
        run.check(f"theta={th:.6g}: ||v_AB|| - ||v_BA||", 0.0, n_ab - n_ba, norm_tol)


@experiment("two_subspaces", pairs=5, samples=500, dim=6, k_u=2, k_v=3, half_width=10.0,
            tol=1e-10)
def two_subspaces(run, pairs, samples, dim, k_u, k_v, half_width, tol):
    """Normal cones of two random subspaces: ran(Id - T) = (U+V) & (U^perp + V^perp)."""
    window = Box.cube(dim, half_width)
    for i in range(pairs):
        pair, ub, vb = cat.subspace_pair(seed=int(run.rng.integers(0, 2**31)),
                                         dim=dim, k_u=k_u, k_v=k_v)
        s1 = Cylinder.subspace(_sum_basis(ub, vb), dim)
        perp = _sum_basis(_complement(ub, dim), _complement(vb, dim))
        s2 = Cylinder.subspace(perp if perp.shape[0] else None, dim)
        m = affine_intersection(s1, s2)
        disp = sample_displacement_range(pair, window.uniform(samples, run.rng))
        dist = np.max(m.distance(disp.points))
        run.at_most(f"pair {i}: max distance of displacements to (U+V)&(U^perp+V^perp)",
                    dist, tol)
        rank = np.linalg.matrix_rank(disp.points, tol=1e-8 * half_width)
        run.check(f"pair {i}: rank of sampled displacements", m.rank, int(rank))


def _fact44_pairs():
    out = dict((k, c.pair) for k, c in cat.catalog().items())
    return out


@experiment("self_duality", samples=1000, half_width=10.0, tol=1e-10)
def self_duality(run, samples, half_width, tol):
    """The Attouch-Thera dual pair has the same DR operator as the primal pair."""
    for name, pair in _fact44_pairs().items():
        x = Box.cube(pair.dim, half_width).uniform(samples, run.rng)
        t = dr_map(pair, x)
        dual = attouch_thera_dual(pair)
        run.at_most(f"{name}: max ||T_(A,B) x - T_dual x||", np.max(np.abs(t - dr_map(dual, x))),
                    tol)
        flipped = dr_map(OperatorPair(pair.A, inverse(pair.B)), x)
        run.at_most(f"{name}: max ||T_(A,B) x + T_(A,B^-1) x - x||",
                    np.max(np.abs(t + flipped - x)), tol)
        run.at_most(f"{name}: reflected form of T", np.max(np.abs(t - dr_map_reflected(pair, x))),
                    1e-12 * half_width)
        back = attouch_thera_dual(dual)
        err = max(np.max(np.abs(back.A.resolvent_map(x) - pair.A.resolvent_map(x))),
                  np.max(np.abs(back.B.resolvent_map(x) - pair.B.resolvent_map(x))))
        run.at_most(f"{name}: dual of the dual resolvents", err, 1e-12 * half_width)


def _theorem_pairs():
    c = cat.catalog()
    return {k: c[k].pair for k in ("overlapping-balls", "ball-line", "ball-monotone-linear")}


def _compare_range(run, label, pair, sampler, which, samples, half_width, input_half_width,
                   set_tol, n_directions):
    window = Box.cube(pair.dim, half_width)
    sets = build_pair_sets(pair, samples, window)
    inputs = Box.cube(pair.dim, input_half_width).uniform(samples, run.rng)
    cloud = sampler(pair, inputs)
    target = sets.sample(which, run.rng)
    rep = near_equal(cloud, target, tol=set_tol, n_directions=n_directions, window=window)
    run.export_cloud(f"{label}_range", cloud)
    run.export_support(f"{label}_support_gap", rep)
    run.check(f"{label}: near equality (gap {rep.max_support_gap:.3g}, dims "
              f"{rep.affine_dims})", True, rep.verdict)
    if pair.A.flags.is_3star and pair.B.flags.is_3star:
        member = getattr(sets, which).contains(cloud.points, 1e-9)
        run.check(f"{label}: every sample lies in the target set", True, bool(np.all(member)))
    return rep


@experiment("main_theorem", samples=10000, half_width=5.0, input_half_width=25.0,
            set_tol=0.05, n_directions=256)
def main_theorem(run, samples, half_width, input_half_width, set_tol, n_directions):
    """ran(Id - T) is nearly equal to (dom A - dom B) & (ran A + ran B) for 3* pairs."""
    for label, pair in _theorem_pairs().items():
        _compare_range(run, label, pair, sample_displacement_range, "DR", samples, half_width,
                       input_half_width, set_tol, n_directions)
    pair = OperatorPair(normal_cone_ball([0.0, 0.0], 1.0), linear_operator(np.eye(2)))
    x = Box.cube(2, 10.0).uniform(samples, run.rng)
    disp = sample_displacement_range(pair, x)
    run.at_most("A = N_ball, B = Id: max |(Id - T)x - x/2|", np.max(np.abs(disp.points - x / 2)),
                1e-12)
    sets = build_pair_sets(pair, samples, Box.cube(2, half_width))
    run.check("A = N_ball, B = Id: R is the whole space", True, bool(sets.R.is_whole_space))
    est = estimate_displacement_vector(pair, x0=np.array([3.0, -2.0]), max_iter=1000)
    run.check("A = N_ball, B = Id: v = 0", [0.0, 0.0], est.v, 1e-9)


@experiment("range_of_T", samples=10000, half_width=5.0, input_half_width=25.0,
            set_tol=0.05, n_directions=256)
def range_of_T(run, samples, half_width, input_half_width, set_tol, n_directions):
    """ran T is nearly equal to (dom A - ran B) & (ran A + dom B)."""
    for label, pair in _theorem_pairs().items():
        _compare_range(run, label, pair, sample_T_range, "DR_dual", samples, half_width,
                       input_half_width, set_tol, n_directions)
    # B = 0 gives T = J_A, so ran T = dom A
    pair = OperatorPair(normal_cone_ball([1.0, 0.0], 1.5), linear_operator(np.zeros((2, 2))))
    x = Box.cube(2, input_half_width).uniform(samples, run.rng)
    t = sample_T_range(pair, x)
    run.at_most("B = 0: max |T x - J_A x|", np.max(np.abs(t.points - resolvent(pair.A, x))),
                1e-12)
    _compare_range(run, "B = 0", pair, sample_T_range, "DR_dual", samples, half_width,
                   input_half_width, set_tol, n_directions)
    disp = sample_displacement_range(pair, x)
    run.at_most("T + (Id - T) = Id on the sample", np.max(np.abs(t.points + disp.points - x)),
                1e-12)


@experiment("linear_transport", samples=200, tol=1e-6, lambdas=[0.0, 0.5, 1.0],
            solver_iter=20000, control_iter=3000, half_width=5.0)
def linear_transport(run, samples, tol, lambdas, solver_iter, control_iter, half_width):
    """Moving between ran(Id - T) and ran(A + B) with linear maps."""
    rng = run.rng
    # (i) B linear
    b = cat.MONOTONE_NONSYMMETRIC
    pair = OperatorPair(normal_cone_ball([0.0, 0.0], 1.0), linear_operator(b))
    w = sample_displacement_range(pair, Box.cube(2, half_width).uniform(samples, rng)).points
    y = w @ (np.eye(2) + b).T
    status = [sum_range_membership(pair, yi, tol=tol, max_iter=solver_iter).status for yi in y]
    run.check("(i) (Id + B) w in ran(A + B) for sampled displacements w",
              samples, sum(st == SOLVED for st in status))
    jb = resolvent(pair.B, y)
    run.at_most("(i) J_B (Id + B) w = w", np.max(np.abs(jb - w)), 1e-12)
    back = [solve_perturbed(pair, wi, tol=tol, max_iter=solver_iter).status for wi in w[:20]]
    run.check("(i) sampled w solve the perturbed problem", 20, sum(st == SOLVED for st in back))
    # (ii) A linear with Id - A invertible: the quarter turn against the horizontal axis
    pair2 = cat.rotation_line_pair()
    a = pair2.A.matrix
    w2 = sample_displacement_range(pair2, Box.cube(2, half_width).uniform(samples, rng)).points
    y2 = w2 @ (np.eye(2) - a).T
    ok = [sum_range_membership(pair2, yi, tol=tol, max_iter=solver_iter).status == SOLVED
          for yi in y2[:50]]
    run.check("(ii) (Id - A) w in ran(A + B)", 50, sum(ok))
    run.at_most("(ii) (Id - A) w lies on the vertical axis", np.max(np.abs(y2[:, 0])), 1e-9)
    control = w2[np.argmax(np.linalg.norm(w2, axis=1))] @ (np.eye(2) + a).T
    verdict = sum_range_membership(pair2, control, tol=tol, max_iter=control_iter)
    run.check("(ii) negative control: (Id + A) w is not in ran(A + B)", UNSOLVED, verdict.status)
    # (iii) A skew, B linear, in R^3
    skew = np.array([[0.0, -1.0, 0.0], [1.0, 0.0, 0.0], [0.0, 0.0, 0.0]])
    bl = np.diag([1.0, 1.0, 0.0])
    pair3 = OperatorPair(linear_operator(skew), linear_operator(bl))
    w3 = sample_displacement_range(pair3, Box.cube(3, half_width).uniform(samples, rng)).points
    for lam in lambdas:
        m = lam * skew.T + (1.0 - lam) * bl
        y3 = w3 @ (np.eye(3) + m).T
        ok = [sum_range_membership(pair3, yi, tol=tol, max_iter=solver_iter).status == SOLVED
              for yi in y3[:20]]
        run.check(f"(iii) lambda={lam:g}: (Id + M) w in ran(A + B)", 20, sum(ok))
        ys = np.column_stack([rng.uniform(-half_width, half_width, (20, 2)), np.zeros(20)])
        jm = linear_operator(m)
        ws = resolvent(jm, ys)
        ok = [solve_perturbed(pair3, wi, tol=tol, max_iter=solver_iter).status == SOLVED
              for wi in ws]
        run.check(f"(iii) lambda={lam:g}: J_M y in ran(Id - T) for y in ran(A + B)", 20, sum(ok))
    verdict = sum_range_membership(pair3, np.array([0.0, 0.0, 1.0]), tol=tol,
                                   max_iter=control_iter)
    run.check("(iii) negative control: e3 is not in ran(A + B)", UNSOLVED, verdict.status)


def l2_preimage(n_half, p, alpha=None):
    """Min-norm ``u in U`` with ``P_E u = P_E w`` in R^(2N), by least squares.

    ``U = {x : x_(2n+1) = -alpha_n x_(2n)}``, ``E = {x : x_(2n) = 0}`` and
    ``w_(2n) = alpha_n^p``, ``w_(2n+1) = alpha_n^(p-1)``.
    Returns ``(u, w, alpha)``.
    """
    n = np.arange(n_half)
    alpha = 1.0 / (n + 1.0) if alpha is None else np.asarray(alpha, float)
    if np.any(alpha <= 0):
        raise SpecError("alpha_n must be positive", field="alpha")
    size = 2 * n_half
    w = np.empty(size)
    w[0::2] = alpha ** p
    w[1::2] = alpha ** (p - 1.0)
    basis = np.zeros((size, n_half))
    basis[2 * n, n] = 1.0
    basis[2 * n + 1, n] = -alpha
    pe = np.zeros(size)
    pe[1::2] = 1.0
    coef, *_ = np.linalg.lstsq(pe[:, None] * basis, pe * w, rcond=None)
    return basis @ coef, w, alpha


@experiment("l2_truncation", N=[10.0, 100.0, 1000.0], p=2.0, tol=1e-8, rate=0.9)
def l2_truncation(run, N, p, tol, rate):
    """Truncations of the l^2 construction: the preimage norm grows without bound."""
    if not 1.5 < p <= 2.5:
        run.note(f"p = {p} lies outside (3/2, 5/2]; the divergence argument may not apply")
    norms = []
    for n_half in (int(v) for v in N):
        if n_half < 1:
            raise SpecError("N must be positive", field="N")
        u, w, alpha = l2_preimage(n_half, p)
        closed = np.empty_like(u)
        closed[0::2] = -alpha ** (p - 2.0)
        closed[1::2] = alpha ** (p - 1.0)
        run.check(f"N={n_half}: least-squares preimage vs closed form", closed, u, tol)
        perp_ok = np.max(np.abs(w[1::2] - w[0::2] / alpha))
        run.at_most(f"N={n_half}: w lies in U^perp", perp_ok, 1e-12)
        sq = float(u @ u)
        norms.append(sq)
        if p == 2.0:
            exact = n_half + float(np.sum(1.0 / (np.arange(n_half) + 1.0) ** 2))
            run.check(f"N={n_half}: ||u||^2 = N + sum 1/(n+1)^2", exact, sq, 1e-8 * exact)
        run.at_least(f"N={n_half}: ||u||^2 / N", sq / n_half, rate)
    if len(norms) > 1:
        run.check("||u||^2 increases with N", True, bool(np.all(np.diff(norms) > 0)))


BH_PROBES = {"(0, 1.5)": (0.0, 1.5), "(1, 0)": (1.0, 0.0)}


def bh_sum_predicate(points):
    """``ran A + ran A = {xi1 >= 0}``."""
    p = np.atleast_2d(points)
    return p[:, 0] >= 0


def bh_double_predicate(points):
    """``ran(A + A) = 2 ran A``."""
    return bh_strict_predicate(np.atleast_2d(points) / 2.0)


@experiment("brezis_haraux_gap", samples=1000, half_width=5.0, grid=41, tol=1e-3)
def brezis_haraux_gap(run, samples, half_width, grid, tol):
    """f = max{1 - sqrt(xi1), |xi2|}: ran(A + A) is strictly inside ran A + ran A."""
    p = np.array([[0.0, 1.5]])
    run.check("(0, 1.5) in ran A + ran A", True, bool(bh_sum_predicate(p)[0]))
    run.check("(0, 1.5) in ran(A + A)", False, bool(bh_double_predicate(p)[0]))
    q = np.array([[1.0, 0.0]])
    run.check("(1, 0) in ran A + ran A", True, bool(bh_sum_predicate(q)[0]))
    run.check("(1, 0) in ran(A + A)", True, bool(bh_double_predicate(q)[0]))
    g = np.linspace(-3.0, 3.0, grid)
    xx, yy = np.meshgrid(g, g)
    pts = np.column_stack([xx.ravel(), yy.ravel()])
    pts = np.vstack([pts, [[0.0, 2.0], [0.0, -2.0], [0.0, 1.0], [0.0, 0.0]]])
    same = np.array_equal(bh_double_predicate(pts), bh_strict_predicate(pts / 2.0))
    run.check("ran(A + A) predicate equals the ran A predicate at x/2 on a grid", True, same)
    # A = subdiff f*, realized as the inverse of subdiff f; ran A = ran prox_f
    f_op = prox_operator("brezis-haraux")
    a_op = inverse(f_op)
    x = Box.cube(2, half_width).uniform(samples, run.rng)
    ran_a = x - resolvent(a_op, x)
    cloud = PointCloud(ran_a, witnesses=x)
    run.export_cloud("ran_A_samples", cloud)
    inside = bh_range_predicate(ran_a, tol)
    run.check(f"prox samples of ran A satisfying the predicate within {tol:g}", samples,
              int(np.sum(inside)))
    gap = bh_gap_violations(ran_a, 1e-6, tol)
    run.check("prox samples on the excluded segment {0} x (-1, 1)", 0, int(np.sum(gap)))
    axis = int(np.sum((np.abs(ran_a[:, 0]) <= 1e-6) & (np.abs(ran_a[:, 1]) >= 1.0 - tol)))
    run.check("some prox samples reach the axis part {0} x {|xi2| >= 1}", True, axis > 0)
    fx = BUILTINS["brezis-haraux"]
    probe = np.array([4.0, 0.0])
    grid_pts = np.stack(np.meshgrid(np.arange(3.9, 4.1, 1e-4), np.arange(-0.01, 0.01, 1e-4)),
                        axis=-1).reshape(-1, 2)
    obj = fx.value(grid_pts) + 0.5 * np.sum((grid_pts - probe) ** 2, axis=1)
    brute = grid_pts[np.argmin(obj)]
    run.check("numeric prox at (4, 0) vs dense grid argmin", brute, numeric_prox(fx, probe),
              2e-4)


@experiment("norm_symmetry", iterations=10000, tol=1e-6)
def norm_symmetry(run, iterations, tol):
    """||v_(A,B)|| = ||v_(B,A)||, with the sign relation fixed by the structure of D and R."""
    c = cat.catalog()
    for name, relation in (("disjoint-balls", -1.0), ("ball-line", -1.0),
                           ("subspace-constant", 1.0)):
        pair = c[name].pair
        v_ab = estimate_displacement_vector(pair, max_iter=iterations).v
        v_ba = estimate_displacement_vector(pair.swapped, max_iter=iterations).v
        run.check(f"{name}: ||v_AB|| - ||v_BA||", 0.0,
                  float(np.linalg.norm(v_ab) - np.linalg.norm(v_ba)), tol)
        word = "-v_BA" if relation < 0 else "v_BA"
        run.check(f"{name}: v_AB = {word}", relation * v_ba, v_ab, tol)
        run.check(f"{name}: v_AB vs closed form", c[name].v, v_ab, tol)


@experiment("subdifferential_ranges", samples=1000, half_width=10.0)
def subdifferential_ranges(run, samples, half_width):
    """f the indicator of the unit ball and g = ||.||^2 / 2."""
    pair = OperatorPair(normal_cone_ball([0.0, 0.0], 1.0), prox_operator("half-square", 2))
    x = Box.cube(2, half_width).uniform(samples, run.rng)
    disp = sample_displacement_range(pair, x)
    run.at_most("max |(Id - T)x - x/2|", np.max(np.abs(disp.points - x / 2)), 1e-12)
    sets = build_pair_sets(pair, samples, Box.cube(2, half_width))
    run.check("(dom f - dom g) & (dom f* + dom g*) is the whole space", True,
              bool(sets.DR.is_whole_space))
    # the window sits well inside the image of the input box so clipping saturates
    window = Box.cube(2, half_width / 4)
    rep = near_equal(disp, sets.sample("DR", run.rng), window=window)
    run.check("sampled ran(Id - T) is nearly equal to the whole space", True, rep.verdict)


# property sweep used by the acceptance suite and the CLI -----------------------

def catalog_properties(samples=1000, half_width=10.0, seed=0):
    """Worst-case values of the resolvent identities over the whole catalog.

    Returns a dict of maxima: firm nonexpansiveness excess, the inverse
    identity, Minty membership failures, the monotonicity defect and the
    largest increase of displacement norms along a DR trace.
    """
    rng = np.random.default_rng(seed)
    out = {"fne": 0.0, "inverse": 0.0, "minty_failures": 0, "monotone": 0.0,
           "trace_increase": 0.0, "vee_inverse": 0.0}
    for name, entry in cat.catalog().items():
        pair = entry.pair
        x = Box.cube(pair.dim, half_width).uniform(samples, rng)
        y = Box.cube(pair.dim, half_width).uniform(samples, rng)
        ops = [pair.A, pair.B, inverse(pair.A), vee(pair.B), inverse(vee(pair.B))]
        for op in ops:
            out["fne"] = max(out["fne"], fne_violation(op.resolvent_map, x, y))
            jx = op.resolvent_map(x)
            out["inverse"] = max(out["inverse"],
                                 float(np.max(np.abs(jx + inverse(op).resolvent_map(x) - x))))
            dom_ok = op.domain.contains(jx, 1e-6)
            ran_ok = op.range_.contains(x - jx, 1e-6)
            out["minty_failures"] += int(np.sum(~dom_ok) + np.sum(~ran_ok))
            inner = np.sum((jx - op.resolvent_map(y)) * ((x - jx) - (y - op.resolvent_map(y))),
                           axis=1)
            out["monotone"] = max(out["monotone"], float(max(0.0, -inner.min())))
        a = vee(inverse(pair.A)).resolvent_map(x)
        b = inverse(vee(pair.A)).resolvent_map(x)
        out["vee_inverse"] = max(out["vee_inverse"], float(np.max(np.abs(a - b))))
        trace = dr_iterate(pair, x[0], 500)
        out["trace_increase"] = max(out["trace_increase"],
                                    float(np.max(np.diff(trace.displacement_norms), initial=0.0)))
        dual = attouch_thera_dual(pair)
        for m in (lambda z: dr_map(pair, z), lambda z: dr_map(dual, z)):
            out["fne"] = max(out["fne"], fne_violation(m, x, y))
    return out
