"""Acceptance criteria 1-11, each checked at its stated tolerance and runtime budget.

Every test appends one ``[PASS]`` or ``[FAIL]`` line to the terminal summary.
"""

import math
import time

import numpy as np
import pytest

from conftest import ACCEPTANCE_LINES, experiment_report
from splitrange import catalog as cat
from splitrange.cloud import Box, PointCloud
from splitrange.experiments import catalog_properties, l2_preimage
from splitrange.geometry import affine_hull, near_equal
from splitrange.operators import inverse, linear_operator, normal_cone_ball
from splitrange.ranges import (SOLVED, UNSOLVED, build_pair_sets, estimate_displacement_vector,
                               sample_displacement_range, solve_perturbed, sum_range_membership)
from splitrange.splitting import OperatorPair, attouch_thera_dual, dr_map


class Criterion:
    """Times a block and records a pass/fail line for it."""

    def __init__(self, number, title, budget_s):
        self.number, self.title, self.budget = number, title, budget_s
        self.failures = []

    def expect(self, ok, message):
        if not ok:
            self.failures.append(message)

    def __enter__(self):
        self.start = time.perf_counter()
        return self

    def __exit__(self, exc_type, exc, tb):
        elapsed = time.perf_counter() - self.start
        if exc_type is None and elapsed > self.budget:
            self.failures.append(f"runtime {elapsed:.2f}s over budget {self.budget}s")
        ok = exc_type is None and not self.failures
        detail = "" if ok else "; " + "; ".join(self.failures or [repr(exc)])
        line = (f"[{'PASS' if ok else 'FAIL'}] criterion {self.number}: {self.title} "
                f"({elapsed:.2f}s){detail}")
        ACCEPTANCE_LINES.append(line)
        print(line)
        if exc_type is None:
            assert not self.failures, line
        return False


def test_criterion_01_rotation_counterexample():
    with Criterion(1, "rotation pair has ran(Id - T) = {0}", 1.0) as c:
        rng = np.random.default_rng(0)
        x = Box.cube(2, 10.0).uniform(1000, rng)
        disp = sample_displacement_range(cat.rotation_pair(), x)
        worst = float(np.max(np.linalg.norm(disp.points, axis=1)))
        c.expect(worst <= 1e-12, f"max displacement {worst:.3g}")
        plane = Box.cube(2, 10.0).uniform(1000, rng)
        verdict = near_equal(PointCloud(np.zeros((1, 2))), plane).verdict
        c.expect(verdict is False, "near_equal({0}, plane) returned true")


def test_criterion_02_rotation_line():
    with Criterion(2, "rotation + line displacements lie on span{(1,-1)}", 1.0) as c:
        rng = np.random.default_rng(0)
        disp = sample_displacement_range(cat.rotation_line_pair(),
                                         Box.cube(2, 10.0).uniform(1000, rng))
        u = np.array([1.0, -1.0]) / math.sqrt(2.0)
        off = disp.points - np.outer(disp.points @ u, u)
        dist = float(np.max(np.linalg.norm(off, axis=1)))
        c.expect(dist <= 1e-9, f"max distance to the line {dist:.3g}")
        dim = affine_hull(disp, 1e-6)[2]
        c.expect(dim == 1, f"affine hull dimension {dim}")


def test_criterion_03_two_disjoint_balls():
    with Criterion(3, "two disjoint balls: v = (-1,0) and boundary verdicts", 5.0) as c:
        pair = cat.two_balls_pair()
        oracle = cat.two_balls_v()
        c.expect(np.allclose(oracle, [-1.0, 0.0]), f"oracle {oracle}")
        est = estimate_displacement_vector(pair, max_iter=10_000)
        err = float(np.max(np.abs(est.v - oracle)))
        c.expect(err <= 1e-6, f"v estimate error {err:.3g}")
        for w, expected in (((-1.0, 0.0), SOLVED), ((-5.0, 0.0), SOLVED),
                            ((-3.0, 2.0), UNSOLVED)):
            verdict = solve_perturbed(pair, w, tol=1e-6, max_iter=100_000)
            c.expect(verdict.status == expected and verdict.iterations <= 100_000,
                     f"w={w}: {verdict.status} after {verdict.iterations} iterations")


def test_criterion_04_angle_identity():
    with Criterion(4, "angle identity <v_AB, v_BA>/norms = cos 2 theta", 5.0) as c:
        for theta in (0.0, math.pi / 6, math.pi / 4, math.pi / 3):
            v_ab = estimate_displacement_vector(cat.angle_pair(theta), max_iter=1000).v
            v_ba = estimate_displacement_vector(cat.angle_pair(theta, swap=True),
                                                max_iter=1000).v
            n_ab, n_ba = np.linalg.norm(v_ab), np.linalg.norm(v_ba)
            cosine = float(v_ab @ v_ba / (n_ab * n_ba))
            c.expect(abs(cosine - math.cos(2 * theta)) <= 1e-5,
                     f"theta={theta:.4f}: cosine {cosine:.8f}")
            c.expect(abs(n_ab - n_ba) <= 1e-6, f"theta={theta:.4f}: norm gap {n_ab - n_ba:.3g}")


def test_criterion_05_subspace_identity():
    with Criterion(5, "subspaces: ran(Id - T) = (U+V) & (U^perp+V^perp)", 2.0) as c:
        report = experiment_report("two_subspaces")
        dist = [ch.observed for ch in report.checks if "distance" in ch.description]
        ranks = [(ch.expected, ch.observed) for ch in report.checks if "rank" in ch.description]
        c.expect(len(dist) == 5 and max(dist) <= 1e-10, f"distances {dist}")
        c.expect(len(ranks) == 5 and all(e == o for e, o in ranks), f"ranks {ranks}")


def test_criterion_06_self_duality():
    with Criterion(6, "self-duality and T_(A,B) + T_(A,B^-1) = Id over the catalog", 5.0) as c:
        rng = np.random.default_rng(0)
        worst_dual = worst_sum = 0.0
        for entry in cat.catalog().values():
            pair = entry.pair
            x = Box.cube(pair.dim, 10.0).uniform(1000, rng)
            t = dr_map(pair, x)
            worst_dual = max(worst_dual, float(np.max(np.linalg.norm(
                t - dr_map(attouch_thera_dual(pair), x), axis=1))))
            flipped = dr_map(OperatorPair(pair.A, inverse(pair.B)), x)
            worst_sum = max(worst_sum, float(np.max(np.linalg.norm(t + flipped - x, axis=1))))
        c.expect(worst_dual <= 1e-10, f"dual gap {worst_dual:.3g}")
        c.expect(worst_sum <= 1e-10, f"complement identity gap {worst_sum:.3g}")


def test_criterion_07_main_theorem():
    with Criterion(7, "ran(Id - T) nearly equals D & R; full-domain case gives x/2", 10.0) as c:
        rng = np.random.default_rng(0)
        pair = cat.two_balls_pair(v=(1.0, 0.0))
        window = Box.cube(2, 5.0)
        disp = sample_displacement_range(pair, Box.cube(2, 25.0).uniform(10_000, rng))
        target = build_pair_sets(pair, 10_000, window).sample("DR", rng)
        rep = near_equal(disp, target, tol=0.05, n_directions=256, window=window)
        c.expect(rep.max_support_gap <= 0.05, f"support gap {rep.max_support_gap:.3g}")
        full = OperatorPair(normal_cone_ball([0.0, 0.0], 1.0), linear_operator(np.eye(2)))
        x = Box.cube(2, 10.0).uniform(10_000, rng)
        err = float(np.max(np.abs(sample_displacement_range(full, x).points - x / 2)))
        c.expect(err <= 1e-12, f"|(Id - T)x - x/2| = {err:.3g}")


def test_criterion_08_linear_transport():
    with Criterion(8, "linear transport into ran(A + B)", 10.0) as c:
        rng = np.random.default_rng(0)
        b = cat.MONOTONE_NONSYMMETRIC
        pair = OperatorPair(normal_cone_ball([0.0, 0.0], 1.0), linear_operator(b))
        w = sample_displacement_range(pair, Box.cube(2, 5.0).uniform(200, rng)).points
        y = w @ (np.eye(2) + b).T
        solved = sum(sum_range_membership(pair, yi, tol=1e-6, max_iter=20_000).status == SOLVED
                     for yi in y)
        c.expect(solved == 200, f"(i) {solved}/200 solved")
        report = experiment_report("linear_transport")
        sweep = [ch for ch in report.checks if ch.description.startswith("(iii) lambda=")]
        c.expect(len(sweep) == 6 and all(ch.passed for ch in sweep),
                 "(iii) " + ", ".join(f"{ch.description}: {ch.observed}" for ch in sweep))


def test_criterion_09_l2_truncation():
    with Criterion(9, "l2 truncation: closed-form preimage and norm^2 >= 0.9 N", 5.0) as c:
        for n_half in (10, 100, 1000):
            u, _, alpha = l2_preimage(n_half, 2.0)
            closed = np.empty_like(u)
            closed[0::2] = -1.0
            closed[1::2] = alpha
            err = float(np.max(np.abs(u - closed)))
            c.expect(err <= 1e-8, f"N={n_half}: preimage error {err:.3g}")
            c.expect(u @ u >= 0.9 * n_half, f"N={n_half}: norm^2 {u @ u:.4g}")


def test_criterion_10_brezis_haraux():
    with Criterion(10, "Brezis-Haraux strict inclusion and prox-sampled ran A", 10.0) as c:
        report = experiment_report("brezis_haraux_gap")
        for ch in report.checks:
            c.expect(ch.passed, f"{ch.description}: expected {ch.expected}, got {ch.observed}")
        by_name = {ch.description: ch for ch in report.checks}
        c.expect(by_name["(0, 1.5) in ran A + ran A"].observed is True, "sum predicate")
        c.expect(by_name["(0, 1.5) in ran(A + A)"].observed is False, "double predicate")
        inside = [ch for ch in report.checks if ch.description.startswith("prox samples of ran A")]
        c.expect(len(inside) == 1 and inside[0].observed == 1000, "prox sample count")


def test_criterion_11_property_suites():
    with Criterion(11, "firm nonexpansiveness, inverse identity, Minty pairs, monotone traces",
                   10.0) as c:
        props = catalog_properties(samples=1000, half_width=10.0, seed=0)
        c.expect(props["fne"] <= 1e-10, f"fne violation {props['fne']:.3g}")
        c.expect(props["inverse"] <= 1e-12, f"J_A + J_(A^-1) - Id = {props['inverse']:.3g}")
        c.expect(props["minty_failures"] == 0, f"{props['minty_failures']} Minty failures")
        c.expect(props["trace_increase"] <= 1e-12,
                 f"displacement norm increase {props['trace_increase']:.3g}")
