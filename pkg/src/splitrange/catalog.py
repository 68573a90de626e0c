"""Named operator pairs used by the experiments, property tests and the CLI."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .operators import (fne_operator, linear_operator, normal_cone_affine, normal_cone_ball,
                        prox_operator, shift_outer, zero_operator)
from .splitting import OperatorPair

ROTATION = np.array([[0.0, -1.0], [1.0, 0.0]])
MONOTONE_NONSYMMETRIC = np.array([[1.0, 1.0], [-1.0, 1.0]])


@dataclass(frozen=True)
class CatalogPair:
    """A pair together with what is known about it in closed form.

    `v` is the infimal displacement vector when it is known exactly.
    """

    name: str
    pair: OperatorPair
    three_star: bool
    v: Optional[np.ndarray] = None
    full_domain: bool = False


def rotation_pair():
    """A the quarter turn and B = -A; their DR operator is the identity."""
    return OperatorPair(linear_operator(ROTATION), linear_operator(-ROTATION))


def rotation_line_pair():
    """A the quarter turn and B the normal cone of the horizontal axis."""
    return OperatorPair(linear_operator(ROTATION), normal_cone_affine([0.0, 0.0], [[1.0, 0.0]]))


def two_balls_pair(u=(0.0, 0.0), r=1.0, v=(3.0, 0.0), s=1.0):
    """Normal cones of ``B(u, r)`` and ``B(v, s)``."""
    return OperatorPair(normal_cone_ball(u, r), normal_cone_ball(v, s))


def two_balls_v(u=(0.0, 0.0), r=1.0, v=(3.0, 0.0), s=1.0):
    """Projection of the origin onto ``B(u - v, r + s)``."""
    c = np.asarray(u, float) - np.asarray(v, float)
    n = np.linalg.norm(c)
    return c * max(n - (r + s), 0.0) / n if n > 0 else np.zeros_like(c)


def angle_pair(theta, swap=False):
    """``A = N_{S + a}`` and ``B = N_S + b`` in R^4 with S = span(e1, e2).

    ``a = sin(theta) e3`` lies in the complement of S and ``b = cos(theta) e1``
    lies in S, so ``v_(A,B) = a + b`` and ``v_(B,A) = b - a``.
    """
    e = np.eye(4)
    s_basis = e[:2]
    a = np.sin(theta) * e[2]
    b = np.cos(theta) * e[0]
    op_a = normal_cone_affine(a, s_basis)
    op_b = shift_outer(normal_cone_affine(np.zeros(4), s_basis), -b)
    return OperatorPair(op_b, op_a) if swap else OperatorPair(op_a, op_b)


def random_subspace(rng, dim, k):
    q, _ = np.linalg.qr(rng.normal(size=(dim, k)))
    return q.T


def subspace_pair(seed=0, dim=6, k_u=2, k_v=3):
    """Normal cones of two random linear subspaces; returns the pair and the bases."""
    rng = np.random.default_rng(seed)
    u = random_subspace(rng, dim, k_u)
    v = random_subspace(rng, dim, k_v)
    zero = np.zeros(dim)
    return OperatorPair(normal_cone_affine(zero, u), normal_cone_affine(zero, v)), u, v


def constant_pair(dim=3, b=(1.0, 2.0, -1.0), v_basis=((1.0, 0.0, 0.0), (0.0, 1.0, 0.0))):
    """``A = N_V`` and the constant map ``B = b``; then ``v = P_V b``."""
    b = np.asarray(b, float)
    zero = np.zeros(dim)
    return OperatorPair(normal_cone_affine(zero, v_basis), shift_outer(zero_operator(dim), -b))


def catalog():
    """All catalog pairs, keyed by name."""
    e1 = [[1.0, 0.0]]
    half = 0.5 * np.eye(2)
    line_proj = np.array([[0.5, 0.5], [0.5, 0.5]])
    constant = constant_pair()
    vb = np.array([[1.0, 0.0, 0.0], [0.0, 1.0, 0.0]])
    entries = [
        CatalogPair("rotation", rotation_pair(), False, np.zeros(2), True),
        CatalogPair("rotation-line", rotation_line_pair(), False, np.zeros(2)),
        CatalogPair("disjoint-balls", two_balls_pair(), True, two_balls_v()),
        CatalogPair("overlapping-balls", two_balls_pair(v=(1.0, 0.0)), True, np.zeros(2)),
        CatalogPair("ball-line",
                    OperatorPair(normal_cone_ball([0.0, 0.0], 1.0),
                                 normal_cone_affine([0.0, 2.0], e1)),
                    True, np.array([0.0, -1.0])),
        CatalogPair("ball-monotone-linear",
                    OperatorPair(normal_cone_ball([0.0, 0.0], 1.0),
                                 linear_operator(MONOTONE_NONSYMMETRIC)),
                    True, np.zeros(2)),
        CatalogPair("ball-identity",
                    OperatorPair(normal_cone_ball([0.0, 0.0], 1.0), linear_operator(np.eye(2))),
                    True, np.zeros(2)),
        CatalogPair("ball-prox-half-square",
                    OperatorPair(normal_cone_ball([0.0, 0.0], 1.0), prox_operator("half-square", 2)),
                    True, np.zeros(2)),
        CatalogPair("fne-half-line",
                    OperatorPair(fne_operator(half), fne_operator(line_proj)), True, np.zeros(2),
                    True),
        CatalogPair("angle", angle_pair(np.pi / 6), True,
                    np.array([np.cos(np.pi / 6), 0.0, np.sin(np.pi / 6), 0.0])),
        CatalogPair("subspaces", subspace_pair()[0], True, np.zeros(6)),
        CatalogPair("subspace-constant", constant, True, vb.T @ vb @ np.array([1.0, 2.0, -1.0]),
                    True),
    ]
    return {c.name: c for c in entries}
