"""Maximally monotone operators represented by their resolvents.

An :class:`OperatorDescriptor` never evaluates the (possibly multivalued)
operator A itself.  It carries the resolvent ``J_A = (Id + A)^{-1}``,
which is total and single valued, plus exact or sampled descriptors of
``dom A`` and ``ran A``.  Every transform used by the splitting layer
(inverse, the reflection ``A^vee = (-Id) A (-Id)``, inner and outer
shifts) is a resolvent identity and is implemented as such.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Any, Callable, Optional

import numpy as np
from scipy.linalg import lu_factor, lu_solve, orth

from .cloud import as_points, as_vector
from .errors import DimensionMismatchError, NonMonotoneError, SpecError
from .functions import get_function, numeric_prox
from .sets import Cylinder

RESOLVENT_TOL = 1e-9
MONOTONE_TOL = 1e-10


@dataclass(frozen=True)
class Flags:
    """Structural facts about an operator.

    `is_3star` records rectangularity: ``inf <x - z, v - w> > -inf`` over
    the graph for every x in dom A and v in ran A.
    """

    is_3star: bool = False
    is_linear: bool = False
    is_subdifferential: bool = False

    def to_dict(self):
        return {"is_3star": self.is_3star, "is_linear": self.is_linear,
                "is_subdifferential": self.is_subdifferential}


@dataclass(frozen=True)
class OperatorDescriptor:
    """A maximally monotone operator on R^dim.

    Attributes
    ----------
    dim : int
    resolvent_map : callable
        Maps an ``(n, dim)`` array to the ``(n, dim)`` array of resolvent values.
    domain, range_ : SetDescriptor
    flags : Flags
    provenance : tuple
        Expression tree ``(kind, params, *children)``.
    matrix : ndarray, optional
        The matrix of A when A is a single-valued linear map.
    resolvent_matrix : ndarray, optional
        The matrix of J_A when J_A is linear.
    """

    dim: int
    resolvent_map: Callable[[np.ndarray], np.ndarray] = field(repr=False)
    domain: Any = field(repr=False)
    range_: Any = field(repr=False)
    flags: Flags = Flags()
    provenance: tuple = ()
    matrix: Optional[np.ndarray] = field(default=None, repr=False)
    resolvent_matrix: Optional[np.ndarray] = field(default=None, repr=False)

    def __call__(self, x):
        return resolvent(self, x)

    @property
    def kind(self):
        return self.provenance[0] if self.provenance else "custom"

    def describe(self):
        """Provenance as nested dictionaries (JSON friendly)."""
        return _tree_to_dict(self.provenance)


def _tree_to_dict(node):
    if not node:
        return {}
    kind, params, *children = node
    out = {"kind": kind}
    out.update(params)
    if children:
        out["operand"] = _tree_to_dict(children[0])
    return out


def _apply(op, x):
    single = np.ndim(x) == 1
    pts = as_points(x, op.dim)
    out = op.resolvent_map(pts)
    return out[0] if single else out


def _check_dim(op, x):
    d = np.shape(x)[-1] if np.ndim(x) else None
    if d != op.dim:
        raise DimensionMismatchError(f"vector of dimension {d} for an operator on R^{op.dim}")


def resolvent(op, x):
    """``J_A x``; accepts one vector or an ``(n, dim)`` batch."""
    _check_dim(op, x)
    return _apply(op, x)


def reflected_resolvent(op, x):
    """``R_A x = 2 J_A x - x``."""
    _check_dim(op, x)
    x = np.asarray(x, dtype=float)
    return 2.0 * _apply(op, x) - x


def inverse(op):
    """The inverse operator, via ``J_{A^{-1}} = Id - J_A``."""
    j = op.resolvent_map
    mat = None
    if op.matrix is not None and np.linalg.matrix_rank(op.matrix) == op.dim:
        mat = np.linalg.inv(op.matrix)
    rmat = None if op.resolvent_matrix is None else np.eye(op.dim) - op.resolvent_matrix
    return OperatorDescriptor(
        op.dim, lambda x: x - j(x), op.range_, op.domain, op.flags,
        ("inverse", {}, op.provenance), mat, rmat)


def vee(op):
    """``A^vee = (-Id) A (-Id)``, with resolvent ``x -> -J_A(-x)``."""
    j = op.resolvent_map
    return OperatorDescriptor(
        op.dim, lambda x: -j(-x), op.domain.negate(), op.range_.negate(), op.flags,
        ("vee", {}, op.provenance), op.matrix, op.resolvent_matrix)


def _shifted_flags(op, w):
    moved = bool(np.any(w != 0))
    return replace(op.flags, is_linear=op.flags.is_linear and not moved), moved


def shift_inner(op, w):
    """``x -> A(x - w)``; resolvent ``w + J_A(x - w)``, domain translated by w."""
    w = as_vector(w, op.dim, name="w")
    j = op.resolvent_map
    flags, moved = _shifted_flags(op, w)
    return OperatorDescriptor(
        op.dim, lambda x: w + j(x - w), op.domain.translate(w), op.range_, flags,
        ("shift-inner", {"shift": w.tolist()}, op.provenance),
        None if moved else op.matrix, None if moved else op.resolvent_matrix)


def shift_outer(op, w):
    """``A - w``; resolvent ``x -> J_A(x + w)``, range translated by -w."""
    w = as_vector(w, op.dim, name="w")
    j = op.resolvent_map
    flags, moved = _shifted_flags(op, w)
    return OperatorDescriptor(
        op.dim, lambda x: j(x + w), op.domain, op.range_.translate(-w), flags,
        ("shift-outer", {"shift": w.tolist()}, op.provenance),
        None if moved else op.matrix, None if moved else op.resolvent_matrix)


def is_3star_bilinear(k, tol=1e-10):
    """3* test for a linear graph whose pairing form is ``<x, K y>``.

    The form is bounded below on one side exactly when the kernel of its
    symmetric part is contained in the kernels of K and K^T, i.e. when
    ``rank(K + K^T) == rank([K, K^T])``.
    """
    k = np.asarray(k, dtype=float)
    scale = max(1.0, float(np.max(np.abs(k))) if k.size else 1.0)
    r_sym = np.linalg.matrix_rank(k + k.T, tol=tol * scale)
    r_all = np.linalg.matrix_rank(np.hstack([k, k.T]), tol=tol * scale)
    return bool(r_sym == r_all)


def _col_space(m, dim):
    basis = orth(m, rcond=1e-10)
    return Cylinder.subspace(basis.T if basis.size else None, dim)


# builtin constructors -------------------------------------------------------

def normal_cone_ball(center, radius):
    """``N_C`` for the closed ball C; the resolvent is the projection onto C."""
    c = as_vector(center, name="center")
    if not np.isfinite(radius) or radius <= 0:
        raise SpecError("radius must be a positive number", field="radius")
    ball = Cylinder.ball(c, float(radius))
    dim = c.shape[0]
    return OperatorDescriptor(
        dim, ball.project, ball, Cylinder.whole(dim),
        Flags(is_3star=True, is_subdifferential=True),
        ("ball", {"center": c.tolist(), "radius": float(radius)}))


def normal_cone_affine(base_point, basis):
    """``N_V`` for the affine subspace ``V = base_point + span(basis)``."""
    v = Cylinder.affine(as_vector(base_point, name="base-point"), basis)
    dim = v.dim
    parallel = v.basis
    perp = Cylinder.subspace(v.complement if v.rank < dim else None, dim)
    proj = parallel.T @ parallel
    linear = bool(np.allclose(v.center, 0.0, atol=1e-12))
    return OperatorDescriptor(
        dim, v.project, v, perp,
        Flags(is_3star=True, is_linear=linear, is_subdifferential=True),
        ("affine-subspace", {"base-point": v.center.tolist(), "basis": parallel.tolist()}),
        resolvent_matrix=proj if linear else None)


def linear_operator(matrix, tol=MONOTONE_TOL):
    """A single-valued linear monotone map; ``J_A`` solves ``(Id + M) y = x``."""
    m = np.atleast_2d(np.asarray(matrix, dtype=float))
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise SpecError("matrix must be square", field="matrix")
    if not np.all(np.isfinite(m)):
        raise SpecError("matrix entries must be finite", field="matrix")
    dim = m.shape[0]
    lam = float(np.min(np.linalg.eigvalsh(0.5 * (m + m.T))))
    if lam < -tol:
        raise NonMonotoneError(
            f"symmetric part has eigenvalue {lam:.3g} < 0; the map is not monotone",
            field="matrix")
    eye = np.eye(dim)
    lu = lu_factor(eye + m)
    return OperatorDescriptor(
        dim, lambda x: lu_solve(lu, x.T).T, Cylinder.whole(dim), _col_space(m, dim),
        Flags(is_3star=is_3star_bilinear(m), is_linear=True,
              is_subdifferential=bool(np.allclose(m, m.T, atol=1e-12))),
        ("linear", {"matrix": m.tolist()}), m.copy(), np.linalg.inv(eye + m))


def zero_operator(dim):
    return linear_operator(np.zeros((dim, dim)))


def identity_operator(dim):
    return linear_operator(np.eye(dim))


def prox_operator(function, dim=None):
    """``A = subdiff f`` for a builtin f; ``J_A = prox_f``.

    The closed-form prox is used when known, otherwise :func:`numeric_prox`.
    """
    f = get_function(function) if isinstance(function, str) else function
    dim = f.resolve_dim(dim)
    if f.prox is not None:
        fn = f.prox
    else:
        fn = lambda x: numeric_prox(f, x)  # noqa: E731
    return OperatorDescriptor(
        dim, fn, f.subdiff_domain(dim), f.subdiff_range(dim),
        Flags(is_3star=True, is_subdifferential=True),
        ("prox", {"function": f.name, "dim": dim}))


_FNE_MAPS = {"identity": 1.0, "id": 1.0, "zero": 0.0, "half": 0.5}


def fne_operator(t_matrix, is_3star=None):
    """The operator ``A = T^{-1} - Id`` whose resolvent is the linear fne map T.

    ``dom A = ran T`` and ``ran A = ran(Id - T)``.  The 3* flag defaults to
    the bilinear test on ``T^T (Id - T)``, the pairing form of the graph
    ``{(Tx, x - Tx)}``.
    """
    t = np.atleast_2d(np.asarray(t_matrix, dtype=float))
    if t.ndim != 2 or t.shape[0] != t.shape[1]:
        raise SpecError("fne matrix must be square", field="matrix")
    dim = t.shape[0]
    eye = np.eye(dim)
    k = t.T @ (eye - t)
    if np.min(np.linalg.eigvalsh(0.5 * (k + k.T))) < -MONOTONE_TOL:
        raise NonMonotoneError("map is not firmly nonexpansive", field="matrix")
    mat = None
    if np.linalg.matrix_rank(t) == dim:
        mat = np.linalg.inv(t) - eye
    star = is_3star_bilinear(k) if is_3star is None else bool(is_3star)
    return OperatorDescriptor(
        dim, lambda x: x @ t.T, _col_space(t, dim), _col_space(eye - t, dim),
        Flags(is_3star=star, is_linear=True,
              is_subdifferential=bool(np.allclose(t, t.T, atol=1e-12))),
        ("fne", {"matrix": t.tolist()}), mat, t.copy())


# JSON specs ----------------------------------------------------------------

def _get(spec, *names, required=True, default=None):
    for n in names:
        if n in spec:
            return spec[n]
    if required:
        raise SpecError(f"missing field {names[0]!r}", field=names[0])
    return default


def _vector_field(spec, *names, dim=None):
    raw = _get(spec, *names)
    try:
        return as_vector(raw, dim, name=names[0])
    except (TypeError, ValueError) as exc:
        raise SpecError(str(exc), field=names[0]) from None


def _matrix_field(spec, name):
    raw = _get(spec, name)
    try:
        m = np.asarray(raw, dtype=float)
    except (TypeError, ValueError):
        raise SpecError("matrix must be a list of numeric rows", field=name) from None
    if m.ndim != 2:
        raise SpecError("matrix must be a list of rows", field=name)
    return m


def make_operator(spec):
    """Build an operator from a JSON-style mapping.

    Kinds: ``ball`` (center, radius), ``affine-subspace`` (base-point,
    basis), ``linear`` (matrix), ``prox`` (function, dim), ``fne`` (map
    name or matrix, optional dim and is_3star), and the combinators
    ``inverse``, ``vee``, ``shift-inner``, ``shift-outer`` (operand, plus
    shift for the last two).
    """
    if isinstance(spec, OperatorDescriptor):
        return spec
    if not isinstance(spec, dict):
        raise SpecError("operator spec must be an object", field="kind")
    kind = _get(spec, "kind")
    if kind == "ball":
        radius = _get(spec, "radius")
        if not isinstance(radius, (int, float)) or isinstance(radius, bool):
            raise SpecError("radius must be a number", field="radius")
        return normal_cone_ball(_vector_field(spec, "center"), float(radius))
    if kind == "affine-subspace":
        base = _vector_field(spec, "base-point", "base_point")
        basis = _get(spec, "basis", required=False, default=[])
        try:
            return normal_cone_affine(base, basis)
        except (ValueError, DimensionMismatchError) as exc:
            raise SpecError(str(exc), field="basis") from None
    if kind == "linear":
        return linear_operator(_matrix_field(spec, "matrix"))
    if kind == "prox":
        name = _get(spec, "function")
        dim = _get(spec, "dim", required=False)
        return prox_operator(name, dim)
    if kind == "fne":
        star = _get(spec, "is_3star", required=False)
        if "matrix" in spec:
            return fne_operator(_matrix_field(spec, "matrix"), star)
        name = _get(spec, "map")
        if name not in _FNE_MAPS:
            raise SpecError(f"unknown fne map {name!r}; use a matrix or one of "
                            f"{sorted(_FNE_MAPS)}", field="map")
        dim = _get(spec, "dim")
        if not isinstance(dim, int) or dim < 1:
            raise SpecError("dim must be a positive integer", field="dim")
        return fne_operator(_FNE_MAPS[name] * np.eye(dim), star)
    if kind in ("inverse", "vee", "shift-inner", "shift-outer"):
        inner = make_operator(_get(spec, "operand"))
        if kind == "inverse":
            return inverse(inner)
        if kind == "vee":
            return vee(inner)
        w = _vector_field(spec, "shift", dim=None)
        if w.shape[0] != inner.dim:
            raise SpecError(f"shift has dimension {w.shape[0]}, operand has {inner.dim}",
                            field="shift")
        return shift_inner(inner, w) if kind == "shift-inner" else shift_outer(inner, w)
    raise SpecError(f"unknown operator kind {kind!r}", field="kind")


# numerical certificates -----------------------------------------------------

def fne_violation(mapping, x, y):
    """Largest excess in ``||Tx-Ty||^2 + ||(x-Tx)-(y-Ty)||^2 <= ||x-y||^2`` over rows."""
    x, y = as_points(x), as_points(y)
    tx, ty = mapping(x), mapping(y)
    d = x - y
    dt = tx - ty
    lhs = np.sum(dt * dt, axis=1) + np.sum((d - dt) ** 2, axis=1)
    return float(np.max(lhs - np.sum(d * d, axis=1)))


def monotonicity_violation(op, x, y):
    """Largest negative part of ``<J x - J y, (x - J x) - (y - J y)>`` over rows."""
    jx, jy = resolvent(op, as_points(x)), resolvent(op, as_points(y))
    inner = np.sum((jx - jy) * ((x - jx) - (y - jy)), axis=1)
    return float(max(0.0, -np.min(inner)))
