"""Hyperboloid model of real hyperbolic space H^n inside Minkowski space R^{n,1}.

Points satisfy <x, x> = -1 with x0 > 0, where <x, y> = -x0 y0 + sum xi yi.
Ideal boundary points are future null vectors b normalized by <b, p> = -1 at
the origin p = (1, 0, ..., 0), which fixes the Busemann gauge B_b(p) = 0.

The array-level helpers (``mink``, ``busemann_arrays`` ...) take raw numpy
arrays and broadcast over leading axes; the small value classes wrap them for
validated public use.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .symform import SymBilinearForm

POINT_TOL = 1e-10
TANGENT_TOL = 1e-9
LORENTZ_TOL = 1e-9


def mink(x, y):
    """Minkowski pairing over the last axis."""
    x = np.asarray(x)
    y = np.asarray(y)
    return np.sum(x[..., 1:] * y[..., 1:], axis=-1) - x[..., 0] * y[..., 0]


def minkowski_form(dim: int) -> np.ndarray:
    J = np.eye(dim)
    J[0, 0] = -1.0
    return J


def origin(n: int) -> np.ndarray:
    p = np.zeros(n + 1)
    p[0] = 1.0
    return p


def reproject(x: np.ndarray) -> np.ndarray:
    return x / np.sqrt(-mink(x, x))[..., None]


def project_tangent(x: np.ndarray, v: np.ndarray) -> np.ndarray:
    """Orthogonal projection of ambient vectors v onto T_x H^n."""
    return v + mink(v, x)[..., None] * x


def from_ball(y) -> np.ndarray:
    """Map a point of the open unit ball (Poincare model) to the hyperboloid."""
    y = np.asarray(y, dtype=float)
    s = np.sum(y * y, axis=-1)
    if np.any(s >= 1):
        raise ValueError("point is not inside the unit ball")
    x0 = (1 + s) / (1 - s)
    return np.concatenate([x0[..., None], 2 * y / (1 - s)[..., None]], axis=-1)


def point_from_polar(direction, r: float) -> np.ndarray:
    """exp_p(r * direction) for a unit direction in R^n."""
    u = np.asarray(direction, dtype=float)
    u = u / np.linalg.norm(u)
    return np.concatenate([[np.cosh(r)], np.sinh(r) * u])


def boundary_from_direction(direction) -> np.ndarray:
    """Normalized null vector (1, xi) for a unit direction xi seen from p."""
    u = np.asarray(direction, dtype=float)
    u = u / np.linalg.norm(u, axis=-1, keepdims=True)
    return np.concatenate([np.ones(u.shape[:-1] + (1,)), u], axis=-1)


def tangent_basis(x: np.ndarray) -> np.ndarray:
    """Orthonormal basis of T_x as the columns 1..n of the boost taking p to x.

    Returned with shape (n, n+1): one basis vector per row.
    """
    x = np.asarray(x, dtype=float)
    x0, xs = x[0], x[1:]
    n = len(xs)
    rows = np.empty((n, n + 1))
    rows[:, 0] = xs
    rows[:, 1:] = np.eye(n) + np.outer(xs, xs) / (1.0 + x0)
    return rows


def boost_to(x: np.ndarray) -> np.ndarray:
    """Lorentz boost matrix sending the origin to x."""
    basis = tangent_basis(x)
    return np.column_stack([x, basis.T])


# --- array-level Busemann calculus --------------------------------------

def busemann_arrays(x: np.ndarray, b: np.ndarray):
    """Busemann values and unit gradients of atoms ``b`` (m, n+1) at x.

    Returns (B, grad) with B of shape (m,) and grad of shape (m, n+1)."""
    a = -mink(b, x)
    if np.any(a <= 0):
        raise FloatingPointError("non-positive <x, b>: corrupted point or boundary data")
    grad = x - b / a[..., None]
    return np.log(a), grad


# --- validated value types -------------------------------------------------

@dataclass(frozen=True)
class MinkPoint:
    coords: np.ndarray

    def __post_init__(self):
        c = np.array(self.coords, dtype=float)
        if c.ndim != 1 or len(c) < 2:
            raise ValueError("point needs n+1 >= 2 coordinates")
        if abs(mink(c, c) + 1) > POINT_TOL * max(1.0, c[0] ** 2) or c[0] <= 0:
            raise ValueError("not a point of the upper hyperboloid sheet")
        c.setflags(write=False)
        object.__setattr__(self, "coords", c)

    @property
    def n(self) -> int:
        return len(self.coords) - 1

    @classmethod
    def origin(cls, n: int) -> "MinkPoint":
        return cls(origin(n))


@dataclass(frozen=True)
class TangentVec:
    base: MinkPoint
    coords: np.ndarray

    def __post_init__(self):
        c = np.array(self.coords, dtype=float)
        scale = max(1.0, float(np.abs(self.base.coords).max()))
        if abs(mink(c, self.base.coords)) > TANGENT_TOL * scale * max(1.0, np.abs(c).max()):
            raise ValueError("vector is not tangent at its base point")
        c.setflags(write=False)
        object.__setattr__(self, "coords", c)

    @property
    def norm(self) -> float:
        return float(np.sqrt(max(mink(self.coords, self.coords), 0.0)))


@dataclass(frozen=True)
class BoundaryPoint:
    coords: np.ndarray

    def __post_init__(self):
        c = np.array(self.coords, dtype=float)
        if c[0] <= 0:
            raise ValueError("boundary vector must be future pointing")
        c = c / c[0]
        if abs(mink(c, c)) > POINT_TOL:
            raise ValueError("boundary vector is not null")
        c.setflags(write=False)
        object.__setattr__(self, "coords", c)

    @property
    def direction(self) -> np.ndarray:
        return self.coords[1:].copy()

    @classmethod
    def from_direction(cls, direction) -> "BoundaryPoint":
        return cls(boundary_from_direction(direction))


@dataclass(frozen=True)
class Isometry:
    mat: np.ndarray

    def __post_init__(self):
        m = np.array(self.mat, dtype=float)
        if m.ndim != 2 or m.shape[0] != m.shape[1]:
            raise ValueError("isometry matrix must be square")
        J = minkowski_form(m.shape[0])
        scale = max(1.0, float(np.abs(m).max()) ** 2)
        if not np.allclose(m.T @ J @ m, J, atol=LORENTZ_TOL * scale, rtol=0):
            raise ValueError("matrix does not preserve the Minkowski form")
        if m[0, 0] <= 0:
            raise ValueError("matrix is not orthochronous")
        m.setflags(write=False)
        object.__setattr__(self, "mat", m)

    def __matmul__(self, other: "Isometry") -> "Isometry":
        return Isometry(self.mat @ other.mat)

    def inverse(self) -> "Isometry":
        J = minkowski_form(self.mat.shape[0])
        return Isometry(J @ self.mat.T @ J)

    @classmethod
    def identity(cls, n: int) -> "Isometry":
        return cls(np.eye(n + 1))


# --- operations -------------------------------------------------------------

def distance(x: MinkPoint, y: MinkPoint) -> float:
    c = -mink(x.coords, y.coords)
    if c < 2.0:
        # arccosh is ill-conditioned near 1; <x-y, x-y> = 4 sinh^2(d/2)
        diff = x.coords - y.coords
        return float(2 * np.arcsinh(0.5 * np.sqrt(max(mink(diff, diff), 0.0))))
    return float(np.arccosh(c))


def busemann(x: MinkPoint, b: BoundaryPoint) -> float:
    """B_b(x, p) = log(-<x, b>), zero at the origin."""
    B, _ = busemann_arrays(x.coords, b.coords[None, :])
    return float(B[0])


def busemann_gradient(x: MinkPoint, b: BoundaryPoint) -> TangentVec:
    _, g = busemann_arrays(x.coords, b.coords[None, :])
    return TangentVec(x, g[0])


def busemann_hessian(x: MinkPoint, b: BoundaryPoint, basis=None) -> SymBilinearForm:
    """g - dB (x) dB on T_x, written in an orthonormal tangent basis (rows of ``basis``)."""
    E = tangent_basis(x.coords) if basis is None else np.asarray(basis, dtype=float)
    _, g = busemann_arrays(x.coords, b.coords[None, :])
    c = mink(E, g[0])
    gram = mink(E[:, None, :], E[None, :, :])
    return SymBilinearForm(gram - np.outer(c, c))


def exp_map(x: MinkPoint, v: TangentVec, t: float) -> MinkPoint:
    if abs(v.norm - 1.0) > TANGENT_TOL:
        raise ValueError("direction must be a unit tangent vector")
    y = np.cosh(t) * x.coords + np.sinh(t) * v.coords
    return MinkPoint(reproject(y))


def transport_along(x: MinkPoint, v: TangentVec, t: float) -> TangentVec:
    """Velocity at time t of the unit-speed geodesic t -> exp_map(x, v, t)."""
    y = exp_map(x, v, t)
    w = np.sinh(t) * x.coords + np.cosh(t) * v.coords
    return TangentVec(y, project_tangent(y.coords, w))


def boundary_endpoint(x: MinkPoint, v: TangentVec) -> BoundaryPoint:
    if abs(v.norm - 1.0) > TANGENT_TOL:
        raise ValueError("direction must be a unit tangent vector")
    return BoundaryPoint(x.coords + v.coords)


def apply_isometry(g: Isometry, obj):
    if not isinstance(g, Isometry):
        g = Isometry(g)
    if isinstance(obj, MinkPoint):
        return MinkPoint(reproject(g.mat @ obj.coords))
    if isinstance(obj, BoundaryPoint):
        return BoundaryPoint(g.mat @ obj.coords)
    if isinstance(obj, TangentVec):
        base = apply_isometry(g, obj.base)
        return TangentVec(base, project_tangent(base.coords, g.mat @ obj.coords))
    raise TypeError(f"cannot apply an isometry to {type(obj).__name__}")


def translation(x, v, t: float) -> Isometry:
    """Hyperbolic isometry translating by t along the geodesic through x with
    unit direction v; the identity on the Minkowski complement of span(x, v)."""
    x = np.asarray(getattr(x, "coords", x), dtype=float)
    v = np.asarray(getattr(v, "coords", v), dtype=float)
    J = minkowski_form(len(x))
    xJ = x @ J
    vJ = v @ J
    m = (np.eye(len(x))
         + (np.cosh(t) - 1) * (-np.outer(x, xJ) + np.outer(v, vJ))
         + np.sinh(t) * (np.outer(x, vJ) - np.outer(v, xJ)))
    return Isometry(m)


def rotation(R) -> Isometry:
    """Isometry fixing the origin, acting on R^n by the orthogonal matrix R."""
    R = np.asarray(R, dtype=float)
    m = np.eye(R.shape[0] + 1)
    m[1:, 1:] = R
    return Isometry(m)


def random_isometry(n: int, rng: np.random.Generator, max_shift: float = 2.0) -> Isometry:
    q, r = np.linalg.qr(rng.standard_normal((n, n)))
    q = q * np.sign(np.diag(r))
    u = rng.standard_normal(n)
    shift = translation(origin(n), np.concatenate([[0.0], u / np.linalg.norm(u)]),
                        rng.uniform(0, max_shift))
    return shift @ rotation(q)


def random_point(n: int, rng: np.random.Generator, max_radius: float = 2.0) -> MinkPoint:
    u = rng.standard_normal(n)
    return MinkPoint(point_from_polar(u, rng.uniform(0, max_radius)))


def random_unit_tangent(x: MinkPoint, rng: np.random.Generator) -> TangentVec:
    E = tangent_basis(x.coords)
    c = rng.standard_normal(len(E))
    return TangentVec(x, (c / np.linalg.norm(c)) @ E)


def random_boundary(n: int, rng: np.random.Generator) -> BoundaryPoint:
    return BoundaryPoint.from_direction(rng.standard_normal(n))
