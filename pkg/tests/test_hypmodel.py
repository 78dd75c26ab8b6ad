import numpy as np
import pytest
from hypothesis import given, strategies as st

from critflow.hypmodel import (
    BoundaryPoint,
    Isometry,
    MinkPoint,
    TangentVec,
    apply_isometry,
    boundary_endpoint,
    busemann,
    busemann_gradient,
    busemann_hessian,
    distance,
    exp_map,
    from_ball,
    mink,
    origin,
    point_from_polar,
    random_boundary,
    random_isometry,
    random_point,
    random_unit_tangent,
    rotation,
    tangent_basis,
    translation,
    transport_along,
)
from critflow.symform import eigenvalues_ascending

seeds = st.integers(0, 2 ** 32 - 1)
dims = st.integers(2, 5)


def geodesic(x, e, t):
    return MinkPoint(np.cosh(t) * x.coords + np.sinh(t) * e)


def test_point_validation():
    with pytest.raises(ValueError):
        MinkPoint([1.0, 1.0])
    with pytest.raises(ValueError):
        MinkPoint(-origin(2))
    with pytest.raises(ValueError):
        TangentVec(MinkPoint.origin(2), [1.0, 0.0, 0.0])
    with pytest.raises(ValueError):
        BoundaryPoint([1.0, 0.5, 0.0])
    with pytest.raises(ValueError):
        Isometry(np.diag([1.0, 2.0, 1.0]))
    with pytest.raises(ValueError):
        Isometry(-np.eye(3))


def test_distance_examples(rng):
    x = random_point(3, rng)
    assert distance(x, x) == 0
    p = MinkPoint.origin(3)
    v = TangentVec(p, [0, 0, 1, 0])
    assert distance(p, exp_map(p, v, 2.7)) == pytest.approx(2.7, abs=1e-10)
    y = random_point(3, rng)
    assert distance(x, y) == distance(y, x)


@given(dims, seeds)
def test_triangle_inequality_and_isometry_invariance(n, seed):
    rng = np.random.default_rng(seed)
    x, y, z = (random_point(n, rng) for _ in range(3))
    assert distance(x, z) <= distance(x, y) + distance(y, z) + 1e-9
    g = random_isometry(n, rng)
    assert distance(apply_isometry(g, x), apply_isometry(g, y)) == pytest.approx(distance(x, y), abs=1e-9)
    gx = apply_isometry(g, x).coords
    assert abs(mink(gx, gx) + 1) < 1e-9


def test_busemann_examples():
    p = MinkPoint.origin(3)
    b = BoundaryPoint.from_direction([0, 1, 0])
    assert busemann(p, b) == 0
    for t in (0.5, 2.0, 7.0):
        assert busemann(MinkPoint(point_from_polar([0, 1, 0], t)), b) == pytest.approx(-t, abs=1e-9)
        assert busemann(MinkPoint(point_from_polar([0, -1, 0], t)), b) == pytest.approx(t, abs=1e-9)


def test_busemann_gradient_at_origin():
    p = MinkPoint.origin(2)
    u = np.array([0.6, 0.8])
    g = busemann_gradient(p, BoundaryPoint.from_direction(u))
    assert np.allclose(g.coords, np.concatenate([[0], -u]))


@given(dims, seeds)
def test_busemann_gradient_and_hessian_finite_differences(n, seed):
    rng = np.random.default_rng(seed)
    x = random_point(n, rng)
    b = random_boundary(n, rng)
    g = busemann_gradient(x, b)
    assert g.norm == pytest.approx(1.0, abs=1e-10)
    E = tangent_basis(x.coords)
    h1, h2 = 1e-5, 1e-4
    H = busemann_hessian(x, b, E)
    B0 = busemann(x, b)
    for i, e in enumerate(E):
        fd = (busemann(geodesic(x, e, h1), b) - busemann(geodesic(x, e, -h1), b)) / (2 * h1)
        assert fd == pytest.approx(mink(e, g.coords), abs=1e-7)
        fd2 = (busemann(geodesic(x, e, h2), b) - 2 * B0 + busemann(geodesic(x, e, -h2), b)) / h2 ** 2
        assert fd2 == pytest.approx(H.entries[i, i], abs=1e-5)
    # mixed second derivative along (e_i + e_j)/sqrt2 recovers off-diagonal entries
    if n >= 2:
        e = (E[0] + E[1]) / np.sqrt(2)
        fd2 = (busemann(geodesic(x, e, h2), b) - 2 * B0 + busemann(geodesic(x, e, -h2), b)) / h2 ** 2
        assert fd2 == pytest.approx(H(np.array([1, 1] + [0] * (n - 2)) / np.sqrt(2),
                                      np.array([1, 1] + [0] * (n - 2)) / np.sqrt(2)), abs=1e-5)


@given(dims, seeds)
def test_busemann_hessian_spectrum(n, seed):
    rng = np.random.default_rng(seed)
    x = random_point(n, rng)
    b = random_boundary(n, rng)
    E = tangent_basis(x.coords)
    H = busemann_hessian(x, b, E)
    assert np.allclose(eigenvalues_ascending(H), [0] + [1] * (n - 1), atol=1e-9)
    g = mink(E, busemann_gradient(x, b).coords)
    assert abs(H(g, g)) < 1e-9
    assert np.allclose(H.entries + np.outer(g, g), np.eye(n), atol=1e-9)


@given(dims, seeds, st.floats(-3, 3), st.floats(-3, 3))
def test_exp_map_properties(n, seed, s, t):
    rng = np.random.default_rng(seed)
    x = random_point(n, rng)
    v = random_unit_tangent(x, rng)
    assert np.allclose(exp_map(x, v, 0).coords, x.coords)
    y = exp_map(x, v, t)
    assert distance(x, y) == pytest.approx(abs(t), abs=1e-7)
    assert abs(mink(y.coords, y.coords) + 1) < 1e-9
    z = exp_map(exp_map(x, v, s), transport_along(x, v, s), t)
    assert np.allclose(z.coords, exp_map(x, v, s + t).coords, atol=1e-9 * np.cosh(abs(s) + abs(t)))


@given(dims, seeds)
def test_boundary_endpoint_properties(n, seed):
    rng = np.random.default_rng(seed)
    p = MinkPoint.origin(n)
    u = rng.standard_normal(n)
    u /= np.linalg.norm(u)
    v = TangentVec(p, np.concatenate([[0], u]))
    b = boundary_endpoint(p, v)
    assert np.allclose(b.coords, p.coords + v.coords)
    x = random_point(n, rng)
    w = random_unit_tangent(x, rng)
    b = boundary_endpoint(x, w)
    B0 = busemann(x, b)
    for t in (0.3, 1.0, 4.0):
        assert busemann(exp_map(x, w, t), b) - B0 == pytest.approx(-t, abs=1e-8)
    g = random_isometry(n, rng)
    lhs = boundary_endpoint(apply_isometry(g, x), apply_isometry(g, w))
    assert np.allclose(lhs.coords, apply_isometry(g, b).coords, atol=1e-9)


@given(dims, seeds)
def test_busemann_cocycle(n, seed):
    rng = np.random.default_rng(seed)
    g = random_isometry(n, rng)
    b = random_boundary(n, rng)
    gb = apply_isometry(g, b)
    diffs = []
    for _ in range(4):
        x = random_point(n, rng)
        diffs.append(busemann(apply_isometry(g, x), gb) - busemann(x, b))
    assert np.ptp(diffs) < 1e-8


def test_apply_isometry_identity_and_errors(rng):
    x = random_point(3, rng)
    I = Isometry.identity(3)
    assert np.allclose(apply_isometry(I, x).coords, x.coords)
    b = random_boundary(3, rng)
    assert np.allclose(apply_isometry(I, b).coords, b.coords)
    with pytest.raises(ValueError):
        apply_isometry(np.diag([1.0, 2.0, 1.0, 1.0]), x)
    with pytest.raises(TypeError):
        apply_isometry(I, 3.0)
    g = random_isometry(3, rng)
    assert np.allclose((g @ g.inverse()).mat, np.eye(4), atol=1e-9)


def test_translation_and_rotation():
    p = origin(2)
    g = translation(p, [0, 1, 0], 1.5)
    assert distance(MinkPoint(p), MinkPoint(g.mat @ p)) == pytest.approx(1.5)
    R = rotation([[0, -1], [1, 0]])
    assert np.allclose(R.mat @ p, p)


def test_from_ball():
    x = from_ball([0.0, 0.0])
    assert np.allclose(x, origin(2))
    y = from_ball([0.5, 0.0])
    assert distance(MinkPoint(x), MinkPoint(y)) == pytest.approx(2 * np.arctanh(0.5))
    with pytest.raises(ValueError):
        from_ball([1.0, 0.0])
