"""Finite boundary densities on H^n, the potential f = -log ||mu_x|| with its
closed-form gradient and Hessian, and the natural flow with k-frame transport.

A :class:`DiscreteBoundaryDensity` is a finite weighted atom set standing in
for a conformal density.  It is not equivariant under any group, but the
pointwise inequalities checked here (gradient bound, k-trace bound on the
Hessian, hence k-volume contraction) only use the Busemann spectrum of H^n
and so hold for every finite boundary measure.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np

from .hypmodel import (
    BoundaryPoint,
    MinkPoint,
    TangentVec,
    busemann_arrays,
    mink,
    origin,
    project_tangent,
    reproject,
    tangent_basis,
)
from .symform import SymBilinearForm, k_trace

ANGLE_TOL = 1e-8
DRIFT_TOL = 1e-6


class FlowStepError(RuntimeError):
    """Hyperboloid drift within one step exceeded tolerance; use a smaller dt."""


@dataclass(frozen=True, eq=False)
class DiscreteBoundaryDensity:
    """Atoms b_i (normalized null vectors, shape (m, n+1)) with positive weights.

    Weights are the masses of mu at the origin p, so that
    ||mu_x|| = sum_i w_i exp(-delta * B_i(x)).
    """

    delta: float
    atoms: np.ndarray
    weights: np.ndarray

    def __post_init__(self):
        b = np.array(self.atoms, dtype=float)
        w = np.array(self.weights, dtype=float)
        if b.ndim != 2 or len(b) == 0 or len(w) != len(b):
            raise ValueError("need a non-empty (m, n+1) atom array and m weights")
        if not (np.all(np.isfinite(w)) and np.all(w > 0)):
            raise ValueError("weights must be finite and positive")
        if not np.isfinite(self.delta) or self.delta < 0:
            raise ValueError("delta must be nonnegative")
        b = b / b[:, :1]
        if np.any(np.abs(mink(b, b)) > 1e-9):
            raise ValueError("atoms must be null vectors")
        b.setflags(write=False)
        w.setflags(write=False)
        object.__setattr__(self, "atoms", b)
        object.__setattr__(self, "weights", w)
        object.__setattr__(self, "_logw", np.log(w))

    @property
    def n(self) -> int:
        return self.atoms.shape[1] - 1

    @property
    def total_mass(self) -> float:
        return float(self.weights.sum())

    @classmethod
    def from_points(cls, delta, atoms, weights) -> "DiscreteBoundaryDensity":
        coords = [a.coords if isinstance(a, BoundaryPoint) else a for a in atoms]
        return cls(delta, np.array(coords), np.asarray(weights, dtype=float))

    def scaled(self, c: float) -> "DiscreteBoundaryDensity":
        return DiscreteBoundaryDensity(self.delta, self.atoms, self.weights * c)

    def to_json(self) -> dict:
        return {"delta": self.delta, "atoms": self.atoms.tolist(), "weights": self.weights.tolist()}

    @classmethod
    def from_json(cls, data: dict) -> "DiscreteBoundaryDensity":
        return cls(float(data["delta"]), np.array(data["atoms"]), np.array(data["weights"]))

    # -- evaluation kernel -------------------------------------------------

    def _eval(self, x: np.ndarray):
        """log||mu_x||, softmax weights of the atoms at x, Busemann gradients."""
        B, grads = busemann_arrays(x, self.atoms)
        logits = self._logw - self.delta * B
        # max-shifted log-sum-exp; scipy's wrapper costs more than the flow step itself
        top = logits.max()
        e = np.exp(logits - top)
        total = e.sum()
        return top + np.log(total), e / total, grads

    def gradient_array(self, x: np.ndarray) -> np.ndarray:
        _, prob, grads = self._eval(x)
        return self.delta * (prob @ grads)

    def hessian_apply(self, x: np.ndarray, Y: np.ndarray):
        """Gradient of f and the Hessian operator applied to tangent rows Y.

        Hess f (Y) = delta * sum_i p_i (Y - (1 + delta) dB_i(Y) grad B_i) + df(Y) grad f.
        """
        _, prob, grads = self._eval(x)
        d = self.delta
        gf = d * (prob @ grads)
        YJ = Y.copy()
        YJ[:, 0] *= -1
        c = YJ @ grads.T  # <Y_a, grad B_i>, shape (k, m)
        HY = d * Y - d * (1 + d) * (c * prob) @ grads + np.outer(YJ @ gf, gf)
        return gf, HY


def _angle_merge(directions: np.ndarray, weights: np.ndarray, tol: float):
    from scipy.spatial import cKDTree

    tree = cKDTree(directions)
    parent = np.arange(len(directions))

    def find(i):
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    # chord length ~ angle at this scale
    for i, j in tree.query_pairs(r=tol):
        ri, rj = find(i), find(j)
        if ri != rj:
            parent[max(ri, rj)] = min(ri, rj)
    roots = np.array([find(i) for i in range(len(directions))])
    keep, inverse = np.unique(roots, return_inverse=True)
    merged = np.bincount(inverse, weights=weights)
    return directions[keep], merged


def density_from_orbit(orbit, delta: float, basepoint=None) -> DiscreteBoundaryDensity:
    """One atom per orbit point, at the endpoint of the ray from the basepoint
    through gamma p, weighted by exp(-delta d(p, gamma p)).  Atoms closer than
    1e-8 in angle (seen from the basepoint) are merged by adding weights."""
    if delta <= 0:
        raise ValueError("delta must be positive")
    pts = np.asarray(orbit.points if hasattr(orbit, "points") else [o.point for o in orbit])
    dists = np.asarray(orbit.dists if hasattr(orbit, "dists") else [o.dist for o in orbit])
    if len(pts) == 0:
        raise ValueError("orbit is empty")
    if basepoint is None:
        basepoint = orbit.spec.basepoint if hasattr(orbit, "spec") else MinkPoint.origin(pts.shape[1] - 1)
    p = basepoint.coords if isinstance(basepoint, MinkPoint) else np.asarray(basepoint, dtype=float)

    # unit directions at p, expressed in the orthonormal frame of T_p
    E = tangent_basis(p)
    v = pts - np.cosh(dists)[:, None] * p
    v /= np.sinh(dists)[:, None]
    local = mink(v[:, None, :], E[None, :, :])
    local /= np.linalg.norm(local, axis=1, keepdims=True)
    w = np.exp(-delta * dists)
    local, w = _angle_merge(local, w, ANGLE_TOL)
    if len(w) == 1:
        warnings.warn("all orbit directions merged into one atom; density is degenerate",
                      RuntimeWarning, stacklevel=2)
    atoms = reproject_null(p + local @ E)
    # move the weights to the gauge B(origin) = 0
    B_p, _ = busemann_arrays(p, atoms)
    return DiscreteBoundaryDensity(delta, atoms, w * np.exp(delta * B_p))


def reproject_null(b: np.ndarray) -> np.ndarray:
    b = np.asarray(b, dtype=float)
    s = b[..., 1:] / np.linalg.norm(b[..., 1:], axis=-1, keepdims=True)
    return np.concatenate([np.ones(s.shape[:-1] + (1,)), s], axis=-1)


def _coords(x):
    return x.coords if isinstance(x, (MinkPoint, TangentVec)) else np.asarray(x, dtype=float)


def norm_mu(mu: DiscreteBoundaryDensity, x) -> float:
    return float(np.exp(mu._eval(_coords(x))[0]))


def log_norm_mu(mu: DiscreteBoundaryDensity, x) -> float:
    return float(mu._eval(_coords(x))[0])


def potential_f(mu: DiscreteBoundaryDensity, x) -> float:
    return -log_norm_mu(mu, x)


def grad_f(mu: DiscreteBoundaryDensity, x) -> TangentVec:
    x = x if isinstance(x, MinkPoint) else MinkPoint(x)
    return TangentVec(x, mu.gradient_array(x.coords))


def hess_f(mu: DiscreteBoundaryDensity, x, basis=None) -> SymBilinearForm:
    """Hessian of f at x in an orthonormal tangent basis (rows of ``basis``)."""
    xc = _coords(x)
    E = tangent_basis(xc) if basis is None else np.asarray(basis, dtype=float)
    _, HE = mu.hessian_apply(xc, E)
    return SymBilinearForm(mink(E[:, None, :], HE[None, :, :]))


# --- the natural flow --------------------------------------------------------

@dataclass(frozen=True)
class FlowState:
    x: np.ndarray
    t: float
    frame: np.ndarray
    log_k_volume: float


@dataclass(frozen=True, eq=False)
class Trajectory:
    """Time grid, positions, orthonormalized frames and two log k-volume records.

    ``log_k_volume`` accumulates log det of the frame Gram matrix (the frame
    is re-orthonormalized after every step); ``log_k_volume_trace`` integrates
    sign * trace(Hess f restricted to the frame span) alongside the ODE.
    """

    sense: str
    delta: float
    k: int
    times: np.ndarray
    xs: np.ndarray
    frames: np.ndarray
    log_k_volume: np.ndarray
    log_k_volume_trace: np.ndarray
    max_grad_excess: float
    config: dict = field(default_factory=dict)

    def __len__(self):
        return len(self.times)

    @property
    def states(self) -> list:
        return [FlowState(self.xs[i], float(self.times[i]), self.frames[i], float(self.log_k_volume[i]))
                for i in range(len(self))]

    @property
    def volume_consistency(self) -> float:
        return float(np.max(np.abs(self.log_k_volume - self.log_k_volume_trace)))


def _gram_orthonormalize(Y: np.ndarray):
    G = mink(Y[:, None, :], Y[None, :, :])
    C = np.linalg.cholesky(G)
    return np.linalg.solve(C, Y), float(np.sum(np.log(np.diag(C))))


def integrate_flow(mu: DiscreteBoundaryDensity, x0, frame0, T: float, dt: float = 1e-3,
                   sense: str = "natural") -> Trajectory:
    """RK4 on x' = s grad f(x) together with the variational equation for the frame.

    ``sense='forward'`` (s = +1) integrates phi_t; ``sense='natural'``
    (s = -1) integrates F_t = phi_{-t}.  In ambient coordinates the frame
    obeys Y' = s (Hess f (Y) + <Y, grad f> x), the second term keeping Y
    tangent.  Positions are reprojected and frames re-orthonormalized after
    each step.
    """
    if sense not in ("forward", "natural"):
        raise ValueError("sense must be 'forward' or 'natural'")
    if T <= 0 or dt <= 0 or dt > 1e-2:
        raise ValueError("need T > 0 and 0 < dt <= 1e-2")
    sgn = 1.0 if sense == "forward" else -1.0
    x = _coords(x0).copy()
    Y = np.array([_coords(v) for v in frame0], dtype=float)
    if Y.ndim != 2 or Y.shape[1] != len(x):
        raise ValueError("frame vectors must have n+1 coordinates")
    k = len(Y)
    G = mink(Y[:, None, :], Y[None, :, :])
    if not np.allclose(G, np.eye(k), atol=1e-8) or np.max(np.abs(mink(Y, x))) > 1e-8:
        raise ValueError("initial frame must be orthonormal and tangent at x0")

    delta = mu.delta
    grad_excess = [-np.inf]

    def rhs(x, Y):
        gf, HY = mu.hessian_apply(x, Y)
        grad_excess[0] = max(grad_excess[0], np.sqrt(max(mink(gf, gf), 0.0)) - delta)
        dY = sgn * (HY + np.outer(mink(Y, gf), x))
        G = mink(Y[:, None, :], Y[None, :, :])
        M = mink(Y[:, None, :], HY[None, :, :])
        dl = sgn * np.trace(np.linalg.solve(G, M))
        return sgn * gf, dY, dl

    steps = int(round(T / dt))
    times = np.arange(steps + 1) * dt
    xs = np.empty((steps + 1, len(x)))
    frames = np.empty((steps + 1, k, len(x)))
    lv = np.zeros(steps + 1)
    lt = np.zeros(steps + 1)
    xs[0], frames[0] = x, Y
    for i in range(steps):
        k1 = rhs(x, Y)
        k2 = rhs(x + 0.5 * dt * k1[0], Y + 0.5 * dt * k1[1])
        k3 = rhs(x + 0.5 * dt * k2[0], Y + 0.5 * dt * k2[1])
        k4 = rhs(x + dt * k3[0], Y + dt * k3[1])
        x = x + dt / 6 * (k1[0] + 2 * k2[0] + 2 * k3[0] + k4[0])
        Y = Y + dt / 6 * (k1[1] + 2 * k2[1] + 2 * k3[1] + k4[1])
        dlt = dt / 6 * (k1[2] + 2 * k2[2] + 2 * k3[2] + k4[2])
        drift = abs(mink(x, x) + 1.0)
        if drift > DRIFT_TOL:
            raise FlowStepError(f"hyperboloid drift {drift:.2e} at t={times[i]:.4g}; reduce dt")
        x = reproject(x)
        Y = project_tangent(x, Y)
        Y, dlv = _gram_orthonormalize(Y)
        xs[i + 1], frames[i + 1] = x, Y
        lv[i + 1] = lv[i] + dlv
        lt[i + 1] = lt[i] + dlt
    return Trajectory(sense, delta, k, times, xs, frames, lv, lt, float(grad_excess[0]),
                      {"T": T, "dt": dt, "sense": sense})


@dataclass(frozen=True)
class ContractionReport:
    delta: float
    k: int
    times: np.ndarray
    log_k_volume: np.ndarray
    bound_curve: np.ndarray
    max_violation: float
    worst_margin: float
    volume_consistency: float
    max_grad_excess: float
    passed: bool

    def to_json(self) -> dict:
        return {
            "delta": self.delta,
            "k": self.k,
            "t_final": float(self.times[-1]),
            "steps": len(self.times) - 1,
            "max_violation": self.max_violation,
            "worst_margin": self.worst_margin,
            "volume_consistency": self.volume_consistency,
            "max_grad_excess": self.max_grad_excess,
            "pass": self.passed,
        }


def contraction_bound(delta: float, k: int, t):
    """log of the k-Jacobian bound exp(-delta (k - 1 - delta) t)."""
    return -delta * (k - 1 - delta) * np.asarray(t)


def verify_contraction(traj: Trajectory, mu: DiscreteBoundaryDensity | None = None,
                       k: int | None = None, slack: float = 1e-3) -> ContractionReport:
    """Check log Jac_k(t) <= -delta (k-1-delta) t + slack * t along an F_t run."""
    if traj.sense != "natural":
        raise ValueError("contraction is checked along the natural (F_t) sense")
    k = traj.k if k is None else k
    if k != traj.k:
        raise ValueError("k must match the transported frame size")
    delta = traj.delta if mu is None else mu.delta
    lv = traj.log_k_volume - traj.log_k_volume[0]
    bound = contraction_bound(delta, k, traj.times)
    excess = lv - bound
    violation = float(np.max(excess - slack * traj.times))
    # margin at t = 0 is zero by construction; report the worst over t > 0
    worst = float(np.max(excess[1:])) if len(excess) > 1 else 0.0
    return ContractionReport(delta, k, traj.times, lv, bound, violation, worst,
                             traj.volume_consistency, traj.max_grad_excess, violation <= 0.0)


def verify_ode_bound(C: float, alpha: float, y0: float, T: float = 5.0, dt: float = 1e-4) -> dict:
    """Integrate y' = C y - y^alpha and compare with (y0 - y0^alpha / (C (1 - alpha))) e^{Ct}."""
    if C <= 0 or not 0 < alpha < 1 or y0 <= 0:
        raise ValueError("need C > 0, 0 < alpha < 1, y0 > 0")
    coef = y0 - y0 ** alpha / (C * (1 - alpha))
    f = lambda y: C * y - y ** alpha
    steps = int(round(T / dt))
    y = y0
    min_margin = 0.0
    for i in range(steps):
        k1 = f(y)
        k2 = f(y + 0.5 * dt * k1) if y + 0.5 * dt * k1 > 0 else -np.inf
        k3 = f(y + 0.5 * dt * k2) if np.isfinite(k2) and y + 0.5 * dt * k2 > 0 else -np.inf
        k4 = f(y + dt * k3) if np.isfinite(k3) and y + dt * k3 > 0 else -np.inf
        y_new = y + dt / 6 * (k1 + 2 * k2 + 2 * k3 + k4)
        t = (i + 1) * dt
        if not np.isfinite(y_new) or y_new <= 0:
            return {"C": C, "alpha": alpha, "y0": y0, "T": T, "coefficient": coef,
                    "min_margin": min_margin, "crossing_time": t, "pass": False}
        y = y_new
        min_margin = min(min_margin, y - coef * np.exp(C * t))
    return {"C": C, "alpha": alpha, "y0": y0, "T": T, "coefficient": coef,
            "min_margin": float(min_margin), "y_final": float(y), "crossing_time": None,
            "pass": bool(min_margin >= -1e-6)}


def norm_growth_profile(mu: DiscreteBoundaryDensity, x0, v, T: float, samples: int = 64):
    """Sample log ||mu_x|| along the geodesic ray exp(x0, t v), t in [0, T].

    Returns ``(profile, rate)`` with profile a list of (distance, log norm)
    pairs and rate the least-squares slope.  A diagnostic only.
    """
    x = _coords(x0)
    vv = _coords(v)
    if abs(np.sqrt(max(mink(vv, vv), 0)) - 1) > 1e-9:
        raise ValueError("direction must be a unit tangent vector")
    ts = np.linspace(0, T, samples)
    logs = np.array([mu._eval(reproject(np.cosh(t) * x + np.sinh(t) * vv))[0] for t in ts])
    rate = float(np.polyfit(ts, logs, 1)[0])
    return list(zip(ts.tolist(), logs.tolist())), rate


def hessian_trace_margin(mu: DiscreteBoundaryDensity, x) -> np.ndarray:
    """k_trace(Hess f, k) - delta (k - 1 - delta) for k = 1..n."""
    H = hess_f(mu, x)
    d = mu.delta
    return np.array([k_trace(H, k) - d * (k - 1 - d) for k in range(1, H.dim + 1)])


def random_density(n: int, rng: np.random.Generator, delta: float | None = None,
                   max_atoms: int = 12) -> DiscreteBoundaryDensity:
    m = int(rng.integers(1, max_atoms + 1))
    dirs = rng.standard_normal((m, n))
    atoms = np.concatenate([np.ones((m, 1)), dirs / np.linalg.norm(dirs, axis=1, keepdims=True)], axis=1)
    w = np.exp(rng.uniform(-4, 4, m))
    if delta is None:
        delta = float(rng.uniform(0, n - 1))
    return DiscreteBoundaryDensity(delta, atoms, w)


def single_atom(n: int, direction=None, delta: float = 0.5, weight: float = 1.0) -> DiscreteBoundaryDensity:
    u = np.eye(n)[0] if direction is None else np.asarray(direction, dtype=float)
    b = np.concatenate([[1.0], u / np.linalg.norm(u)])
    return DiscreteBoundaryDensity(delta, b[None, :], np.array([weight]))


__all__ = [
    "DiscreteBoundaryDensity", "FlowState", "Trajectory", "ContractionReport", "FlowStepError",
    "density_from_orbit", "norm_mu", "log_norm_mu", "potential_f", "grad_f", "hess_f",
    "integrate_flow", "verify_contraction", "verify_ode_bound", "norm_growth_profile",
    "hessian_trace_margin", "random_density", "single_atom", "contraction_bound", "origin",
]
