"""Free (Schottky) groups of hyperbolic isometries: reduced-word orbit
enumeration, truncated Poincare series and critical exponent estimates."""

from __future__ import annotations

import json
import os
from collections.abc import Sequence
from dataclasses import dataclass, field

import numpy as np

from .hypmodel import Isometry, MinkPoint, mink, origin, rotation, translation

DEFAULT_CAP = 10_000_000
MIN_ESTIMATE_POINTS = 50


class OrbitCapError(RuntimeError):
    """Enumeration would exceed the configured orbit-size cap."""

    def __init__(self, required: int, cap: int):
        super().__init__(f"orbit enumeration needs {required} points, cap is {cap} "
                         f"(raise it with CRITFLOW_CAP)")
        self.required = required
        self.cap = cap


class EstimateError(RuntimeError):
    pass


@dataclass(frozen=True)
class SchottkyGroupSpec:
    """Generators g_1..g_m (inverses implied), a basepoint and a label.

    ``free`` records the caller's assertion that the generators freely
    generate a discrete group; it is not verified.
    """

    generators: tuple
    basepoint: MinkPoint
    label: str = "schottky"
    free: bool = True

    def __post_init__(self):
        gens = tuple(g if isinstance(g, Isometry) else Isometry(g) for g in self.generators)
        if not gens:
            raise ValueError("need at least one generator")
        dims = {g.mat.shape[0] for g in gens}
        if dims != {len(self.basepoint.coords)}:
            raise ValueError("generator size does not match the basepoint dimension")
        object.__setattr__(self, "generators", gens)

    @property
    def rank(self) -> int:
        return len(self.generators)

    def letters(self) -> list:
        """Matrices for letters 0..m-1 (generators) and m..2m-1 (inverses)."""
        return [g.mat for g in self.generators] + [g.inverse().mat for g in self.generators]

    def to_json(self) -> dict:
        return {
            "label": self.label,
            "generators": [g.mat.tolist() for g in self.generators],
            "basepoint": self.basepoint.coords.tolist(),
        }

    @classmethod
    def from_json(cls, data: dict) -> "SchottkyGroupSpec":
        return cls(
            generators=tuple(Isometry(np.array(g, dtype=float)) for g in data["generators"]),
            basepoint=MinkPoint(np.array(data["basepoint"], dtype=float)),
            label=data.get("label", "schottky"),
        )

    @classmethod
    def load(cls, path) -> "SchottkyGroupSpec":
        with open(path) as fh:
            return cls.from_json(json.load(fh))


@dataclass(frozen=True)
class OrbitPoint:
    word: tuple
    point: np.ndarray
    dist: float


@dataclass(frozen=True, eq=False)
class Orbit(Sequence):
    """Orbit of the basepoint under all nontrivial reduced words of length <= L.

    Backed by arrays; indexing yields :class:`OrbitPoint`.  Words are stored as
    a prefix tree: element i is ``letter[i]`` prepended to element ``parent[i]``
    (parent -1 for single letters).
    """

    spec: SchottkyGroupSpec
    points: np.ndarray
    dists: np.ndarray
    lengths: np.ndarray
    letter: np.ndarray
    parent: np.ndarray
    max_word_len: int = field(default=0)

    def __len__(self) -> int:
        return len(self.dists)

    def __getitem__(self, i):
        if isinstance(i, slice):
            return [self[j] for j in range(*i.indices(len(self)))]
        return OrbitPoint(self.word(i), self.points[i], float(self.dists[i]))

    def word(self, i: int) -> tuple:
        m = self.spec.rank
        out = []
        i = int(i)
        while i >= 0:
            a = int(self.letter[i])
            out.append(f"g{a + 1}" if a < m else f"g{a - m + 1}^-1")
            i = int(self.parent[i])
        return tuple(out)

    def dump_jsonl(self, fh) -> None:
        for i in range(len(self)):
            fh.write(json.dumps({"word": list(self.word(i)), "dist": float(self.dists[i])}) + "\n")


def orbit_size(m: int, L: int) -> int:
    return sum(2 * m * (2 * m - 1) ** (l - 1) for l in range(1, L + 1))


def configured_cap() -> int:
    raw = os.environ.get("CRITFLOW_CAP")
    return int(float(raw)) if raw else DEFAULT_CAP


def enumerate_orbit(spec: SchottkyGroupSpec, max_word_len: int, cap: int | None = None) -> Orbit:
    L = int(max_word_len)
    if L < 1:
        raise ValueError("max_word_len must be at least 1")
    cap = configured_cap() if cap is None else cap
    m = spec.rank
    need = orbit_size(m, L)
    if need > cap:
        raise OrbitCapError(need, cap)

    mats = spec.letters()
    p = spec.basepoint.coords
    inv = lambda a: (a + m) % (2 * m)

    pts = [np.array([g @ p for g in mats])]
    first = [np.arange(2 * m)]
    parents = [np.full(2 * m, -1)]
    offset = 0
    for _ in range(1, L):
        prev_pts, prev_first = pts[-1], first[-1]
        new_pts, new_first, new_parent = [], [], []
        for a, g in enumerate(mats):
            idx = np.nonzero(prev_first != inv(a))[0]
            new_pts.append(prev_pts[idx] @ g.T)
            new_first.append(np.full(len(idx), a))
            new_parent.append(idx + offset)
        offset += len(prev_pts)
        pts.append(np.concatenate(new_pts))
        first.append(np.concatenate(new_first))
        parents.append(np.concatenate(new_parent))

    points = np.concatenate(pts)
    lengths = np.concatenate([np.full(len(a), l + 1) for l, a in enumerate(pts)])
    dists = np.arccosh(np.maximum(-mink(points, p), 1.0))
    return Orbit(spec, points, dists, lengths, np.concatenate(first),
                 np.concatenate(parents), L)


def poincare_partial_sum(orbit, s: float) -> float:
    """Sum of exp(-s * d(p, gamma p)) over the enumerated orbit."""
    d = np.asarray(orbit.dists if isinstance(orbit, Orbit) else [o.dist for o in orbit])
    if len(d) == 0:
        raise ValueError("orbit is empty")
    return float(np.sum(np.exp(-s * d)))


@dataclass(frozen=True)
class DeltaEstimate:
    value: float
    window: tuple
    point_count: int
    fit_residual: float

    def to_json(self) -> dict:
        return {
            "value": self.value,
            "window": list(self.window),
            "point_count": self.point_count,
            "fit_residual": self.fit_residual,
        }


def completeness_radius(orbit: Orbit) -> float:
    """Smallest distance reached by a word of maximal length.

    Below this radius the enumerated orbit is taken to be complete."""
    return float(orbit.dists[orbit.lengths == orbit.max_word_len].min())


def estimate_delta_from_orbit(orbit: Orbit, grid: int = 400) -> DeltaEstimate:
    """Least-squares slope of log N(R) against R on [0.2, 0.9] x R_max.

    N(R) counts orbit points within distance R; R_max is the completeness
    radius of the truncated enumeration.
    """
    r_max = completeness_radius(orbit)
    lo, hi = 0.2 * r_max, 0.9 * r_max
    d = np.sort(orbit.dists)
    count = int(np.searchsorted(d, hi, side="right"))
    if count < MIN_ESTIMATE_POINTS:
        raise EstimateError(f"only {count} orbit points inside the fit window "
                            f"(need {MIN_ESTIMATE_POINTS})")
    R = np.linspace(lo, hi, grid)
    N = np.searchsorted(d, R, side="right")
    keep = N > 0
    if keep.sum() < 2:
        raise EstimateError("orbit count is empty over the fit window")
    A = np.column_stack([R[keep], np.ones(keep.sum())])
    y = np.log(N[keep])
    coef, *_ = np.linalg.lstsq(A, y, rcond=None)
    resid = float(np.sqrt(np.mean((A @ coef - y) ** 2)))
    return DeltaEstimate(max(float(coef[0]), 0.0), (lo, hi), count, resid)


def estimate_delta(spec: SchottkyGroupSpec, max_word_len: int) -> DeltaEstimate:
    return estimate_delta_from_orbit(enumerate_orbit(spec, max_word_len))


# --- fixtures -----------------------------------------------------------------

def cyclic_group(n: int, translation_length: float) -> SchottkyGroupSpec:
    """<g> with g translating along the first coordinate axis through the origin."""
    p = origin(n)
    v = np.zeros(n + 1)
    v[1] = 1.0
    return SchottkyGroupSpec((translation(p, v, translation_length),), MinkPoint(p), "cyclic")


def symmetric_schottky(n: int, translation_length: float, angle: float = np.pi / 2) -> SchottkyGroupSpec:
    """Two generators translating by the same length along geodesics through
    the origin meeting at ``angle`` (orthogonal axes by default).

    Ping-pong needs the four boundary disks of angular radius
    arccos(tanh(l/2)) around the axis endpoints to be disjoint.
    """
    if n < 2:
        raise ValueError("need n >= 2")
    half = np.arccos(np.tanh(translation_length / 2))
    if 2 * half >= min(angle, np.pi - angle):
        raise ValueError("axes are not separated: translation length too short for this angle")
    p = origin(n)
    v1 = np.zeros(n + 1)
    v1[1] = 1.0
    v2 = np.zeros(n + 1)
    v2[1], v2[2] = np.cos(angle), np.sin(angle)
    gens = (translation(p, v1, translation_length), translation(p, v2, translation_length))
    return SchottkyGroupSpec(gens, MinkPoint(p), f"symmetric-l{translation_length:g}")


def random_schottky(n: int, m: int, rng: np.random.Generator, min_length: float = 3.0,
                    max_length: float = 6.0, max_tries: int = 10_000) -> SchottkyGroupSpec:
    """m hyperbolic generators with random axes through the origin and
    translation lengths in [min_length, max_length], rejecting draws whose
    ping-pong disks overlap."""
    p = origin(n)
    for _ in range(max_tries):
        dirs = rng.standard_normal((m, n))
        dirs /= np.linalg.norm(dirs, axis=1, keepdims=True)
        lengths = rng.uniform(min_length, max_length, m)
        radii = np.arccos(np.tanh(lengths / 2))
        ends = np.concatenate([dirs, -dirs])
        rad = np.concatenate([radii, radii])
        ang = np.arccos(np.clip(ends @ ends.T, -1, 1))
        gap = ang - (rad[:, None] + rad[None, :])
        np.fill_diagonal(gap, np.inf)
        if np.all(gap > 0.05):
            gens = []
            for u, l in zip(dirs, lengths):
                g = translation(p, np.concatenate([[0.0], u]), l)
                if n >= 3:
                    # rotate about the axis; commutes with the translation
                    g = g @ rotation(_axis_rotation(u, rng.uniform(0, 2 * np.pi)))
                gens.append(g)
            return SchottkyGroupSpec(tuple(gens), MinkPoint(p), "random")
    raise RuntimeError("could not draw separated axes; lower the generator count")


def _axis_rotation(u: np.ndarray, theta: float) -> np.ndarray:
    """Orthogonal matrix fixing u and rotating one orthogonal 2-plane by theta."""
    n = len(u)
    q, _ = np.linalg.qr(np.column_stack([u, np.eye(n)]))
    a, b = q[:, 1], q[:, 2]
    return (np.eye(n) + (np.cos(theta) - 1) * (np.outer(a, a) + np.outer(b, b))
            + np.sin(theta) * (np.outer(b, a) - np.outer(a, b)))
