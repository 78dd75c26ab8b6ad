"""Restricted root systems, the covectors rho / Theta / highest root, and
the higher-rank critical-index bounds built from them.

Roots live in the standard orthonormal-coordinate models (A_r in the
trace-zero hyperplane of R^{r+1}, B/C/D/BC in R^r, E6/E7 inside the E8
lattice in R^8, F4 in R^4, G2 in the trace-zero plane of R^3).  A_1 is
realized on R^1 with root 1, so that a unit chamber vector gives the
curvature -1 normalization of real hyperbolic space.  Covectors and chamber
vectors share the ambient coordinates and are paired by the Euclidean dot
product.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from functools import cached_property

import networkx as nx
import numpy as np

from .symform import SymBilinearForm, trace_profile

TOL = 1e-9

_VALID_RANKS = {
    "A": lambda r: r >= 1,
    "B": lambda r: r >= 2,
    "C": lambda r: r >= 2,
    "D": lambda r: r >= 3,
    "BC": lambda r: r >= 1,
    "E6": lambda r: r == 6,
    "E7": lambda r: r == 7,
    "E8": lambda r: r == 8,
    "F4": lambda r: r == 4,
    "G2": lambda r: r == 2,
}

# classical positive-root counts (reduced systems; BC_r has r^2 + r)
_POSITIVE_COUNT = {
    "A": lambda r: r * (r + 1) // 2,
    "B": lambda r: r * r,
    "C": lambda r: r * r,
    "D": lambda r: r * (r - 1),
    "BC": lambda r: r * r + r,
    "E6": lambda r: 36,
    "E7": lambda r: 63,
    "E8": lambda r: 120,
    "F4": lambda r: 24,
    "G2": lambda r: 6,
}


def _key(v) -> tuple:
    return tuple(int(round(4 * c)) for c in v)


def _pairs_pm(r):
    e = np.eye(r)
    out = []
    for i, j in itertools.combinations(range(r), 2):
        out += [e[i] - e[j], e[i] + e[j]]
    return out


def _e8_roots():
    e = np.eye(8)
    roots = []
    for i, j in itertools.combinations(range(8), 2):
        for a, b in itertools.product((1, -1), repeat=2):
            roots.append(a * e[i] + b * e[j])
    for signs in itertools.product((0.5, -0.5), repeat=8):
        if sum(s < 0 for s in signs) % 2 == 0:
            roots.append(np.array(signs))
    return roots


def _component_roots(kind: str, rank: int):
    """All roots (both signs) of one irreducible component and a generic
    functional selecting the positive system."""
    r = rank
    if kind == "A":
        if r == 1:
            return [np.array([1.0]), np.array([-1.0])], np.array([1.0])
        e = np.eye(r + 1)
        roots = [e[i] - e[j] for i in range(r + 1) for j in range(r + 1) if i != j]
        return roots, np.arange(r + 1, 0, -1, dtype=float)
    if kind in ("B", "C", "D", "BC"):
        e = np.eye(r)
        pos = _pairs_pm(r)
        if kind in ("B", "BC"):
            pos += [e[i] for i in range(r)]
        if kind in ("C", "BC"):
            pos += [2 * e[i] for i in range(r)]
        return pos + [-p for p in pos], np.arange(r, 0, -1, dtype=float)
    if kind in ("E6", "E7", "E8"):
        roots = _e8_roots()
        e = np.eye(8)
        # E7 is the centralizer of the root e7+e8, E6 that of the A2 spanned
        # by e7+e8 and e6-e7 (Bourbaki's realizations).
        walls = {"E8": [], "E7": [e[6] + e[7]], "E6": [e[6] + e[7], e[5] - e[6]]}[kind]
        roots = [a for a in roots if all(abs(a @ w) < TOL for w in walls)]
        return roots, np.array([0, 1, 2, 3, 4, 5, 6, 23], dtype=float)
    if kind == "F4":
        e = np.eye(4)
        pos = _pairs_pm(4) + [e[i] for i in range(4)]
        roots = pos + [-p for p in pos]
        roots += [np.array(s) for s in itertools.product((0.5, -0.5), repeat=4)]
        return roots, np.array([8.0, 4.0, 2.0, 1.0])
    if kind == "G2":
        e = np.eye(3)
        roots = []
        for i, j in itertools.permutations(range(3), 2):
            roots.append(e[i] - e[j])
        for i in range(3):
            long = 3 * e[i] - np.ones(3)
            roots += [long, -long]
        return roots, np.array([2.0, 1.0, -3.0])
    raise ValueError(f"unknown root system type {kind!r}")


def _simple_roots(pos: np.ndarray) -> np.ndarray:
    keys = {_key(a) for a in pos}
    simple = [a for a in pos if not any(_key(a - b) in keys for b in pos)]
    return np.array(simple)


@dataclass(frozen=True)
class RestrictedRootSystem:
    """Positive roots in ambient coordinates plus the extreme rays of the
    closed positive chamber (the fundamental coweights, one per simple root).

    ``component_index[i]`` is the irreducible component of positive root i.
    """

    components: tuple
    positive_roots: np.ndarray
    component_index: np.ndarray
    simple_roots: np.ndarray
    chamber_generators: np.ndarray

    @property
    def rank(self) -> int:
        return len(self.simple_roots)

    @property
    def ambient_dim(self) -> int:
        return self.positive_roots.shape[1]

    @property
    def irreducible(self) -> bool:
        return len(self.components) == 1

    def coweight_values(self, covector) -> np.ndarray:
        """Values of a covector on the chamber generators (equivalently its
        coefficients in the simple-root basis, when it lies in their span)."""
        return self.chamber_generators @ np.asarray(covector, dtype=float)

    def heights(self) -> np.ndarray:
        return self._heights

    @cached_property
    def _heights(self) -> np.ndarray:
        return np.rint(self.positive_roots @ self.chamber_generators.T).sum(axis=1)

    def is_root(self, v) -> bool:
        k = _key(v)
        return k in self._root_keys

    @cached_property
    def _root_keys(self):
        keys = {_key(a) for a in self.positive_roots}
        return keys | {_key(-a) for a in self.positive_roots}

    def to_json(self) -> dict:
        return {
            "components": [list(c) for c in self.components],
            "positive_roots": [{"coords": a.tolist(), "mult": 1} for a in self.positive_roots],
            "chamber_generators": self.chamber_generators.tolist(),
        }


def build_root_system(kind: str, rank: int) -> RestrictedRootSystem:
    return product_root_system([(kind, rank)])


def product_root_system(components) -> RestrictedRootSystem:
    """Orthogonal direct sum of irreducible components, each given as (type, rank)."""
    blocks = []
    for kind, rank in components:
        kind = str(kind).upper()
        rank = int(rank)
        if kind not in _VALID_RANKS or not _VALID_RANKS[kind](rank):
            raise ValueError(f"invalid root system ({kind}, {rank})")
        roots, functional = _component_roots(kind, rank)
        roots = np.array(roots, dtype=float)
        values = roots @ functional
        assert np.all(np.abs(values) > TOL), "positivity functional is not generic"
        pos = roots[values > 0]
        # deterministic order: by height-ish functional then lexicographic
        order = np.lexsort(tuple(pos.T[::-1]) + (-(pos @ functional),))
        pos = pos[order]
        if len(pos) != _POSITIVE_COUNT[kind](rank):
            raise AssertionError(f"{kind}{rank}: built {len(pos)} positive roots")
        simple = _simple_roots(pos)
        if len(simple) != rank:
            raise AssertionError(f"{kind}{rank}: found {len(simple)} simple roots")
        gens = np.linalg.solve(simple @ simple.T, simple).T  # columns dual to simple roots
        blocks.append(((kind, rank), pos, simple, gens.T))

    dims = [b[1].shape[1] for b in blocks]
    total = sum(dims)
    offsets = np.concatenate([[0], np.cumsum(dims)])
    pos_all, simple_all, gens_all, comp = [], [], [], []
    for c, ((kind, rank), pos, simple, gens) in enumerate(blocks):
        lo, hi = offsets[c], offsets[c + 1]
        for arr, out in ((pos, pos_all), (simple, simple_all), (gens, gens_all)):
            pad = np.zeros((len(arr), total))
            pad[:, lo:hi] = arr
            out.append(pad)
        comp += [c] * len(pos)
    return RestrictedRootSystem(
        components=tuple((b[0][0], b[0][1]) for b in blocks),
        positive_roots=np.vstack(pos_all),
        component_index=np.array(comp),
        simple_roots=np.vstack(simple_all),
        chamber_generators=np.vstack(gens_all),
    )


@dataclass(frozen=True)
class SymmetricSpacePreset:
    name: str
    root_system: RestrictedRootSystem
    multiplicities: np.ndarray = field(default=None)

    def __post_init__(self):
        m = self.multiplicities
        if m is None:
            m = np.ones(len(self.root_system.positive_roots), dtype=int)
        m = np.asarray(m, dtype=int)
        if m.shape != (len(self.root_system.positive_roots),) or np.any(m < 1):
            raise ValueError("multiplicities must be positive integers, one per positive root")
        object.__setattr__(self, "multiplicities", m)

    @property
    def rank(self) -> int:
        return self.root_system.rank

    @property
    def dim(self) -> int:
        return self.rank + int(self.multiplicities.sum())

    def to_json(self) -> dict:
        data = self.root_system.to_json()
        for entry, m in zip(data["positive_roots"], self.multiplicities):
            entry["mult"] = int(m)
        return {"name": self.name, "dim": self.dim, "rank": self.rank, **data}


def sl_preset(r: int) -> SymmetricSpacePreset:
    """SL(r+1, R)/SO(r+1): split A_r, dimension r(r+3)/2."""
    return SymmetricSpacePreset(f"SL({r + 1},R)", build_root_system("A", r))


def split_preset(kind: str, rank: int) -> SymmetricSpacePreset:
    return SymmetricSpacePreset(f"split-{kind.upper()}{rank}", build_root_system(kind, rank))


def real_hyperbolic_preset(n: int) -> SymmetricSpacePreset:
    if n < 2:
        raise ValueError("real hyperbolic space needs n >= 2")
    return SymmetricSpacePreset(f"H^{n}", build_root_system("A", 1), [n - 1])


def product_hyperbolic_preset(n1: int, n2: int) -> SymmetricSpacePreset:
    """H^{n1} x H^{n2}: reducible A1 x A1 with multiplicities n1-1, n2-1."""
    if min(n1, n2) < 2:
        raise ValueError("factors need dimension >= 2")
    rs = product_root_system([("A", 1), ("A", 1)])
    return SymmetricSpacePreset(f"H^{n1}xH^{n2}", rs, [n1 - 1, n2 - 1])


def get_preset(name: str) -> SymmetricSpacePreset:
    """Parse preset names: ``sl5`` (SL(5,R)), ``h3xh3``, ``h4``, ``split-B5``."""
    s = name.strip().lower().replace("(", "").replace(")", "").replace(",r", "")
    try:
        if s.startswith("sl"):
            return sl_preset(int(s[2:]) - 1)
        if s.startswith("split-"):
            body = s[len("split-"):].upper()
            kind = body.rstrip("0123456789")
            rank = int(body[len(kind):])
            if kind == "E":
                kind, rank = f"E{rank}", rank
            elif kind in ("F", "G"):
                kind = f"{kind}{rank}"
                rank = {"F4": 4, "G2": 2}[kind]
            return split_preset(kind, rank)
        if s.startswith("h") and "x" in s:
            a, b = s.split("x")
            return product_hyperbolic_preset(int(a[1:]), int(b.lstrip("h")))
        if s.startswith("h"):
            return real_hyperbolic_preset(int(s[1:]))
    except (ValueError, KeyError) as exc:
        raise ValueError(f"unrecognized preset {name!r}") from exc
    raise ValueError(f"unrecognized preset {name!r}")


def rho(preset: SymmetricSpacePreset) -> np.ndarray:
    """Half sum of the positive roots counted with multiplicity."""
    rs = preset.root_system
    return 0.5 * (preset.multiplicities[:, None] * rs.positive_roots).sum(axis=0)


def highest_root(rs: RestrictedRootSystem) -> np.ndarray:
    if not rs.irreducible:
        raise ValueError("highest root is undefined for a reducible system")
    top = rs.positive_roots[int(np.argmax(rs.heights()))]
    gaps = (top - rs.positive_roots) @ rs.chamber_generators.T
    if np.any(gaps < -TOL):
        raise AssertionError("no unique maximal root")
    return top.copy()


def strongly_orthogonal(rs: RestrictedRootSystem, a, b) -> bool:
    """Neither a+b nor a-b is a root (nor zero)."""
    a = np.asarray(a)
    b = np.asarray(b)
    d = a - b
    if np.all(np.abs(d) < TOL) or np.all(np.abs(a + b) < TOL):
        return False
    return not rs.is_root(a + b) and not rs.is_root(d)


def _strong_orthogonality_graph(rs: RestrictedRootSystem) -> nx.Graph:
    pos = rs.positive_roots
    heights = rs.heights().astype(int)
    g = nx.Graph()
    for i in range(len(pos)):
        g.add_node(i, weight=int(heights[i]))
    for i, j in itertools.combinations(range(len(pos)), 2):
        if strongly_orthogonal(rs, pos[i], pos[j]):
            g.add_edge(i, j)
    return g


def strongly_orthogonal_theta(rs: RestrictedRootSystem):
    """A maximal strongly orthogonal system and Theta, half its sum.

    Among all strongly orthogonal systems we take one of maximal total
    height; its half-sum is then maximal in the dominance order, which is the
    Theta for which the codimension-one gap list comes out (see README).
    Returns ``(roots, theta)``.
    """
    g = _strong_orthogonality_graph(rs)
    clique, _ = nx.max_weight_clique(g, weight="weight")
    idx = sorted(clique, key=lambda i: (-g.nodes[i]["weight"], i))
    system = rs.positive_roots[idx]
    return system, 0.5 * system.sum(axis=0)


def greedy_strongly_orthogonal_theta(rs: RestrictedRootSystem):
    """Highest-root cascade: repeatedly keep the highest remaining root (by
    height, ties by order) and drop everything not strongly orthogonal to it."""
    pos = rs.positive_roots
    order = sorted(range(len(pos)), key=lambda i: -rs.heights()[i])
    remaining = list(order)
    chosen = []
    while remaining:
        top = remaining.pop(0)
        chosen.append(top)
        remaining = [i for i in remaining if strongly_orthogonal(rs, pos[top], pos[i])]
    system = pos[chosen]
    return system, 0.5 * system.sum(axis=0)


def all_strongly_orthogonal_systems(rs: RestrictedRootSystem):
    """Every inclusion-maximal strongly orthogonal system (exhaustive; small ranks only)."""
    g = _strong_orthogonality_graph(rs)
    for clique in nx.find_cliques(g):
        yield rs.positive_roots[sorted(clique)]


def s_eta(rs: RestrictedRootSystem, eta) -> int:
    """Largest integer s >= 0 with eta - s*highest_root >= 0 on the closed
    chamber and not identically zero, i.e. positive on the open chamber."""
    top = highest_root(rs)
    ev = rs.coweight_values(eta)
    if np.any(ev < -TOL):
        raise ValueError("eta is negative somewhere on the positive chamber")
    lv = rs.coweight_values(top)
    s = int(np.floor(np.min(ev / lv) + TOL))
    while s > 0:
        resid = ev - s * lv
        if np.all(resid > -TOL) and np.any(resid > TOL):
            return s
        s -= 1
    return 0


def _check_chamber_vector(rs: RestrictedRootSystem, u) -> np.ndarray:
    u = np.asarray(u, dtype=float)
    if u.shape != (rs.ambient_dim,):
        raise ValueError(f"chamber vector must have {rs.ambient_dim} coordinates")
    if abs(np.linalg.norm(u) - 1.0) > TOL:
        raise ValueError("chamber vector must have unit length")
    # component orthogonal to the span of the roots must vanish
    coeffs, *_ = np.linalg.lstsq(rs.simple_roots.T, u, rcond=None)
    if np.linalg.norm(rs.simple_roots.T @ coeffs - u) > 1e-8:
        raise ValueError("chamber vector is not in the span of the roots")
    if np.any(rs.simple_roots @ u < -TOL):
        raise ValueError("vector lies outside the closed positive chamber")
    return u


def busemann_spectrum(preset: SymmetricSpacePreset, u) -> SymBilinearForm:
    """Diagonal Busemann Hessian in direction u: r zeros, then alpha(u) for
    every positive root repeated by multiplicity, ascending."""
    rs = preset.root_system
    u = _check_chamber_vector(rs, u)
    vals = np.clip(rs.positive_roots @ u, 0.0, None)
    spec = np.concatenate([np.zeros(rs.rank), np.repeat(vals, preset.multiplicities)])
    return SymBilinearForm.diag(np.sort(spec))


def first_exceeding(profile, delta: float, n: int) -> int:
    """min{k : profile[k-1] > delta}, or n+1 when no k qualifies.

    Ties within 1e-12 relative count as not exceeding (the inequality is strict).
    """
    slack = 1e-12 * max(1.0, abs(delta))
    hits = np.nonzero(np.asarray(profile) > delta + slack)[0]
    return int(hits[0]) + 1 if len(hits) else n + 1


def l_X(preset: SymmetricSpacePreset, u, delta: float) -> int:
    if delta < 0:
        raise ValueError("delta must be nonnegative")
    L = busemann_spectrum(preset, u)
    return first_exceeding(trace_profile(L), delta, preset.dim)


def gap_bound(preset: SymmetricSpacePreset, eta) -> int:
    """Upper bound n - s(eta) on the critical index under a gap psi <= 2 rho - eta."""
    return preset.dim - s_eta(preset.root_system, eta)
