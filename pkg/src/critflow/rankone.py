"""Rank-one symmetric spaces: critical index, homological-dimension bounds,
the holomorphic trace inequality, and the Cheeger / bottom-of-spectrum bounds.

Curvature is normalized to K = -1 for real hyperbolic space and to
K in [-4, -1] for the complex, quaternionic and Cayley families.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np

from .rootsys import first_exceeding

FAMILIES = ("real", "complex", "quaternionic", "cayley")


@dataclass(frozen=True)
class RankOneSpace:
    family: str
    n: int = 2

    def __post_init__(self):
        fam = self.family.lower()
        if fam not in FAMILIES:
            raise ValueError(f"unknown family {self.family!r}; expected one of {FAMILIES}")
        object.__setattr__(self, "family", fam)
        if fam == "cayley" and self.n != 2:
            raise ValueError("the Cayley hyperbolic plane has n = 2")
        if self.n < 2:
            raise ValueError("n must be at least 2")

    @property
    def real_dim(self) -> int:
        return {"real": 1, "complex": 2, "quaternionic": 4, "cayley": 8}[self.family] * self.n

    @property
    def spectrum(self) -> np.ndarray:
        """Eigenvalues of the Busemann Hessian, ascending."""
        n = self.n
        ones, twos = {
            "real": (n - 1, 0),
            "complex": (2 * n - 2, 1),
            "quaternionic": (4 * n - 4, 3),
            "cayley": (8, 7),
        }[self.family]
        return np.array([0.0] + [1.0] * ones + [2.0] * twos)

    @property
    def volume_entropy(self) -> float:
        return float(self.spectrum.sum())


def _check_delta(delta):
    if not np.isfinite(delta) or delta < 0:
        raise ValueError(f"delta must be a finite nonnegative number, got {delta}")


def critical_index(space: RankOneSpace, delta: float) -> int:
    _check_delta(delta)
    return first_exceeding(np.cumsum(space.spectrum), delta, space.real_dim)


def hd_bound(space: RankOneSpace, delta: float) -> int:
    """Homological-dimension bound, critical index minus one.

    Valid only when the group has no parabolics (or the quotient has
    injectivity radius bounded below); that hypothesis is the caller's.
    """
    return critical_index(space, delta) - 1


def rank_one_report(space: RankOneSpace, delta: float) -> dict:
    j = critical_index(space, delta)
    flags = []
    h = space.volume_entropy
    if delta > h:
        flags.append("exceeds volume entropy")
    if space.family == "quaternionic":
        n = space.n
        if 4 * n < delta < 4 * n + 2:
            flags.append("excluded by Corlette gap")
        elif delta == 4 * n:
            flags.append("edge case not covered by the table")
    if space.family == "cayley":
        if 16 < delta < 22:
            flags.append("excluded by Corlette gap")
        elif delta == 16:
            flags.append("edge case not covered by the table")
    if delta == h:
        flags.append("lattice exponent")
    return {
        "family": space.family,
        "n": space.n,
        "real_dim": space.real_dim,
        "delta": delta,
        "j_X": j,
        "hd_bound": j - 1,
        "trace_profile": np.cumsum(space.spectrum).tolist(),
        "flags": flags,
    }


def rank_one_table(space: RankOneSpace, step: float = 0.25) -> list:
    """Rows (delta, j_X, hd_bound, flags) on a delta grid over [0, volume entropy]."""
    if not step > 0:
        raise ValueError("step must be positive")
    top = space.volume_entropy
    grid = np.round(np.arange(0.0, top + step / 2, step), 10)
    rows = []
    for d in grid[grid <= top]:
        rep = rank_one_report(space, float(d))
        rows.append({k: rep[k] for k in ("delta", "j_X", "hd_bound", "flags")})
    return rows


def format_table(rows: list, columns=("delta", "j_X", "hd_bound", "flags")) -> str:
    """Render table rows as aligned text columns."""
    def cell(v):
        if isinstance(v, list):
            return "; ".join(v) or "-"
        if isinstance(v, float):
            return f"{v:g}"
        return str(v)

    cells = [[cell(r[c]) for c in columns] for r in rows]
    widths = [max([len(c)] + [len(line[i]) for line in cells]) for i, c in enumerate(columns)]
    # numbers right-aligned, the trailing free-text column left-aligned
    def join(vals):
        parts = [v.rjust(w) for v, w in zip(vals[:-1], widths)] + [vals[-1]]
        return "  ".join(parts)

    return "\n".join([join(list(columns))] + [join(line) for line in cells])


def cheeger_lower(n: int, delta: float) -> float:
    """Cheeger constant lower bound max(n - 1 - delta, 0) for curvature <= -1."""
    _check_delta(delta)
    return max(n - 1 - delta, 0.0)


def sullivan_lambda0(n: int, delta: float):
    """Bottom of the L^2 spectrum of a real hyperbolic n-manifold and the
    lower bound (n-1-delta)^2/4.  Returns ``(lambda0, lower_bound)``."""
    if not 0 <= delta <= n - 1:
        raise ValueError(f"delta must lie in [0, {n - 1}]")
    if delta <= (n - 1) / 2:
        lam = (n - 1) ** 2 / 4
    else:
        lam = delta * (n - 1 - delta)
    lower = (n - 1 - delta) ** 2 / 4
    assert lam >= lower - 1e-12
    return lam, lower


def _holo_form_diagonal(n: int, delta: float) -> np.ndarray:
    # L = K - delta * dB (x) dB in the basis e1 = v, e2 = J e1, then the rest
    d = np.ones(2 * n)
    d[0] = -delta
    d[1] = 2.0
    return d


def _realify(q: np.ndarray) -> np.ndarray:
    """Complex orthonormal columns (..., n, k) -> real orthonormal rows (..., 2k, 2n).

    Complex coordinate j maps to real coordinates (2j, 2j+1), so
    multiplication by i is the complex structure J with J e1 = e2."""
    def interleave(re, im):
        out = np.empty(re.shape[:-1] + (2 * re.shape[-1],))
        out[..., 0::2] = re
        out[..., 1::2] = im
        return out

    qt = np.swapaxes(q, -1, -2)
    a = interleave(qt.real, qt.imag)
    b = interleave(-qt.imag, qt.real)
    return np.concatenate([a, b], axis=-2)


def holo_trace_check(n: int, delta: float, k: int, num_samples: int = 10_000,
                     seed: int = 0) -> dict:
    """Sample complex k-planes in C^n = R^{2n} and compare trace(L|_V) with 2k - delta."""
    if n < 2 or not 1 <= k <= n:
        raise ValueError("need n >= 2 and 1 <= k <= n")
    if not 0 <= delta <= 2 * n:
        raise ValueError(f"delta must lie in [0, {2 * n}]")
    diag = _holo_form_diagonal(n, delta)
    rng = np.random.default_rng(seed)
    z = rng.standard_normal((num_samples, n, k)) + 1j * rng.standard_normal((num_samples, n, k))
    q, _ = np.linalg.qr(z)
    frames = _realify(q)
    sampled = np.einsum("sij,j,sij->s", frames, diag, frames)

    coord = []
    for lines in itertools.combinations(range(n), k):
        rows = [2 * j for j in lines] + [2 * j + 1 for j in lines]
        coord.append(diag[rows].sum())
    coord = np.array(coord)
    bound = 2 * k - delta
    # the plane through (e1, J e1) comes first in lexicographic order
    minimum = float(min(sampled.min(), coord.min()))
    return {
        "n": n,
        "k": k,
        "delta": delta,
        "num_samples": num_samples,
        "min_sampled_trace": minimum,
        "min_random_trace": float(sampled.min()),
        "coordinate_traces": coord.tolist(),
        "plane_through_e1_trace": float(coord[0]),
        "bound": bound,
        "pass": bool(minimum >= bound - 1e-8),
    }
