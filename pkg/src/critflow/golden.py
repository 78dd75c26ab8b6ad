"""Golden reference tables shipped with the package and the checks that
compare the live computations against them.

Each ``check_*`` function returns a list of human-readable mismatch strings;
an empty list means the table is reproduced exactly.
"""

from __future__ import annotations

import json
import math
from importlib import resources
from pathlib import Path

import numpy as np

from . import rankone, rootsys

GOLDEN_FILES = ("rank_one_tables.json", "higher_rank.json", "ode_lemma.json")


def golden_dir() -> Path:
    return Path(str(resources.files("critflow") / "data" / "golden"))


def schema_dir() -> Path:
    return Path(str(resources.files("critflow") / "data" / "schemas"))


def load(name: str, directory=None) -> dict:
    path = Path(directory or golden_dir()) / name
    with open(path) as fh:
        return json.load(fh)


def _lin(coef, n: int) -> float:
    return coef[0] * n + coef[1]


def table_value(pieces, n: int, delta: float):
    """Value of a transcribed piecewise table at (n, delta), or None when
    delta is not covered by any piece."""
    for piece in pieces:
        lo, hi = _lin(piece["lo"], n), _lin(piece["hi"], n)
        inside = lo <= delta < hi or (piece["closed_hi"] and delta == hi)
        if inside:
            v = piece["value"]
            return math.floor(delta) + 1 if v == "floor" else int(_lin(v, n))
    return None


def sweep(pieces, n: int, step: float = 0.25):
    """delta grid of the given step over the covered range, plus every piece endpoint."""
    top = max(_lin(p["hi"], n) for p in pieces)
    grid = set(np.round(np.arange(0.0, top + step / 2, step), 10).tolist())
    for p in pieces:
        grid.update([float(_lin(p["lo"], n)), float(_lin(p["hi"], n))])
    return sorted(d for d in grid if table_value(pieces, n, d) is not None)


def check_rank_one(data=None, step: float = 0.25) -> list:
    data = data or load("rank_one_tables.json")
    bad = []
    for family, spec in data["families"].items():
        for n in spec["n_values"]:
            space = rankone.RankOneSpace(family, n)
            for d in sweep(spec["pieces"], n, step):
                want = table_value(spec["pieces"], n, d)
                got = rankone.hd_bound(space, d)
                if got != want:
                    bad.append(f"rank_one_tables: {family} n={n} delta={d}: got {got}, table {want}")
    return bad


def check_higher_rank(data=None) -> list:
    data = data or load("higher_rank.json")
    bad = []
    for r, want in data["s_rho_type_A"].items():
        p = rootsys.sl_preset(int(r))
        got = rootsys.s_eta(p.root_system, rootsys.rho(p))
        if got != want:
            bad.append(f"higher_rank: s(rho) for A{r}: got {got}, table {want}")
    gb = data["gap_bound_sl5_rho"]
    p = rootsys.sl_preset(4)
    if p.dim != gb["dim"] or rootsys.gap_bound(p, rootsys.rho(p)) != gb["value"]:
        bad.append(f"higher_rank: gap_bound SL(5,R): got dim {p.dim}, "
                   f"bound {rootsys.gap_bound(p, rootsys.rho(p))}")
    for kind, rank in data["codim_one_theta"]:
        rs = rootsys.build_root_system(kind, rank)
        _, theta = rootsys.strongly_orthogonal_theta(rs)
        s = rootsys.s_eta(rs, theta)
        if s < 1:
            bad.append(f"higher_rank: s(Theta) for {kind}{rank} is {s}, expected >= 1")
    prod = data["product_hyperbolic"]
    for n in prod["factor_dims"]:
        preset = rootsys.product_hyperbolic_preset(n, n)
        u = np.full(2, 1 / np.sqrt(2))
        for raw in prod["factor_deltas"]:
            di = n - 1.1 if raw == "n-1.1" else float(raw)
            got = rootsys.l_X(preset, u, di / np.sqrt(2))
            if got != math.floor(di) + 3:
                bad.append(f"higher_rank: l_X H{n}xH{n} delta_i={di}: got {got}, "
                           f"expected {math.floor(di) + 3}")
    return bad


def check_ode(data=None) -> list:
    from .psflow import verify_ode_bound

    data = data or load("ode_lemma.json")
    bad = []
    for case in data["cases"]:
        rep = verify_ode_bound(case["C"], case["alpha"], case["y0"], T=data["T"])
        if abs(rep["coefficient"] - case["coefficient"]) > 1e-12:
            bad.append(f"ode_lemma: coefficient for {case}: got {rep['coefficient']}")
        if rep["min_margin"] < -data["tolerance"]:
            bad.append(f"ode_lemma: {case} min_margin {rep['min_margin']:.3e}")
    return bad


CHECKS = {
    "rank_one_tables.json": check_rank_one,
    "higher_rank.json": check_higher_rank,
    "ode_lemma.json": check_ode,
}


def run_all(directory=None) -> dict:
    """Run every golden check; unreadable or malformed files count as failures."""
    out = {}
    for name, fn in CHECKS.items():
        try:
            out[name] = fn(load(name, directory))
        except (OSError, ValueError, KeyError, TypeError, IndexError) as exc:
            out[name] = [f"{name}: could not evaluate ({type(exc).__name__}: {exc})"]
    return out
