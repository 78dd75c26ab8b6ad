"""critflow command line.

Subcommands: bounds-rank1, bounds-higher-rank, delta, flow, ode-check, selftest.
Every numeric option can also come from a JSON file given with --config;
explicit flags win, and both are echoed in the output under "provenance".
"""

from __future__ import annotations

import argparse
import csv
import hashlib
import json
import sys
import warnings

import numpy as np

from . import golden, psflow, rankone, rootsys, schottky
from .hypmodel import mink, random_point, tangent_basis
from .symform import k_trace, random_orthonormal_frame, trace_on_subspace, SymBilinearForm

EXIT_OK, EXIT_SELFTEST, EXIT_INPUT, EXIT_ESTIMATE, EXIT_VERIFY = 0, 1, 2, 3, 4


class InputError(ValueError):
    pass


# --- config plumbing -------------------------------------------------------

DEFAULTS = {
    "bounds-rank1": {"family": None, "n": 2, "delta": None, "sweep": None, "format": "json"},
    "bounds-higher-rank": {"preset": None, "eta": None, "eta_values": None, "u": None, "delta": None},
    "delta": {"spec": None, "fixture": None, "max_word_len": 10},
    "flow": {"spec": None, "density": None, "fixture": None, "delta": None, "k": 2, "T": 5.0,
             "dt": 1e-3, "estimate_len": 8, "density_len": 4, "csv": None},
    "ode-check": {"C": None, "alpha": None, "y0": None, "T": 5.0},
    "selftest": {"golden_dir": None, "samples": 200},
}


def resolve(args) -> tuple[dict, dict]:
    """Merge defaults < config file < explicit flags.  Returns (params, provenance)."""
    cmd = args.command
    cfg = {}
    if args.config:
        try:
            with open(args.config) as fh:
                cfg = json.load(fh)
        except (OSError, json.JSONDecodeError) as exc:
            raise InputError(f"cannot read config {args.config}: {exc}") from exc
        if not isinstance(cfg, dict):
            raise InputError("config file must hold a JSON object")
    unknown = set(cfg) - set(DEFAULTS[cmd]) - {"seed"}
    if unknown:
        raise InputError(f"unknown config keys for {cmd}: {sorted(unknown)}")
    flags = {k: getattr(args, k) for k in DEFAULTS[cmd] if getattr(args, k, None) is not None}
    if args.seed is not None:
        flags["seed"] = args.seed
    params = {**DEFAULTS[cmd], **cfg, **flags}
    seed = int(params.pop("seed", 0) or 0)
    if not 0 <= seed < 2 ** 64:
        raise InputError("seed must be a 64-bit unsigned integer")
    prov = {"config_file": args.config, "config": cfg, "flags": flags, "seed": seed}
    return params, prov


def _require(params, *names):
    missing = [n for n in names if params.get(n) is None]
    if missing:
        raise InputError("missing required parameter(s): " + ", ".join("--" + m.replace("_", "-") for m in missing))


def _floats(value) -> np.ndarray:
    if isinstance(value, str):
        value = [v for v in value.replace(",", " ").split() if v]
    return np.array(value, dtype=float)


def _emit(result: dict, out: str | None) -> None:
    text = json.dumps(result, indent=2, default=_json_default)
    if out:
        with open(out, "w") as fh:
            fh.write(text + "\n")
    else:
        print(text)


def _emit_text(result: dict, out: str | None) -> None:
    head = f"# {result['command']} family={result['family']} n={result['n']} step={result['step']:g}"
    prov = "# provenance " + json.dumps(result["provenance"], default=_json_default)
    text = "\n".join([head, prov, rankone.format_table(result["rows"])])
    if out:
        with open(out, "w") as fh:
            fh.write(text + "\n")
    else:
        print(text)


def _json_default(o):
    if isinstance(o, np.integer):
        return int(o)
    if isinstance(o, np.floating):
        return float(o)
    if isinstance(o, np.ndarray):
        return o.tolist()
    raise TypeError(type(o).__name__)


# --- commands ---------------------------------------------------------------

def cmd_bounds_rank1(params: dict, rng) -> tuple[dict, int]:
    if params.get("sweep") is not None:
        _require(params, "family")
        space = rankone.RankOneSpace(params["family"], int(params["n"]))
        rows = rankone.rank_one_table(space, float(params["sweep"]))
        return {"family": space.family, "n": space.n, "step": float(params["sweep"]), "rows": rows}, EXIT_OK
    _require(params, "family", "delta")
    space = rankone.RankOneSpace(params["family"], int(params["n"]))
    delta = float(params["delta"])
    rep = rankone.rank_one_report(space, delta)
    rep["cheeger_lower"] = rankone.cheeger_lower(space.real_dim, delta)
    lam = low = None
    if space.family == "real" and delta <= space.n - 1:
        lam, low = rankone.sullivan_lambda0(space.n, delta)
    rep["lambda0"], rep["lambda0_lower"] = lam, low
    return rep, EXIT_OK


def cmd_bounds_higher_rank(params: dict, rng) -> tuple[dict, int]:
    _require(params, "preset")
    preset = rootsys.get_preset(params["preset"])
    rs = preset.root_system
    out = {"preset": preset.name, "dim": preset.dim, "rank": preset.rank}
    if params.get("eta") is not None:
        choice = params["eta"]
        if choice == "rho":
            eta = rootsys.rho(preset)
        elif choice == "theta":
            _, eta = rootsys.strongly_orthogonal_theta(rs)
        elif choice == "custom":
            _require(params, "eta_values")
            eta = _floats(params["eta_values"])
            if eta.shape != (rs.ambient_dim,):
                raise InputError(f"custom eta needs {rs.ambient_dim} coordinates")
        else:
            raise InputError("eta must be one of rho, theta, custom")
        s = rootsys.s_eta(rs, eta)
        out.update(mode="eta", eta_choice=choice, eta=eta, s_eta=s, bound=preset.dim - s,
                   codim_one=bool(preset.dim - s <= preset.dim - 1),
                   coweight_values=rs.coweight_values(eta))
        return out, EXIT_OK
    _require(params, "u", "delta")
    u = _floats(params["u"])
    delta = float(params["delta"])
    L = rootsys.busemann_spectrum(preset, u)
    spectrum = np.diag(L.entries)
    out.update(mode="spectrum", u=u, delta=delta, l_X=rootsys.l_X(preset, u, delta),
               spectrum=spectrum, trace_profile=np.cumsum(spectrum))
    return out, EXIT_OK


def _group_from(params, rng) -> schottky.SchottkyGroupSpec:
    if params.get("spec"):
        try:
            return schottky.SchottkyGroupSpec.load(params["spec"])
        except (OSError, KeyError, json.JSONDecodeError) as exc:
            raise InputError(f"cannot read group spec {params['spec']}: {exc}") from exc
    if params.get("fixture"):
        return fixture(params["fixture"], rng)
    raise InputError("give a group with --spec FILE or --fixture NAME")


def fixture(name: str, rng) -> schottky.SchottkyGroupSpec:
    """Named test groups: ``symmetric:L`` (H^3, orthogonal axes, translation L),
    ``cyclic:T`` and ``random`` (two random generators in H^3 from the run seed)."""
    kind, _, arg = name.partition(":")
    try:
        if kind == "symmetric":
            return schottky.symmetric_schottky(3, float(arg or 4))
        if kind == "cyclic":
            return schottky.cyclic_group(3, float(arg or 1))
        if kind == "random":
            return schottky.random_schottky(3, int(arg or 2), rng)
    except ValueError as exc:
        raise InputError(str(exc)) from exc
    raise InputError(f"unknown fixture {name!r} (symmetric:L, cyclic:T, random[:m])")


def cmd_delta(params: dict, rng) -> tuple[dict, int]:
    spec = _group_from(params, rng)
    L = int(params["max_word_len"])
    try:
        est = schottky.estimate_delta(spec, L)
    except (schottky.EstimateError, schottky.OrbitCapError) as exc:
        return {"error": str(exc), "label": spec.label, "max_word_len": L}, EXIT_ESTIMATE
    return {**est.to_json(), "max_word_len": L, "label": spec.label}, EXIT_OK


def cmd_flow(params: dict, rng) -> tuple[dict, int]:
    if params.get("density"):
        try:
            with open(params["density"]) as fh:
                mu = psflow.DiscreteBoundaryDensity.from_json(json.load(fh))
        except (OSError, KeyError, json.JSONDecodeError) as exc:
            raise InputError(f"cannot read density {params['density']}: {exc}") from exc
        if params.get("delta") is not None:
            mu = psflow.DiscreteBoundaryDensity(float(params["delta"]), mu.atoms, mu.weights)
    else:
        spec = _group_from(params, rng)
        delta = params.get("delta")
        if delta is None:
            try:
                delta = schottky.estimate_delta(spec, int(params["estimate_len"])).value
            except (schottky.EstimateError, schottky.OrbitCapError) as exc:
                return {"error": str(exc)}, EXIT_ESTIMATE
        orbit = schottky.enumerate_orbit(spec, int(params["density_len"]))
        mu = psflow.density_from_orbit(orbit, float(delta))
    k = int(params["k"])
    if not 1 <= k <= mu.n:
        raise InputError(f"k must lie in [1, {mu.n}]")
    x0 = random_point(mu.n, rng, 1.0).coords
    frame = random_orthonormal_frame(mu.n, k, rng) @ tangent_basis(x0)
    traj = psflow.integrate_flow(mu, x0, frame, T=float(params["T"]), dt=float(params["dt"]))
    rep = psflow.verify_contraction(traj)
    if params.get("csv"):
        write_trajectory_csv(params["csv"], traj, rep)
    out = {**rep.to_json(), "atoms": len(mu.weights), "x0": x0}
    return out, EXIT_OK if rep.passed else EXIT_VERIFY


def write_trajectory_csv(path, traj, rep) -> None:
    n1 = traj.xs.shape[1]
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["t"] + [f"x{i}" for i in range(n1)] + ["log_k_volume", "bound_curve", "margin"])
        for i, t in enumerate(traj.times):
            lv = rep.log_k_volume[i]
            w.writerow([f"{t:.6f}"] + [repr(float(c)) for c in traj.xs[i]]
                       + [repr(float(lv)), repr(float(rep.bound_curve[i])),
                          repr(float(lv - rep.bound_curve[i]))])


def cmd_ode_check(params: dict, rng) -> tuple[dict, int]:
    _require(params, "C", "alpha", "y0")
    rep = psflow.verify_ode_bound(float(params["C"]), float(params["alpha"]), float(params["y0"]),
                                  T=float(params["T"]))
    return rep, EXIT_OK if rep["pass"] else EXIT_VERIFY


def property_suite(rng, samples: int) -> dict:
    """Small seeded versions of the k-trace, gradient and Hessian-trace properties."""
    var_worst = np.inf
    for _ in range(samples):
        d = int(rng.integers(2, 9))
        A = SymBilinearForm(rng.standard_normal((d, d)))
        k = int(rng.integers(1, d + 1))
        V = random_orthonormal_frame(d, k, rng)
        var_worst = min(var_worst, trace_on_subspace(A, V) - k_trace(A, k))
    grad_excess = -np.inf
    trace_worst = np.inf
    for _ in range(samples):
        n = int(rng.integers(2, 5))
        mu = psflow.random_density(n, rng)
        x = random_point(n, rng).coords
        g = mu.gradient_array(x)
        grad_excess = max(grad_excess, np.sqrt(max(mink(g, g), 0.0)) - mu.delta)
        trace_worst = min(trace_worst, psflow.hessian_trace_margin(mu, x).min())
    return {
        "variational_worst": float(var_worst),
        "gradient_excess_max": float(grad_excess),
        "hessian_trace_worst": float(trace_worst),
        "pass": bool(var_worst >= -1e-9 and grad_excess <= 1e-9 and trace_worst >= -1e-8),
    }


def cmd_selftest(params: dict, rng) -> tuple[dict, int]:
    results = golden.run_all(params.get("golden_dir"))
    props = property_suite(rng, int(params["samples"]))
    ok = all(not v for v in results.values()) and props["pass"]
    digest = hashlib.sha256(json.dumps(props, sort_keys=True).encode()).hexdigest()[:16]
    for name, bad in results.items():
        print(f"{'PASS' if not bad else 'FAIL'}  golden {name}", file=sys.stderr)
        for line in bad[:10]:
            print(f"      {line}", file=sys.stderr)
    print(f"{'PASS' if props['pass'] else 'FAIL'}  property suite (digest {digest})", file=sys.stderr)
    out = {"golden": results, "properties": props, "digest": digest, "pass": ok}
    return out, EXIT_OK if ok else EXIT_SELFTEST


COMMANDS = {
    "bounds-rank1": cmd_bounds_rank1,
    "bounds-higher-rank": cmd_bounds_higher_rank,
    "delta": cmd_delta,
    "flow": cmd_flow,
    "ode-check": cmd_ode_check,
    "selftest": cmd_selftest,
}


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="JSON file of parameters; flags override it")
    common.add_argument("--seed", type=int, help="seed for the run's single RNG (default 0)")
    common.add_argument("--out", help="write the JSON result here instead of stdout")

    p = argparse.ArgumentParser(prog="critflow", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("bounds-rank1", parents=[common], help="rank-one critical index and bounds")
    s.add_argument("--family", choices=rankone.FAMILIES)
    s.add_argument("--n", type=int)
    s.add_argument("--delta", type=float)
    s.add_argument("--sweep", type=float, help="tabulate over [0, volume entropy] with this delta step")
    s.add_argument("--format", choices=["json", "text"], help="text prints the sweep as aligned columns")

    s = sub.add_parser("bounds-higher-rank", parents=[common], help="l_X or n - s(eta) for a preset")
    s.add_argument("--preset", help="e.g. sl5, split-B5, split-E7, h3xh3")
    s.add_argument("--eta", choices=["rho", "theta", "custom"])
    s.add_argument("--eta-values", dest="eta_values", help="comma separated covector for --eta custom")
    s.add_argument("--u", help="comma separated unit chamber vector")
    s.add_argument("--delta", type=float)

    s = sub.add_parser("delta", parents=[common], help="critical exponent estimate")
    s.add_argument("--spec", help="Schottky group JSON")
    s.add_argument("--fixture", help="symmetric:L, cyclic:T or random[:m]")
    s.add_argument("--max-word-len", dest="max_word_len", type=int)

    s = sub.add_parser("flow", parents=[common], help="natural-flow contraction check")
    s.add_argument("--spec")
    s.add_argument("--density", help="density JSON (delta, atoms, weights)")
    s.add_argument("--fixture")
    s.add_argument("--delta", type=float, help="exponent; estimated from the group when omitted")
    s.add_argument("--k", type=int)
    s.add_argument("--T", type=float)
    s.add_argument("--dt", type=float)
    s.add_argument("--estimate-len", dest="estimate_len", type=int)
    s.add_argument("--density-len", dest="density_len", type=int)
    s.add_argument("--csv", help="trajectory CSV path")

    s = sub.add_parser("ode-check", parents=[common], help="comparison bound for y' = Cy - y^alpha")
    s.add_argument("--C", type=float)
    s.add_argument("--alpha", type=float)
    s.add_argument("--y0", type=float)
    s.add_argument("--T", type=float)

    s = sub.add_parser("selftest", parents=[common], help="golden tables and property suite")
    s.add_argument("--golden-dir", dest="golden_dir")
    s.add_argument("--samples", type=int)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        params, prov = resolve(args)
        rng = np.random.default_rng(prov["seed"])
        with warnings.catch_warnings():
            warnings.simplefilter("default")
            result, code = COMMANDS[args.command](params, rng)
    except (InputError, ValueError) as exc:
        print(f"critflow {args.command}: {exc}", file=sys.stderr)
        return EXIT_INPUT
    result = {"command": args.command, **result, "provenance": prov}
    if params.get("format") == "text" and "rows" in result:
        _emit_text(result, args.out)
    else:
        _emit(result, args.out)
    return code


if __name__ == "__main__":
    sys.exit(main())
