"""Command line front end: JSON in, JSON report out.

Exit status: 0 success or pass, 1 analytic rejection (not in class, outside
the domain, failed validation or comparison), 2 input or parse error,
3 numerical non-convergence.
"""
from __future__ import annotations

import argparse
import datetime as _dt
import hashlib
import json
import math
import sys

import numpy as np

from . import __version__
from ._config import tolerances
from .errors import (DomainViolation, InvalidCutoff, LimitNonConvergence, NotInClass,
                     QuadratureNonConvergence)
from .kernels import MappingParams
from .serialization import SchemaError, triplet_from_dict, triplet_hash, triplet_to_dict

EXIT_OK, EXIT_REJECT, EXIT_INPUT, EXIT_NUMERIC = 0, 1, 2, 3
TOL_RANGE = (1e-14, 1e-2)


class InputError(Exception):
    pass


def _jsonable(x):
    if isinstance(x, dict):
        return {str(k): _jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_jsonable(v) for v in x]
    if isinstance(x, np.ndarray):
        return _jsonable(x.tolist())
    if isinstance(x, (np.bool_, bool)):
        return bool(x)
    if isinstance(x, (np.integer,)):
        return int(x)
    if isinstance(x, (float, np.floating)):
        x = float(x)
        if math.isnan(x):
            return "nan"
        if math.isinf(x):
            return "inf" if x > 0 else "-inf"
        return x
    if isinstance(x, complex):
        return [x.real, x.imag]
    return x


def _read(path):
    try:
        with open(path, "rb") as fh:
            return fh.read()
    except OSError as e:
        raise InputError(f"cannot read {path}: {e.strerror}") from None


def _load_json_arg(text: str, what: str):
    """JSON given inline or as a path to a file."""
    s = text.strip()
    try:
        if s.startswith("{") or s.startswith("["):
            return json.loads(s), hashlib.sha256(s.encode()).hexdigest()
        raw = _read(text)
        return json.loads(raw), hashlib.sha256(raw).hexdigest()
    except json.JSONDecodeError as e:
        raise InputError(f"{what}: invalid JSON ({e})") from None


def _load_triplet(path):
    raw = _read(path)
    try:
        t = triplet_from_dict(json.loads(raw))
    except json.JSONDecodeError as e:
        raise InputError(f"{path}: invalid JSON ({e})") from None
    except SchemaError as e:
        raise InputError(f"{path}: {e}") from None
    return t, hashlib.sha256(raw).hexdigest()


def _params(args):
    d, h = _load_json_arg(args.params, "--params")
    try:
        return MappingParams(d["alpha"], d.get("m", 0)), h
    except (KeyError, TypeError, ValueError) as e:
        raise InputError(f"--params: {e}") from None


def _z_grid(dim, z_max, n):
    g = np.linspace(-z_max, z_max, n)
    if dim == 1:
        return g[:, None]
    # along each axis
    rows = []
    for k in range(dim):
        for v in g:
            z = np.zeros(dim)
            z[k] = v
            rows.append(z)
    return np.array(rows)


def _density_grid(t, n=50):
    out = []
    for a in t.levy:
        lo, hi = a.radial.support()
        lo = lo if lo > 0 else 1e-3
        hi = hi if math.isfinite(hi) else 1e3
        g = np.geomspace(lo, hi, n)
        if math.isfinite(a.radial.support()[1]):
            g = g[:-1]
        out.append({"r": g.tolist(), "density": np.asarray(a.radial.density(g), float).tolist()})
    return out


# ---------------------------------------------------------------------------
# subcommands; each returns (status_ok, result)

def cmd_validate(args, inputs):
    from .triplet import validate_triplet
    t, inputs["triplet_sha256"] = _load_triplet(args.triplet)
    rep = validate_triplet(t)
    return rep.ok, rep.to_dict()


def cmd_map(args, inputs):
    from .phi import apply_phi
    from .serialization import save_triplet
    t, inputs["triplet_sha256"] = _load_triplet(args.triplet)
    p, inputs["params_sha256"] = _params(args)
    out = apply_phi(t, p)
    if args.out_triplet:
        save_triplet(out, args.out_triplet)
    return True, {"params": p.to_dict(), "triplet": triplet_to_dict(out),
                  "triplet_hash": triplet_hash(out), "density_grid": _density_grid(out)}


def cmd_domain(args, inputs):
    from .phi import check_domain
    t, inputs["triplet_sha256"] = _load_triplet(args.triplet)
    p, inputs["params_sha256"] = _params(args)
    rep = check_domain(t, p)
    return rep.in_domain, {"params": p.to_dict(), **rep.to_dict()}


def cmd_membership(args, inputs):
    from .membership import is_k_alpha
    t, inputs["triplet_sha256"] = _load_triplet(args.triplet)
    rep = is_k_alpha(t, args.alpha)
    return rep.member, rep.to_dict()


def cmd_range(args, inputs):
    from .phi import range_check
    t, inputs["triplet_sha256"] = _load_triplet(args.triplet)
    p, inputs["params_sha256"] = _params(args)
    rep = range_check(t, p)
    return rep.member, {"params": p.to_dict(), "consistent": rep.member, **rep.to_dict()}


def cmd_decompose(args, inputs):
    from .membership import factor_decomposition
    t, inputs["triplet_sha256"] = _load_triplet(args.triplet)
    f = factor_decomposition(t, args.alpha, args.c)
    return True, f.to_dict()


def cmd_verify(args, inputs):
    from .membership import factor_decomposition, verify_decomposition
    t, inputs["triplet_sha256"] = _load_triplet(args.triplet)
    f = factor_decomposition(t, args.alpha, args.c)
    z = _z_grid(t.dim, args.z_max, args.n_z)
    res = verify_decomposition(t, f, z)
    ok = res <= args.threshold
    return ok, {"alpha": args.alpha, "c": args.c, "residual": res, "threshold": args.threshold,
                "z_points": len(z), "extended": f.extended}


def _sim_config(args, inputs):
    from .simulate import SimConfig
    d, inputs["sim_sha256"] = _load_json_arg(args.sim, "--sim")
    if args.seed is not None:
        d = {**d, "seed": args.seed}
    try:
        return SimConfig.from_dict(d)
    except (TypeError, ValueError) as e:
        raise InputError(f"--sim: {e}") from None


def cmd_simulate(args, inputs):
    from .simulate import simulate_phi_integral
    t, inputs["triplet_sha256"] = _load_triplet(args.triplet)
    p, inputs["params_sha256"] = _params(args)
    cfg = _sim_config(args, inputs)
    b = simulate_phi_integral(t, p, cfg)
    if args.csv:
        b.to_csv(args.csv)
    x = b.samples
    return True, {"params": p.to_dict(), "n_samples": b.n, "mean": x.mean(axis=0),
                  "covariance": np.atleast_2d(np.cov(x.T)), "provenance": b.provenance,
                  "csv": args.csv}


def cmd_compare(args, inputs):
    from .simulate import mc_compare
    t, inputs["triplet_sha256"] = _load_triplet(args.triplet)
    p, inputs["params_sha256"] = _params(args)
    cfg = _sim_config(args, inputs)
    rep = mc_compare(t, p, cfg, _z_grid(t.dim, args.z_max, args.n_z))
    return rep["pass"], {"params": p.to_dict(), **rep}


COMMANDS = {"validate": cmd_validate, "map": cmd_map, "domain": cmd_domain,
            "membership": cmd_membership, "range": cmd_range, "decompose": cmd_decompose,
            "verify": cmd_verify, "simulate": cmd_simulate, "compare": cmd_compare}


def _tol(s):
    v = float(s)
    if not TOL_RANGE[0] <= v <= TOL_RANGE[1]:
        raise argparse.ArgumentTypeError(f"tolerance must lie in [{TOL_RANGE[0]:g}, {TOL_RANGE[1]:g}]")
    return v


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="kalpha", description=__doc__.splitlines()[0])
    ap.add_argument("--version", action="version", version=f"kalpha {__version__}")
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--triplet", required=True, help="triplet JSON file")
    common.add_argument("--out", help="report path (default: stdout)")
    common.add_argument("--tol-quad", type=_tol)
    common.add_argument("--tol-inv", type=_tol)
    common.add_argument("--tol-limit", type=_tol)
    common.add_argument("--seed", type=int, help="overrides the seed in --sim")
    sub = ap.add_subparsers(dest="command", required=True)

    def add(name, help_):
        return sub.add_parser(name, parents=[common], help=help_)

    add("validate", "check triplet invariants")
    p = add("map", "apply the mapping to a triplet")
    p.add_argument("--params", required=True, help='JSON such as {"alpha": 0, "m": 0}, inline or a file')
    p.add_argument("--out-triplet", help="also write the mapped triplet here")
    for name, h in (("domain", "domain check"), ("range", "range check")):
        add(name, h).add_argument("--params", required=True)
    add("membership", "K_alpha membership").add_argument("--alpha", type=float, required=True)
    for name, h in (("decompose", "decomposition factor"), ("verify", "verify the decomposition")):
        p = add(name, h)
        p.add_argument("--alpha", type=float, required=True)
        p.add_argument("--c", type=float, required=True)
        if name == "verify":
            p.add_argument("--z-max", type=float, default=5.0)
            p.add_argument("--n-z", type=int, default=21)
            p.add_argument("--threshold", type=float, default=1e-7)
    for name, h in (("simulate", "Monte Carlo samples of the integral"),
                    ("compare", "empirical vs mapped characteristic function")):
        p = add(name, h)
        p.add_argument("--params", required=True)
        p.add_argument("--sim", required=True, help="SimConfig JSON, inline or a file")
        if name == "simulate":
            p.add_argument("--csv", help="write samples as CSV")
        else:
            p.add_argument("--z-max", type=float, default=5.0)
            p.add_argument("--n-z", type=int, default=21)
    return ap


def _write(report, path):
    text = json.dumps(_jsonable(report), sort_keys=True, indent=2, ensure_ascii=False) + "\n"
    if path:
        try:
            with open(path, "w", encoding="utf-8") as fh:
                fh.write(text)
        except OSError as e:
            raise InputError(f"cannot write {path}: {e.strerror}") from None
    else:
        sys.stdout.write(text)


def run(args) -> int:
    overrides = {k: v for k, v in (("quad", args.tol_quad), ("inv", args.tol_inv),
                                   ("limit", args.tol_limit)) if v is not None}
    inputs: dict = {}
    report = {"command": args.command, "version": __version__,
              "timestamp": _dt.datetime.now(_dt.timezone.utc).isoformat(timespec="seconds"),
              "tolerance_overrides": overrides, "inputs": inputs}
    try:
        with tolerances(**overrides):
            ok, result = COMMANDS[args.command](args, inputs)
        report.update(status="ok" if ok else "rejected", result=result)
        code = EXIT_OK if ok else EXIT_REJECT
    except InputError as e:
        print(f"kalpha: {e}", file=sys.stderr)
        return EXIT_INPUT
    except (NotInClass, DomainViolation, InvalidCutoff) as e:
        print(f"kalpha: {e}", file=sys.stderr)
        report.update(status="rejected", error={"type": type(e).__name__, "message": str(e)})
        code = EXIT_REJECT
    except (QuadratureNonConvergence, LimitNonConvergence) as e:
        print(f"kalpha: {e}", file=sys.stderr)
        report.update(status="numeric_failure", error={"type": type(e).__name__, "message": str(e)})
        code = EXIT_NUMERIC
    if code == EXIT_REJECT and report.get("status") == "rejected" and "error" not in report:
        print(f"kalpha: {args.command}: rejected", file=sys.stderr)
    try:
        _write(report, args.out)
    except InputError as e:
        print(f"kalpha: {e}", file=sys.stderr)
        return EXIT_INPUT
    return code


def main(argv=None) -> int:
    ap = build_parser()
    try:
        args = ap.parse_args(argv)
    except SystemExit as e:
        return EXIT_INPUT if e.code else EXIT_OK
    return run(args)


if __name__ == "__main__":
    sys.exit(main())
