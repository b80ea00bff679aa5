"""Command-line interface: ``bikraw {kernel,spectrum,poly,ninej,simulate,replay}``.

Every command prints one document to stdout (JSON by default) with keys
``schema_version``, ``command``, ``inputs`` and ``results``. Rationals are
written as ``{"num": "..", "den": ".."}`` and floats as 17-significant-digit
strings. Exit status: 0 when every check passes, 1 when a check fails,
2 on bad input.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import sys
from fractions import Fraction

import numpy as np

from . import __version__
from .angular import NineJArgs, ninej, ninej_orthocheck
from .chain import (KERNELS, ORIENTATION, ChainParams, build_state_space, discriminant,
                    eigenvalues_analytic, fixed_point_residuals, solve_fixed_points,
                    stationary_distribution, verify_spectrum)
from .montecarlo import GENERATOR, SimConfig, estimate_kernel, run_chain, tv_distance
from .poly import (DegenerateWeightError, PParams, TUVWParams, eta_from_p, etabar_from_p, grid,
                   orthonormal_R, orthonormality_gram, poly_P, tuvw_from_p)
from .surd import Surd

SCHEMA_VERSION = "1"
FLOAT_TOL = 1e-12


class BadInput(Exception):
    pass


# ---------------------------------------------------------------------------
# serialization


def encode(x):
    if isinstance(x, bool) or x is None or isinstance(x, str):
        return x
    if isinstance(x, (int, np.integer)):
        return int(x)
    if isinstance(x, Fraction):
        return {"num": str(x.numerator), "den": str(x.denominator)}
    if isinstance(x, (float, np.floating)):
        return format(float(x), ".17g")
    if isinstance(x, Surd):
        return {"coefficient": encode(x.coefficient), "radicand": encode(x.radicand), "float": encode(float(x))}
    if isinstance(x, dict):
        return {str(k): encode(v) for k, v in x.items()}
    if isinstance(x, (list, tuple, np.ndarray)):
        return [encode(v) for v in x]
    raise TypeError(f"cannot serialize {type(x).__name__}")


def _state(s):
    return [int(s[0]), int(s[1])]


def parse_scalar(text: str, flag: str):
    """``a/b`` or an integer gives a Fraction; a decimal gives a float."""
    text = text.strip()
    try:
        if any(c in text for c in ".eE") and "/" not in text:
            return float(text)
        return Fraction(text)
    except (ValueError, ZeroDivisionError):
        raise BadInput(f"{flag}: cannot parse {text!r} as a number")


def _canon(x) -> str:
    return str(x) if isinstance(x, Fraction) else repr(float(x))


def _chain_params(ns) -> ChainParams:
    vals = {}
    for name in ("alpha1", "alpha2", "beta1", "beta2"):
        vals[name] = parse_scalar(getattr(ns, name), f"--{name}")
    backend = ns.backend
    if backend is None:
        backend = "exact" if all(isinstance(v, Fraction) for v in vals.values()) else "float"
    if backend == "exact":
        vals = {k: Fraction(getattr(ns, k)) if isinstance(v, float) else v for k, v in vals.items()}
    else:
        vals = {k: float(v) for k, v in vals.items()}
    ns.backend = backend
    if ns.n < 1:
        raise BadInput("--n must be a positive integer")
    for name, v in vals.items():
        if not 0 < v < 1:
            raise BadInput(f"--{name} must lie strictly between 0 and 1, got {_canon(v)}")
    if not vals["beta1"] + vals["beta2"] < 1:
        raise BadInput("--beta1 + --beta2 must be less than 1")
    return ChainParams(ns.n, vals["alpha1"], vals["alpha2"], vals["beta1"], vals["beta2"])


def _chain_inputs(ns, params: ChainParams) -> dict:
    return {"n": params.N, "alpha1": _canon(params.alpha1), "alpha2": _canon(params.alpha2),
            "beta1": _canon(params.beta1), "beta2": _canon(params.beta2), "backend": ns.backend}


def _zero_ok(x, exact: bool) -> bool:
    return x == 0 if exact else abs(float(x)) < FLOAT_TOL


# ---------------------------------------------------------------------------
# commands; each returns (inputs, results, ok)


def cmd_kernel(ns):
    params = _chain_params(ns)
    inputs = _chain_inputs(ns, params) | {"evaluator": ns.evaluator, "format": ns.format}
    names = list(KERNELS) if ns.evaluator == "all" else [ns.evaluator]
    mats = {name: KERNELS[name](params) for name in names}
    K = mats[names[0]]
    exact = params.exact
    sums = K.column_sums()
    ok = all(_zero_ok(s - 1, exact) for s in sums)
    results = {
        "orientation": ORIENTATION,
        "states": [_state(s) for s in K.space.states],
        "matrix": K.entries.tolist(),
        "max_column_sum_defect": max(abs(s - 1) for s in sums),
    }
    if ns.evaluator == "all":
        disc = max(abs(a - b) for A in mats.values() for B in mats.values()
                   for a, b in zip(A.entries.flat, B.entries.flat))
        results["max_cross_evaluator_discrepancy"] = disc
        ok = ok and _zero_ok(disc, exact)
    return inputs, results, ok


def cmd_spectrum(ns):
    params = _chain_params(ns)
    inputs = _chain_inputs(ns, params) | {"arbitrate": ns.arbitrate}
    sols = solve_fixed_points(params)
    d1, d2 = discriminant(params)
    fams = eigenvalues_analytic(params, sols)
    exact = params.exact
    ok = d1 == d2 if exact else abs(d1 - d2) < FLOAT_TOL
    fixed = []
    for s in sols:
        res = fixed_point_residuals(params, s)
        fixed.append({"branch": s.branch, "degenerate": s.degenerate, "t": s.t, "u": s.u, "v": s.v, "w": s.w,
                      "residuals": res})
        ok = ok and all(_zero_ok(res[k], isinstance(res[k], Fraction)) for k in "tuvw")
    for fam in fams.values():
        ok = ok and fam[(0, 0)] == 1
    results = {
        "discriminant": [d1, d2],
        "fixed_points": fixed,
        "candidates": {name: [{"m": m, "n": n, "lambda": v} for (m, n), v in fam.items()]
                       for name, fam in fams.items()},
    }
    if ns.arbitrate:
        rep = verify_spectrum(params)
        results["arbitration"] = rep
        ok = ok and rep["verdict"] not in ("none", "ambiguous")
    return inputs, results, ok


def _csv_floats(text: str, flag: str, count: int):
    parts = text.split(",")
    if len(parts) != count:
        raise BadInput(f"{flag} needs {count} comma-separated values")
    return [parse_scalar(p, flag) for p in parts]


def cmd_poly(ns):
    if (ns.p is None) == (ns.tuvw is None):
        raise BadInput("give exactly one of --p and --tuvw")
    N = ns.n
    if N < 0:
        raise BadInput("--n must be nonnegative")
    inputs = {"n": N, "p": ns.p, "tuvw": ns.tuvw, "m": ns.m, "mm": ns.mm}
    if (ns.m is None) != (ns.mm is None):
        raise BadInput("--m and --mm must be given together")
    degrees = grid(N) if ns.m is None else [(ns.m, ns.mm)]
    if ns.m is not None and (min(ns.m, ns.mm) < 0 or ns.m + ns.mm > N):
        raise BadInput("--m + --mm must not exceed --n")
    results = {}
    ok = True
    if ns.p is not None:
        vals = _csv_floats(ns.p, "--p", 4)
        if not all(isinstance(v, Fraction) for v in vals):
            raise BadInput("--p must be rational (integers or a/b)")
        try:
            p = PParams.of(vals)
        except ValueError as exc:
            raise BadInput(f"--p: {exc}")
        if p.degenerate:
            raise BadInput("--p: p1*p4 == p2*p3, the weight is degenerate")
        params = tuvw_from_p(p)
        eta, etabar = eta_from_p(p), etabar_from_p(p)
        results["eta"] = [eta.eta1, eta.eta2]
        results["etabar"] = [etabar.eta1, etabar.eta2]
    else:
        params = TUVWParams(*_csv_floats(ns.tuvw, "--tuvw", 4))
        p = None
    results["tuvw"] = list(params.as_tuple())
    table = []
    for m, n in degrees:
        for x, y in grid(N):
            row = {"m": m, "n": n, "x": x, "y": y, "P": poly_P(m, n, x, y, N, params)}
            if p is not None:
                row["R"] = orthonormal_R(m, n, x, y, N, p)
            table.append(row)
    results["table"] = table
    if p is not None:
        G = orthonormality_gram(N, p)
        pts = grid(N)
        defect = max(abs((G[i][j] - (1 if i == j else 0)).square()) for i in range(len(pts)) for j in range(len(pts)))
        results["orthonormality_residual"] = defect
        ok = defect == 0
    return inputs, results, ok


def cmd_ninej(ns):
    inputs = {"args": ns.args, "orthocheck": ns.orthocheck}
    results = {}
    ok = True
    if ns.args is None and ns.orthocheck is None:
        raise BadInput("give --args or --orthocheck")
    if ns.args is not None:
        try:
            tj = [int(v) for v in ns.args.replace(",", " ").split()]
        except ValueError:
            raise BadInput("--args must be nine integers (two_j values)")
        if len(tj) != 9:
            raise BadInput("--args must be nine integers (two_j values)")
        if min(tj) < 0:
            raise BadInput("--args: two_j values must be nonnegative")
        results["value"] = ninej(NineJArgs.from_two_j(tj))
    if ns.orthocheck is not None:
        if ns.orthocheck < 0:
            raise BadInput("--orthocheck must be nonnegative")
        rep = ninej_orthocheck(ns.orthocheck)
        results["orthocheck"] = rep
        ok = rep["failures"] == 0
    return inputs, results, ok


def cmd_simulate(ns):
    params = _chain_params(ns)
    inputs = _chain_inputs(ns, params) | {"seed": ns.seed, "steps": ns.steps, "replicas": ns.replicas,
                                          "mode": ns.mode, "tv_tol": ns.tv_tol}
    if ns.steps < 1 or ns.replicas < 1:
        raise BadInput("--steps and --replicas must be positive")
    if not 0 <= ns.seed < 2 ** 64:
        raise BadInput("--seed must be a 64-bit unsigned integer")
    config = SimConfig(ns.seed, ns.replicas, ns.steps, params, workers=ns.workers)
    space = build_state_space(params.N)
    results = {"generator": GENERATOR, "seed": ns.seed, "states": [_state(s) for s in space.states]}
    if ns.mode == "kernel":
        emp = estimate_kernel(config)
        exact = KERNELS["closed"](params).as_float()
        est = emp.estimates()
        tvs = [tv_distance(est[:, c], exact[:, c]) for c in range(len(space))]
        results |= {"draws_per_source": emp.totals.tolist(), "counts": emp.counts.tolist(),
                    "column_tv": tvs, "max_column_tv": max(tvs)}
        ok = max(tvs) < ns.tv_tol
    else:
        psi = np.array([float(v) for v in stationary_distribution(params)])
        run = run_chain(config, reference=psi)
        tv = tv_distance(run.frequencies(), psi)
        results |= {"burn_in_per_replica": run.burn_in, "occupancy": run.occupancy.tolist(),
                    "tv_to_stationary": tv,
                    "checkpoints": [{"steps": s, "tv": v} for s, v in run.checkpoints],
                    "lag1_autocorrelation": run.lag1_autocorrelation}
        ok = tv < ns.tv_tol
    return inputs, results, ok


COMMANDS = {"kernel": cmd_kernel, "spectrum": cmd_spectrum, "poly": cmd_poly, "ninej": cmd_ninej,
            "simulate": cmd_simulate}


# ---------------------------------------------------------------------------
# argument parsing


def _add_chain_flags(sp):
    sp.add_argument("--n", type=int, required=True, help="number of dice N")
    for name in ("alpha1", "alpha2", "beta1", "beta2"):
        sp.add_argument(f"--{name}", required=True, help="probability, a/b or decimal")
    sp.add_argument("--backend", choices=["exact", "float"], default=None,
                    help="default: exact if every probability is rational syntax")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="bikraw", description=__doc__.splitlines()[0])
    ap.add_argument("--version", action="version", version=__version__)
    sub = ap.add_subparsers(dest="command", required=True)

    sp = sub.add_parser("kernel", help="transition matrix of the chain")
    _add_chain_flags(sp)
    sp.add_argument("--format", choices=["json", "csv"], default="json")
    sp.add_argument("--evaluator", choices=["conv", "closed", "f3", "all"], default="closed")

    sp = sub.add_parser("spectrum", help="fixed points, analytic and numeric eigenvalues")
    _add_chain_flags(sp)
    sp.add_argument("--arbitrate", action="store_true", help="match the dense spectrum against each family")

    sp = sub.add_parser("poly", help="table of P_{m,n}(x, y), and R_{m,n} with --p")
    sp.add_argument("--n", type=int, required=True)
    sp.add_argument("--p", help="p1,p2,p3,p4 (positive rationals)")
    sp.add_argument("--tuvw", help="t,u,v,w")
    sp.add_argument("--m", type=int, help="first degree")
    sp.add_argument("--mm", type=int, help="second degree")

    sp = sub.add_parser("ninej", help="exact 9-j symbol")
    sp.add_argument("--args", help="nine two_j integers, row-major")
    sp.add_argument("--orthocheck", type=int, metavar="MAX_TWO_J", help="batch orthogonality check")

    sp = sub.add_parser("simulate", help="Monte Carlo estimates against the exact oracles")
    _add_chain_flags(sp)
    sp.add_argument("--seed", type=int, required=True)
    sp.add_argument("--steps", type=int, required=True, help="steps per replica (draws per source in kernel mode)")
    sp.add_argument("--replicas", type=int, default=1)
    sp.add_argument("--mode", choices=["kernel", "stationary"], default="kernel")
    sp.add_argument("--workers", type=int, default=1)
    sp.add_argument("--tv-tol", dest="tv_tol", type=float, default=0.01)

    sp = sub.add_parser("replay", help="re-run a document from its echoed inputs and compare results")
    sp.add_argument("document")
    return ap


def _kernel_csv(results) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    states = results["states"]
    w.writerow(["source\\destination"] + [f"({a},{b})" for a, b in states])
    M = results["matrix"]
    for c, src in enumerate(states):
        w.writerow([f"({src[0]},{src[1]})"] + [str(M[r][c]) for r in range(len(states))])
    return buf.getvalue()


def render(command, inputs, results) -> str:
    doc = {"schema_version": SCHEMA_VERSION, "command": command, "inputs": inputs, "results": encode(results)}
    return json.dumps(doc, indent=2) + "\n"


def _argv_from_inputs(command: str, inputs: dict) -> list[str]:
    argv = [command]
    for key, val in inputs.items():
        if val is None or val is False:
            continue
        flag = "--" + key.replace("_", "-")
        argv += [flag] if val is True else [flag, str(val)]
    return argv


def run(argv=None, out=None) -> int:
    out = out or sys.stdout
    ap = build_parser()
    ns = ap.parse_args(argv)
    try:
        if ns.command == "replay":
            return _replay(ns.document, out)
        inputs, results, ok = COMMANDS[ns.command](ns)
    except (BadInput, DegenerateWeightError) as exc:
        print(f"bikraw {ns.command}: {exc}", file=sys.stderr)
        return 2
    if ns.command == "kernel" and ns.format == "csv":
        out.write(_kernel_csv(results | {"matrix": [[str(v) for v in row] for row in results["matrix"]]}))
    else:
        out.write(render(ns.command, inputs, results))
    return 0 if ok else 1


def _replay(path: str, out) -> int:
    try:
        with open(path) as fh:
            doc = json.load(fh)
        command, inputs = doc["command"], doc["inputs"]
    except (OSError, ValueError, KeyError) as exc:
        print(f"bikraw replay: unreadable document: {exc}", file=sys.stderr)
        return 2
    buf = io.StringIO()
    code = run(_argv_from_inputs(command, inputs), buf)
    if code == 2:
        return 2
    again = json.loads(buf.getvalue())
    identical = json.dumps(again["results"], sort_keys=True) == json.dumps(doc["results"], sort_keys=True)
    out.write(render("replay", {"document": path}, {"command": command, "identical": identical, "exit_code": code}))
    return 0 if identical else 1


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
