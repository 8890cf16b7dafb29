"""Command-line interface: problem files in, verdicts and reports out.

Every command accepts --json PATH to dump a machine-readable report; the
JSON is stable across runs except for the timings block.  Exit codes:
0 a verdict or report was produced, 2 input error, 3 numerical failure,
4 unsupported structure.
"""

from __future__ import annotations

import argparse
import dataclasses
import hashlib
import json
import sys
import time

import numpy as np
import scipy.sparse as sp

from . import oracle as oracle_mod
from .assembly import as_discrete
from .certify import TOL_COND, certify, check_failure, classify_structure, find_gauge
from .errors import (
    BadGridSpec,
    DimMismatch,
    EmptySubdomain,
    EvalDomainError,
    NoConvergence,
    NonEllipticCoefficient,
    NonEllipticLinearization,
    NotIrreducible,
    NotNonnegative,
    NotZMatrix,
    ParseError,
    SingularMatrix,
    StructureUnsupported,
    TooLarge,
    ValidationError,
)
from .fields import block_from_solution, load_block, save_fields
from .problems import load_problem
from .quasilinear import QuasiSpec, check_thm8, linearize
from .spectral import MAX_ITER, TOL_EIG, component_eigen, cooperative_eigen

INPUT_ERRORS = (
    ParseError,
    ValidationError,
    EvalDomainError,
    BadGridSpec,
    EmptySubdomain,
    DimMismatch,
    TooLarge,
    OSError,
)
NUMERICAL_ERRORS = (NoConvergence, SingularMatrix, NotNonnegative)
STRUCTURE_ERRORS = (
    StructureUnsupported,
    NotZMatrix,
    NotIrreducible,
    NonEllipticCoefficient,
    NonEllipticLinearization,
)


def _add_common(sub: argparse.ArgumentParser) -> None:
    sub.add_argument("problem", help="problem file")
    sub.add_argument("--tol-eig", type=float, default=TOL_EIG)
    sub.add_argument("--tol-cond", type=float, default=TOL_COND)
    sub.add_argument("--max-iter", type=int, default=MAX_ITER)
    sub.add_argument(
        "--oracle-max-dof", type=int, default=oracle_mod.ORACLE_MAX_DOF
    )
    sub.add_argument("--mode", choices=("basic", "sharp"), default="basic")
    sub.add_argument("--json", metavar="PATH", help="write a JSON report")
    sub.add_argument("--seed", type=int, default=0)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="elcomp",
        description="comparison-principle certificates for weakly coupled "
        "elliptic systems",
    )
    commands = parser.add_subparsers(dest="command", required=True)

    sub = commands.add_parser("certify", help="run the full certificate pipeline")
    _add_common(sub)
    sub.add_argument("--no-oracle", action="store_true")

    sub = commands.add_parser("eigen", help="principal eigenvalue with enclosure")
    _add_common(sub)
    group = sub.add_mutually_exclusive_group()
    group.add_argument("--component", type=int, metavar="J")
    group.add_argument("--cooperative", action="store_true")

    sub = commands.add_parser("oracle", help="discrete inverse-positivity check")
    _add_common(sub)
    sub.add_argument("--gauge", action="store_true", help="apply the sign gauge")
    sub.add_argument("--probe", type=int, metavar="T", help="random probing only")

    sub = commands.add_parser("solve", help="solve the fully coupled system")
    _add_common(sub)
    group = sub.add_mutually_exclusive_group(required=True)
    group.add_argument("--rhs-from-file", metavar="FILE")
    group.add_argument("--builtin", action="store_true", help="use the problem data")
    sub.add_argument("--out", default="solution.field")

    sub = commands.add_parser("counterexample", help="search failure certificates")
    _add_common(sub)
    sub.add_argument("--out", help="write the counterexample field here")

    sub = commands.add_parser("gauge", help="species sign gauge, if one exists")
    _add_common(sub)

    sub = commands.add_parser("linearize", help="frozen coefficients for a pair")
    _add_common(sub)
    sub.add_argument("--sub", required=True, metavar="FILE")
    sub.add_argument("--super", dest="sup", required=True, metavar="FILE")

    sub = commands.add_parser("thm8", help="quasilinear comparison for a pair")
    _add_common(sub)
    sub.add_argument("--sub", required=True, metavar="FILE")
    sub.add_argument("--super", dest="sup", required=True, metavar="FILE")

    return parser


def _digest(paths) -> str:
    h = hashlib.sha256()
    for path in paths:
        with open(path, "rb") as fh:
            h.update(fh.read())
    return "sha256:" + h.hexdigest()


def _linear_spec(spec, command):
    if isinstance(spec, QuasiSpec):
        raise StructureUnsupported(
            f"{command} needs a linear problem; use thm8 --sub/--super for "
            "quasilinear systems"
        )
    return spec


def _quasi_spec(spec, command):
    if not isinstance(spec, QuasiSpec):
        raise StructureUnsupported(f"{command} needs a [quasilinear] problem")
    return spec


def _gauged_copy(asys, sigma):
    d_int = sp.diags(np.repeat(np.asarray(sigma, dtype=float), asys.n_int))
    d_bnd = sp.diags(
        np.repeat(np.asarray(sigma, dtype=float), asys.grid.n_boundary)
    )
    return dataclasses.replace(
        asys, A=(d_int @ asys.A @ d_int).tocsr(), G=(d_int @ asys.G @ d_bnd).tocsr()
    )


def _cmd_certify(args, spec):
    spec = _linear_spec(spec, "certify")
    verdict = certify(
        spec,
        mode=args.mode,
        with_oracle=not args.no_oracle,
        oracle_max_dof=args.oracle_max_dof,
        tol_eig=args.tol_eig,
        tol_cond=args.tol_cond,
        max_iter=args.max_iter,
    )
    print(f"verdict: {verdict.kind}")
    if verdict.theorem:
        print(f"theorem: {verdict.theorem}")
    for name, value in sorted(verdict.margins.items()):
        print(f"margin {name}: {value!r}")
    if verdict.value is not None:
        print(f"lambda: {verdict.value!r}")
    return verdict.to_json_dict()


def _cmd_eigen(args, spec):
    ds = as_discrete(_linear_spec(spec, "eigen"))
    if args.component is not None:
        pair = component_eigen(ds, args.component, args.tol_eig, args.max_iter)
        which = f"component {args.component}"
    else:
        pair = cooperative_eigen(ds, args.tol_eig, args.max_iter)
        which = "cooperative system"
    print(f"lambda ({which}): {pair.value!r}")
    print(f"enclosure: [{pair.cw[0]!r}, {pair.cw[1]!r}]")
    print(f"iterations: {pair.iterations}  residual: {pair.residual:.3e}")
    return {
        "lambda": pair.value,
        "cw": list(pair.cw),
        "component": args.component,
        "iterations": pair.iterations,
        "residual": pair.residual,
        "dof": len(pair.right),
    }


def _cmd_oracle(args, spec):
    ds = as_discrete(_linear_spec(spec, "oracle"))
    asys = ds.assemble("full")
    sigma = None
    reason = None
    if args.gauge:
        sigma, reason = find_gauge(ds)
        if sigma is None:
            raise StructureUnsupported(f"no sign gauge: {reason}")
    if args.probe is not None:
        target = _gauged_copy(asys, sigma) if sigma else asys
        report = oracle_mod.random_probe(target, args.probe, seed=args.seed)
        report.gauge = sigma
    else:
        report = oracle_mod.inverse_positivity(
            asys, gauge=sigma, max_dof=args.oracle_max_dof
        )
    print(f"inverse_positive: {report.inverse_positive}")
    if report.min_entry is not None:
        print(f"min entry: {report.min_entry!r} at {report.witness}")
    if sigma is not None:
        print(f"gauge: {sigma}")
    return {
        "oracle": report.to_json_dict(),
        "gauge": list(sigma) if sigma else None,
        "gauge_reason": reason,
    }


def _cmd_solve(args, spec):
    ds = as_discrete(_linear_spec(spec, "solve"))
    asys = ds.assemble("full")
    if args.rhs_from_file:
        rhs_field = load_block(args.rhs_from_file, ds.grid, ds.n_species)
        rhs = rhs_field.interior.reshape(-1)
        source = "file"
    else:
        rhs = None
        source = "builtin"
    u = oracle_mod.solve_system(asys, rhs=rhs)
    fld = block_from_solution(ds.grid, ds.n_species, u, asys.g_vec)
    save_fields(args.out, fld)
    f_vec = asys.f_vec if rhs is None else rhs
    residual = float(np.abs(asys.A @ u + asys.G @ asys.g_vec - f_vec).max())
    print(f"solved {asys.A.shape[0]} unknowns, residual {residual:.3e}")
    print(f"wrote {args.out}")
    return {
        "out": args.out,
        "rhs": source,
        "u_min": float(u.min()),
        "u_max": float(u.max()),
        "residual": residual,
    }


def _cmd_counterexample(args, spec):
    ds = as_discrete(_linear_spec(spec, "counterexample"))
    notes: list = []
    verdict = check_failure(
        ds, args.tol_eig, args.tol_cond, args.max_iter, diagnostics=notes
    )
    if verdict is None:
        print("no verified failure certificate")
        return {
            "verdict": "Inconclusive",
            "notes": notes + ["no verified failure certificate"],
        }
    print(f"verdict: {verdict.kind} (species {verdict.j})")
    print(f"residual_max: {verdict.counterexample.residual_max:.3e}")
    if args.out:
        save_fields(args.out, verdict.counterexample.w)
        print(f"wrote {args.out}")
    out = verdict.to_json_dict()
    out["notes"] = out["notes"] + notes
    return out


def _cmd_gauge(args, spec):
    ds = as_discrete(_linear_spec(spec, "gauge"))
    sigma, reason = find_gauge(ds)
    if sigma is None:
        print(f"no gauge: {reason}")
    else:
        print(f"gauge: {sigma}")
    return {
        "gauge": list(sigma) if sigma is not None else None,
        "gauge_reason": reason,
    }


def _load_pair(args, qs):
    u = load_block(args.sub, qs.grid, qs.n_species)
    v = load_block(args.sup, qs.grid, qs.n_species)
    return u, v


def _cmd_linearize(args, spec):
    qs = _quasi_spec(spec, "linearize")
    u, v = _load_pair(args, qs)
    lin = linearize(qs, u, v)
    ds = lin.to_discrete()
    ell = ds.check_ellipticity()
    n = ds.n_species
    ids = ds.grid.interior_ids
    m_ranges = [
        [
            [float(ds.m_vals[k, l][ids].min()), float(ds.m_vals[k, l][ids].max())]
            for l in range(n)
        ]
        for k in range(n)
    ]
    structure = classify_structure(ds)
    print(f"ellipticity per species: {[[round(a, 6) for a in e] for e in ell]}")
    print(f"structure: {structure.kind}")
    return {
        "ellipticity": [[float(a), float(b)] for a, b in ell],
        "m_ranges": m_ranges,
        "structure": structure.to_json_dict(),
    }


def _cmd_thm8(args, spec):
    qs = _quasi_spec(spec, "thm8")
    u, v = _load_pair(args, qs)
    verdict = check_thm8(
        qs,
        u,
        v,
        mode=args.mode,
        oracle_max_dof=args.oracle_max_dof,
        tol_eig=args.tol_eig,
        tol_cond=args.tol_cond,
        max_iter=args.max_iter,
    )
    print(f"verdict: {verdict.kind}")
    if verdict.theorem:
        print(f"theorem: {verdict.theorem}")
    return verdict.to_json_dict()


_COMMANDS = {
    "certify": _cmd_certify,
    "eigen": _cmd_eigen,
    "oracle": _cmd_oracle,
    "solve": _cmd_solve,
    "counterexample": _cmd_counterexample,
    "gauge": _cmd_gauge,
    "linearize": _cmd_linearize,
    "thm8": _cmd_thm8,
}


def run(command: str, flags) -> int:
    """Programmatic entry point mirroring the console script."""
    return main([command, *flags])


def main(argv=None) -> int:
    from . import __version__

    args = build_parser().parse_args(argv)
    started = time.perf_counter()
    payload = {
        "command": args.command,
        "problem": args.problem,
        "tool_version": __version__,
        "errors": [],
    }
    exit_code = 0
    try:
        paths = [args.problem]
        if getattr(args, "sub", None):
            paths += [args.sub, args.sup]
        if getattr(args, "rhs_from_file", None):
            paths.append(args.rhs_from_file)
        payload["input_digest"] = _digest(paths)
        spec = load_problem(args.problem)
        payload.update(_COMMANDS[args.command](args, spec))
    except INPUT_ERRORS as err:
        exit_code = 2
        payload["errors"].append({"type": type(err).__name__, "message": str(err)})
    except NUMERICAL_ERRORS as err:
        exit_code = 3
        payload["errors"].append({"type": type(err).__name__, "message": str(err)})
    except STRUCTURE_ERRORS as err:
        exit_code = 4
        payload["errors"].append({"type": type(err).__name__, "message": str(err)})
    if payload["errors"]:
        print(
            f"error: {payload['errors'][0]['type']}: "
            f"{payload['errors'][0]['message']}",
            file=sys.stderr,
        )
    payload["timings"] = {"total_s": time.perf_counter() - started}
    if args.json:
        with open(args.json, "w", encoding="utf-8") as fh:
            fh.write(json.dumps(payload, sort_keys=True, indent=2) + "\n")
    return exit_code


if __name__ == "__main__":
    sys.exit(main())
