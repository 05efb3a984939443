"""Command-line front end: single solves, noise-level sweeps, and residual curves.

Subcommands
-----------
``monoreg solve --spec FILE [--out FILE] [--seed N]``
    Run the full parameter-choice pipeline once; emit a JSON record.
``monoreg sweep --spec FILE [--out FILE] [--seed N]``
    One pipeline run per noise level; emit CSV ordered by decreasing delta.
``monoreg phi-curve --spec FILE [--out FILE] [--seed N]``
    Tabulate the data discrepancy and solution norm over a parameter grid.

The problem spec is a JSON file; see the README for the schema.  Output is
deterministic: identical spec and seed give byte-identical files.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from dataclasses import dataclass, replace
from typing import Optional

import numpy as np

from .discrepancy import (
    ConfigError,
    DiscrepancyConfig,
    DiscrepancyResult,
    Status,
    phi_psi,
    solve_discrepancy,
    solve_discrepancy_shifted,
)
from .problems import (
    build_cubic,
    build_diagonal,
    build_fredholm,
    build_rank_one,
    oracle_phi_psi,
)
from .solve import IterationConfig, SolverError
from .space import ensure_vector

SWEEP_HEADER = "delta,alpha,phi,psi,err_to_y,inner_iters"
CURVE_HEADER = "a,phi,psi,violation"

EXIT_OK = 0
EXIT_WARN = 1
EXIT_SPEC = 2
EXIT_SOLVER = 3


class SpecError(ValueError):
    """Malformed or inconsistent run spec."""


@dataclass
class RunSpec:
    problem: object
    deltas: list[float]
    cfg: DiscrepancyConfig
    solver: IterationConfig
    seed: int
    u_bar: Optional[np.ndarray]
    a_grid: Optional[list[float]]
    solves: str


def _build_problem(rec: dict):
    kind = rec.get("kind")
    if kind == "diagonal":
        decay_rec = rec.get("decay", {"poly": 2.0})
        if "poly" in decay_rec:
            decay = ("poly", float(decay_rec["poly"]))
        elif "exp" in decay_rec:
            decay = ("exp", float(decay_rec["exp"]))
        else:
            raise SpecError(f"diagonal decay must give 'poly' or 'exp': {decay_rec}")
        return build_diagonal(int(rec["n"]), decay, rec.get("y"))
    if kind == "fredholm":
        return build_fredholm(int(rec["n"]))
    if kind == "cubic":
        return build_cubic(int(rec["n"]), rec.get("A"), rec.get("y"))
    if kind == "rank_one":
        return build_rank_one(int(rec["dim"]))
    raise SpecError(f"unknown problem kind {kind!r}")


def parse_spec(raw: dict, seed_override: Optional[int] = None) -> RunSpec:
    """Validate the JSON record and build all config objects up front."""
    try:
        problem = _build_problem(raw["problem"])
        deltas = raw["delta"]
        if isinstance(deltas, (int, float)):
            deltas = [float(deltas)]
        else:
            deltas = [float(d) for d in deltas]
        cfg = DiscrepancyConfig(**raw.get("discrepancy", {}))
        solver = IterationConfig(**raw.get("solver", {}))
        seed = int(raw.get("seed", 0)) if seed_override is None else seed_override
        u_bar = raw.get("u_bar")
        if u_bar is not None:
            u_bar = ensure_vector(u_bar, problem.operator.dim)
        a_grid = _parse_grid(raw.get("a_grid"))
        solves = raw.get("solves", "oracle")
        if solves not in ("oracle", "iterative"):
            raise SpecError(f"solves must be 'oracle' or 'iterative', got {solves!r}")
        for d in deltas:
            cfg.validate(d)
    except SpecError:
        raise
    except (KeyError, TypeError, ValueError) as exc:
        raise SpecError(str(exc)) from exc
    return RunSpec(problem=problem, deltas=deltas, cfg=cfg, solver=solver,
                   seed=seed, u_bar=u_bar, a_grid=a_grid, solves=solves)


def _parse_grid(rec) -> Optional[list[float]]:
    if rec is None:
        return None
    if isinstance(rec, dict):
        grid = np.geomspace(float(rec["min"]), float(rec["max"]), int(rec["num"]))
        return [float(a) for a in grid]
    grid = [float(a) for a in rec]
    if any(a <= 0 for a in grid):
        raise SpecError("a_grid entries must be > 0")
    return grid


def _fmt(x: float) -> str:
    return f"{x:.17g}"


def _jsonable(x):
    if isinstance(x, float) and not math.isfinite(x):
        return None
    return x


def _run_pipeline(spec: RunSpec, delta: float) -> tuple[DiscrepancyResult, object]:
    prob = spec.problem.noisy(delta, seed=spec.seed)
    if spec.u_bar is not None:
        res = solve_discrepancy_shifted(prob.operator, prob.f_delta, delta, spec.u_bar,
                                        spec.cfg, spec.solver)
    else:
        res = solve_discrepancy(prob.operator, prob.f_delta, delta, spec.cfg, spec.solver)
    return res, prob


def cmd_solve(spec: RunSpec) -> tuple[int, str]:
    res, prob = _run_pipeline(spec, spec.deltas[0])
    record = {
        "status": res.status.value,
        "delta": prob.delta,
        "alpha": _jsonable(res.alpha),
        "phi_value": res.phi_value,
        "total_inner_iters": res.total_inner_iters,
        "bracket": [_jsonable(res.bracket[0]), _jsonable(res.bracket[1])],
        "err_to_y": float(np.linalg.norm(res.v_delta - prob.y)) if prob.y is not None else None,
        "v_delta": [float(x) for x in res.v_delta],
    }
    code = EXIT_OK if res.status in (Status.CONVERGED, Status.ZERO_WITHIN_DISCREPANCY) else EXIT_WARN
    return code, json.dumps(record, indent=2) + "\n"


def cmd_sweep(spec: RunSpec) -> tuple[int, str]:
    rows = [SWEEP_HEADER]
    worst = EXIT_OK
    for delta in sorted(spec.deltas, reverse=True):
        res, prob = _run_pipeline(spec, delta)
        if prob.y is None:
            raise SpecError("sweep needs a problem with a known solution")
        err = float(np.linalg.norm(res.v_delta - prob.y))
        psi = float(np.linalg.norm(res.v_delta))
        rows.append(",".join([
            _fmt(delta), _fmt(res.alpha), _fmt(res.phi_value), _fmt(psi),
            _fmt(err), str(res.total_inner_iters),
        ]))
        if res.status == Status.NARROW_INTERVAL_WARNING:
            worst = EXIT_WARN
    return worst, "\n".join(rows) + "\n"


def cmd_phi_curve(spec: RunSpec) -> tuple[int, str]:
    if spec.a_grid is None:
        raise SpecError("phi-curve needs an a_grid")
    delta = spec.deltas[0]
    prob = spec.problem.noisy(delta, seed=spec.seed)
    rows = [CURVE_HEADER]
    prev_phi, prev_psi = -math.inf, math.inf
    for a in spec.a_grid:
        if spec.solves == "oracle":
            phi, psi, _ = oracle_phi_psi(spec.problem, a, prob.f_delta)
        else:
            icfg = replace(spec.solver, theta=spec.cfg.theta, delta=delta)
            phi, psi, _ = phi_psi(prob.operator, prob.f_delta, a, icfg)
        violation = int(phi <= prev_phi or psi >= prev_psi)
        rows.append(",".join([_fmt(a), _fmt(phi), _fmt(psi), str(violation)]))
        prev_phi, prev_psi = phi, psi
    return EXIT_OK, "\n".join(rows) + "\n"


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="monoreg",
        description="Discrepancy-principle solver for monotone operator equations with noisy data.")
    sub = parser.add_subparsers(dest="command", required=True)
    for name in ("solve", "sweep", "phi-curve"):
        p = sub.add_parser(name)
        p.add_argument("--spec", required=True, help="path to the JSON problem spec")
        p.add_argument("--out", default=None, help="output path (default: stdout)")
        p.add_argument("--seed", type=int, default=None, help="override the spec seed")
    args = parser.parse_args(argv)

    try:
        with open(args.spec) as fh:
            raw = json.load(fh)
        spec = parse_spec(raw, seed_override=args.seed)
    except (OSError, json.JSONDecodeError, SpecError, ConfigError, ValueError) as exc:
        print(f"spec error: {exc}", file=sys.stderr)
        return EXIT_SPEC

    try:
        if args.command == "solve":
            code, text = cmd_solve(spec)
        elif args.command == "sweep":
            code, text = cmd_sweep(spec)
        else:
            code, text = cmd_phi_curve(spec)
    except SpecError as exc:
        print(f"spec error: {exc}", file=sys.stderr)
        return EXIT_SPEC
    except SolverError as exc:
        print(f"solver error: {exc}", file=sys.stderr)
        return EXIT_SOLVER

    if args.out:
        with open(args.out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return code


if __name__ == "__main__":
    sys.exit(main())
