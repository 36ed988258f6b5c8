"""Command-line front end.

    lorentz-vi solve  --input problem.json [--format table|csv]
    lorentz-vi table  --input problem.json --rows 12 [--format table|csv]
    lorentz-vi verify --input problem.json --witness "15,15,6,8" --certificate omega --variant theorem
    lorentz-vi props  [--samples 10000]

Exit codes: 0 success / predicate holds, 1 input error, 2 iteration cap,
3 predicate fails.
"""
from __future__ import annotations

import argparse
import json
import sys
from contextlib import contextmanager

import numpy as np

from .cone_order import ExtendedLorentzCone, SplitPoint, dual_pairing_nonnegative, generators, minimal_generator_count
from .problems import (
    OrderedPairSampler,
    ProblemDescription,
    ProblemDescriptionError,
    build_problem,
    example_f1,
    example_f2,
    isotone_harness,
    load_description,
    paper_example_problem,
)
from .projections import Ball, Box, CylinderSet
from .vi_solver import (
    IterationTrace,
    MapEvaluationError,
    SolveConfig,
    check_start_condition,
    gamma_certificate,
    omega_certificate,
    picard_step,
    natural_map_residual,
    solve,
    verify_vi_solution,
)

EXIT_OK, EXIT_INPUT, EXIT_CAP, EXIT_FAILS = 0, 1, 2, 3


class InputError(Exception):
    pass


def _fmt(v: float) -> str:
    return f"{round(float(v), 6) + 0.0:.6f}"


def _fmt_point(z: SplitPoint) -> str:
    return "(" + ", ".join(_fmt(v) for v in z.vector()) + ")"


def _load(path: str) -> ProblemDescription:
    try:
        return load_description(path)
    except OSError as err:
        raise InputError(f"cannot read {path}: {err.strerror or err}") from None
    except json.JSONDecodeError as err:
        raise InputError(f"{path}: invalid JSON at line {err.lineno}, column {err.colno}: {err.msg}") from None
    except ProblemDescriptionError as err:
        raise InputError(f"{path}: field {err}") from None


def _problem_and_start(args):
    desc = _load(args.input)
    try:
        problem = build_problem(desc)
        cfg = desc.solve_config(
            max_iters=getattr(args, "max_iters", None),
            residual_tol=getattr(args, "tol", None),
            order_tol=getattr(args, "order_tol", None),
        )
    except ProblemDescriptionError as err:
        raise InputError(f"{args.input}: field {err}") from None
    if desc.start is None:
        raise InputError(f"{args.input}: field start: a start point is required")
    return problem, desc.start, cfg


def _parse_witness(text: str, p: int, q: int) -> SplitPoint:
    try:
        values = [float(t) for t in text.replace(" ", "").split(",") if t]
    except ValueError:
        raise InputError(f"--witness: expected comma-separated numbers, got {text!r}") from None
    if len(values) != p + q or not np.all(np.isfinite(values)):
        raise InputError(f"--witness: expected {p + q} finite numbers, got {len(values)}")
    return SplitPoint.from_vector(values, p)


@contextmanager
def _output(path: str | None):
    if path is None:
        yield sys.stdout
    else:
        with open(path, "w") as fh:
            yield fh


def _human_table(trace: IterationTrace) -> str:
    p, q = trace.points[0].shape
    head = ["n", *(f"x{i + 1}" for i in range(p)), *(f"u{j + 1}" for j in range(q))]
    rows = [[str(n), *(_fmt(v) for v in z.vector())] for n, z in enumerate(trace.points)]
    widths = [max(len(r[c]) for r in [head, *rows]) for c in range(len(head))]
    lines = ["  ".join(cell.rjust(w) for cell, w in zip(r, widths)) for r in [head, *rows]]
    return "\n".join(lines) + "\n"


def cmd_solve(args) -> int:
    problem, z0, cfg = _problem_and_start(args)
    try:
        result = solve(problem, z0, cfg)
    except MapEvaluationError as err:
        raise InputError(f"map evaluation failed: {err}") from None
    z, trace, status = result
    with _output(args.output) as out:
        if args.format == "csv":
            out.write(trace.to_csv())
        else:
            start = trace.points[0]
            direct, sufficient = check_start_condition(problem, start, tol=cfg.order_tol)
            gamma = gamma_certificate(problem, start, z, "proposition", tol=max(cfg.order_tol, 1e-10))
            out.write(f"status: {status}\n")
            out.write(f"iterations: {len(trace) - 1}\n")
            out.write(f"point: {_fmt_point(z)}\n")
            out.write(f"residual: {trace.residuals[-1]:.3e}\n")
            out.write(f"start projected onto K: {str(trace.start_projected).lower()}\n")
            out.write(f"start condition: direct={str(direct).lower()} sufficient={str(sufficient).lower()}\n")
            out.write(f"monotone steps: {sum(trace.monotone_flags)}/{len(trace.monotone_flags)}\n")
            out.write(f"limit as gamma witness: {gamma.summary()}\n")
    return EXIT_OK if status == "converged" else EXIT_CAP


def cmd_table(args) -> int:
    problem, z0, cfg = _problem_and_start(args)
    if args.rows < 1:
        raise InputError("--rows must be at least 1")
    cone = problem.cone(cfg.order_tol)
    z = problem.K.project(z0)
    trace = IterationTrace(start_projected=not z.allclose(z0, atol=0.0))
    try:
        for n in range(args.rows):
            nxt = picard_step(problem, z)
            trace.points.append(z)
            trace.residuals.append(float(np.linalg.norm((z - nxt).vector())))
            if n < args.rows - 1:
                trace.monotone_flags.append(cone.leq(z, nxt))
                z = nxt
    except MapEvaluationError as err:
        raise InputError(f"map evaluation failed: {err}") from None
    with _output(args.output) as out:
        out.write(trace.to_csv() if args.format == "csv" else _human_table(trace))
    return EXIT_OK


def cmd_verify(args) -> int:
    problem, z0, cfg = _problem_and_start(args)
    if args.witness is None:
        raise InputError("--witness is required")
    w = _parse_witness(args.witness, problem.p, problem.q)
    variant = "theorem_literal" if args.variant == "theorem" else "proposition"
    tol = cfg.order_tol
    try:
        omega = omega_certificate(problem, z0, w, variant, tol=tol)
        gamma = gamma_certificate(problem, z0, w, variant, tol=tol)
        solution = verify_vi_solution(problem, w, tol=max(10 * cfg.residual_tol, 1e-9)) if omega.in_K else False
        residual = natural_map_residual(problem, w)
    except MapEvaluationError as err:
        raise InputError(f"map evaluation failed: {err}") from None
    with _output(args.output) as out:
        out.write(f"witness: {_fmt_point(w)}\n")
        out.write(omega.summary() + "\n")
        out.write(gamma.summary() + "\n")
        out.write(f"vi solution: {str(solution).lower()} (natural-map residual {residual:.3e})\n")
        if not omega.in_K:
            out.write(f"membership breach: {omega.breach}\n")
            return EXIT_FAILS
    holds = {"omega": omega.satisfied, "gamma": gamma.satisfied, "solution": solution}[args.certificate]
    return EXIT_OK if holds else EXIT_FAILS


def run_property_suite(samples: int = 10_000, seed: int = 0) -> list[tuple[str, bool, str]]:
    """Quick runs of the main invariants; one (name, passed, detail) per check."""
    results = []
    for p in range(1, 6):
        prim, dual = generators(p, "primal"), generators(p, "dual")
        cone = ExtendedLorentzCone(p, 1)
        ok = (
            len(prim) == minimal_generator_count(p)
            and len(dual) == 2 * p
            and all(cone.contains(g) for g in prim)
            and all(cone.dual_contains(g) for g in dual)
            and dual_pairing_nonnegative(p)
        )
        results.append((f"generators p={p}", ok, f"{len(prim)} primal, {len(dual)} dual"))

    rng = np.random.default_rng(seed)
    for p in (1, 2, 3):
        for q in (1, 2, 3):
            for kind in ("box", "ball"):
                if kind == "box":
                    lo = rng.uniform(-2, 0, size=q)
                    base = Box(tuple(zip(lo, lo + rng.uniform(0.5, 3, size=q))))
                else:
                    base = Ball(rng.uniform(-1, 1, size=q), float(rng.uniform(0.5, 2)))
                K = CylinderSet(p, base)
                xa, ua, xb, ub = OrderedPairSampler(p, q, scale=3.0, count=samples, seed=seed + 7 * p + q).arrays()
                _, pa = K.project_arrays(xa, ua)
                _, pb = K.project_arrays(xb, ub)
                bad = int(np.sum(~ExtendedLorentzCone(p, q, 1e-12).leq_arrays(xa, pa, xb, pb)))
                results.append((f"cylinder isotone p={p} q={q} {kind}", bad == 0, f"{bad} violations"))

    problem = paper_example_problem()
    cone = ExtendedLorentzCone(2, 2, 1e-12)
    sampler = OrderedPairSampler(2, 2, scale=20.0, count=samples, seed=seed)
    report = isotone_harness(problem, sampler, cone)
    results.append(("example map I - F isotone", report.failed == 0, f"{report.failed} failures"))
    xa, ua, xb, ub = sampler.arrays()
    mono = np.all(example_f1(xb, ub) >= example_f1(xa, ua) - 1e-12) and np.all(
        example_f2(xb, ub) >= example_f2(xa, ua) - 1e-12
    )
    results.append(("example f1, f2 L-monotone", bool(mono), ""))
    return results


def cmd_props(args) -> int:
    results = run_property_suite(args.samples, args.seed)
    with _output(args.output) as out:
        for name, ok, detail in results:
            out.write(f"{'PASS' if ok else 'FAIL'}  {name}" + (f"  ({detail})" if detail else "") + "\n")
    return EXIT_OK if all(ok for _, ok, _ in results) else EXIT_FAILS


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="lorentz-vi", description="Picard iteration for variational inequalities on cylinders")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(sp, needs_input=True):
        if needs_input:
            sp.add_argument("--input", required=True, help="problem description (JSON)")
        sp.add_argument("--output", help="write to this file instead of stdout")

    def solver_overrides(sp):
        sp.add_argument("--max-iters", type=int)
        sp.add_argument("--tol", type=float, help="natural-map residual tolerance")
        sp.add_argument("--order-tol", type=float, help="slack for L-order comparisons")

    sp = sub.add_parser("solve", help="run the iteration to convergence")
    common(sp)
    solver_overrides(sp)
    sp.add_argument("--format", choices=("table", "csv"), default="table")
    sp.set_defaults(func=cmd_solve)

    sp = sub.add_parser("table", help="print the first iterates")
    common(sp)
    solver_overrides(sp)
    sp.add_argument("--rows", type=int, default=12)
    sp.add_argument("--format", choices=("table", "csv"), default="table")
    sp.set_defaults(func=cmd_table)

    sp = sub.add_parser("verify", help="check a witness against the Omega/Gamma sets")
    common(sp)
    solver_overrides(sp)
    sp.add_argument("--witness", help='comma-separated point, e.g. "15,15,6,8"')
    sp.add_argument("--certificate", choices=("omega", "gamma", "solution"), default="omega")
    sp.add_argument("--variant", choices=("proposition", "theorem"), default="proposition")
    sp.set_defaults(func=cmd_verify)

    sp = sub.add_parser("props", help="run the property checks")
    common(sp, needs_input=False)
    sp.add_argument("--samples", type=int, default=10_000)
    sp.add_argument("--seed", type=int, default=0)
    sp.set_defaults(func=cmd_props)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code == 0 else EXIT_INPUT
    try:
        return args.func(args)
    except InputError as err:
        print(f"error: {err}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
