"""Acceptance criteria for the package, one test per criterion.

Each test records a PASS/FAIL line that is printed in the
"acceptance criteria" section of the pytest terminal summary.
"""
import math
import time

import numpy as np

from lorentz_vi.cone_order import (
    ExtendedLorentzCone,
    SplitPoint,
    dual_pairing_nonnegative,
    generators,
    in_cone,
    in_dual,
    leq,
)
from lorentz_vi.problems import (
    EXAMPLE_SOLUTION,
    EXAMPLE_STARTS,
    AffineMap,
    OrderedPairSampler,
    eval_paper_example,
    example_f1,
    example_f2,
    isotone_harness,
    paper_example_problem,
    uniqueness_scan,
)
from lorentz_vi.projections import Ball, Box, CylinderSet, box_isotonicity_counterexample
from lorentz_vi.vi_solver import (
    SolveConfig,
    check_start_condition,
    gamma_certificate,
    natural_map_residual,
    omega_certificate,
    solve,
)

INF = math.inf
Z0 = EXAMPLE_STARTS["table1"]


def test_01_fixed_point(record):
    P = paper_example_problem()
    r = natural_map_residual(P, EXAMPLE_SOLUTION)
    G, H = eval_paper_example(EXAMPLE_SOLUTION)
    g, h = float(np.linalg.norm(G)), float(np.linalg.norm(H))
    ok = r <= 1e-12 and g <= 1e-15 and h <= 1e-15
    record(1, "fixed point of the worked example", ok, f"residual={r:.2e} |G|={g:.2e} |H|={h:.2e}")
    assert ok


def test_02_convergence_from_starts(record):
    P = paper_example_problem()
    cfg = SolveConfig(max_iters=500, residual_tol=1e-9)
    t0 = time.perf_counter()
    details, ok = [], True
    for name in sorted(EXAMPLE_STARTS):
        z, trace, status = solve(P, EXAMPLE_STARTS[name], cfg)
        err = float(np.linalg.norm((z - EXAMPLE_SOLUTION).vector()))
        steps = len(trace) - 1
        ok &= status == "converged" and err <= 1e-6 and steps <= 500
        details.append(f"{name}: {steps} steps err={err:.1e}")
    elapsed = time.perf_counter() - t0
    ok &= elapsed < 1.0
    record(2, "convergence from the four table starts", ok, "; ".join(details) + f"; {elapsed:.3f}s")
    assert ok


def test_03_omega_witness(record):
    P = paper_example_problem()
    w = SplitPoint([15, 15], [6, 8])
    om = omega_certificate(P, Z0, w, "theorem_literal")
    ga = gamma_certificate(P, Z0, w, "theorem_literal")
    ga_prop = gamma_certificate(P, Z0, w, "proposition")
    ok = om.satisfied and ga.satisfied and ga_prop.satisfied
    record(3, "omega witness and omega-in-gamma chain", ok, f"omega={om.satisfied} gamma={ga.satisfied}")
    assert ok


def test_04_cylinder_isotone(record):
    rng = np.random.default_rng(2024)
    t0 = time.perf_counter()
    total_bad, configs = 0, 0
    for p in (1, 2, 3):
        for q in (1, 2, 3):
            for kind in ("box", "ball"):
                if kind == "box":
                    lo = rng.uniform(-2, 0, size=q)
                    base = Box(tuple(zip(lo, lo + rng.uniform(0.1, 3, size=q))))
                else:
                    base = Ball(rng.uniform(-1, 1, size=q), float(rng.uniform(0.1, 2)))
                K = CylinderSet(p, base)
                xa, ua, xb, ub = OrderedPairSampler(p, q, scale=4.0, count=10_000, seed=100 + configs).arrays()
                _, pa = K.project_arrays(xa, ua)
                _, pb = K.project_arrays(xb, ub)
                total_bad += int(np.sum(~ExtendedLorentzCone(p, q, 1e-12).leq_arrays(xa, pa, xb, pb)))
                configs += 1
    elapsed = time.perf_counter() - t0
    ok = total_bad == 0 and elapsed < 5.0
    record(4, "cylinder projections are L-isotone", ok, f"{configs} configs, {total_bad} violations, {elapsed:.2f}s")
    assert ok


BOX_SUITE = [
    # (p, q, intervals)
    (1, 1, [(0, 1), (-1, 1)]),
    (1, 1, [(-INF, 2), (0, 3)]),
    (1, 1, [(-3, INF), (-1, 0)]),
    (1, 1, [(-INF, INF), (-1, 1)]),
    (1, 2, [(0, 5), (-1, 1), (-1, 1)]),
    (1, 2, [(-INF, 0), (-INF, 1), (0, INF)]),
    (1, 2, [(-INF, INF), (-2, 2), (-INF, INF)]),
    (1, 3, [(2, INF), (0, 1), (0, 1), (0, 1)]),
    (2, 1, [(0, 1), (0, 1), (-1, 1)]),
    (2, 1, [(-INF, INF), (-1, 4), (0, 2)]),
    (2, 1, [(-INF, INF), (-INF, INF), (0, 2)]),
    (2, 2, [(-INF, 7), (-INF, INF), (-1, 1), (-1, 1)]),
    (2, 2, [(-5, INF), (-5, INF), (-INF, 0), (0, INF)]),
    (2, 2, [(-INF, INF), (-INF, INF), (-10, 10), (-10, 10)]),
    (2, 3, [(1, 2), (-INF, INF), (0, 0.5), (-3, 3), (-INF, 1)]),
    (3, 1, [(-INF, INF), (-INF, INF), (0, 1), (-1, 1)]),
    (3, 1, [(-INF, INF), (-INF, INF), (-INF, INF), (-1, 1)]),
    (3, 2, [(-1, 1), (-1, 1), (-1, 1), (-1, 1), (-1, 1)]),
    (3, 3, [(-INF, INF), (-INF, INF), (-INF, INF), (-INF, INF), (0, INF), (-INF, 0)]),
    (4, 2, [(-INF, INF), (-INF, 3), (-INF, INF), (0, INF), (-2, 2), (-2, 2)]),
]


def test_05_box_counterexamples(record):
    passed = 0
    n_none = 0
    for p, q, intervals in BOX_SUITE:
        c = ExtendedLorentzCone(p, q)
        result = box_isotonicity_counterexample(c, intervals)
        x_unbounded = all(lo == -INF and hi == INF for lo, hi in intervals[:p])
        if x_unbounded:
            n_none += 1
            passed += result is None
            continue
        if result is None:
            continue
        lo, hi = result
        box = Box(tuple(intervals))
        p_lo = SplitPoint.from_vector(box.project(lo.vector()), p)
        p_hi = SplitPoint.from_vector(box.project(hi.vector()), p)
        passed += leq(c, lo, hi) and not leq(c, p_lo, p_hi)
    ok = passed == len(BOX_SUITE)
    record(5, "box projection counterexamples", ok, f"{passed}/{len(BOX_SUITE)} ({n_none} cylinders return none)")
    assert ok


def mid_oracle(lo, hi, t):
    return sorted([lo, t, hi])[1]


def test_06_projection_oracle(record):
    rng = np.random.default_rng(6)
    mismatches = 0
    for _ in range(100_000):
        p, q = int(rng.integers(1, 4)), int(rng.integers(1, 4))
        bounds = []
        for _ in range(q):
            a, b = sorted(rng.uniform(-5, 5, size=2))
            kind = rng.integers(0, 4)
            if kind == 1:
                a = -INF
            elif kind == 2:
                b = INF
            elif kind == 3:
                a, b = -INF, INF
            bounds.append((float(a), float(b)))
        z = SplitPoint(rng.normal(size=p) * 6, rng.normal(size=q) * 6)
        got = CylinderSet(p, Box(tuple(bounds))).project(z)
        want_u = [mid_oracle(a, b, float(t)) for (a, b), t in zip(bounds, z.u)]
        if got.x.tolist() != z.x.tolist() or got.u.tolist() != want_u:
            mismatches += 1

    K = CylinderSet(3, Box(((-1.0, 2.0), (-INF, 0.5), (0.0, INF))))
    worst_ne, worst_tr = 0.0, 0.0
    for _ in range(10_000):
        a = SplitPoint(rng.normal(size=3) * 4, rng.normal(size=3) * 4)
        b = SplitPoint(rng.normal(size=3) * 4, rng.normal(size=3) * 4)
        pa, pb = K.project(a), K.project(b)
        worst_ne = max(worst_ne, np.linalg.norm((pa - pb).vector()) - np.linalg.norm((a - b).vector()))
        shifted = SplitPoint(a.x + b.x, a.u)
        worst_tr = max(worst_tr, float(np.max(np.abs((K.project(shifted) - (pa + SplitPoint(b.x, np.zeros(3)))).vector()))))
    ok = mismatches == 0 and worst_ne <= 1e-12 and worst_tr <= 1e-12
    record(6, "box cylinder projection vs mid oracle", ok,
           f"{mismatches} mismatches; nonexpansive slack {worst_ne:.1e}; translation {worst_tr:.1e}")
    assert ok


def test_07_generators(record):
    ok = True
    counts = []
    for p in range(1, 6):
        cone = ExtendedLorentzCone(p, 1)
        prim, dual = generators(p, "primal"), generators(p, "dual")
        expected = 2 if p == 1 else p + 2
        ok &= len(prim) == expected and len(dual) == 2 * p
        ok &= all(in_cone(cone, g) for g in prim) and all(in_dual(cone, g) for g in dual)
        ok &= bool(np.all(prim.matrix() @ dual.matrix().T >= 0)) and dual_pairing_nonnegative(p)
        counts.append(f"p={p}:{len(prim)}/{len(dual)}")
    record(7, "generators of L and its dual for q = 1", ok, " ".join(counts))
    assert ok


def test_08_isotone_harness(record):
    cone = ExtendedLorentzCone(2, 2, 1e-12)
    sampler = OrderedPairSampler(2, 2, scale=20.0, count=10_000, seed=8)
    report = isotone_harness(paper_example_problem(), sampler, cone)
    xa, ua, xb, ub = sampler.arrays()
    f1_bad = int(np.sum(example_f1(xb, ub) < example_f1(xa, ua) - 1e-12))
    f2_bad = int(np.sum(example_f2(xb, ub) < example_f2(xa, ua) - 1e-12))
    ok = report.failed == 0 and report.passed == 10_000 and f1_bad == 0 and f2_bad == 0
    record(8, "isotone harness on the worked example", ok,
           f"{report.failed} harness failures, f1 {f1_bad}, f2 {f2_bad}")
    assert ok


def test_09_monotone_convergence(record):
    # F(z) = z/2 - c on R^2 x [-1, 1]^2; -F(0) = c lies in L, so the iterates climb
    c = np.array([1.0, 1.0, 0.2, 0.1])
    P = AffineMap(0.5 * np.eye(4), -c, 2).problem(Box.cube(2, -1, 1))
    z0 = SplitPoint([0, 0], [0, 0])
    w = SplitPoint([5, 5], [0.4, 0.2])
    direct, _ = check_start_condition(P, z0)
    gamma = gamma_certificate(P, z0, w, "proposition")
    z, trace, status = solve(P, z0, SolveConfig(max_iters=500, residual_tol=1e-12, order_tol=1e-10))
    below = ExtendedLorentzCone(2, 2, 1e-10).leq(z, w)
    ok = direct and gamma.satisfied and status == "converged" and trace.all_monotone and below
    record(9, "monotone convergence under the start condition", ok,
           f"direct={direct} gamma={gamma.satisfied} steps={len(trace) - 1} all_monotone={trace.all_monotone} below_w={below}")
    assert ok


def test_10_uniqueness_scan(record):
    t0 = time.perf_counter()
    res = uniqueness_scan(step=0.01, threshold=1e-6, exclusion_radius=0.02)
    elapsed = time.perf_counter() - t0
    ok = res.hits_outside == 0 and elapsed < 30.0
    record(10, "uniqueness scan", ok,
           f"{res.points_scanned} points, {res.hits_outside} hits, min outside {res.min_residual_outside:.2e}, {elapsed:.1f}s")
    assert ok
