"""Built-in problems, ordered-pair sampling and problem files.

The worked example lives on K = R^2 x [-10, 10]^2 with

    f1(x, u) = (x1 + ||u|| + 12) / 12
    f2(x, u) = (x2 + ||u|| - 7.2) / 12
    (x - G, u - H) = f1 * w1 + f2 * w2,  w1 = (1, 1, 1/6, 1/3), w2 = (1, 1, 1/3, 1/6)

and its unique solution is (8/15, 8/15, 0, 4/15).
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path
from typing import Any, Callable

import numpy as np

from .cone_order import DimensionError, ExtendedLorentzCone, SplitPoint
from .projections import Ball, BaseSet, Box, CylinderSet, HalfspaceIntersection, IntervalBound
from .vi_solver import SolveConfig, VIProblem

F1_OFFSET = 12.0
F2_OFFSET = -7.2
W1 = np.array([1.0, 1.0, 1.0 / 6.0, 1.0 / 3.0])
W2 = np.array([1.0, 1.0, 1.0 / 3.0, 1.0 / 6.0])

EXAMPLE_SOLUTION_EXACT = (Fraction(8, 15), Fraction(8, 15), Fraction(0), Fraction(4, 15))
EXAMPLE_SOLUTION = SplitPoint([8 / 15, 8 / 15], [0.0, 4 / 15])
EXAMPLE_STARTS = {
    "table1": SplitPoint([43 / 30, 13 / 30], [2.0, 5.0]),
    "table2": SplitPoint([-6.0, -10.0], [6.0, 11.0]),
    "table3": SplitPoint([-5.0, 4.0], [-12.0, 7.0]),
    "table4": SplitPoint([8.0, -19.0], [-9.0, -15.0]),
}


def example_f1(x, u):
    x, u = np.asarray(x, dtype=float), np.asarray(u, dtype=float)
    return (x[..., 0] + np.linalg.norm(u, axis=-1) + F1_OFFSET) / 12.0


def example_f2(x, u):
    x, u = np.asarray(x, dtype=float), np.asarray(u, dtype=float)
    return (x[..., 1] + np.linalg.norm(u, axis=-1) + F2_OFFSET) / 12.0


def example_G(x, u):
    x = np.asarray(x, dtype=float)
    s = example_f1(x, u) + example_f2(x, u)
    return x - s[..., None] * W1[:2]


def example_H(x, u):
    u = np.asarray(u, dtype=float)
    f1, f2 = example_f1(x, u), example_f2(x, u)
    return u - (f1[..., None] * W1[2:] + f2[..., None] * W2[2:])


def eval_paper_example(z: SplitPoint) -> tuple[np.ndarray, np.ndarray]:
    """(G(z), H(z)) for the worked example. Works on a single point."""
    if z.shape != (2, 2):
        raise DimensionError(f"the worked example lives in R^2 x R^2, got {z.shape}")
    return example_G(z.x, z.u), example_H(z.x, z.u)


def paper_example_base() -> Box:
    return Box.cube(2, -10.0, 10.0)


def paper_example_problem(base: BaseSet | None = None) -> VIProblem:
    base = base if base is not None else paper_example_base()
    if base.q != 2:
        raise DimensionError(f"the worked example needs a base set in R^2, got R^{base.q}")
    return VIProblem(CylinderSet(2, base), example_G, example_H, name="paper_example")


@dataclass(frozen=True, eq=False)
class AffineMap:
    """F(z) = M z + r on R^{p+q}, split into G (first p rows) and H (the rest)."""

    M: np.ndarray
    r: np.ndarray
    p: int

    def __post_init__(self):
        M = np.array(self.M, dtype=float)
        r = np.array(self.r, dtype=float).reshape(-1)
        n = r.size
        if M.ndim == 1 and M.size == n * n:
            M = M.reshape(n, n)
        if M.shape != (n, n):
            raise DimensionError(f"M has shape {M.shape}, expected {(n, n)} to match r")
        if not 1 <= self.p < n:
            raise DimensionError(f"p={self.p} does not split a space of dimension {n}")
        if not (np.all(np.isfinite(M)) and np.all(np.isfinite(r))):
            raise ValueError("M and r must be finite")
        M.setflags(write=False)
        r.setflags(write=False)
        object.__setattr__(self, "M", M)
        object.__setattr__(self, "r", r)

    @property
    def q(self) -> int:
        return self.r.size - self.p

    def __call__(self, x, u) -> np.ndarray:
        z = np.concatenate([np.asarray(x, dtype=float), np.asarray(u, dtype=float)], axis=-1)
        return z @ self.M.T + self.r

    def G(self, x, u):
        return self(x, u)[..., : self.p]

    def H(self, x, u):
        return self(x, u)[..., self.p :]

    def problem(self, base: BaseSet, name: str = "affine") -> VIProblem:
        if base.q != self.q:
            raise DimensionError(f"affine map has q={self.q}, base set lives in R^{base.q}")
        return VIProblem(CylinderSet(self.p, base), self.G, self.H, name=name)


@dataclass(frozen=True)
class OrderedPairSampler:
    """Random pairs a <=_L b built as b = a + (||d|| e + s, d) with s >= 0.

    About a quarter of the slack entries are exactly zero so that pairs on
    the boundary of the order get exercised. After construction every pair
    is re-checked at tol 0 and nudged upward by ulps where rounding broke it.
    """

    p: int
    q: int
    scale: float = 1.0
    count: int = 1000
    seed: int = 0

    def arrays(self) -> tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
        rng = np.random.default_rng(self.seed)
        n, s = self.count, self.scale
        xa = rng.uniform(-s, s, size=(n, self.p))
        ua = rng.uniform(-s, s, size=(n, self.q))
        d = rng.normal(scale=s / 2, size=(n, self.q))
        slack = rng.exponential(scale=s / 4, size=(n, self.p))
        slack[rng.uniform(size=(n, self.p)) < 0.25] = 0.0
        ub = ua + d
        dn = np.linalg.norm(ub - ua, axis=1, keepdims=True)
        xb = xa + dn + slack
        cone = ExtendedLorentzCone(self.p, self.q)
        bad = ~cone.leq_arrays(xa, ua, xb, ub)
        while np.any(bad):
            xb[bad] = np.nextafter(xb[bad], np.inf)
            bad = ~cone.leq_arrays(xa, ua, xb, ub)
        return xa, ua, xb, ub

    def pairs(self) -> list[tuple[SplitPoint, SplitPoint]]:
        xa, ua, xb, ub = self.arrays()
        return [(SplitPoint(xa[i], ua[i]), SplitPoint(xb[i], ub[i])) for i in range(self.count)]


@dataclass
class HarnessReport:
    passed: int = 0
    failed: int = 0
    witnesses: list[tuple[SplitPoint, SplitPoint]] = field(default_factory=list)

    @property
    def total(self) -> int:
        return self.passed + self.failed


def _as_evaluator(F) -> Callable[[SplitPoint], tuple[np.ndarray, np.ndarray]]:
    if isinstance(F, VIProblem):
        return F.evaluate
    if isinstance(F, AffineMap):
        return lambda z: (F.G(z.x, z.u), F.H(z.x, z.u))
    return lambda z: tuple(np.asarray(t, dtype=float) for t in F(z.x, z.u))


def isotone_harness(F, sampler: OrderedPairSampler, c: ExtendedLorentzCone, max_witnesses: int = 10) -> HarnessReport:
    """Test that I - F preserves <=_L on every pair the sampler emits.

    For a <= b the tested inequality is
    (y - x) - G(b) + G(a) >= ||(v - u) - H(b) + H(a)|| e, i.e.
    (I - F)(b) - (I - F)(a) in L. ``F`` may be a VIProblem, an AffineMap or a
    callable ``(x, u) -> (G, H)``.
    """
    if (sampler.p, sampler.q) != (c.p, c.q):
        raise DimensionError(f"sampler is {(sampler.p, sampler.q)}, cone is {(c.p, c.q)}")
    ev = _as_evaluator(F)
    report = HarnessReport()
    for a, b in sampler.pairs():
        ga, ha = ev(a)
        gb, hb = ev(b)
        diff = SplitPoint(b.x - a.x - gb + ga, b.u - a.u - hb + ha)
        if c.contains(diff):
            report.passed += 1
        else:
            report.failed += 1
            if len(report.witnesses) < max_witnesses:
                report.witnesses.append((a, b))
    return report


class ProblemDescriptionError(ValueError):
    """A problem file is malformed; ``field`` names the offending entry."""

    def __init__(self, field_name: str, message: str):
        super().__init__(f"{field_name}: {message}")
        self.field = field_name


@dataclass
class ProblemDescription:
    p: int
    q: int
    base: BaseSet
    map: dict[str, Any]
    start: SplitPoint | None = None
    solve: dict[str, Any] = field(default_factory=dict)

    @classmethod
    def from_dict(cls, d: dict) -> "ProblemDescription":
        if not isinstance(d, dict):
            raise ProblemDescriptionError("<root>", "expected a JSON object")
        p, q = _pos_int(d, "p"), _pos_int(d, "q")
        base = _parse_base(d.get("base"), q)
        mp = d.get("map")
        if not isinstance(mp, dict) or "kind" not in mp:
            raise ProblemDescriptionError("map", "expected an object with a 'kind' entry")
        start = None
        if d.get("start") is not None:
            start = _parse_point(d["start"], p, q, "start")
        solve = d.get("solve") or {}
        if not isinstance(solve, dict):
            raise ProblemDescriptionError("solve", "expected an object")
        unknown = set(solve) - {"max_iters", "residual_tol", "order_tol"}
        if unknown:
            raise ProblemDescriptionError("solve", f"unknown keys {sorted(unknown)}")
        return cls(p, q, base, mp, start, dict(solve))

    def solve_config(self, **overrides) -> SolveConfig:
        kw = {**self.solve, **{k: v for k, v in overrides.items() if v is not None}}
        try:
            return SolveConfig(**kw)
        except (TypeError, ValueError) as err:
            raise ProblemDescriptionError("solve", str(err)) from None


def _pos_int(d: dict, key: str) -> int:
    v = d.get(key)
    if isinstance(v, bool) or not isinstance(v, int) or v < 1:
        raise ProblemDescriptionError(key, f"expected a positive integer, got {v!r}")
    return v


def _parse_point(values, p: int, q: int, name: str) -> SplitPoint:
    try:
        arr = np.array(values, dtype=float).reshape(-1)
    except (TypeError, ValueError):
        raise ProblemDescriptionError(name, f"expected an array of {p + q} numbers") from None
    if arr.size != p + q or not np.all(np.isfinite(arr)):
        raise ProblemDescriptionError(name, f"expected {p + q} finite numbers, got {values!r}")
    return SplitPoint.from_vector(arr, p)


def _parse_base(b, q: int) -> BaseSet:
    if not isinstance(b, dict):
        raise ProblemDescriptionError("base", "expected an object with a 'kind' entry")
    kind = b.get("kind")
    try:
        if kind == "box":
            bounds = b.get("bounds")
            if not isinstance(bounds, list) or len(bounds) != q:
                raise ProblemDescriptionError("base.bounds", f"expected {q} [lower, upper] pairs")
            out = []
            for j, pair in enumerate(bounds):
                if not isinstance(pair, list) or len(pair) != 2:
                    raise ProblemDescriptionError(f"base.bounds[{j}]", f"expected [lower, upper], got {pair!r}")
                try:
                    out.append(IntervalBound(*pair))
                except (TypeError, ValueError) as err:
                    raise ProblemDescriptionError(f"base.bounds[{j}]", str(err)) from None
            return Box(tuple(out))
        if kind == "ball":
            base = Ball(b.get("center"), float(b.get("radius")))
        elif kind == "halfspaces":
            hs = b.get("halfspaces")
            if not isinstance(hs, list) or not hs:
                raise ProblemDescriptionError("base.halfspaces", "expected a nonempty list")
            base = HalfspaceIntersection([h["normal"] for h in hs], [h["anchor"] for h in hs])
        else:
            raise ProblemDescriptionError("base.kind", f"unknown base kind {kind!r}; use box, ball or halfspaces")
    except ProblemDescriptionError:
        raise
    except (TypeError, ValueError, KeyError) as err:
        raise ProblemDescriptionError("base", str(err)) from None
    if base.q != q:
        raise ProblemDescriptionError("base", f"base set lives in R^{base.q}, but q={q}")
    return base


def load_description(path: str | Path) -> ProblemDescription:
    """Read a problem file. JSON syntax errors propagate as ``json.JSONDecodeError``."""
    with open(path) as fh:
        return ProblemDescription.from_dict(json.load(fh))


def build_problem(desc: ProblemDescription) -> VIProblem:
    kind = desc.map.get("kind")
    if kind == "paper_example":
        if (desc.p, desc.q) != (2, 2):
            raise ProblemDescriptionError("map", f"paper_example needs p = q = 2, got p={desc.p}, q={desc.q}")
        return paper_example_problem(desc.base)
    if kind == "affine":
        if "M" not in desc.map or "r" not in desc.map:
            raise ProblemDescriptionError("map", "affine map needs 'M' and 'r'")
        n = desc.p + desc.q
        try:
            r = np.array(desc.map["r"], dtype=float)
            M = np.array(desc.map["M"], dtype=float)
        except (TypeError, ValueError):
            raise ProblemDescriptionError("map", "M and r must be numeric arrays") from None
        if r.shape != (n,):
            raise ProblemDescriptionError("map.r", f"expected {n} entries, got shape {r.shape}")
        if M.shape not in ((n, n), (n * n,)):
            raise ProblemDescriptionError("map.M", f"expected a {n}x{n} matrix (nested or row-major flat), got shape {M.shape}")
        try:
            return AffineMap(M, r, desc.p).problem(desc.base)
        except ValueError as err:
            raise ProblemDescriptionError("map", str(err)) from None
    raise ProblemDescriptionError("map.kind", f"unknown map kind {kind!r}; use paper_example or affine")


@dataclass
class ScanResult:
    points_scanned: int
    hits_outside: int
    min_residual_outside: float
    argmin_outside: SplitPoint
    min_residual_inside: float


def _example_residual_arrays(x, u, base: Box):
    f1, f2 = example_f1(x, u), example_f2(x, u)
    s = f1 + f2
    step_x = np.stack([s, s], axis=-1)
    step_u = base.project(f1[:, None] * W1[2:] + f2[:, None] * W2[2:])
    return np.sqrt(np.sum((x - step_x) ** 2, axis=-1) + np.sum((u - step_u) ** 2, axis=-1))


def uniqueness_scan(
    step: float = 0.01, threshold: float = 1e-6, exclusion_radius: float = 0.02, chunk: int = 250_000
) -> ScanResult:
    """Grid scan of the worked example's natural-map residual over R^2 x C.

    The x-update is x -> ((x1 + x2) / 12 + ||u|| / 6 + 0.4) e, an affine map
    whose residual operator has smallest singular value 5/6. So for each u the
    residual can only be small within 1.2 * residual of the unique point
    x(u) = (||u|| / 5 + 12 / 25) e, and it suffices to scan u over a grid of C
    with x = x(u). Points are classed inside/outside a ball of
    ``exclusion_radius`` around the known solution.
    """
    base = paper_example_base()
    ticks = np.arange(-10.0, 10.0 + step / 2, step)
    ticks = np.clip(ticks, -10.0, 10.0)
    u1, u2 = np.meshgrid(ticks, ticks, indexing="ij")
    U = np.stack([u1.reshape(-1), u2.reshape(-1)], axis=-1)
    star = EXAMPLE_SOLUTION.vector()
    hits, best_out, best_in, arg = 0, np.inf, np.inf, None
    for i in range(0, len(U), chunk):
        u = U[i : i + chunk]
        xs = np.linalg.norm(u, axis=1) / 5.0 + 12.0 / 25.0
        x = np.stack([xs, xs], axis=-1)
        r = _example_residual_arrays(x, u, base)
        dist = np.linalg.norm(np.concatenate([x, u], axis=1) - star, axis=1)
        outside = dist > exclusion_radius
        hits += int(np.sum(outside & (r < threshold)))
        if np.any(outside):
            j = int(np.argmin(np.where(outside, r, np.inf)))
            if r[j] < best_out:
                best_out, arg = float(r[j]), SplitPoint(x[j], u[j])
        if np.any(~outside):
            best_in = min(best_in, float(np.min(r[~outside])))
    return ScanResult(len(U), hits, best_out, arg, best_in)
