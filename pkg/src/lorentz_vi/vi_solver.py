"""Picard iteration on the natural map for VI(F, K) over a cylinder K = R^p x C.

With F = (G, H) the iteration reads

    x_{n+1} = x_n - G(x_n, u_n)
    u_{n+1} = P_C(u_n - H(x_n, u_n))

and each step is monitored for the extended Lorentz order
z_n <=_L z_{n+1}. Solvability certificates (the sets Omega and Gamma of
points above the start) are evaluated both in the general form
(F(w) in L, resp. P_K(w - F(w)) <=_L w) and in the shifted form written
for cylinders, so the two can be compared on the same witness.
"""
from __future__ import annotations

import io
import logging
from dataclasses import dataclass, field
from typing import Callable, Literal, NamedTuple

import numpy as np

from .cone_order import DimensionError, ExtendedLorentzCone, SplitPoint
from .projections import Ball, Box, CylinderSet

logger = logging.getLogger(__name__)

Variant = Literal["proposition", "theorem_literal"]
VARIANTS: tuple[str, ...] = ("proposition", "theorem_literal")


class MapEvaluationError(ArithmeticError):
    """G or H returned a non-finite value."""

    def __init__(self, point: SplitPoint, message: str):
        super().__init__(f"{message} at {point!r}")
        self.point = point


@dataclass(frozen=True)
class VIProblem:
    """VI(F, K) with K = R^p x C and F = (G, H).

    ``G(x, u)`` must return a length-p vector and ``H(x, u)`` a length-q
    vector. Both must be deterministic.
    """

    K: CylinderSet
    G: Callable[[np.ndarray, np.ndarray], np.ndarray]
    H: Callable[[np.ndarray, np.ndarray], np.ndarray]
    name: str = "problem"

    @property
    def p(self) -> int:
        return self.K.p

    @property
    def q(self) -> int:
        return self.K.q

    def cone(self, tol: float = 0.0) -> ExtendedLorentzCone:
        return ExtendedLorentzCone(self.p, self.q, tol)

    def evaluate(self, z: SplitPoint) -> tuple[np.ndarray, np.ndarray]:
        """(G(z), H(z)), checked for shape and finiteness."""
        if z.shape != (self.p, self.q):
            raise DimensionError(f"point has dimensions {z.shape}, problem is {(self.p, self.q)}")
        g = np.asarray(self.G(z.x, z.u), dtype=float).reshape(-1)
        h = np.asarray(self.H(z.x, z.u), dtype=float).reshape(-1)
        if g.size != self.p or h.size != self.q:
            raise DimensionError(f"G returned {g.size} entries (want {self.p}), H returned {h.size} (want {self.q})")
        if not (np.all(np.isfinite(g)) and np.all(np.isfinite(h))):
            raise MapEvaluationError(z, f"non-finite map value G={g.tolist()}, H={h.tolist()}")
        return g, h

    def F(self, z: SplitPoint) -> SplitPoint:
        g, h = self.evaluate(z)
        return SplitPoint(g, h)


@dataclass
class SolveConfig:
    max_iters: int = 10_000
    residual_tol: float = 1e-10
    order_tol: float = 1e-12
    monitor_monotonicity: bool = True
    record_trace: bool = True

    def __post_init__(self):
        if int(self.max_iters) != self.max_iters or self.max_iters < 1:
            raise ValueError(f"max_iters must be a positive integer, got {self.max_iters}")
        if not self.residual_tol > 0:
            raise ValueError(f"residual_tol must be positive, got {self.residual_tol}")
        if not self.order_tol >= 0:
            raise ValueError(f"order_tol must be nonnegative, got {self.order_tol}")


@dataclass
class IterationTrace:
    """Iterates z_0, z_1, ..., their natural-map residuals, and order flags.

    ``monotone_flags[n]`` is whether z_n <=_L z_{n+1}, so it has one entry
    fewer than ``points``; ``residuals`` aligns with ``points``.
    """

    points: list[SplitPoint] = field(default_factory=list)
    residuals: list[float] = field(default_factory=list)
    monotone_flags: list[bool] = field(default_factory=list)
    start_projected: bool = False

    def __len__(self):
        return len(self.points)

    @property
    def all_monotone(self) -> bool:
        return all(self.monotone_flags)

    def to_csv(self) -> str:
        if not self.points:
            return ""
        p, q = self.points[0].shape
        header = ["iter", *(f"x{i + 1}" for i in range(p)), *(f"u{j + 1}" for j in range(q)), "residual", "monotone"]
        buf = io.StringIO()
        buf.write(",".join(header) + "\n")
        for n, z in enumerate(self.points):
            res = f"{self.residuals[n]:.17g}" if n < len(self.residuals) else ""
            if n < len(self.monotone_flags):
                mono = "true" if self.monotone_flags[n] else "false"
            else:
                mono = ""
            row = [str(n), *(f"{v:.17g}" for v in z.vector()), res, mono]
            buf.write(",".join(row) + "\n")
        return buf.getvalue()


class SolveResult(NamedTuple):
    point: SplitPoint
    trace: IterationTrace
    status: Literal["converged", "iteration_cap"]


def picard_step(P: VIProblem, z: SplitPoint) -> SplitPoint:
    """One step (x - G, P_C(u - H))."""
    g, h = P.evaluate(z)
    return SplitPoint(z.x - g, P.K.base.project(z.u - h))


def natural_map_residual(P: VIProblem, z: SplitPoint) -> float:
    """||z - P_K(z - F(z))||, zero exactly at solutions of the VI."""
    return float(np.linalg.norm((z - picard_step(P, z)).vector()))


def solve(P: VIProblem, z0: SplitPoint, cfg: SolveConfig | None = None) -> SolveResult:
    """Run the Picard iteration from ``z0``.

    ``z0`` is first projected onto K; ``trace.start_projected`` records
    whether that moved it. Stops once the natural-map residual of the current
    iterate is at most ``cfg.residual_tol`` or after ``cfg.max_iters`` steps.
    A step that breaks the order is flagged in the trace, never rejected.
    The returned point is the last iterate.

    Raises
    ------
    MapEvaluationError
        If G or H turns non-finite. The partial trace is attached as
        ``err.trace``.
    """
    cfg = cfg or SolveConfig()
    cone = P.cone(cfg.order_tol)
    start = P.K.project(z0)
    trace = IterationTrace(start_projected=not start.allclose(z0, atol=0.0))
    if trace.start_projected:
        logger.info("start %r projected onto K as %r", z0, start)

    z = start
    trace.points.append(z)
    steps = 0
    try:
        nxt = picard_step(P, z)
        while True:
            r = float(np.linalg.norm((z - nxt).vector()))
            if cfg.record_trace or not trace.residuals:
                trace.residuals.append(r)
            else:
                trace.residuals[-1] = r
            if r <= cfg.residual_tol:
                status = "converged"
                break
            if steps >= cfg.max_iters:
                status = "iteration_cap"
                break
            if cfg.monitor_monotonicity:
                flag = cone.leq(z, nxt)
                if cfg.record_trace:
                    trace.monotone_flags.append(flag)
                elif not flag:
                    trace.monotone_flags = [False]
            z = nxt
            steps += 1
            if cfg.record_trace:
                trace.points.append(z)
            else:
                trace.points[-1] = z
            nxt = picard_step(P, z)
    except MapEvaluationError as err:
        err.trace = trace
        raise
    logger.debug("%s after %d steps, residual %.3e", status, steps, trace.residuals[-1])
    return SolveResult(z, trace, status)


@dataclass(frozen=True)
class Certificate:
    """Outcome of testing one witness for membership in Omega or Gamma.

    ``satisfied`` is for the requested ``variant``; both variants are always
    evaluated and kept in ``proposition_holds`` / ``theorem_literal_holds``.
    """

    kind: Literal["omega", "gamma"]
    witness: SplitPoint
    reference: SplitPoint
    variant: Variant
    satisfied: bool
    in_K: bool
    above_start: bool
    proposition_holds: bool
    theorem_literal_holds: bool
    breach: str | None = None

    def summary(self) -> str:
        state = "satisfied" if self.satisfied else "NOT satisfied"
        text = (
            f"{self.kind} [{self.variant}]: {state} "
            f"(in K: {self.in_K}, above start: {self.above_start}, "
            f"proposition: {self.proposition_holds}, theorem_literal: {self.theorem_literal_holds})"
        )
        if self.breach:
            text += f"; breach: {self.breach}"
        return text


def _geq_norm(lhs: np.ndarray, norm: float, tol: float) -> bool:
    return bool(np.min(lhs) >= norm - tol)


def _certificate(kind, P, z0, w, variant, tol, prop_pred, literal_pred) -> Certificate:
    if variant not in VARIANTS:
        raise ValueError(f"variant must be one of {VARIANTS}, got {variant!r}")
    cone = P.cone(tol)
    in_K = P.K.contains(w, tol=max(tol, 1e-12))
    above = cone.leq(z0, w)
    breach = None
    if not in_K:
        breach = f"witness u-part {w.u.tolist()} lies outside the base set C"
    elif not above:
        breach = "witness is not above the start in the L-order"
    prop = prop_pred(cone)
    literal = literal_pred(cone)
    gate = in_K and above
    chosen = prop if variant == "proposition" else literal
    return Certificate(kind, w, z0, variant, gate and chosen, in_K, above, gate and prop, gate and literal, breach)


def omega_certificate(
    P: VIProblem, z0: SplitPoint, w: SplitPoint, variant: Variant = "proposition", tol: float = 1e-12
) -> Certificate:
    """Test ``w`` for membership in Omega.

    proposition: w in K, z0 <=_L w and F(w) in L.
    theorem_literal: w in K, z0 <=_L w and G(w) - x0 >= ||H(w) - u0|| e.
    """
    g, h = P.evaluate(w)
    return _certificate(
        "omega", P, z0, w, variant, tol,
        lambda c: c.contains(SplitPoint(g, h)),
        lambda c: _geq_norm(g - z0.x, float(np.linalg.norm(h - z0.u)), tol),
    )


def gamma_certificate(
    P: VIProblem, z0: SplitPoint, w: SplitPoint, variant: Variant = "proposition", tol: float = 1e-12
) -> Certificate:
    """Test ``w`` for membership in Gamma.

    proposition: w in K, z0 <=_L w and P_K(w - F(w)) <=_L w.
    theorem_literal: w in K, z0 <=_L w and
    G(w) - x0 >= ||u - u0 - P_C(u - H(w))|| e.
    """
    g, h = P.evaluate(w)
    step = SplitPoint(w.x - g, P.K.base.project(w.u - h))
    return _certificate(
        "gamma", P, z0, w, variant, tol,
        lambda c: c.leq(step, w),
        lambda c: _geq_norm(g - z0.x, float(np.linalg.norm(w.u - z0.u - step.u)), tol),
    )


def check_start_condition(P: VIProblem, z0: SplitPoint, tol: float = 1e-12) -> tuple[bool, bool]:
    """Return ``(direct, sufficient)`` for a start point z0 in K.

    direct: z0 <=_L picard_step(z0).
    sufficient: -F(z0) in L, i.e. -G(z0) >= ||H(z0)|| e. On a cylinder this
    implies ``direct``.
    """
    cone = P.cone(tol)
    g, h = P.evaluate(z0)
    direct = cone.leq(z0, picard_step(P, z0))
    sufficient = cone.contains(SplitPoint(-g, -h))
    return direct, sufficient


def _sample_base(base, n: int, rng: np.random.Generator, scale: float) -> np.ndarray:
    if isinstance(base, Box):
        lo = np.where(np.isfinite(base.lower), base.lower, -scale)
        hi = np.where(np.isfinite(base.upper), base.upper, scale)
        lo, hi = np.minimum(lo, hi - 1.0), np.maximum(hi, lo + 1.0)
        return base.project(rng.uniform(lo, hi, size=(n, base.q)))
    if isinstance(base, Ball):
        d = rng.normal(size=(n, base.q))
        d /= np.linalg.norm(d, axis=1, keepdims=True)
        r = base.radius * rng.uniform(size=(n, 1)) ** (1.0 / base.q)
        return base.center + r * d
    return base.project(rng.normal(scale=scale, size=(n, base.q)))


def verify_vi_solution(
    P: VIProblem, z: SplitPoint, samples: int = 1000, tol: float = 1e-9, seed: int = 0
) -> bool:
    """Check the cylinder form of the VI at ``z``: G(z) = 0 and (v - u)^T H(z) >= 0 on C.

    The second condition is tested on ``samples`` random points of C, plus
    the box corners and the exact minimiser of the linear form for a box or
    a ball.
    """
    if not P.K.contains(z, tol=tol):
        return False
    g, h = P.evaluate(z)
    if np.linalg.norm(g) > tol:
        return False
    rng = np.random.default_rng(seed)
    scale = 10.0 * (1.0 + float(np.max(np.abs(z.u))))
    vs = [_sample_base(P.K.base, samples, rng, scale)]
    base = P.K.base
    if isinstance(base, Box):
        corners = base.vertices()
        if corners is not None:
            vs.append(corners)
        # exact minimiser of the linear form; an infinite entry means it is unbounded below
        best = np.where(h > 0, base.lower, np.where(h < 0, base.upper, z.u))
        if not np.all(np.isfinite(best)):
            return False
        vs.append(best[None, :])
    elif isinstance(base, Ball):
        nh = np.linalg.norm(h)
        if nh > 0:
            vs.append((base.center - base.radius * h / nh)[None, :])
    v = np.concatenate(vs, axis=0)
    return bool(np.min((v - z.u) @ h) >= -tol)
