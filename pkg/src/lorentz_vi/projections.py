"""Metric projections onto boxes, balls, halfspace intersections and cylinders.

Also holds the two isotonicity tools for the extended Lorentz order: the
recogniser for finite halfspace intersections (p, q > 1) and the
counterexample builder showing that a box with a bounded x-part does not
have an isotone projection.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .cone_order import (
    DimensionError,
    ExtendedLorentzCone,
    SplitPoint,
    UnsupportedCaseError,
)

SQRT2_2 = math.sqrt(2.0) / 2.0


class InfeasibleSetError(ValueError):
    """The iterative projection failed to settle, typically because the set is empty."""


class DegenerateBaseError(ValueError):
    """The base set is a single point, so no two distinct base points exist."""


def parse_bound(value) -> float:
    """Accept floats and the strings "inf" / "-inf" used by problem files."""
    if isinstance(value, str):
        s = value.strip().lower()
        if s in ("inf", "+inf", "infinity"):
            return math.inf
        if s in ("-inf", "-infinity"):
            return -math.inf
        raise ValueError(f"bad bound string {value!r}; use a number, 'inf' or '-inf'")
    if value is None:
        raise ValueError("bound may not be null")
    v = float(value)
    if math.isnan(v):
        raise ValueError("bound may not be NaN")
    return v


def format_bound(value: float):
    if value == math.inf:
        return "inf"
    if value == -math.inf:
        return "-inf"
    return value


@dataclass(frozen=True)
class IntervalBound:
    """The interval [lower, upper]; either end may be infinite."""

    lower: float = -math.inf
    upper: float = math.inf

    def __post_init__(self):
        lo, hi = parse_bound(self.lower), parse_bound(self.upper)
        if not lo < hi:
            raise ValueError(f"interval needs lower < upper, got [{lo}, {hi}]")
        object.__setattr__(self, "lower", lo)
        object.__setattr__(self, "upper", hi)

    @property
    def unbounded(self) -> bool:
        return self.lower == -math.inf and self.upper == math.inf


def mid(bound: IntervalBound, t: float) -> float:
    """Projection of ``t`` onto ``bound``: the median of lower, upper and t."""
    if t <= bound.lower:
        return bound.lower
    if t >= bound.upper:
        return bound.upper
    return t


class BaseSet:
    """A nonempty closed convex set C in R^q with an exact projection."""

    kind: str
    q: int

    def project(self, v: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def contains(self, v, tol: float = 1e-12) -> bool:
        v = np.asarray(v, dtype=float)
        return bool(np.linalg.norm(self.project(v) - v) <= tol)

    def _check(self, v: np.ndarray) -> np.ndarray:
        v = np.asarray(v, dtype=float)
        if v.shape[-1] != self.q:
            raise DimensionError(f"vector has trailing size {v.shape[-1]}, set lives in R^{self.q}")
        return v


@dataclass(frozen=True)
class Box(BaseSet):
    bounds: tuple[IntervalBound, ...]
    kind: str = field(default="box", init=False)

    def __post_init__(self):
        bounds = tuple(b if isinstance(b, IntervalBound) else IntervalBound(*b) for b in self.bounds)
        if not bounds:
            raise ValueError("box needs at least one interval")
        object.__setattr__(self, "bounds", bounds)

    @classmethod
    def cube(cls, q: int, lower: float, upper: float) -> "Box":
        return cls(tuple(IntervalBound(lower, upper) for _ in range(q)))

    @property
    def q(self) -> int:
        return len(self.bounds)

    @property
    def lower(self) -> np.ndarray:
        return np.array([b.lower for b in self.bounds])

    @property
    def upper(self) -> np.ndarray:
        return np.array([b.upper for b in self.bounds])

    def project(self, v):
        v = self._check(v)
        # max then min reproduces the three cases of mid and leaves infinite bounds inert
        return np.minimum(np.maximum(v, self.lower), self.upper)

    def vertices(self) -> np.ndarray | None:
        """All 2^q corners, or None if any bound is infinite."""
        lo, hi = self.lower, self.upper
        if not (np.all(np.isfinite(lo)) and np.all(np.isfinite(hi))):
            return None
        grids = np.meshgrid(*[(a, b) for a, b in zip(lo, hi)], indexing="ij")
        return np.stack([g.reshape(-1) for g in grids], axis=-1)

    def to_dict(self) -> dict:
        return {"kind": "box", "bounds": [[format_bound(b.lower), format_bound(b.upper)] for b in self.bounds]}


@dataclass(frozen=True, eq=False)
class Ball(BaseSet):
    center: np.ndarray
    radius: float
    kind: str = field(default="euclidean_ball", init=False)

    def __post_init__(self):
        c = np.array(self.center, dtype=float).reshape(-1)
        if c.size == 0 or not np.all(np.isfinite(c)):
            raise ValueError("ball center must be a nonempty finite vector")
        if not (math.isfinite(self.radius) and self.radius > 0):
            raise ValueError(f"ball radius must be positive and finite, got {self.radius}")
        c.setflags(write=False)
        object.__setattr__(self, "center", c)
        object.__setattr__(self, "radius", float(self.radius))

    @property
    def q(self) -> int:
        return self.center.size

    def project(self, v):
        v = self._check(v)
        d = v - self.center
        dist = np.linalg.norm(d, axis=-1, keepdims=True)
        scale = np.where(dist > self.radius, self.radius / np.where(dist > 0, dist, 1.0), 1.0)
        return self.center + d * scale

    def to_dict(self) -> dict:
        return {"kind": "ball", "center": self.center.tolist(), "radius": self.radius}


@dataclass(frozen=True, eq=False)
class HalfspaceIntersection(BaseSet):
    """Intersection of halfspaces {v : <v - anchor, normal> <= 0} with unit normals.

    One halfspace is projected in closed form; two or more go through
    Dykstra's alternating projection.
    """

    normals: np.ndarray
    anchors: np.ndarray
    max_iter: int = 100_000
    tol: float = 1e-12
    kind: str = field(default="halfspace_intersection", init=False)
    offsets: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        n = np.atleast_2d(np.array(self.normals, dtype=float))
        a = np.atleast_2d(np.array(self.anchors, dtype=float))
        if n.shape != a.shape or n.shape[0] == 0:
            raise DimensionError(f"normals {n.shape} and anchors {a.shape} must have equal nonempty shapes")
        if not (np.all(np.isfinite(n)) and np.all(np.isfinite(a))):
            raise ValueError("normals and anchors must be finite")
        norms = np.linalg.norm(n, axis=1)
        if np.any(np.abs(norms - 1.0) > 1e-12):
            raise ValueError(f"halfspace normals must be unit vectors, got norms {norms}")
        n.setflags(write=False)
        a.setflags(write=False)
        object.__setattr__(self, "normals", n)
        object.__setattr__(self, "anchors", a)
        # <v - a, n> <= 0  <=>  <v, n> <= <a, n>
        offsets = np.einsum("ij,ij->i", n, a)
        offsets.setflags(write=False)
        object.__setattr__(self, "offsets", offsets)

    @property
    def q(self) -> int:
        return self.normals.shape[1]

    def _project_one(self, v, i):
        excess = v @ self.normals[i] - self.offsets[i]
        return v - np.maximum(excess, 0.0)[..., None] * self.normals[i]

    def project(self, v):
        v = self._check(v)
        if v.ndim > 1:
            return np.stack([self.project(row) for row in v.reshape(-1, self.q)]).reshape(v.shape)
        if len(self.offsets) == 1:
            return self._project_one(v, 0)
        m = len(self.offsets)
        y = v.copy()
        corrections = np.zeros((m, self.q))
        for _ in range(self.max_iter):
            y_prev = y
            for i in range(m):
                w = y + corrections[i]
                y = self._project_one(w, i)
                corrections[i] = w - y
            violation = np.max(self.normals @ y - self.offsets)
            if np.linalg.norm(y - y_prev) <= self.tol and violation <= self.tol:
                return y
        raise InfeasibleSetError(
            f"Dykstra projection did not converge in {self.max_iter} sweeps "
            f"(max violation {violation:.3e}); the intersection may be empty"
        )

    def to_dict(self) -> dict:
        return {
            "kind": "halfspaces",
            "halfspaces": [
                {"normal": n.tolist(), "anchor": a.tolist()} for n, a in zip(self.normals, self.anchors)
            ],
        }


def project_base(s: BaseSet, v) -> np.ndarray:
    return s.project(v)


@dataclass(frozen=True)
class CylinderSet:
    """K = R^p x C."""

    p: int
    base: BaseSet

    def __post_init__(self):
        if int(self.p) != self.p or self.p < 1:
            raise ValueError(f"p must be a positive integer, got {self.p}")

    @property
    def q(self) -> int:
        return self.base.q

    def _check(self, z: SplitPoint):
        if z.shape != (self.p, self.q):
            raise DimensionError(f"point has dimensions {z.shape}, cylinder is R^{self.p} x R^{self.q}")

    def project(self, z: SplitPoint) -> SplitPoint:
        self._check(z)
        return SplitPoint(z.x, self.base.project(z.u))

    def project_arrays(self, x, u):
        return np.asarray(x, dtype=float), self.base.project(u)

    def contains(self, z: SplitPoint, tol: float = 1e-12) -> bool:
        self._check(z)
        return self.base.contains(z.u, tol)


def project_cylinder(K: CylinderSet, z: SplitPoint) -> SplitPoint:
    """P_K(x, u) = (x, P_C(u))."""
    return K.project(z)


def is_isotone_halfspace_set(
    c: ExtendedLorentzCone, halfspaces: Sequence[tuple[Sequence[float], Sequence[float]]], tol: float = 1e-12
) -> bool:
    """Decide whether a finite intersection of halfspaces is an L-isotone projection set.

    Each halfspace is ``(normal, anchor)`` with a unit normal split as
    ``(a, w)`` over R^p x R^q. The set is isotone iff every normal has either
    ``a = 0``, or ``w = 0`` and ``a`` equal to sqrt(2)/2 (e_i - e_j) for some
    ``i != j``. Only valid when p > 1 and q > 1.
    """
    if c.p == 1 or c.q == 1:
        raise UnsupportedCaseError(
            "halfspace criterion needs p > 1 and q > 1; for p = 1 or q = 1 test whether the set is a cylinder R^p x C"
        )
    for normal, anchor in halfspaces:
        g = np.asarray(normal, dtype=float).reshape(-1)
        if g.size != c.p + c.q or np.asarray(anchor).size != c.p + c.q:
            raise DimensionError(f"halfspace in R^{g.size}, cone in R^{c.p + c.q}")
        if abs(np.linalg.norm(g) - 1.0) > tol:
            raise ValueError(f"normal {g} is not a unit vector")
        a, w = g[: c.p], g[c.p :]
        if np.linalg.norm(a) <= tol:
            continue
        if np.linalg.norm(w) > tol:
            return False
        plus = np.abs(a - SQRT2_2) <= tol
        minus = np.abs(a + SQRT2_2) <= tol
        zero = np.abs(a) <= tol
        if not (plus.sum() == 1 and minus.sum() == 1 and np.all(plus | minus | zero)):
            return False
    return True


def _two_base_points(u_bounds: Sequence[IntervalBound]) -> tuple[np.ndarray, np.ndarray]:
    u = np.array([mid(b, 0.0) for b in u_bounds])
    v = u.copy()
    b = u_bounds[0]
    room_up, room_down = b.upper - u[0], u[0] - b.lower
    if room_up >= room_down:
        v[0] = u[0] + min(1.0, room_up)
    else:
        v[0] = u[0] - min(1.0, room_down)
    return u, v


def box_isotonicity_counterexample(
    c: ExtendedLorentzCone, box: Sequence
) -> tuple[SplitPoint, SplitPoint] | None:
    """Pair witnessing that projection onto a box is not L-isotone.

    ``box`` lists p + q intervals (``IntervalBound`` or ``(lower, upper)``).
    Returns None when every x-interval is the whole line, since then the box
    is a cylinder and its projection is isotone. Otherwise returns
    ``(z_lo, z_hi)`` with ``z_lo <=_L z_hi`` while ``P(z_lo) <=_L P(z_hi)``
    fails; the pair is re-checked before returning.
    """
    if len(box) != c.p + c.q:
        raise DimensionError(f"box has {len(box)} intervals, cone needs {c.p + c.q}")
    raw_u = [b if isinstance(b, IntervalBound) else tuple(map(parse_bound, b)) for b in box[c.p :]]
    for b in raw_u:
        lo, hi = (b.lower, b.upper) if isinstance(b, IntervalBound) else b
        if lo == hi:
            raise DegenerateBaseError(f"u-part interval [{lo}, {hi}] is a single point")
    bounds = [b if isinstance(b, IntervalBound) else IntervalBound(*b) for b in box]
    x_bounds, u_bounds = bounds[: c.p], bounds[c.p :]
    k = next((i for i, b in enumerate(x_bounds) if not b.unbounded), None)
    if k is None:
        return None

    u, v = _two_base_points(u_bounds)
    d = float(np.linalg.norm(v - u))
    e_k = np.eye(c.p)[k]
    if math.isfinite(x_bounds[k].upper):
        # both x_k and y_k sit at or above the upper clamp
        b_k = x_bounds[k].upper
        x = b_k * e_k
        y = b_k * e_k + d
    else:
        # both x_k and y_k sit at or below the lower clamp
        a_k = x_bounds[k].lower
        x = (a_k - d) * e_k
        y = a_k * e_k + d * (1.0 - e_k)
    z_lo, z_hi = SplitPoint(x, u), SplitPoint(y, v)

    proj = Box(tuple(bounds))
    p_lo = SplitPoint.from_vector(proj.project(z_lo.vector()), c.p)
    p_hi = SplitPoint.from_vector(proj.project(z_hi.vector()), c.p)
    if not c.leq(z_lo, z_hi) or c.leq(p_lo, p_hi):
        raise AssertionError(f"constructed pair {z_lo}, {z_hi} does not violate isotonicity")
    return z_lo, z_hi
