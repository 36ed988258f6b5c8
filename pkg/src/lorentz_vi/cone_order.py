"""Extended Lorentz cone algebra.

The cone lives in R^p x R^q and is

    L  = {(x, u) : x >= ||u|| e}
    L* = {(x, u) : sum(x) >= ||u||, x >= 0}

where ``e`` is the all-ones vector of R^p and the norm is Euclidean.
L induces the partial order (x, u) <=_L (y, v)  iff  y - x >= ||v - u|| e.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Literal

import numpy as np


class DimensionError(ValueError):
    """Point dimensions do not match the cone or set they are used with."""


class UnsupportedCaseError(ValueError):
    """The requested construction exists only for a narrower class of cones/sets."""


def _as_vector(values, name: str) -> np.ndarray:
    arr = np.array(values, dtype=float).reshape(-1)
    if arr.size == 0:
        raise DimensionError(f"{name} must have at least one entry")
    if not np.all(np.isfinite(arr)):
        raise ValueError(f"{name} contains non-finite entries: {arr}")
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True, eq=False)
class SplitPoint:
    """A point (x, u) of R^p x R^q with the split kept explicit."""

    x: np.ndarray
    u: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "x", _as_vector(self.x, "x"))
        object.__setattr__(self, "u", _as_vector(self.u, "u"))

    @classmethod
    def from_vector(cls, values, p: int) -> "SplitPoint":
        v = np.asarray(values, dtype=float).reshape(-1)
        if not 1 <= p < v.size:
            raise DimensionError(f"cannot split a vector of length {v.size} with p={p}")
        return cls(v[:p], v[p:])

    @property
    def p(self) -> int:
        return self.x.size

    @property
    def q(self) -> int:
        return self.u.size

    @property
    def shape(self) -> tuple[int, int]:
        return self.p, self.q

    def vector(self) -> np.ndarray:
        return np.concatenate([self.x, self.u])

    def _check(self, other: "SplitPoint"):
        if self.shape != other.shape:
            raise DimensionError(f"dimension mismatch {self.shape} vs {other.shape}")

    def __add__(self, other: "SplitPoint") -> "SplitPoint":
        self._check(other)
        return SplitPoint(self.x + other.x, self.u + other.u)

    def __sub__(self, other: "SplitPoint") -> "SplitPoint":
        self._check(other)
        return SplitPoint(self.x - other.x, self.u - other.u)

    def __neg__(self) -> "SplitPoint":
        return SplitPoint(-self.x, -self.u)

    def __mul__(self, t: float) -> "SplitPoint":
        return SplitPoint(t * self.x, t * self.u)

    __rmul__ = __mul__

    def __eq__(self, other):
        if not isinstance(other, SplitPoint):
            return NotImplemented
        return (
            self.shape == other.shape
            and np.array_equal(self.x, other.x)
            and np.array_equal(self.u, other.u)
        )

    def __hash__(self):
        return hash((self.x.tobytes(), self.u.tobytes()))

    def allclose(self, other: "SplitPoint", atol: float = 1e-12) -> bool:
        self._check(other)
        return bool(np.linalg.norm(self.vector() - other.vector()) <= atol)

    def __repr__(self):
        return f"SplitPoint(x={self.x.tolist()}, u={self.u.tolist()})"


@dataclass(frozen=True)
class ExtendedLorentzCone:
    """The cone L = {(x, u) in R^p x R^q : x >= ||u|| e}.

    ``tol`` is the slack used by every membership and order test on this
    object; 0 gives the exact order.
    """

    p: int
    q: int
    tol: float = 0.0

    def __post_init__(self):
        if int(self.p) != self.p or int(self.q) != self.q or self.p < 1 or self.q < 1:
            raise ValueError(f"p and q must be positive integers, got p={self.p}, q={self.q}")
        if not self.tol >= 0:
            raise ValueError(f"tol must be nonnegative, got {self.tol}")

    def _check(self, z: SplitPoint):
        if z.shape != (self.p, self.q):
            raise DimensionError(
                f"point has dimensions {z.shape}, cone expects {(self.p, self.q)}"
            )

    def contains_arrays(self, x, u) -> np.ndarray:
        """Vectorised membership over leading batch axes of ``x`` (..., p) and ``u`` (..., q)."""
        x = np.asarray(x, dtype=float)
        u = np.asarray(u, dtype=float)
        if x.shape[-1] != self.p or u.shape[-1] != self.q:
            raise DimensionError(f"arrays have trailing sizes {x.shape[-1]}, {u.shape[-1]}")
        return x.min(axis=-1) >= np.linalg.norm(u, axis=-1) - self.tol

    def dual_contains_arrays(self, x, u) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        u = np.asarray(u, dtype=float)
        if x.shape[-1] != self.p or u.shape[-1] != self.q:
            raise DimensionError(f"arrays have trailing sizes {x.shape[-1]}, {u.shape[-1]}")
        return (x.sum(axis=-1) >= np.linalg.norm(u, axis=-1) - self.tol) & (
            x.min(axis=-1) >= -self.tol
        )

    def leq_arrays(self, xa, ua, xb, ub) -> np.ndarray:
        return self.contains_arrays(np.subtract(xb, xa), np.subtract(ub, ua))

    def contains(self, z: SplitPoint) -> bool:
        self._check(z)
        return bool(self.contains_arrays(z.x, z.u))

    def dual_contains(self, z: SplitPoint) -> bool:
        self._check(z)
        return bool(self.dual_contains_arrays(z.x, z.u))

    def leq(self, a: SplitPoint, b: SplitPoint) -> bool:
        self._check(a)
        self._check(b)
        return bool(self.contains_arrays(b.x - a.x, b.u - a.u))

    def with_tol(self, tol: float) -> "ExtendedLorentzCone":
        return ExtendedLorentzCone(self.p, self.q, tol)


def in_cone(c: ExtendedLorentzCone, z: SplitPoint) -> bool:
    """True iff min_i x_i >= ||u|| - tol."""
    return c.contains(z)


def in_dual(c: ExtendedLorentzCone, z: SplitPoint) -> bool:
    """True iff sum_i x_i >= ||u|| - tol and min_i x_i >= -tol."""
    return c.dual_contains(z)


def leq(c: ExtendedLorentzCone, a: SplitPoint, b: SplitPoint) -> bool:
    """The order a <=_L b, i.e. ``b - a`` in L."""
    return c.leq(a, b)


ConeKind = Literal["primal", "dual"]


@dataclass(frozen=True)
class GeneratorSet:
    generators: tuple[SplitPoint, ...]
    cone_kind: ConeKind

    def __len__(self):
        return len(self.generators)

    def __iter__(self):
        return iter(self.generators)

    def matrix(self) -> np.ndarray:
        """Generators as rows of a (count, p + q) array."""
        return np.array([g.vector() for g in self.generators])


def minimal_generator_count(p: int, kind: ConeKind = "primal") -> int:
    """Minimal generator count of L (or L*) for q = 1."""
    if kind == "dual":
        return 2 * p
    delta = 1 if p == 1 else 0
    return (p + 2) * (1 - delta) + 2 * delta


def generators(p: int, kind: ConeKind = "primal", q: int = 1) -> GeneratorSet:
    """A minimal generating set of L (``kind="primal"``) or L* for q = 1.

    L is polyhedral only for q = 1; for q > 1 there is no finite generating set
    and :class:`UnsupportedCaseError` is raised rather than approximating the
    ball.
    """
    if int(p) != p or p < 1:
        raise ValueError(f"p must be a positive integer, got {p}")
    if kind not in ("primal", "dual"):
        raise ValueError(f"kind must be 'primal' or 'dual', got {kind!r}")
    if q != 1:
        raise UnsupportedCaseError(
            f"the {kind} extended Lorentz cone is not polyhedral for q={q}; generators exist only for q=1"
        )
    eye = np.eye(p)
    if kind == "dual":
        gens = [SplitPoint(eye[i], [s]) for i in range(p) for s in (1.0, -1.0)]
    elif p == 1:
        gens = [SplitPoint([1.0], [1.0]), SplitPoint([1.0], [-1.0])]
    else:
        e = np.ones(p)
        gens = [SplitPoint(e, [1.0]), SplitPoint(e, [-1.0])]
        gens += [SplitPoint(eye[i], [0.0]) for i in range(p)]
    return GeneratorSet(tuple(gens), kind)


def dual_pairing_nonnegative(p: int) -> bool:
    """Check every primal/dual generator inner product is >= 0 (q = 1)."""
    primal = generators(p, "primal").matrix()
    dual = generators(p, "dual").matrix()
    return bool(np.all(primal @ dual.T >= 0))
