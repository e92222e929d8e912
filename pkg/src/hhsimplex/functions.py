"""Functions on a simplex, evaluated in barycentric coordinates.

All function values are defined through the barycentric coordinates
(xi_0, ..., xi_n) of the evaluation point; cartesian inputs are converted
first.  The registry of variants covers:

* ``BaryPolynomial``   polynomials sum_k c_k * prod_j xi_j^(a_kj),
* ``Pyramid``          the extremal function that takes ``apex_value`` at the
                       barycenter and ``face_value`` on the boundary, affine on
                       each cell of the barycentric subdivision,
* ``VertexIndicator``  one value exactly at the vertices, another elsewhere,
* ``ClampedPyramid``   alpha * max(G - a, 0) with G the unit pyramid
                       (apex 0, faces 1), the weight of the Fejer
                       counterexample family,
* ``MinCoordWeight``   g(x) * (n+1) * min_j xi_j,
* ``Symmetrized``      the cyclic-group average of an inner function,
* ``Constant``, ``FunctionSum``, ``FunctionScale``  plumbing combinators,
* ``Expression``       (in :mod:`hhsimplex.expressions`) small cartesian
                       expressions for the CLI.

Every variant supports vectorized evaluation over an array of barycentric
rows; scalar evaluation wraps the batch path.  Specs are immutable and
evaluation is pure, so values can be shared freely across threads.
"""

from __future__ import annotations

import abc
import math
import warnings
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .errors import DimensionMismatchError, InvalidParameterError
from .simplex import BarycentricPoint, Simplex

# Vertex hits are detected as xi_j >= 1 - VERTEX_EPS; the indicator is
# discontinuous, so only exact-vertex queries should see the spike.
VERTEX_EPS = 1e-12


class ConvexityWarning(UserWarning):
    """A construction produced parameters that break convexity."""


def uniform_barycentric(rng: np.random.Generator, count: int, num_coords: int) -> np.ndarray:
    """Uniform samples on the simplex via normalized exponential spacings.

    Returns an array of shape (count, num_coords) whose rows are barycentric
    coordinates of points distributed uniformly w.r.t. Lebesgue measure.
    """
    e = rng.standard_exponential(size=(count, num_coords))
    return e / e.sum(axis=1, keepdims=True)


class FunctionSpec(abc.ABC):
    """A function on a simplex, described by data rather than code."""

    def arity(self) -> Optional[int]:
        """Number of barycentric slots this spec is tied to, or None for any."""
        return None

    def validate_for(self, s: Simplex) -> None:
        a = self.arity()
        if a is not None and a != s.num_vertices:
            raise DimensionMismatchError(
                f"function expects {a} barycentric coordinates, "
                f"simplex provides {s.num_vertices}"
            )

    @abc.abstractmethod
    def evaluate_batch(self, s: Simplex, xi: np.ndarray) -> np.ndarray:
        """Evaluate at every row of xi (shape (m, n+1)); returns shape (m,)."""

    def evaluate(self, s: Simplex, x: BarycentricPoint) -> float:
        if x.num_coords != s.num_vertices:
            raise DimensionMismatchError(
                f"point has {x.num_coords} coordinates, simplex has {s.num_vertices} vertices"
            )
        self.validate_for(s)
        return float(self.evaluate_batch(s, x.coords[None, :])[0])


@dataclass(frozen=True)
class EvalContext:
    """A simplex paired with a function to evaluate on it."""

    simplex: Simplex
    function: FunctionSpec

    def __post_init__(self):
        self.function.validate_for(self.simplex)


def evaluate(ctx: EvalContext, x: BarycentricPoint) -> float:
    return ctx.function.evaluate(ctx.simplex, x)


def _canonical_terms(terms) -> tuple[tuple[float, tuple[int, ...]], ...]:
    acc: dict[tuple[int, ...], float] = {}
    width = None
    for coeff, exps in terms:
        exps = tuple(int(e) for e in exps)
        if width is None:
            width = len(exps)
        elif len(exps) != width:
            raise DimensionMismatchError("exponent vectors of mixed lengths")
        if any(e < 0 for e in exps):
            raise InvalidParameterError("monomial exponents must be nonnegative")
        acc[exps] = acc.get(exps, 0.0) + float(coeff)
    return tuple(
        (c, e) for e, c in sorted(acc.items()) if c != 0.0
    )


@dataclass(frozen=True)
class BaryPolynomial(FunctionSpec):
    """sum_k coeff_k * prod_j xi_j^(exp_kj), exponents over all n+1 slots.

    Terms are kept in a canonical sorted order with like terms combined, so
    equal polynomials compare equal and evaluation order is reproducible.
    """

    terms: tuple[tuple[float, tuple[int, ...]], ...]
    num_slots: int = field(default=0)

    def __post_init__(self):
        terms = _canonical_terms(self.terms)
        slots = self.num_slots
        if terms:
            if slots > 0 and slots != len(terms[0][1]):
                raise DimensionMismatchError(
                    f"num_slots={slots} disagrees with exponent length {len(terms[0][1])}"
                )
            slots = len(terms[0][1])
        elif slots <= 0:
            raise InvalidParameterError(
                "empty polynomial needs an explicit num_slots"
            )
        object.__setattr__(self, "terms", terms)
        object.__setattr__(self, "num_slots", slots)

    @classmethod
    def constant(cls, value: float, num_slots: int) -> "BaryPolynomial":
        return cls(((float(value), (0,) * num_slots),), num_slots)

    @classmethod
    def coordinate(cls, j: int, num_slots: int) -> "BaryPolynomial":
        exps = [0] * num_slots
        exps[j] = 1
        return cls(((1.0, tuple(exps)),), num_slots)

    def arity(self) -> Optional[int]:
        return self.num_slots

    @property
    def degree(self) -> int:
        return max((sum(e) for _, e in self.terms), default=0)

    def evaluate_batch(self, s: Simplex, xi: np.ndarray) -> np.ndarray:
        out = np.zeros(xi.shape[0])
        for coeff, exps in self.terms:
            t = np.full(xi.shape[0], coeff)
            for j, e in enumerate(exps):
                if e == 1:
                    t *= xi[:, j]
                elif e > 1:
                    t *= xi[:, j] ** e
            out += t
        return out

    def __add__(self, other: "BaryPolynomial") -> "BaryPolynomial":
        if other.num_slots != self.num_slots:
            raise DimensionMismatchError("adding polynomials of different arity")
        return BaryPolynomial(self.terms + other.terms, self.num_slots)

    def __mul__(self, other: "BaryPolynomial") -> "BaryPolynomial":
        if other.num_slots != self.num_slots:
            raise DimensionMismatchError("multiplying polynomials of different arity")
        prod = []
        for c1, e1 in self.terms:
            for c2, e2 in other.terms:
                prod.append((c1 * c2, tuple(a + b for a, b in zip(e1, e2))))
        return BaryPolynomial(tuple(prod), self.num_slots)

    def scaled(self, factor: float) -> "BaryPolynomial":
        return BaryPolynomial(
            tuple((factor * c, e) for c, e in self.terms), self.num_slots
        )

    def cyclic_shift(self, k: int) -> "BaryPolynomial":
        """The polynomial x -> p(sigma^k(x)) for the canonical cycle."""
        m = self.num_slots
        k = k % m
        shifted = []
        for c, e in self.terms:
            arr = tuple(e[(j - k) % m] for j in range(m))
            shifted.append((c, arr))
        return BaryPolynomial(tuple(shifted), m)

    def compose_linear(self, matrix: np.ndarray) -> "BaryPolynomial":
        """The polynomial q(eta) = p(matrix @ eta).

        ``matrix`` has shape (num_slots, new_slots); each old coordinate
        becomes the linear form given by its row.
        """
        matrix = np.asarray(matrix, dtype=float)
        if matrix.shape[0] != self.num_slots:
            raise DimensionMismatchError(
                f"composition matrix has {matrix.shape[0]} rows, expected {self.num_slots}"
            )
        new_slots = matrix.shape[1]
        rows = [
            {
                tuple(1 if t == j else 0 for t in range(new_slots)): float(matrix[i, j])
                for j in range(new_slots)
                if matrix[i, j] != 0.0
            }
            for i in range(self.num_slots)
        ]
        total: dict[tuple[int, ...], float] = {}
        zero_exp = (0,) * new_slots
        for coeff, exps in self.terms:
            term: dict[tuple[int, ...], float] = {zero_exp: coeff}
            for i, e in enumerate(exps):
                for _ in range(e):
                    term = _dict_mul(term, rows[i])
            for k, v in term.items():
                total[k] = total.get(k, 0.0) + v
        return BaryPolynomial(tuple((v, k) for k, v in total.items()), new_slots)


def _dict_mul(p: dict, q: dict) -> dict:
    out: dict[tuple[int, ...], float] = {}
    for e1, c1 in p.items():
        for e2, c2 in q.items():
            key = tuple(a + b for a, b in zip(e1, e2))
            out[key] = out.get(key, 0.0) + c1 * c2
    return out


@dataclass(frozen=True)
class Constant(FunctionSpec):
    value: float

    def evaluate_batch(self, s: Simplex, xi: np.ndarray) -> np.ndarray:
        return np.full(xi.shape[0], float(self.value))


def _unit_pyramid_height(xi: np.ndarray) -> np.ndarray:
    """1 - (n+1) * min_j xi_j: zero at the barycenter, one on the boundary."""
    m = xi.shape[1]
    return 1.0 - m * xi.min(axis=1)


@dataclass(frozen=True)
class Pyramid(FunctionSpec):
    """apex_value at the barycenter, face_value on the boundary.

    Evaluates to (n+1)*m*apex + (1 - (n+1)*m)*face with m = min_j xi_j, the
    function whose graph is the lateral surface of the pyramid with base
    (T, face_value) and apex (b, apex_value).  Convex iff apex <= face.
    """

    apex_value: float
    face_value: float

    def __post_init__(self):
        if self.apex_value > self.face_value:
            warnings.warn(
                f"Pyramid apex {self.apex_value} above face {self.face_value}: "
                "the function is concave, not convex",
                ConvexityWarning,
                stacklevel=3,
            )

    def evaluate_batch(self, s: Simplex, xi: np.ndarray) -> np.ndarray:
        y = _unit_pyramid_height(xi)
        return self.apex_value * (1.0 - y) + self.face_value * y


@dataclass(frozen=True)
class VertexIndicator(FunctionSpec):
    """value_at_vertices exactly at the n+1 vertices, value_elsewhere otherwise."""

    value_at_vertices: float = 1.0
    value_elsewhere: float = 0.0

    def evaluate_batch(self, s: Simplex, xi: np.ndarray) -> np.ndarray:
        at_vertex = xi.max(axis=1) >= 1.0 - VERTEX_EPS
        return np.where(at_vertex, self.value_at_vertices, self.value_elsewhere)


@dataclass(frozen=True)
class ClampedPyramid(FunctionSpec):
    """alpha * max(G - a, 0) with G the unit pyramid (apex 0, faces 1).

    Supported near the boundary only (where min_j xi_j < (1-a)/(n+1)); convex
    as a maximum of two convex functions.
    """

    a: float
    alpha: float

    def __post_init__(self):
        if not (0.0 < self.a < 1.0):
            raise InvalidParameterError(f"clamp level a must lie in (0,1), got {self.a}")
        if not self.alpha > 0.0:
            raise InvalidParameterError(f"scale alpha must be positive, got {self.alpha}")

    def evaluate_batch(self, s: Simplex, xi: np.ndarray) -> np.ndarray:
        y = _unit_pyramid_height(xi)
        return self.alpha * np.maximum(y - self.a, 0.0)


@dataclass(frozen=True)
class MinCoordWeight(FunctionSpec):
    """inner(x) * (n+1) * min_j xi_j."""

    inner: FunctionSpec

    def arity(self) -> Optional[int]:
        return self.inner.arity()

    def evaluate_batch(self, s: Simplex, xi: np.ndarray) -> np.ndarray:
        m = xi.shape[1]
        return self.inner.evaluate_batch(s, xi) * (m * xi.min(axis=1))


@dataclass(frozen=True)
class Symmetrized(FunctionSpec):
    """The cyclic average (1/(n+1)) * sum_k inner(sigma^k(x)).

    Invariant under the canonical cycle, agrees with the inner function at the
    barycenter, and takes the vertex average of the inner function at every
    vertex.  Convex whenever the inner function is.
    """

    inner: FunctionSpec

    def arity(self) -> Optional[int]:
        return self.inner.arity()

    def evaluate_batch(self, s: Simplex, xi: np.ndarray) -> np.ndarray:
        m = xi.shape[1]
        acc = np.zeros(xi.shape[0])
        for k in range(m):
            acc += self.inner.evaluate_batch(s, np.roll(xi, -k, axis=1))
        return acc / m

    def expanded(self) -> Optional[BaryPolynomial]:
        """The same function as an explicit polynomial, when the inner is one."""
        inner = self.inner
        if isinstance(inner, Symmetrized):
            inner = inner.expanded()
        if not isinstance(inner, BaryPolynomial):
            return None
        m = inner.num_slots
        out = BaryPolynomial((), m)
        for k in range(m):
            out = out + inner.cyclic_shift(k)
        return out.scaled(1.0 / m)


@dataclass(frozen=True)
class FunctionSum(FunctionSpec):
    parts: tuple[FunctionSpec, ...]

    def arity(self) -> Optional[int]:
        for p in self.parts:
            a = p.arity()
            if a is not None:
                return a
        return None

    def validate_for(self, s: Simplex) -> None:
        for p in self.parts:
            p.validate_for(s)

    def evaluate_batch(self, s: Simplex, xi: np.ndarray) -> np.ndarray:
        out = np.zeros(xi.shape[0])
        for p in self.parts:
            out += p.evaluate_batch(s, xi)
        return out


@dataclass(frozen=True)
class FunctionScale(FunctionSpec):
    factor: float
    inner: FunctionSpec

    def arity(self) -> Optional[int]:
        return self.inner.arity()

    def validate_for(self, s: Simplex) -> None:
        self.inner.validate_for(s)

    def evaluate_batch(self, s: Simplex, xi: np.ndarray) -> np.ndarray:
        return self.factor * self.inner.evaluate_batch(s, xi)


def symmetrize(f: FunctionSpec) -> Symmetrized:
    """Average f over the group generated by the canonical cycle."""
    return Symmetrized(f)


def make_pyramid(s: Simplex, f: FunctionSpec) -> Pyramid:
    """The pyramid function matching f at the barycenter and averaging it at
    the vertices: apex = f(b), face = (f(v_0)+...+f(v_n))/(n+1).

    For convex f this dominates the cyclic average of f pointwise; affine f
    collapses to the constant f(b).
    """
    f.validate_for(s)
    m = s.num_vertices
    pts = np.vstack([np.full((1, m), 1.0 / m), np.eye(m)])
    vals = f.evaluate_batch(s, pts)
    apex = float(vals[0])
    face = float(vals[1:].mean())
    return Pyramid(apex_value=apex, face_value=face)


def make_vertex_indicator(s: Simplex) -> VertexIndicator:
    """The convex function that is 1 at the vertices and 0 elsewhere."""
    return VertexIndicator(1.0, 0.0)


def clamped_positive_part_mass(n: int, a: float) -> float:
    """Mean of max(Y - a, 0) where Y = 1-(n+1)*min_j xi_j under the uniform law.

    Y has distribution function y^n on [0,1], so the mean positive part is
    the integral of (1 - y^n) over [a,1]:

        (n - (n+1)*a + a^(n+1)) / (n+1)

    For n=1 this is (1-a)^2/2; multiplied by |T| it gives the integral of
    max(G - a, 0) over the simplex.  Evaluated through expm1/log1p because
    the naive form cancels catastrophically as a -> 1.
    """
    if not (0.0 < a < 1.0):
        raise InvalidParameterError(f"clamp level a must lie in (0,1), got {a}")
    eps = 1.0 - a
    return eps + math.expm1((n + 1) * math.log1p(-eps)) / (n + 1)


def make_fejer_counterexample(s: Simplex, a: float) -> tuple[Pyramid, ClampedPyramid]:
    """The family (F, g) that defeats any uniform Fejer refinement constant.

    F is the unit pyramid (0 at the barycenter, 1 on the boundary) and
    g = alpha * max(F - a, 0) with alpha chosen in closed form so that the
    integral of g over s equals 1.  As a -> 1 the weight concentrates where
    F is close to 1, driving the weighted left gap to 1 and the right gap
    to 0.
    """
    if not (0.0 < a < 1.0):
        raise InvalidParameterError(f"clamp level a must lie in (0,1), got {a}")
    mass = s.volume * clamped_positive_part_mass(s.dim, a)
    return Pyramid(0.0, 1.0), ClampedPyramid(a=a, alpha=1.0 / mass)


@dataclass(frozen=True)
class ConvexityReport:
    """Outcome of a sampled midpoint-style convexity check."""

    samples: int
    seed: int
    worst_violation: float
    f_scale: float
    threshold: float
    violation_count: int
    plausibly_convex: bool


def check_convexity_sampled(ctx: EvalContext, samples: int, seed: int) -> ConvexityReport:
    """Spot-check convexity of ctx.function on random segment interpolations.

    Draws `samples` pairs (x, y) of interior points and t in (0,1) and
    measures f(t*x + (1-t)*y) - t*f(x) - (1-t)*f(y), which is <= 0 for convex
    f.  The verdict is "plausibly convex" when the worst violation stays
    below 1e-9 * (1 + max sampled |f|).  A failed check is a report, never an
    error.  Fixed seeds give identical reports.
    """
    if samples < 1:
        raise InvalidParameterError("samples must be >= 1")
    s, f = ctx.simplex, ctx.function
    m = s.num_vertices
    rng = np.random.Generator(np.random.Philox(key=seed))
    x = uniform_barycentric(rng, samples, m)
    y = uniform_barycentric(rng, samples, m)
    t = rng.uniform(size=samples)
    mid = t[:, None] * x + (1.0 - t[:, None]) * y
    fx = f.evaluate_batch(s, x)
    fy = f.evaluate_batch(s, y)
    fm = f.evaluate_batch(s, mid)
    violation = fm - (t * fx + (1.0 - t) * fy)
    f_scale = float(np.max(np.abs(np.concatenate([fx, fy, fm]))))
    threshold = 1e-9 * (1.0 + f_scale)
    worst = float(violation.max())
    count = int((violation > threshold).sum())
    return ConvexityReport(
        samples=samples,
        seed=seed,
        worst_violation=worst,
        f_scale=f_scale,
        threshold=threshold,
        violation_count=count,
        plausibly_convex=worst <= threshold,
    )
