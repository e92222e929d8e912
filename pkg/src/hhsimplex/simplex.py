"""Simplex geometry and barycentric coordinates.

A simplex T in R^n is the convex hull of n+1 vertices v_0..v_n whose edge
vectors v_i - v_0 are linearly independent.  Every point of T is written in
barycentric coordinates (xi_0, ..., xi_n): nonnegative weights summing to 1
with x = sum_i xi_i * v_i.  The barycenter b has all coordinates equal to
1/(n+1) and is the vertex average.

The cyclic group action used throughout the package permutes barycentric
coordinates along the canonical cycle i -> (i+1) mod (n+1); shift k applies
the cycle k times.  All types here are immutable and all operations are pure.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import (
    DegenerateSimplexError,
    DimensionMismatchError,
    InvalidParameterError,
    OrderMismatchError,
)

# Scale-invariant degeneracy test: volume < DEGENERACY_TOL * (max edge)^n.
DEGENERACY_TOL = 1e-12
# Absolute tolerance on sum(xi) - 1 for barycentric coordinates.
COORD_SUM_TOL = 1e-12
# Slack below zero before a coordinate counts as outside the simplex.
OUTSIDE_SLACK = 1e-9


def _frozen(a: np.ndarray) -> np.ndarray:
    a = np.ascontiguousarray(a, dtype=float)
    a.setflags(write=False)
    return a


@dataclass(frozen=True)
class BarycentricPoint:
    """Coordinates (xi_0, ..., xi_n) with sum 1.

    Coordinates are allowed to be negative so that points outside the simplex
    (as produced by ``to_barycentric`` on exterior inputs) remain representable;
    ``is_inside`` reports containment with round-off slack.
    """

    coords: np.ndarray

    def __post_init__(self):
        coords = _frozen(np.atleast_1d(self.coords))
        if coords.ndim != 1 or coords.size < 2:
            raise DimensionMismatchError(
                f"barycentric point needs at least 2 coordinates, got shape {coords.shape}"
            )
        s = float(coords.sum())
        if abs(s - 1.0) > COORD_SUM_TOL:
            raise InvalidParameterError(
                f"barycentric coordinates must sum to 1 (got {s!r})"
            )
        object.__setattr__(self, "coords", coords)

    @property
    def num_coords(self) -> int:
        return self.coords.size

    @property
    def min_coord(self) -> float:
        return float(self.coords.min())

    @property
    def is_inside(self) -> bool:
        """True when all coordinates are >= -1e-9 (point of T up to round-off)."""
        return bool(self.coords.min() >= -OUTSIDE_SLACK)


@dataclass(frozen=True)
class Simplex:
    """An n-simplex with cached volume and barycenter.

    Construct through :func:`make_simplex`, which validates dimensions and
    nondegeneracy and fills the cached fields.
    """

    vertices: np.ndarray  # shape (n+1, n), one row per vertex
    volume: float
    barycenter_cartesian: np.ndarray  # shape (n,)

    @property
    def dim(self) -> int:
        return self.vertices.shape[1]

    @property
    def num_vertices(self) -> int:
        return self.vertices.shape[0]

    def barycenter(self) -> BarycentricPoint:
        m = self.num_vertices
        return BarycentricPoint(np.full(m, 1.0 / m))

    def vertex_point(self, i: int) -> BarycentricPoint:
        coords = np.zeros(self.num_vertices)
        coords[i] = 1.0
        return BarycentricPoint(coords)


def make_simplex(vertices) -> Simplex:
    """Build a :class:`Simplex` from n+1 vertices of length n.

    volume = |det(v_1 - v_0, ..., v_n - v_0)| / n!

    Raises:
        DimensionMismatchError: wrong vertex count or inconsistent lengths.
        DegenerateSimplexError: volume below 1e-12 * (max edge length)^n.
    """
    V = np.asarray(vertices, dtype=float)
    if V.ndim != 2:
        raise DimensionMismatchError(
            "vertices must be a list of equal-length coordinate vectors"
        )
    m, n = V.shape
    if n < 1 or m != n + 1:
        raise DimensionMismatchError(
            f"an n-simplex needs n+1 vertices of length n >= 1, got {m} of length {n}"
        )
    edges = V[1:] - V[0]
    volume = abs(float(np.linalg.det(edges))) / math.factorial(n)
    diffs = V[:, None, :] - V[None, :, :]
    max_edge = float(np.sqrt((diffs * diffs).sum(axis=2)).max())
    if volume < DEGENERACY_TOL * max_edge**n:
        raise DegenerateSimplexError(
            f"vertices are affinely dependent (volume {volume:.3e}, max edge {max_edge:.3e})"
        )
    return Simplex(
        vertices=_frozen(V),
        volume=volume,
        barycenter_cartesian=_frozen(V.mean(axis=0)),
    )


def to_cartesian(s: Simplex, x: BarycentricPoint) -> np.ndarray:
    """Return sum_i xi_i * v_i."""
    if x.num_coords != s.num_vertices:
        raise DimensionMismatchError(
            f"point has {x.num_coords} coordinates, simplex has {s.num_vertices} vertices"
        )
    return x.coords @ s.vertices


def to_barycentric(s: Simplex, p) -> BarycentricPoint:
    """Barycentric coordinates of a cartesian point in the affine hull of s.

    Solves the (n+1)x(n+1) system [V^T; 1] xi = [p; 1] with partial pivoting
    and renormalizes the coordinate sum.  Points outside the simplex are
    returned with negative coordinates; check ``is_inside`` on the result.
    """
    p = np.asarray(p, dtype=float)
    if p.shape != (s.dim,):
        raise DimensionMismatchError(
            f"expected a point of length {s.dim}, got shape {p.shape}"
        )
    m = s.num_vertices
    A = np.empty((m, m))
    A[:-1] = s.vertices.T
    A[-1] = 1.0
    rhs = np.append(p, 1.0)
    xi = np.linalg.solve(A, rhs)
    xi /= xi.sum()
    return BarycentricPoint(xi)


@dataclass(frozen=True)
class CyclicPermutation:
    """Power sigma^shift of the canonical (n+1)-cycle i -> (i+1) mod (n+1).

    Acting on coordinates: output_i = input_{(i + shift) mod order}.  Applying
    the generator ``order`` times is the identity.
    """

    order: int
    shift: int

    def __post_init__(self):
        if self.order < 2:
            raise InvalidParameterError("cyclic permutation needs order >= 2")
        object.__setattr__(self, "shift", self.shift % self.order)

    def apply_batch(self, coords: np.ndarray) -> np.ndarray:
        """Permute the last axis of an array of coordinate rows."""
        if coords.shape[-1] != self.order:
            raise OrderMismatchError(
                f"permutation of order {self.order} applied to {coords.shape[-1]} coordinates"
            )
        return np.roll(coords, -self.shift, axis=-1)


def cyclic_shifts(order: int) -> list[CyclicPermutation]:
    """All powers of the canonical cycle, identity first."""
    return [CyclicPermutation(order, k) for k in range(order)]


def apply_permutation(sigma: CyclicPermutation, x: BarycentricPoint) -> BarycentricPoint:
    """Permute barycentric coordinates: output_i = input_{sigma(i)}."""
    return BarycentricPoint(sigma.apply_batch(x.coords))


def subdivide_barycentric(s: Simplex) -> list[Simplex]:
    """Split s into n+1 subsimplices through its barycenter.

    Child i replaces vertex v_i with the barycenter; every child has volume
    |T|/(n+1) and together they tile T.
    """
    children = []
    b = s.barycenter_cartesian
    for i in range(s.num_vertices):
        verts = np.array(s.vertices)
        verts[i] = b
        children.append(make_simplex(verts))
    return children
