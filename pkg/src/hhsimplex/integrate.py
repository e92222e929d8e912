"""Integration backends over a simplex.

Three routes, strongest certification first:

* **exact** for barycentric polynomials via the monomial formula

      integral_T prod_j xi_j^(a_j) dx = |T| * n! * prod_j a_j! / (n + sum_j a_j)!

  and, in the same spirit, for functions that depend on the point only through
  Y = 1 - (n+1)*min_j xi_j (pyramids, clamped pyramids and their products):
  Y has distribution function y^n on [0,1] under the uniform law, so

      integral_T h(Y(x)) dx = |T| * integral_0^1 h(y) * n * y^(n-1) dy,

  which is closed-form whenever h is piecewise polynomial.

* **bracketed** for convex integrands: on every cell the midpoint/vertex-mean
  sandwich gives a certified enclosure [|T_c| f(b_c), |T_c| mean_i f(w_i)];
  cells are bisected through their longest edge, largest gaps first, until
  the summed gap meets the tolerance.  The returned interval always contains
  the true integral, at every refinement stage.

* **Monte Carlo** for everything else, including products f*g: uniform
  sampling through normalized exponential spacings, counter-based (Philox)
  seeding so results are reproducible and independent of batching.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional

import numpy as np

from .errors import (
    ConvexityViolationError,
    DegreeOverflowError,
    DimensionMismatchError,
    InvalidParameterError,
)
from .expressions import Expression
from .functions import (
    BaryPolynomial,
    ClampedPyramid,
    Constant,
    FunctionScale,
    FunctionSpec,
    FunctionSum,
    MinCoordWeight,
    Pyramid,
    Symmetrized,
    VertexIndicator,
    uniform_barycentric,
)
from .simplex import Simplex, subdivide_barycentric

# Highest total monomial degree the exact backend accepts.
DEGREE_CAP = 60

# Per-cell slack before a reversed bracket counts as a convexity violation.
_CELL_GUARD = 1e-12

# Monte Carlo draws are processed in fixed-size chunks; part of the
# deterministic sampling contract, do not change casually.
_MC_CHUNK = 1 << 19


@dataclass(frozen=True)
class QuadratureConfig:
    abs_tol: float = 1e-8
    rel_tol: float = 1e-8
    max_depth: int = 40
    mc_samples: int = 100_000
    seed: int = 0

    def __post_init__(self):
        if self.abs_tol <= 0 or self.rel_tol <= 0:
            raise InvalidParameterError("tolerances must be positive")
        if self.max_depth < 0:
            raise InvalidParameterError("max_depth must be >= 0")
        if self.mc_samples < 2:
            raise InvalidParameterError("mc_samples must be >= 2")


DEFAULT_CONFIG = QuadratureConfig()


@dataclass(frozen=True)
class IntegralResult:
    """A raw (non normalized) integral with certification metadata.

    kind is one of "exact", "bracket" (with lo <= value <= hi and value the
    midpoint) or "monte_carlo" (with stderr, samples and seed).  `uncertainty`
    is the certified radius used by verdicts: 0, half-width, or 3*stderr.
    """

    value: float
    kind: str
    evaluations: int = 0
    lo: Optional[float] = None
    hi: Optional[float] = None
    stderr: Optional[float] = None
    samples: Optional[int] = None
    seed: Optional[int] = None
    converged: bool = True

    @classmethod
    def exact(cls, value: float, evaluations: int = 0) -> "IntegralResult":
        return cls(value=float(value), kind="exact", evaluations=evaluations)

    @classmethod
    def bracket(
        cls, lo: float, hi: float, evaluations: int, converged: bool
    ) -> "IntegralResult":
        return cls(
            value=0.5 * (lo + hi),
            kind="bracket",
            evaluations=evaluations,
            lo=float(lo),
            hi=float(hi),
            converged=converged,
        )

    @classmethod
    def monte_carlo(
        cls, value: float, stderr: float, samples: int, seed: int, evaluations: int
    ) -> "IntegralResult":
        return cls(
            value=float(value),
            kind="monte_carlo",
            evaluations=evaluations,
            stderr=float(stderr),
            samples=samples,
            seed=seed,
        )

    @property
    def uncertainty(self) -> float:
        if self.kind == "bracket":
            return 0.5 * (self.hi - self.lo)
        if self.kind == "monte_carlo":
            return 3.0 * self.stderr
        return 0.0


# ---------------------------------------------------------------------------
# Exact backend: polynomials
# ---------------------------------------------------------------------------

def monomial_mean(n: int, exponents) -> float:
    """Mean of prod_j xi_j^(a_j) over the n-simplex: n! prod a_j! / (n+sum a)!."""
    total = sum(exponents)
    num = math.factorial(n) * math.prod(math.factorial(a) for a in exponents)
    return float(Fraction(num, math.factorial(n + total)))


def integrate_monomial(s: Simplex, exponents, degree_cap: int = DEGREE_CAP) -> IntegralResult:
    """Exact integral of a barycentric monomial over s."""
    exponents = tuple(int(e) for e in exponents)
    if len(exponents) != s.num_vertices:
        raise DimensionMismatchError(
            f"exponent vector of length {len(exponents)} for a simplex with "
            f"{s.num_vertices} vertices"
        )
    if any(e < 0 for e in exponents):
        raise InvalidParameterError("monomial exponents must be nonnegative")
    if sum(exponents) > degree_cap:
        raise DegreeOverflowError(
            f"total degree {sum(exponents)} exceeds cap {degree_cap}"
        )
    return IntegralResult.exact(s.volume * monomial_mean(s.dim, exponents))


def integrate_polynomial(s: Simplex, f: BaryPolynomial, degree_cap: int = DEGREE_CAP) -> IntegralResult:
    """Exact integral of a barycentric polynomial (term-by-term, exact sum)."""
    f.validate_for(s)
    if f.degree > degree_cap:
        raise DegreeOverflowError(f"polynomial degree {f.degree} exceeds cap {degree_cap}")
    n = s.dim
    terms = [c * monomial_mean(n, e) for c, e in f.terms]
    return IntegralResult.exact(s.volume * math.fsum(terms))


def integrate_pyramid(s: Simplex, p: Pyramid) -> IntegralResult:
    """Exact integral of a pyramid function: |T| (n*face + apex) / (n+1)."""
    n = s.dim
    return IntegralResult.exact(
        s.volume * (n * p.face_value + p.apex_value) / (n + 1)
    )


# ---------------------------------------------------------------------------
# Exact backend: functions of the minimum barycentric coordinate
# ---------------------------------------------------------------------------
# A profile is a piecewise polynomial h on [0,1] in the variable
# y = 1 - (n+1)*min_j xi_j, stored as pieces (lo, hi, coeffs) with coeffs in
# increasing degree.  Pieces are contiguous and cover [0,1].

Profile = tuple[tuple[float, float, tuple[float, ...]], ...]


def min_coord_profile(f: FunctionSpec) -> Optional[Profile]:
    """Express f as a piecewise polynomial in y = 1-(n+1)*min xi, if possible."""
    if isinstance(f, Pyramid):
        return ((0.0, 1.0, (f.apex_value, f.face_value - f.apex_value)),)
    if isinstance(f, ClampedPyramid):
        return (
            (0.0, f.a, (0.0,)),
            (f.a, 1.0, (-f.alpha * f.a, f.alpha)),
        )
    if isinstance(f, Constant):
        return ((0.0, 1.0, (float(f.value),)),)
    if isinstance(f, BaryPolynomial) and f.degree == 0:
        c = f.terms[0][0] if f.terms else 0.0
        return ((0.0, 1.0, (float(c),)),)
    if isinstance(f, MinCoordWeight):
        inner = min_coord_profile(f.inner)
        if inner is None:
            return None
        return _profile_mul(inner, ((0.0, 1.0, (1.0, -1.0)),))  # (n+1)*min xi = 1-y
    if isinstance(f, Symmetrized):
        # min_j xi_j is invariant under the cycle, so symmetrizing is a no-op.
        return min_coord_profile(f.inner)
    if isinstance(f, FunctionScale):
        inner = min_coord_profile(f.inner)
        if inner is None:
            return None
        return tuple((lo, hi, tuple(f.factor * c for c in cs)) for lo, hi, cs in inner)
    if isinstance(f, FunctionSum):
        profs = [min_coord_profile(p) for p in f.parts]
        if any(p is None for p in profs):
            return None
        out = ((0.0, 1.0, (0.0,)),)
        for p in profs:
            out = _profile_add(out, p)
        return out
    return None


def _piece_coeffs(profile: Profile, y: float) -> tuple[float, ...]:
    for lo, hi, cs in profile:
        if lo <= y < hi or (y < 1.0 + 1e-15 and hi == 1.0 and y >= lo):
            return cs
    return (0.0,)


def _merged_breaks(p: Profile, q: Profile) -> list[float]:
    pts = {0.0, 1.0}
    for lo, hi, _ in (*p, *q):
        pts.add(lo)
        pts.add(hi)
    return sorted(pts)


def _profile_add(p: Profile, q: Profile) -> Profile:
    breaks = _merged_breaks(p, q)
    out = []
    for lo, hi in zip(breaks[:-1], breaks[1:]):
        mid = 0.5 * (lo + hi)
        a, b = _piece_coeffs(p, mid), _piece_coeffs(q, mid)
        width = max(len(a), len(b))
        cs = tuple(
            (a[j] if j < len(a) else 0.0) + (b[j] if j < len(b) else 0.0)
            for j in range(width)
        )
        out.append((lo, hi, cs))
    return tuple(out)


def _profile_mul(p: Profile, q: Profile) -> Profile:
    breaks = _merged_breaks(p, q)
    out = []
    for lo, hi in zip(breaks[:-1], breaks[1:]):
        mid = 0.5 * (lo + hi)
        a, b = _piece_coeffs(p, mid), _piece_coeffs(q, mid)
        cs = [0.0] * (len(a) + len(b) - 1)
        for i, ca in enumerate(a):
            for j, cb in enumerate(b):
                cs[i + j] += ca * cb
        out.append((lo, hi, tuple(cs)))
    return tuple(out)


def integrate_min_profile(s: Simplex, profile: Profile) -> IntegralResult:
    """|T| * integral_0^1 h(y) n y^(n-1) dy for a piecewise-polynomial profile."""
    n = s.dim
    parts = []
    for lo, hi, cs in profile:
        for j, c in enumerate(cs):
            if c != 0.0:
                parts.append(c * n / (n + j) * (hi ** (n + j) - lo ** (n + j)))
    return IntegralResult.exact(s.volume * math.fsum(parts))


def _min_weight_poly_integral(s: Simplex, g: BaryPolynomial) -> IntegralResult:
    """Exact integral of g(x) * (n+1) * min_j xi_j for polynomial g.

    On the barycentric child that replaces vertex i, the parent coordinates
    are xi_i = eta_i/(n+1) and xi_j = eta_j + eta_i/(n+1), and the minimum is
    attained at xi_i, so the integrand becomes the polynomial
    g(M eta) * eta_i on each child.
    """
    g.validate_for(s)
    m = s.num_vertices
    parts = []
    for i, child in enumerate(subdivide_barycentric(s)):
        matrix = np.eye(m)
        matrix[:, i] = 1.0 / m
        composed = g.compose_linear(matrix) * BaryPolynomial.coordinate(i, m)
        parts.append(integrate_polynomial(child, composed).value)
    return IntegralResult.exact(math.fsum(parts))


# ---------------------------------------------------------------------------
# Backend selection helpers
# ---------------------------------------------------------------------------

def as_bary_polynomial(f: FunctionSpec, s: Simplex) -> Optional[BaryPolynomial]:
    """Rewrite f as an explicit barycentric polynomial when that is exact."""
    m = s.num_vertices
    if isinstance(f, BaryPolynomial):
        return f
    if isinstance(f, Constant):
        return BaryPolynomial.constant(f.value, m)
    if isinstance(f, Pyramid) and f.apex_value == f.face_value:
        return BaryPolynomial.constant(f.apex_value, m)
    if isinstance(f, Symmetrized):
        inner = as_bary_polynomial(f.inner, s)
        if inner is None:
            return None
        return Symmetrized(inner).expanded()
    if isinstance(f, FunctionScale):
        inner = as_bary_polynomial(f.inner, s)
        return None if inner is None else inner.scaled(f.factor)
    if isinstance(f, FunctionSum):
        total = BaryPolynomial((), m)
        for part in f.parts:
            p = as_bary_polynomial(part, s)
            if p is None:
                return None
            total = total + p
        return total
    if isinstance(f, Expression):
        return f.to_bary_polynomial(s)
    return None


def known_convex(f: FunctionSpec) -> bool:
    """Convexity certified by construction (conservative; False means unknown)."""
    if isinstance(f, Pyramid):
        return f.apex_value <= f.face_value
    if isinstance(f, ClampedPyramid):
        return True
    if isinstance(f, VertexIndicator):
        return f.value_at_vertices >= f.value_elsewhere
    if isinstance(f, Constant):
        return True
    if isinstance(f, BaryPolynomial):
        return f.degree <= 1
    if isinstance(f, Symmetrized):
        return known_convex(f.inner)
    if isinstance(f, FunctionScale):
        return f.factor >= 0 and known_convex(f.inner)
    if isinstance(f, FunctionSum):
        return all(known_convex(p) for p in f.parts)
    return False


def _try_exact_single(s: Simplex, f: FunctionSpec) -> Optional[IntegralResult]:
    if isinstance(f, Pyramid):
        return integrate_pyramid(s, f)
    poly = as_bary_polynomial(f, s)
    if poly is not None:
        return integrate_polynomial(s, poly)
    profile = min_coord_profile(f)
    if profile is not None:
        return integrate_min_profile(s, profile)
    if isinstance(f, VertexIndicator):
        # Vertices have measure zero, so only value_elsewhere contributes.
        return IntegralResult.exact(s.volume * f.value_elsewhere)
    if isinstance(f, MinCoordWeight):
        inner = as_bary_polynomial(f.inner, s)
        if inner is not None:
            return _min_weight_poly_integral(s, inner)
        return None
    if isinstance(f, FunctionScale):
        inner = _try_exact_single(s, f.inner)
        if inner is None:
            return None
        return IntegralResult.exact(f.factor * inner.value, inner.evaluations)
    if isinstance(f, FunctionSum):
        parts = []
        evals = 0
        for p in f.parts:
            r = _try_exact_single(s, p)
            if r is None:
                return None
            parts.append(r.value)
            evals += r.evaluations
        return IntegralResult.exact(math.fsum(parts), evals)
    return None


def _try_exact(
    s: Simplex, f: FunctionSpec, weight: Optional[FunctionSpec]
) -> Optional[IntegralResult]:
    if weight is None:
        return _try_exact_single(s, f)
    pf = as_bary_polynomial(f, s)
    pg = as_bary_polynomial(weight, s)
    if pf is not None and pg is not None:
        return integrate_polynomial(s, pf * pg)
    rf = min_coord_profile(f)
    rg = min_coord_profile(weight)
    if rf is not None and rg is not None:
        return integrate_min_profile(s, _profile_mul(rf, rg))
    return None


# ---------------------------------------------------------------------------
# Certified bracketing backend
# ---------------------------------------------------------------------------

def integrate_bracketed(
    s: Simplex,
    f: FunctionSpec,
    cfg: QuadratureConfig = DEFAULT_CONFIG,
    history: Optional[list] = None,
) -> IntegralResult:
    """Certified enclosure of the integral of a convex function.

    Every worklist cell contributes the sandwich
    [|T_c| * f(b_c), |T_c| * mean of vertex values]; for convex f the true
    integral over the cell lies inside, so the summed interval encloses the
    integral at every refinement stage.

    Refinement bisects a cell through the midpoint of its longest edge, which
    drives cell diameters (and with them the summed gap) to zero.  Splitting
    through the cell barycenter, although closer in spirit to the pyramid
    construction, leaves every cell with one undivided face and the gap
    stalls near n >= 2; bisection keeps the enclosure property and the
    monotone gap and actually converges.  Cells are split in deterministic
    waves (every cell whose gap is at least half the current maximum) until
    the summed gap meets abs_tol + rel_tol*|estimate| or all remaining cells
    sit at max_depth (then `converged` is False and the best bracket is
    returned).

    Convexity is the caller's responsibility; a cell whose lower bound
    exceeds its upper bound beyond round-off raises ConvexityViolationError.

    Pass a list as `history` to record (lo, hi) totals after every wave.
    """
    f.validate_for(s)
    m = s.num_vertices
    cart = s.vertices

    # Growing buffers; each split overwrites the parent row with one child
    # and appends the other, so a wave costs O(splits), not O(cells).
    cap = 1024
    verts = np.empty((cap, m, m))  # cell vertex rows in T-barycentric coords
    fverts = np.empty((cap, m))
    fcenter = np.empty(cap)
    vols = np.empty(cap)
    depth = np.empty(cap, dtype=int)
    verts[0] = np.eye(m)
    fverts[0] = f.evaluate_batch(s, np.eye(m))
    fcenter[0] = f.evaluate_batch(s, np.full((1, m), 1.0 / m))[0]
    vols[0] = s.volume
    depth[0] = 0
    count = 1
    evaluations = m + 1

    def grow(extra: int):
        nonlocal cap, verts, fverts, fcenter, vols, depth
        while count + extra > cap:
            cap *= 2
        if verts.shape[0] < cap:
            verts = np.resize(verts, (cap, m, m))
            fverts = np.resize(fverts, (cap, m))
            fcenter = np.resize(fcenter, cap)
            vols = np.resize(vols, cap)
            depth = np.resize(depth, cap)

    converged = False
    while True:
        lo_cells = vols[:count] * fcenter[:count]
        hi_cells = vols[:count] * fverts[:count].mean(axis=1)
        guard = _CELL_GUARD * np.maximum(
            1.0, np.maximum(np.abs(lo_cells), np.abs(hi_cells))
        )
        if np.any(lo_cells > hi_cells + guard):
            worst = int(np.argmax(lo_cells - hi_cells))
            raise ConvexityViolationError(
                f"cell lower bound {lo_cells[worst]!r} exceeds upper bound "
                f"{hi_cells[worst]!r}; integrand is not convex"
            )
        total_lo = float(lo_cells.sum())
        total_hi = float(hi_cells.sum())
        if history is not None:
            history.append((total_lo, total_hi))
        estimate = 0.5 * (total_lo + total_hi)
        tol = cfg.abs_tol + cfg.rel_tol * abs(estimate)
        if total_hi - total_lo <= tol:
            converged = True
            break
        gaps = hi_cells - lo_cells
        gaps[depth[:count] >= cfg.max_depth] = 0.0
        gmax = gaps.max()
        if gmax <= 0.0:
            break
        idx = np.flatnonzero(gaps >= 0.5 * gmax)
        k = idx.size
        rows = np.arange(k)

        pv = verts[idx]
        pfv = fverts[idx]

        # Longest edge of each cell, measured in cartesian coordinates.
        x = pv @ cart
        dist2 = ((x[:, :, None, :] - x[:, None, :, :]) ** 2).sum(axis=3)
        flat = dist2.reshape(k, m * m).argmax(axis=1)
        i_idx, j_idx = flat // m, flat % m

        mid = 0.5 * (pv[rows, i_idx] + pv[rows, j_idx])
        f_mid = f.evaluate_batch(s, mid)
        child_a = pv
        child_a[rows, i_idx] = mid
        child_b = verts[idx]  # fresh copy of the parents
        child_b[rows, j_idx] = mid
        fv_a = pfv
        fv_a[rows, i_idx] = f_mid
        fv_b = fverts[idx]
        fv_b[rows, j_idx] = f_mid
        fc_ab = f.evaluate_batch(
            s, np.concatenate([child_a.mean(axis=1), child_b.mean(axis=1)])
        )
        evaluations += 3 * k

        grow(k)
        new = slice(count, count + k)
        verts[idx], verts[new] = child_a, child_b
        fverts[idx], fverts[new] = fv_a, fv_b
        fcenter[idx], fcenter[new] = fc_ab[:k], fc_ab[k:]
        vols[idx] *= 0.5
        vols[new] = vols[idx]
        depth[idx] += 1
        depth[new] = depth[idx]
        count += k

    return IntegralResult.bracket(total_lo, total_hi, evaluations, converged)


# ---------------------------------------------------------------------------
# Monte Carlo backend
# ---------------------------------------------------------------------------

def integrate_monte_carlo(
    s: Simplex,
    f: FunctionSpec,
    g: Optional[FunctionSpec] = None,
    cfg: QuadratureConfig = DEFAULT_CONFIG,
) -> IntegralResult:
    """Seeded Monte Carlo estimate of the integral of f (or f*g) over s.

    Uniform points come from normalized exponential spacings; the counter
    based Philox stream keyed by cfg.seed makes the estimate reproducible.
    Returns |T| * sample mean with stderr = |T| * sample std / sqrt(N).
    """
    f.validate_for(s)
    if g is not None:
        g.validate_for(s)
    n_samples = cfg.mc_samples
    m = s.num_vertices
    rng = np.random.Generator(np.random.Philox(key=cfg.seed))

    count = 0
    mean = 0.0
    m2 = 0.0
    while count < n_samples:
        k = min(_MC_CHUNK, n_samples - count)
        xi = uniform_barycentric(rng, k, m)
        vals = f.evaluate_batch(s, xi)
        if g is not None:
            vals = vals * g.evaluate_batch(s, xi)
        chunk_mean = float(vals.mean())
        chunk_m2 = float(((vals - chunk_mean) ** 2).sum())
        delta = chunk_mean - mean
        total = count + k
        m2 += chunk_m2 + delta * delta * count * k / total
        mean += delta * k / total
        count = total

    variance = m2 / (n_samples - 1)
    stderr = s.volume * math.sqrt(max(variance, 0.0) / n_samples)
    evaluations = n_samples * (2 if g is not None else 1)
    return IntegralResult.monte_carlo(
        s.volume * mean, stderr, n_samples, cfg.seed, evaluations
    )


# ---------------------------------------------------------------------------
# Dispatcher
# ---------------------------------------------------------------------------

def integrate(
    s: Simplex,
    f: FunctionSpec,
    cfg: QuadratureConfig = DEFAULT_CONFIG,
    backend: str = "auto",
    weight: Optional[FunctionSpec] = None,
) -> IntegralResult:
    """Integrate f (or f*weight) over s with the requested backend.

    "auto" picks the tightest applicable certification: exact, then bracketed
    (for integrands convex by construction, no weight), then Monte Carlo.
    """
    if backend == "exact":
        res = _try_exact(s, f, weight)
        if res is None:
            raise InvalidParameterError(
                "no exact backend applies to this integrand"
            )
        return res
    if backend == "bracket":
        if weight is not None:
            raise InvalidParameterError(
                "the bracketed backend does not integrate products"
            )
        return integrate_bracketed(s, f, cfg)
    if backend == "mc":
        return integrate_monte_carlo(s, f, weight, cfg)
    if backend != "auto":
        raise InvalidParameterError(f"unknown backend {backend!r}")

    res = _try_exact(s, f, weight)
    if res is not None:
        return res
    if weight is None and known_convex(f):
        return integrate_bracketed(s, f, cfg)
    return integrate_monte_carlo(s, f, weight, cfg)
