"""Left/right integral-mean gaps on a simplex and their verdicts.

For convex f on an n-simplex T with vertices v_0..v_n, barycenter b and
vertex average M = (f(v_0)+...+f(v_n))/(n+1), the mean value of f sits in
the sandwich f(b) <= mean <= M.  The two gaps

    L(f,T) = mean - f(b)          (left gap)
    R(f,T) = M - mean             (right gap)

satisfy the sharp refinement 0 <= L <= n*R; the pyramid function attains
equality, so the constant n cannot be lowered.  With a nonnegative weight g
invariant under the canonical cycle, the weighted analogues

    L(f,T;g) = int f g - f(b) int g,     R(f,T;g) = M int g - int f g

are both nonnegative, and with Delta = M - f(b) and
alpha = int g * (n+1) * min_j xi_j they satisfy the two-sided chains

    0 <= Delta * alpha <= R(f,T;g)
    0 <= L(f,T;g) <= Delta * (int g - alpha).

No uniform constant N with L(f,T;g) <= N*R(f,T;g) exists across weights: the
clamped-pyramid family drives L -> 1 and R -> 0 as its clamp level tends
to 1.

Verdicts never fail because of quadrature noise: each comparison carries a
tolerance equal to the certified backend uncertainty plus 1e-10 absolute.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import (
    InvalidParameterError,
    NegativeWeightError,
    SearchExhaustedError,
)
from .functions import (
    BaryPolynomial,
    FunctionSpec,
    MinCoordWeight,
    Pyramid,
    Symmetrized,
    make_fejer_counterexample,
    uniform_barycentric,
)
from .integrate import DEFAULT_CONFIG, QuadratureConfig, integrate
from .simplex import Simplex, make_simplex

# Absolute floor added to every verdict tolerance.
VERDICT_EPS = 1e-10

# Points used to spot-check weight nonnegativity / cycle invariance.
_WEIGHT_CHECK_POINTS = 256
_INVARIANCE_POINTS = 64


@dataclass(frozen=True)
class BoundsReport:
    """L, R and the refinement verdict for one (simplex, function) pair."""

    n: int
    L: float
    R: float
    nR: float
    mean_value: float
    f_at_barycenter: float
    M: float
    integration_kind: str
    tolerance: float
    verdict_hh: bool
    slack: float  # nR - L
    volume: float
    uncertainty: float  # certified radius on the mean value
    seed: int


@dataclass(frozen=True)
class FejerReport:
    """Weighted gaps, the chain bounds and their verdicts."""

    n: int
    Lg: float
    Rg: float
    Delta: float
    alpha: float
    int_g: float
    int_fg: float
    f_at_barycenter: float
    M: float
    verdict_thm3: bool
    verdict_ineq_R: bool
    verdict_ineq_L: bool
    tolerance: float
    integration_kind: str
    g_sigma_invariant: bool
    g_invariance_deviation: float
    seed: int


def _barycenter_and_vertex_values(s: Simplex, f: FunctionSpec) -> tuple[float, float]:
    m = s.num_vertices
    pts = np.vstack([np.full((1, m), 1.0 / m), np.eye(m)])
    vals = f.evaluate_batch(s, pts)
    return float(vals[0]), float(vals[1:].mean())


def compute_lr(
    s: Simplex,
    f: FunctionSpec,
    cfg: QuadratureConfig = DEFAULT_CONFIG,
    backend: str = "auto",
) -> BoundsReport:
    """Compute L = mean - f(b) and R = M - mean with the best backend.

    The verdict tolerance is the certified uncertainty of the mean value plus
    1e-10, so true statements never fail on quadrature noise and violations
    beyond noise are never masked.
    """
    f.validate_for(s)
    f_b, big_m = _barycenter_and_vertex_values(s, f)
    res = integrate(s, f, cfg, backend=backend)
    mean = res.value / s.volume
    uncertainty = res.uncertainty / s.volume
    tol = uncertainty + VERDICT_EPS
    left = mean - f_b
    right = big_m - mean
    n = s.dim
    return BoundsReport(
        n=n,
        L=left,
        R=right,
        nR=n * right,
        mean_value=mean,
        f_at_barycenter=f_b,
        M=big_m,
        integration_kind=res.kind,
        tolerance=tol,
        verdict_hh=(left >= -tol) and (n * right - left >= -tol),
        slack=n * right - left,
        volume=s.volume,
        uncertainty=uncertainty,
        seed=cfg.seed,
    )


def verify_refinement(report: BoundsReport) -> bool:
    """True when 0 <= L <= n*R holds within the report's tolerance."""
    return (report.L >= -report.tolerance) and (
        report.nR - report.L >= -report.tolerance
    )


def make_sharpness_witness(
    s: Simplex, cfg: QuadratureConfig = DEFAULT_CONFIG
) -> tuple[Pyramid, BoundsReport]:
    """The unit pyramid and its report, demonstrating L = n*R exactly."""
    witness = Pyramid(0.0, 1.0)
    return witness, compute_lr(s, witness, cfg, backend="exact")


def _check_weight(
    s: Simplex, g: FunctionSpec, seed: int
) -> tuple[bool, float]:
    """Spot-check g >= 0 (error) and cycle invariance (warning flag)."""
    m = s.num_vertices
    rng = np.random.Generator(np.random.Philox(key=seed))
    pts = np.vstack(
        [np.eye(m), np.full((1, m), 1.0 / m),
         uniform_barycentric(rng, _WEIGHT_CHECK_POINTS, m)]
    )
    vals = g.evaluate_batch(s, pts)
    if float(vals.min()) < -1e-9:
        raise NegativeWeightError(
            f"weight sampled below zero: min value {float(vals.min())!r}"
        )
    probe = uniform_barycentric(rng, _INVARIANCE_POINTS, m)
    base = g.evaluate_batch(s, probe)
    deviation = 0.0
    for k in range(1, m):
        shifted = g.evaluate_batch(s, np.roll(probe, -k, axis=1))
        deviation = max(deviation, float(np.abs(shifted - base).max()))
    scale = 1.0 + float(np.abs(base).max())
    return deviation <= 1e-9 * scale, deviation


def fejer_lr(
    s: Simplex,
    f: FunctionSpec,
    g: FunctionSpec,
    cfg: QuadratureConfig = DEFAULT_CONFIG,
    backend: str = "auto",
) -> FejerReport:
    """Weighted gaps L(f,T;g), R(f,T;g) plus Delta and alpha with verdicts.

    g must be nonnegative (spot-checked; NegativeWeightError beyond -1e-9)
    and invariant under the canonical cycle (spot-checked; a failure is
    recorded in the report, not raised).
    """
    if backend == "bracket":
        raise InvalidParameterError(
            "the bracketed backend does not apply to weighted products"
        )
    f.validate_for(s)
    g.validate_for(s)
    sigma_ok, deviation = _check_weight(s, g, cfg.seed)

    f_b, big_m = _barycenter_and_vertex_values(s, f)
    res_g = integrate(s, g, cfg, backend=backend)
    res_fg = integrate(s, f, cfg, backend=backend, weight=g)
    res_alpha = integrate(s, MinCoordWeight(g), cfg, backend=backend)

    int_g = res_g.value
    int_fg = res_fg.value
    alpha = res_alpha.value
    lg = int_fg - f_b * int_g
    rg = big_m * int_g - int_fg
    delta = big_m - f_b

    value_scale = max(abs(f_b), abs(big_m), 1.0)
    tol = (
        res_fg.uncertainty
        + value_scale * res_g.uncertainty
        + max(abs(delta), 1.0) * res_alpha.uncertainty
        + VERDICT_EPS
    )

    verdict_thm3 = (lg >= -tol) and (rg >= -tol)
    da = delta * alpha
    verdict_r = (da >= -tol) and (da <= rg + tol)
    remainder = delta * (int_g - alpha)
    verdict_l = (lg >= -tol) and (lg <= remainder + tol)

    kinds = {res_g.kind, res_fg.kind, res_alpha.kind}
    kind = "monte_carlo" if "monte_carlo" in kinds else (
        "bracket" if "bracket" in kinds else "exact"
    )
    return FejerReport(
        n=s.dim,
        Lg=lg,
        Rg=rg,
        Delta=delta,
        alpha=alpha,
        int_g=int_g,
        int_fg=int_fg,
        f_at_barycenter=f_b,
        M=big_m,
        verdict_thm3=verdict_thm3,
        verdict_ineq_R=verdict_r,
        verdict_ineq_L=verdict_l,
        tolerance=tol,
        integration_kind=kind,
        g_sigma_invariant=sigma_ok,
        g_invariance_deviation=deviation,
        seed=cfg.seed,
    )


def verify_fejer_bounds(report: FejerReport) -> bool:
    """True when both weighted chains hold within the report's tolerance."""
    tol = report.tolerance
    da = report.Delta * report.alpha
    ok_r = (da >= -tol) and (da <= report.Rg + tol)
    remainder = report.Delta * (report.int_g - report.alpha)
    ok_l = (report.Lg >= -tol) and (report.Lg <= remainder + tol)
    return ok_r and ok_l


def demonstrate_no_uniform_fejer_constant(
    s: Simplex,
    big_n: float,
    cfg: QuadratureConfig = DEFAULT_CONFIG,
) -> tuple[float, FejerReport]:
    """Find a clamp level a with L(F,T;g) > N * R(F,T;g) for the pyramid family.

    Searches the geometric schedule a_k = 1 - 2^(-k); existence is guaranteed
    because the weighted left gap tends to 1 and the right gap to 0 as
    a -> 1, so exhaustion (k > 40) signals an implementation bug.
    """
    if big_n <= 0:
        raise InvalidParameterError("the constant to beat must be positive")
    for k in range(1, 41):
        a = 1.0 - 2.0 ** (-k)
        pyramid, weight = make_fejer_counterexample(s, a)
        report = fejer_lr(s, pyramid, weight, cfg)
        if report.Lg > big_n * report.Rg:
            return a, report
    raise SearchExhaustedError(
        f"no clamp level up to 1-2^-40 produced Lg > {big_n} * Rg"
    )


# ---------------------------------------------------------------------------
# Random corpora
# ---------------------------------------------------------------------------

# Condition-number cap on the barycentric solve matrix of accepted simplices.
_CORPUS_COND_CAP = 1e6


def random_simplex(n: int, rng: np.random.Generator) -> Simplex:
    """A random nondegenerate, reasonably conditioned n-simplex."""
    while True:
        verts = rng.normal(size=(n + 1, n))
        system = np.vstack([verts.T, np.ones(n + 1)])
        if np.linalg.cond(system) > _CORPUS_COND_CAP:
            continue
        try:
            return make_simplex(verts)
        except Exception:
            continue


def random_psd_quadratic(num_slots: int, rng: np.random.Generator) -> BaryPolynomial:
    """xi^T Q xi + c^T xi with Q positive semidefinite, hence convex in x."""
    a = rng.normal(size=(num_slots, num_slots))
    q = a.T @ a / num_slots
    c = rng.normal(size=num_slots)
    terms = []
    for i in range(num_slots):
        e = [0] * num_slots
        e[i] = 2
        terms.append((float(q[i, i]), tuple(e)))
        e1 = [0] * num_slots
        e1[i] = 1
        terms.append((float(c[i]), tuple(e1)))
        for j in range(i + 1, num_slots):
            e2 = [0] * num_slots
            e2[i] = 1
            e2[j] = 1
            terms.append((2.0 * float(q[i, j]), tuple(e2)))
    return BaryPolynomial(tuple(terms), num_slots)


def random_nonneg_symmetric_poly(
    num_slots: int, rng: np.random.Generator
) -> BaryPolynomial:
    """Cycle-invariant nonnegative polynomial: symmetrized square of a form."""
    d = rng.normal(size=num_slots)
    lin = BaryPolynomial(
        tuple((float(d[i]), tuple(1 if j == i else 0 for j in range(num_slots))) for i in range(num_slots)),
        num_slots,
    )
    return Symmetrized(lin * lin).expanded()


@dataclass(frozen=True)
class CorpusRow:
    dim: int
    instance: int
    L: float
    R: float
    nR: float
    slack: float
    backend: str
    verdict: bool


def run_refinement_corpus(
    dims: Sequence[int],
    count: int,
    seed: int,
    include_witnesses: bool = False,
    cfg: QuadratureConfig = DEFAULT_CONFIG,
) -> list[CorpusRow]:
    """Random convex-quadratic instances checked against 0 <= L <= n*R.

    Instances cycle through `dims`; in dimension 1 the stronger L <= R is
    also required.  Deterministic for a fixed seed.  With
    `include_witnesses`, pyramid equality rows (slack ~ 0) are appended per
    dimension and must satisfy |L - n*R| <= 1e-12 * max(1, |L|).
    """
    if count < 0:
        raise InvalidParameterError("count must be nonnegative")
    dims = list(dims)
    if not dims or any(d < 1 for d in dims):
        raise InvalidParameterError("dims must be a nonempty list of n >= 1")
    rng = np.random.Generator(np.random.Philox(key=seed))
    rows = []
    for i in range(count):
        n = dims[i % len(dims)]
        s = random_simplex(n, rng)
        f = random_psd_quadratic(n + 1, rng)
        rep = compute_lr(s, f, cfg)
        ok = verify_refinement(rep)
        if n == 1:
            ok = ok and (rep.L <= rep.R + rep.tolerance)
        rows.append(
            CorpusRow(n, i, rep.L, rep.R, rep.nR, rep.slack, rep.integration_kind, ok)
        )
    if include_witnesses:
        idx = count
        for n in sorted(set(dims)):
            s = random_simplex(n, rng)
            _, rep = make_sharpness_witness(s, cfg)
            ok = verify_refinement(rep) and (
                abs(rep.L - rep.nR) <= 1e-12 * max(1.0, abs(rep.L))
            )
            rows.append(
                CorpusRow(n, idx, rep.L, rep.R, rep.nR, rep.slack,
                          rep.integration_kind, ok)
            )
            idx += 1
    return rows


def run_fejer_corpus(
    dims: Sequence[int],
    count: int,
    seed: int,
    cfg: QuadratureConfig = DEFAULT_CONFIG,
) -> list[FejerReport]:
    """Random (convex symmetric f, nonnegative symmetric g) chain checks."""
    dims = list(dims)
    rng = np.random.Generator(np.random.Philox(key=seed))
    reports = []
    for i in range(count):
        n = dims[i % len(dims)]
        s = random_simplex(n, rng)
        f = Symmetrized(random_psd_quadratic(n + 1, rng)).expanded()
        g = random_nonneg_symmetric_poly(n + 1, rng)
        reports.append(fejer_lr(s, f, g, cfg))
    return reports
