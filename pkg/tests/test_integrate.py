import math

import numpy as np
import pytest
from scipy.integrate import dblquad, quad

from hhsimplex import (
    BaryPolynomial,
    ClampedPyramid,
    Constant,
    ConvexityViolationError,
    DegreeOverflowError,
    Expression,
    InvalidParameterError,
    MinCoordWeight,
    Pyramid,
    QuadratureConfig,
    Symmetrized,
    VertexIndicator,
    integrate,
    integrate_bracketed,
    integrate_monomial,
    integrate_monte_carlo,
    integrate_polynomial,
    integrate_pyramid,
    known_convex,
    make_fejer_counterexample,
    make_simplex,
    min_coord_profile,
)
from hhsimplex.bounds import random_psd_quadratic, random_simplex
from hhsimplex.integrate import integrate_min_profile
from conftest import rng


# --- exact monomials -------------------------------------------------------

def test_monomial_volume(unit2, interval):
    assert integrate_monomial(unit2, (0, 0, 0)).value == pytest.approx(0.5, abs=1e-16)
    assert integrate_monomial(interval, (0, 0)).value == pytest.approx(2.0, abs=1e-16)


def test_monomial_x_squared_oracle(unit2):
    # iterated-integral oracle for x^2 over the unit triangle
    oracle, _ = dblquad(lambda y, x: x * x, 0, 1, 0, lambda x: 1 - x)
    got = integrate_monomial(unit2, (0, 2, 0)).value
    assert oracle == pytest.approx(1 / 12, rel=1e-10)
    assert got == pytest.approx(1 / 12, rel=1e-15)


def test_monomial_single_coordinate(unit2, unit3, interval):
    for s in (unit2, unit3, interval):
        m = s.num_vertices
        for i in range(m):
            exps = tuple(1 if j == i else 0 for j in range(m))
            got = integrate_monomial(s, exps).value
            assert got == pytest.approx(s.volume / m, rel=1e-14)
    # Monte Carlo cross-check on one case
    mc = integrate_monte_carlo(
        unit3, BaryPolynomial.coordinate(0, 4), cfg=QuadratureConfig(mc_samples=200_000, seed=5)
    )
    assert abs(mc.value - unit3.volume / 4) <= 3 * mc.stderr


def test_monomial_higher_order_oracle(unit2):
    oracle, _ = dblquad(
        lambda y, x: (1 - x - y) ** 2 * x * y ** 3, 0, 1, 0, lambda x: 1 - x
    )
    got = integrate_monomial(unit2, (2, 1, 3)).value
    assert got == pytest.approx(oracle, rel=1e-9)


def test_monomial_validation(unit2):
    with pytest.raises(DegreeOverflowError):
        integrate_monomial(unit2, (40, 30, 0))
    from hhsimplex import DimensionMismatchError

    with pytest.raises(DimensionMismatchError):
        integrate_monomial(unit2, (1, 0))
    with pytest.raises(InvalidParameterError):
        integrate_monomial(unit2, (-1, 1, 0))


# --- exact polynomials -----------------------------------------------------

def test_polynomial_sum_of_squares(unit2):
    f = Expression("x1^2+x2^2").to_bary_polynomial(unit2)
    assert integrate_polynomial(unit2, f).value == pytest.approx(1 / 6, rel=1e-14)


def test_polynomial_affine_integrates_to_barycenter_value(unit2):
    g = rng(8)
    for _ in range(10):
        c = g.normal(size=3)
        f = BaryPolynomial(tuple((float(c[i]), tuple(1 if j == i else 0 for j in range(3))) for i in range(3)))
        got = integrate_polynomial(unit2, f).value
        f_b = f.evaluate_batch(unit2, np.full((1, 3), 1 / 3))[0]
        assert got == pytest.approx(unit2.volume * f_b, rel=1e-12)


def test_symmetrized_polynomial_same_integral(unit2):
    f = BaryPolynomial(((1.0, (2, 0, 0)),))
    plain = integrate_polynomial(unit2, f).value
    sym = integrate(unit2, Symmetrized(f), backend="exact").value
    assert sym == pytest.approx(plain, rel=1e-14)


def test_cyclic_shift_invariance_exact():
    # shifting exponent vectors cyclically never changes the exact integral
    g = rng(12)
    for trial in range(50):
        n = int(g.integers(1, 5))
        m = n + 1
        s = random_simplex(n, g)
        terms = []
        for _ in range(6):
            exps = tuple(int(e) for e in g.integers(0, 3, size=m))
            terms.append((float(g.normal()), exps))
        f = BaryPolynomial(tuple(terms), m)
        base = integrate_polynomial(s, f).value
        for k in range(1, m):
            shifted = integrate_polynomial(s, f.cyclic_shift(k)).value
            assert shifted == pytest.approx(base, rel=1e-12, abs=1e-300)


def test_mc_shift_invariance_same_seed(unit2):
    f = BaryPolynomial(((1.0, (2, 1, 0)), (0.5, (0, 0, 1))))
    cfg = QuadratureConfig(mc_samples=100_000, seed=9)
    base = integrate_monte_carlo(unit2, f, cfg=cfg)
    for k in (1, 2):
        shifted = integrate_monte_carlo(unit2, f.cyclic_shift(k), cfg=cfg)
        tol = 3 * math.hypot(base.stderr, shifted.stderr)
        assert abs(shifted.value - base.value) <= tol


# --- pyramid family --------------------------------------------------------

def test_pyramid_integral_unit2(unit2):
    res = integrate_pyramid(unit2, Pyramid(0.0, 1.0))
    assert res.value == pytest.approx(1 / 3, abs=1e-16)
    assert res.value / unit2.volume == pytest.approx(2 / 3, abs=1e-15)


def test_pyramid_constant(unit2):
    res = integrate_pyramid(unit2, Pyramid(2.5, 2.5))
    assert res.value == pytest.approx(2.5 * unit2.volume, rel=1e-15)


def test_pyramid_interval_is_abs_x(interval):
    # oracle: int_{-1}^{1} |x| dx = 1
    oracle, _ = quad(lambda x: abs(x), -1, 1, points=[0.0])
    res = integrate_pyramid(interval, Pyramid(0.0, 1.0))
    assert res.value == pytest.approx(oracle, rel=1e-12)
    assert res.value == pytest.approx(1.0, abs=1e-15)


def test_min_profile_matches_pyramid_formula(unit3):
    prof = min_coord_profile(Pyramid(0.25, 2.0))
    via_profile = integrate_min_profile(unit3, prof).value
    via_formula = integrate_pyramid(unit3, Pyramid(0.25, 2.0)).value
    assert via_profile == pytest.approx(via_formula, rel=1e-14)


def test_clamped_profile_against_mc(unit2, unit3, interval):
    for s in (interval, unit2, unit3):
        _, g = make_fejer_counterexample(s, 0.6)
        exact = integrate(s, g, backend="exact")
        assert exact.kind == "exact"
        mc = integrate_monte_carlo(s, g, cfg=QuadratureConfig(mc_samples=300_000, seed=23))
        assert abs(exact.value - mc.value) <= 3.5 * mc.stderr
        assert exact.value == pytest.approx(1.0, rel=1e-11)


def test_min_weight_profile_route(unit2):
    # alpha for g == 1: |T|/(n+1); profile and Monte Carlo agree
    f = MinCoordWeight(Constant(1.0))
    exact = integrate(unit2, f, backend="exact")
    assert exact.value == pytest.approx(unit2.volume / 3, rel=1e-13)
    mc = integrate_monte_carlo(unit2, f, cfg=QuadratureConfig(mc_samples=200_000, seed=31))
    assert abs(exact.value - mc.value) <= 3 * mc.stderr


def test_min_weight_polynomial_subdivision_route(interval):
    # alpha for g = x^2 on [-1,1]: oracle int x^2 (1-|x|) dx = 1/6
    g = Expression("x1^2").to_bary_polynomial(interval)
    res = integrate(interval, MinCoordWeight(g), backend="exact")
    oracle, _ = quad(lambda x: x * x * (1 - abs(x)), -1, 1, points=[0.0])
    assert res.value == pytest.approx(oracle, rel=1e-10)
    assert res.value == pytest.approx(1 / 6, rel=1e-13)


def test_min_weight_polynomial_subdivision_random(unit2):
    # general polynomial weight: subdivision route vs Monte Carlo
    g = rng(14)
    poly = random_psd_quadratic(3, g)
    res = integrate(unit2, MinCoordWeight(poly), backend="exact")
    mc = integrate_monte_carlo(
        unit2, MinCoordWeight(poly), cfg=QuadratureConfig(mc_samples=400_000, seed=3)
    )
    assert abs(res.value - mc.value) <= 3.5 * mc.stderr


def test_vertex_indicator_integral_zero(unit2):
    res = integrate(unit2, VertexIndicator(1.0, 0.0), backend="exact")
    assert res.value == 0.0


# --- certified bracketing --------------------------------------------------

def test_bracket_contains_exact_at_every_wave(unit2):
    f = Expression("x1^2+x2^2")
    exact = 1 / 6
    hist = []
    res = integrate_bracketed(
        unit2, f, QuadratureConfig(abs_tol=1e-6, rel_tol=1e-12), history=hist
    )
    assert res.converged
    assert res.hi - res.lo <= 1e-6
    assert len(hist) > 3
    for lo, hi in hist:
        assert lo - 1e-12 <= exact <= hi + 1e-12
    # gap is non-increasing wave over wave
    gaps = [hi - lo for lo, hi in hist]
    assert all(g2 <= g1 + 1e-15 for g1, g2 in zip(gaps, gaps[1:]))


def test_bracket_affine_is_immediate(unit2):
    f = Expression("1+2*x1-x2")
    res = integrate_bracketed(unit2, f, QuadratureConfig())
    assert res.hi - res.lo <= 1e-12
    assert res.evaluations == 4  # root cell only


def test_bracket_contains_pyramid_closed_form(unit2):
    exact = integrate_pyramid(unit2, Pyramid(0.0, 1.0)).value
    res = integrate_bracketed(unit2, Pyramid(0.0, 1.0), QuadratureConfig(abs_tol=1e-6, rel_tol=1e-10))
    assert res.lo - 1e-12 <= exact <= res.hi + 1e-12
    assert res.converged


def test_bracket_detects_concave_input(unit2):
    with pytest.raises(ConvexityViolationError):
        integrate_bracketed(unit2, BaryPolynomial(((-1.0, (2, 0, 0)),)), QuadratureConfig())


def test_bracket_reports_tolerance_not_reached(unit2):
    res = integrate_bracketed(
        unit2,
        Expression("x1^2+x2^2"),
        QuadratureConfig(abs_tol=1e-9, rel_tol=1e-12, max_depth=6),
    )
    assert not res.converged
    assert res.lo - 1e-12 <= 1 / 6 <= res.hi + 1e-12


def test_bracket_deterministic(unit2):
    f = Expression("x1^2+x2^2")
    cfg = QuadratureConfig(abs_tol=1e-5, rel_tol=1e-10)
    r1 = integrate_bracketed(unit2, f, cfg)
    r2 = integrate_bracketed(unit2, f, cfg)
    assert (r1.lo, r1.hi, r1.evaluations) == (r2.lo, r2.hi, r2.evaluations)


# --- Monte Carlo -----------------------------------------------------------

def test_mc_constant_has_zero_stderr(unit2):
    res = integrate_monte_carlo(unit2, Constant(1.0), cfg=QuadratureConfig(mc_samples=10_000, seed=0))
    assert res.value == pytest.approx(unit2.volume, abs=1e-15)
    assert res.stderr == 0.0


def test_mc_x_squared_seed42(unit2):
    f = BaryPolynomial(((1.0, (0, 2, 0)),))
    res = integrate_monte_carlo(unit2, f, cfg=QuadratureConfig(mc_samples=1_000_000, seed=42))
    assert abs(res.value - 1 / 12) <= 3 * res.stderr
    assert res.stderr < 5e-4


def test_mc_deterministic_for_seed(unit2):
    f = Expression("x1^2")
    cfg = QuadratureConfig(mc_samples=50_000, seed=77)
    r1 = integrate_monte_carlo(unit2, f, cfg=cfg)
    r2 = integrate_monte_carlo(unit2, f, cfg=cfg)
    assert r1.value == r2.value and r1.stderr == r2.stderr


def test_mc_product_pyramid_times_clamped(interval):
    # closed form for the weighted pyramid product: (a+2)/3 at a = 0.5
    big_f, g = make_fejer_counterexample(interval, 0.5)
    res = integrate_monte_carlo(
        interval, big_f, g, QuadratureConfig(mc_samples=1_000_000, seed=19)
    )
    assert abs(res.value - 5 / 6) <= 3 * res.stderr


def test_exact_product_pyramid_times_clamped(interval, unit2):
    # profile-product route against the 1D closed form and against MC in 2D
    big_f, g = make_fejer_counterexample(interval, 0.5)
    res = integrate(interval, big_f, weight=g, backend="exact")
    assert res.value == pytest.approx(5 / 6, rel=1e-12)

    big_f2, g2 = make_fejer_counterexample(unit2, 0.5)
    res2 = integrate(unit2, big_f2, weight=g2, backend="exact")
    mc2 = integrate_monte_carlo(unit2, big_f2, g2, QuadratureConfig(mc_samples=400_000, seed=29))
    assert abs(res2.value - mc2.value) <= 3.5 * mc2.stderr


def test_exact_product_polynomials(interval):
    f = Expression("x1^2").to_bary_polynomial(interval)
    res = integrate(interval, f, weight=f, backend="exact")
    assert res.value == pytest.approx(2 / 5, rel=1e-14)


# --- dispatcher ------------------------------------------------------------

def test_auto_selects_exact_for_polynomials(unit2):
    res = integrate(unit2, Expression("x1^2+x2^2"))
    assert res.kind == "exact"


def test_auto_falls_back_to_mc_for_nonconvex_expression(unit2):
    res = integrate(unit2, Expression("abs(x1-0.25)*x2"), QuadratureConfig(mc_samples=5_000, seed=1))
    assert res.kind == "monte_carlo"


def test_exact_backend_refuses_non_exact_integrand(unit2):
    with pytest.raises(InvalidParameterError):
        integrate(unit2, Expression("exp(x1)"), backend="exact")


def test_known_convex_classification():
    assert known_convex(Pyramid(0.0, 1.0))
    with pytest.warns(UserWarning):
        upside_down = Pyramid(1.0, 0.0)
    assert not known_convex(upside_down)
    assert known_convex(ClampedPyramid(0.5, 2.0))
    assert known_convex(VertexIndicator(1.0, 0.0))
    assert known_convex(Symmetrized(Constant(3.0)))
    assert not known_convex(Expression("x1^2"))


def test_backend_agreement_shared_corpus(unit2):
    # exact vs bracketed vs Monte Carlo within certified tolerances
    cases = [
        Expression("x1^2"),
        Expression("x1^2+x2^2"),
        Pyramid(0.0, 1.0),
        Expression("1+x1-2*x2"),
    ]
    mc_cfg = QuadratureConfig(mc_samples=1_000_000, seed=101)
    br_cfg = QuadratureConfig(abs_tol=1e-6, rel_tol=1e-10)
    for f in cases:
        exact = integrate(unit2, f, backend="exact")
        br = integrate_bracketed(unit2, f, br_cfg)
        mc = integrate_monte_carlo(unit2, f, cfg=mc_cfg)
        assert br.lo - 1e-12 <= exact.value <= br.hi + 1e-12
        assert abs(mc.value - exact.value) <= 3 * mc.stderr + 1e-12
        assert abs(mc.value - br.value) <= 3 * mc.stderr + (br.hi - br.lo)


def test_mean_value_sandwich_all_backends(unit2):
    # f(b) <= mean <= M for a convex function, whichever backend integrates it
    f = Expression("x1^2+x2^2")
    f_b = f.evaluate_batch(unit2, np.full((1, 3), 1 / 3))[0]
    big_m = float(f.evaluate_batch(unit2, np.eye(3)).mean())
    for res, slack in [
        (integrate(unit2, f, backend="exact"), 1e-12),
        (integrate_bracketed(unit2, f, QuadratureConfig(abs_tol=1e-6, rel_tol=1e-10)), 1e-6),
        (integrate_monte_carlo(unit2, f, cfg=QuadratureConfig(mc_samples=500_000, seed=7)), None),
    ]:
        mean = res.value / unit2.volume
        tol = (3 * res.stderr / unit2.volume if slack is None else slack)
        assert f_b - tol <= mean <= big_m + tol
