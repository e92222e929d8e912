import numpy as np
import pytest

from hhsimplex import (
    DimensionMismatchError,
    Expression,
    ExpressionEvalError,
    integrate,
    make_simplex,
    uniform_barycentric,
)
from conftest import rng


def cart_eval(expr: Expression, s, xi: np.ndarray) -> np.ndarray:
    return expr.evaluate_batch(s, xi)


@pytest.mark.parametrize(
    "source,reference",
    [
        ("x1^2+x2^2", lambda x: x[:, 0] ** 2 + x[:, 1] ** 2),
        ("abs(x1)", lambda x: np.abs(x[:, 0])),
        ("exp(x1)*2", lambda x: 2 * np.exp(x[:, 0])),
        ("max0(x1-0.5)", lambda x: np.maximum(x[:, 0] - 0.5, 0.0)),
        ("(x1+x2)^3/4", lambda x: (x[:, 0] + x[:, 1]) ** 3 / 4),
        ("2*x1 - x2", lambda x: 2 * x[:, 0] - x[:, 1]),
        ("-x1^2+1", lambda x: 1 - x[:, 0] ** 2),
        ("1.5e2*x1", lambda x: 150.0 * x[:, 0]),
        ("x1*x2 - x1/2", lambda x: x[:, 0] * x[:, 1] - x[:, 0] / 2),
    ],
)
def test_expression_against_numpy(unit2, source, reference):
    xi = uniform_barycentric(rng(1), 200, 3)
    x = xi @ unit2.vertices
    got = cart_eval(Expression(source), unit2, xi)
    assert got == pytest.approx(reference(x), rel=1e-12, abs=1e-12)


@pytest.mark.parametrize(
    "bad",
    ["x1 +", "(x1", "x0", "foo(x1)", "x1^x2", "x1^1.5", "1..2", "x1 @ 2", ""],
)
def test_malformed_expressions_rejected(bad):
    with pytest.raises(ExpressionEvalError):
        Expression(bad)


def test_non_finite_value_raises(unit2):
    xi = uniform_barycentric(rng(2), 16, 3)
    with pytest.raises(ExpressionEvalError):
        Expression("x1/(x1-x1)").evaluate_batch(unit2, xi)
    with pytest.raises(ExpressionEvalError):
        Expression("exp(x1^2*100000)").evaluate_batch(unit2, xi)


def test_variable_index_beyond_dimension(unit2):
    e = Expression("x3^2")
    with pytest.raises(DimensionMismatchError):
        e.evaluate_batch(unit2, uniform_barycentric(rng(3), 4, 3))


def test_polynomial_lowering_interval(interval):
    # oracle: int_{-1}^{1} x^2 dx = 2/3 and int x^4 = 2/5
    p2 = Expression("x1^2").to_bary_polynomial(interval)
    assert integrate(interval, p2, backend="exact").value == pytest.approx(2 / 3, rel=1e-14)
    p4 = Expression("x1^4").to_bary_polynomial(interval)
    assert integrate(interval, p4, backend="exact").value == pytest.approx(2 / 5, rel=1e-14)


def test_polynomial_lowering_matches_pointwise(unit2):
    xi = uniform_barycentric(rng(5), 150, 3)
    for source in ("x1^2+x2^2", "(x1+2*x2)^3 - x1*x2", "0.5", "x1 - x2/3 + 1"):
        e = Expression(source)
        poly = e.to_bary_polynomial(unit2)
        assert poly is not None
        assert poly.evaluate_batch(unit2, xi) == pytest.approx(
            e.evaluate_batch(unit2, xi), rel=1e-12, abs=1e-12
        )


def test_non_polynomial_sources_do_not_lower(unit2):
    for source in ("abs(x1)", "exp(x2)", "max0(x1-0.2)", "x1/x2"):
        assert Expression(source).to_bary_polynomial(unit2) is None


def test_division_by_constant_lowers(unit2):
    poly = Expression("x1^2/4").to_bary_polynomial(unit2)
    assert poly is not None
    xi = uniform_barycentric(rng(6), 50, 3)
    assert poly.evaluate_batch(unit2, xi) == pytest.approx(
        (xi @ unit2.vertices)[:, 0] ** 2 / 4, rel=1e-12
    )


def test_expression_on_shifted_simplex():
    # lowering must use the actual vertex coordinates
    s = make_simplex([[2.0], [5.0]])
    poly = Expression("x1^2").to_bary_polynomial(s)
    # oracle: int_2^5 x^2 dx = (125-8)/3 = 39
    assert integrate(s, poly, backend="exact").value == pytest.approx(39.0, rel=1e-13)
