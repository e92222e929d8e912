import json

import numpy as np
import pytest

from hhsimplex import (
    BaryPolynomial,
    ClampedPyramid,
    Constant,
    Expression,
    FunctionScale,
    FunctionSum,
    MinCoordWeight,
    Pyramid,
    Symmetrized,
    VertexIndicator,
    uniform_barycentric,
)
from hhsimplex.serialization import (
    dumps_canonical,
    function_from_dict,
    function_to_dict,
    simplex_from_dict,
    simplex_to_dict,
)
from conftest import rng


def test_simplex_round_trip(unit2):
    d = simplex_to_dict(unit2)
    s2 = simplex_from_dict(json.loads(json.dumps(d)))
    assert np.allclose(s2.vertices, unit2.vertices)
    assert s2.volume == unit2.volume


@pytest.mark.parametrize(
    "fn",
    [
        BaryPolynomial(((1.0, (2, 0, 0)), (-0.5, (0, 1, 1)))),
        Pyramid(0.0, 1.0),
        VertexIndicator(1.0, 0.0),
        ClampedPyramid(0.5, 4.0),
        Constant(3.25),
        MinCoordWeight(Constant(1.0)),
        Symmetrized(BaryPolynomial(((1.0, (2, 0, 0)),))),
        FunctionSum((Pyramid(0.0, 1.0), Constant(1.0))),
        FunctionScale(2.0, Pyramid(0.0, 1.0)),
        Expression("x1^2+max0(x2-0.5)"),
    ],
)
def test_function_round_trip(unit2, fn):
    decoded = function_from_dict(json.loads(json.dumps(function_to_dict(fn))))
    xs = uniform_barycentric(rng(1), 64, 3)
    assert decoded.evaluate_batch(unit2, xs) == pytest.approx(
        fn.evaluate_batch(unit2, xs), rel=1e-14, abs=1e-14
    )


def test_clamped_without_alpha_normalizes(unit2):
    g = function_from_dict({"kind": "clamped", "a": 0.5}, unit2)
    from hhsimplex import integrate

    assert integrate(unit2, g, backend="exact").value == pytest.approx(1.0, rel=1e-12)


def test_dumps_canonical_stable_under_reload():
    payload = {
        "a": 2 / 3,
        "b": 1,
        "c": True,
        "d": None,
        "e": [1.5, -0.0, 1e-300],
        "f": {"nested": "text"},
    }
    text = dumps_canonical(payload)
    assert dumps_canonical(json.loads(text)) == text


def test_dumps_canonical_17_digits():
    assert dumps_canonical(2 / 3) == "0.66666666666666663"
    assert float(dumps_canonical(0.1)) == 0.1
