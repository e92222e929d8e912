"""Deterministic JSON/CSV encoding and the on-disk spec formats.

JSON output is byte-reproducible: object keys keep insertion order and
floats are printed with 17 significant digits, so parse -> re-serialize is
the identity on emitted reports.

Simplex files look like ``{"vertices": [[x, ...], ...]}`` with one row per
vertex.  Function files carry a "kind" tag plus per-variant parameters.
"""

from __future__ import annotations

import json
from typing import Optional

from .bounds import BoundsReport, CorpusRow, FejerReport
from .errors import InvalidParameterError
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
    make_fejer_counterexample,
)
from .integrate import IntegralResult
from .simplex import Simplex, make_simplex

CSV_HEADER = "dim,instance,L,R,nR,slack,backend,verdict"


def _fmt_float(x: float) -> str:
    text = format(float(x), ".17g")
    if "." not in text and "e" not in text and "E" not in text:
        text += ".0"  # keep integral floats re-parsing as floats
    return text


def dumps_canonical(obj) -> str:
    """JSON with fixed key order and 17-significant-digit floats."""
    if obj is None:
        return "null"
    if obj is True:
        return "true"
    if obj is False:
        return "false"
    if isinstance(obj, int):
        return repr(obj)
    if isinstance(obj, float):
        return _fmt_float(obj)
    if isinstance(obj, str):
        return json.dumps(obj)
    if isinstance(obj, dict):
        inner = ",".join(
            f"{json.dumps(str(k))}:{dumps_canonical(v)}" for k, v in obj.items()
        )
        return "{" + inner + "}"
    if isinstance(obj, (list, tuple)):
        return "[" + ",".join(dumps_canonical(v) for v in obj) + "]"
    raise InvalidParameterError(f"cannot serialize {type(obj).__name__}")


# ---------------------------------------------------------------------------
# Simplex format
# ---------------------------------------------------------------------------

def simplex_to_dict(s: Simplex) -> dict:
    return {"vertices": [[float(v) for v in row] for row in s.vertices]}


def simplex_from_dict(obj: dict) -> Simplex:
    if not isinstance(obj, dict) or "vertices" not in obj:
        raise InvalidParameterError('simplex JSON must contain a "vertices" array')
    return make_simplex(obj["vertices"])


# ---------------------------------------------------------------------------
# Function format
# ---------------------------------------------------------------------------

def function_to_dict(f: FunctionSpec) -> dict:
    if isinstance(f, BaryPolynomial):
        return {
            "kind": "polynomial",
            "terms": [[c, list(e)] for c, e in f.terms],
            "num_slots": f.num_slots,
        }
    if isinstance(f, Pyramid):
        return {"kind": "pyramid", "apex_value": f.apex_value, "face_value": f.face_value}
    if isinstance(f, VertexIndicator):
        return {
            "kind": "indicator",
            "value_at_vertices": f.value_at_vertices,
            "value_elsewhere": f.value_elsewhere,
        }
    if isinstance(f, ClampedPyramid):
        return {"kind": "clamped", "a": f.a, "alpha": f.alpha}
    if isinstance(f, Constant):
        return {"kind": "constant", "value": f.value}
    if isinstance(f, MinCoordWeight):
        return {"kind": "min_coord_weight", "inner": function_to_dict(f.inner)}
    if isinstance(f, Symmetrized):
        return {"kind": "symmetrized", "inner": function_to_dict(f.inner)}
    if isinstance(f, FunctionSum):
        return {"kind": "sum", "parts": [function_to_dict(p) for p in f.parts]}
    if isinstance(f, FunctionScale):
        return {"kind": "scale", "factor": f.factor, "inner": function_to_dict(f.inner)}
    if isinstance(f, Expression):
        return {"kind": "expression", "source": f.source}
    raise InvalidParameterError(f"cannot serialize function {type(f).__name__}")


def function_from_dict(obj: dict, simplex: Optional[Simplex] = None) -> FunctionSpec:
    """Decode a function spec; a simplex is needed only to normalize a
    "clamped" weight with no explicit alpha."""
    if not isinstance(obj, dict) or "kind" not in obj:
        raise InvalidParameterError('function JSON must contain a "kind" tag')
    kind = obj["kind"]
    if kind == "polynomial":
        terms = tuple((float(c), tuple(int(x) for x in e)) for c, e in obj["terms"])
        return BaryPolynomial(terms, int(obj.get("num_slots", 0)))
    if kind == "pyramid":
        return Pyramid(float(obj["apex_value"]), float(obj["face_value"]))
    if kind == "indicator":
        return VertexIndicator(
            float(obj.get("value_at_vertices", 1.0)),
            float(obj.get("value_elsewhere", 0.0)),
        )
    if kind == "clamped":
        a = float(obj["a"])
        if "alpha" in obj:
            return ClampedPyramid(a, float(obj["alpha"]))
        if simplex is None:
            raise InvalidParameterError(
                'clamped weight without "alpha" needs a simplex to normalize against'
            )
        return make_fejer_counterexample(simplex, a)[1]
    if kind == "constant":
        return Constant(float(obj["value"]))
    if kind == "min_coord_weight":
        return MinCoordWeight(function_from_dict(obj["inner"], simplex))
    if kind == "symmetrized":
        return Symmetrized(function_from_dict(obj["inner"], simplex))
    if kind == "sum":
        return FunctionSum(tuple(function_from_dict(p, simplex) for p in obj["parts"]))
    if kind == "scale":
        return FunctionScale(float(obj["factor"]), function_from_dict(obj["inner"], simplex))
    if kind == "expression":
        return Expression(str(obj["source"]))
    raise InvalidParameterError(f"unknown function kind {kind!r}")


# ---------------------------------------------------------------------------
# Reports
# ---------------------------------------------------------------------------

def integral_result_to_dict(r: IntegralResult) -> dict:
    out = {"value": r.value, "kind": r.kind, "evaluations": r.evaluations}
    if r.kind == "bracket":
        out["lo"] = r.lo
        out["hi"] = r.hi
        out["converged"] = r.converged
    if r.kind == "monte_carlo":
        out["stderr"] = r.stderr
        out["samples"] = r.samples
        out["seed"] = r.seed
    return out


def bounds_report_to_dict(rep: BoundsReport) -> dict:
    return {
        "n": rep.n,
        "L": rep.L,
        "R": rep.R,
        "nR": rep.nR,
        "mean_value": rep.mean_value,
        "f_at_barycenter": rep.f_at_barycenter,
        "M": rep.M,
        "integration_kind": rep.integration_kind,
        "verdict_hh": rep.verdict_hh,
        "slack": rep.slack,
        "tolerance": rep.tolerance,
        "volume": rep.volume,
        "uncertainty": rep.uncertainty,
        "seed": rep.seed,
    }


def fejer_report_to_dict(rep: FejerReport) -> dict:
    return {
        "n": rep.n,
        "Lg": rep.Lg,
        "Rg": rep.Rg,
        "Delta": rep.Delta,
        "alpha": rep.alpha,
        "int_g": rep.int_g,
        "int_fg": rep.int_fg,
        "f_at_barycenter": rep.f_at_barycenter,
        "M": rep.M,
        "verdict_thm3": rep.verdict_thm3,
        "verdict_ineq_R": rep.verdict_ineq_R,
        "verdict_ineq_L": rep.verdict_ineq_L,
        "tolerance": rep.tolerance,
        "integration_kind": rep.integration_kind,
        "g_sigma_invariant": rep.g_sigma_invariant,
        "g_invariance_deviation": rep.g_invariance_deviation,
        "seed": rep.seed,
    }


def corpus_row_to_csv(row: CorpusRow) -> str:
    return ",".join(
        [
            str(row.dim),
            str(row.instance),
            _fmt_float(row.L),
            _fmt_float(row.R),
            _fmt_float(row.nR),
            _fmt_float(row.slack),
            row.backend,
            "pass" if row.verdict else "fail",
        ]
    )


def corpus_to_csv(rows) -> str:
    return "\n".join([CSV_HEADER, *(corpus_row_to_csv(r) for r in rows)]) + "\n"


def report_to_csv(d: dict) -> str:
    """Single-report CSV: one header line from the keys, one value row."""
    header = ",".join(d.keys())
    vals = []
    for v in d.values():
        if isinstance(v, bool):
            vals.append("pass" if v else "fail")
        elif isinstance(v, float):
            vals.append(_fmt_float(v))
        else:
            vals.append(str(v))
    return header + "\n" + ",".join(vals) + "\n"
