"""Command-line interface.

Subcommands: bounds, fejer, integrate, witness, verify, demo-fejer.
Exit codes: 0 all verdicts pass, 1 input error, 2 a mathematical verdict
failed beyond tolerance, 3 a search was exhausted.

JSON output is byte-deterministic for identical invocations (fixed field
order, floats at 17 significant digits), so reports are diffable and safe to
use in CI.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from dataclasses import dataclass
from typing import Optional

from .bounds import (
    compute_lr,
    demonstrate_no_uniform_fejer_constant,
    fejer_lr,
    make_sharpness_witness,
    run_refinement_corpus,
    verify_fejer_bounds,
    verify_refinement,
)
from .errors import HHSimplexError, InvalidParameterError, SearchExhaustedError
from .expressions import Expression
from .functions import Constant, FunctionSpec, Pyramid, VertexIndicator, make_fejer_counterexample
from .integrate import DEFAULT_CONFIG, QuadratureConfig, integrate
from .serialization import (
    bounds_report_to_dict,
    corpus_to_csv,
    dumps_canonical,
    fejer_report_to_dict,
    function_from_dict,
    function_to_dict,
    integral_result_to_dict,
    report_to_csv,
    simplex_from_dict,
)
from .simplex import Simplex, make_simplex


@dataclass(frozen=True)
class RunConfig:
    """One parsed invocation: a single command plus its I/O and quadrature."""

    command: str
    fmt: str
    out: Optional[str]
    quadrature: QuadratureConfig
    args: argparse.Namespace


def _resolve_seed(args) -> int:
    if getattr(args, "seed", None) is not None:
        return args.seed
    return int(os.environ.get("HH_SEED", "0"))


def _quadrature_from_args(args) -> QuadratureConfig:
    def pick(name, default):
        value = getattr(args, name, None)
        return default if value is None else value

    return QuadratureConfig(
        abs_tol=pick("abs_tol", DEFAULT_CONFIG.abs_tol),
        rel_tol=pick("rel_tol", DEFAULT_CONFIG.rel_tol),
        max_depth=pick("max_depth", DEFAULT_CONFIG.max_depth),
        mc_samples=pick("samples", DEFAULT_CONFIG.mc_samples),
        seed=_resolve_seed(args),
    )


def load_simplex(spec: str) -> Simplex:
    """A simplex from a JSON file, `unit:N`, or `interval:a,b`."""
    if spec.startswith("unit:"):
        n = int(spec.split(":", 1)[1])
        if n < 1:
            raise InvalidParameterError("unit:N needs N >= 1")
        verts = [[0.0] * n]
        for i in range(n):
            row = [0.0] * n
            row[i] = 1.0
            verts.append(row)
        return make_simplex(verts)
    if spec.startswith("interval:"):
        a, b = (float(t) for t in spec.split(":", 1)[1].split(","))
        return make_simplex([[a], [b]])
    with open(spec, "r", encoding="utf-8") as fh:
        return simplex_from_dict(json.load(fh))


def load_function(args, s: Simplex, prefix: str = "") -> FunctionSpec:
    """Resolve --fn/--expr (or --weight-fn/--weight-expr with prefix)."""
    expr = getattr(args, prefix + "expr", None)
    if expr is not None:
        return Expression(expr)
    spec = getattr(args, prefix + "fn", None)
    if spec is None:
        raise InvalidParameterError("no function given")
    if spec == "indicator":
        return VertexIndicator(1.0, 0.0)
    if spec.startswith("pyramid:"):
        apex, face = (float(t) for t in spec.split(":", 1)[1].split(","))
        return Pyramid(apex, face)
    if spec.startswith("const:"):
        return Constant(float(spec.split(":", 1)[1]))
    if spec.startswith("clamped:"):
        a = float(spec.split(":", 1)[1])
        return make_fejer_counterexample(s, a)[1]
    with open(spec, "r", encoding="utf-8") as fh:
        return function_from_dict(json.load(fh), s)


def _emit(text: str, out: Optional[str]) -> None:
    if out:
        with open(out, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _pass(flag: bool) -> str:
    return "PASS" if flag else "FAIL"


def _pretty_bounds(rep) -> str:
    lines = [
        f"Hermite-Hadamard refinement  (n={rep.n}, volume={rep.volume!r}, "
        f"backend={rep.integration_kind})",
        f"  f(barycenter) = {rep.f_at_barycenter!r}",
        f"  mean value    = {rep.mean_value!r}",
        f"  vertex mean M = {rep.M!r}",
        f"  sandwich  f(b) <= mean <= M : "
        f"{_pass(rep.L >= -rep.tolerance and rep.R >= -rep.tolerance)}",
        f"  L = mean - f(b) = {rep.L!r}",
        f"  R = M - mean    = {rep.R!r}",
        f"  n*R             = {rep.nR!r}",
        f"  chain  0 <= L <= n*R : {_pass(rep.verdict_hh)}   "
        f"(slack = {rep.slack!r}, tol = {rep.tolerance!r})",
    ]
    return "\n".join(lines) + "\n"


def _pretty_fejer(rep) -> str:
    lines = [
        f"Fejer-weighted bounds  (n={rep.n}, backend={rep.integration_kind})",
        f"  int g   = {rep.int_g!r}",
        f"  int f*g = {rep.int_fg!r}",
        f"  f(b) = {rep.f_at_barycenter!r}   M = {rep.M!r}   Delta = {rep.Delta!r}",
        f"  Lg = {rep.Lg!r}   Rg = {rep.Rg!r}   alpha = {rep.alpha!r}",
        f"  chain  f(b)*int g <= int f*g <= M*int g : {_pass(rep.verdict_thm3)}",
        f"  chain  0 <= Delta*alpha <= Rg : {_pass(rep.verdict_ineq_R)}   "
        f"(Delta*alpha = {rep.Delta * rep.alpha!r})",
        f"  chain  0 <= Lg <= Delta*(int g - alpha) : {_pass(rep.verdict_ineq_L)}   "
        f"(bound = {rep.Delta * (rep.int_g - rep.alpha)!r})",
    ]
    if not rep.g_sigma_invariant:
        lines.append(
            f"  WARNING: weight is not cycle-invariant "
            f"(max deviation {rep.g_invariance_deviation!r})"
        )
    return "\n".join(lines) + "\n"


def _pretty_integral(res) -> str:
    lines = [f"integral = {res.value!r}   ({res.kind}, {res.evaluations} evaluations)"]
    if res.kind == "bracket":
        lines.append(
            f"  bracket [{res.lo!r}, {res.hi!r}]  "
            f"width = {res.hi - res.lo!r}  converged = {res.converged}"
        )
    if res.kind == "monte_carlo":
        lines.append(
            f"  stderr = {res.stderr!r}  samples = {res.samples}  seed = {res.seed}"
        )
    return "\n".join(lines) + "\n"


def _format_report(dct: dict, pretty: str, fmt: str) -> str:
    if fmt == "json":
        return dumps_canonical(dct) + "\n"
    if fmt == "csv":
        return report_to_csv(dct)
    return pretty


def cmd_bounds(cfg: RunConfig) -> int:
    s = load_simplex(cfg.args.simplex)
    f = load_function(cfg.args, s)
    rep = compute_lr(s, f, cfg.quadrature, backend=cfg.args.backend)
    _emit(_format_report(bounds_report_to_dict(rep), _pretty_bounds(rep), cfg.fmt), cfg.out)
    return 0 if verify_refinement(rep) else 2


def cmd_fejer(cfg: RunConfig) -> int:
    s = load_simplex(cfg.args.simplex)
    f = load_function(cfg.args, s)
    g = load_function(cfg.args, s, prefix="weight_")
    rep = fejer_lr(s, f, g, cfg.quadrature, backend=cfg.args.backend)
    _emit(_format_report(fejer_report_to_dict(rep), _pretty_fejer(rep), cfg.fmt), cfg.out)
    ok = rep.verdict_thm3 and verify_fejer_bounds(rep)
    return 0 if ok else 2


def cmd_integrate(cfg: RunConfig) -> int:
    s = load_simplex(cfg.args.simplex)
    f = load_function(cfg.args, s)
    weight = None
    if cfg.args.weight_fn or cfg.args.weight_expr:
        weight = load_function(cfg.args, s, prefix="weight_")
    res = integrate(s, f, cfg.quadrature, backend=cfg.args.backend, weight=weight)
    _emit(
        _format_report(integral_result_to_dict(res), _pretty_integral(res), cfg.fmt),
        cfg.out,
    )
    return 0


def cmd_witness(cfg: RunConfig) -> int:
    s = load_simplex(cfg.args.simplex)
    fn, rep = make_sharpness_witness(s, cfg.quadrature)
    equality = abs(rep.L - rep.nR) <= 1e-12 * max(1.0, abs(rep.L))
    dct = {
        "function": function_to_dict(fn),
        "report": bounds_report_to_dict(rep),
        "equality": equality,
    }
    pretty = (
        _pretty_bounds(rep)
        + f"  sharpness |L - n*R| = {abs(rep.L - rep.nR)!r} : {_pass(equality)}\n"
    )
    if cfg.fmt == "csv":
        _emit(report_to_csv(bounds_report_to_dict(rep)), cfg.out)
    else:
        _emit(_format_report(dct, pretty, cfg.fmt), cfg.out)
    return 0 if equality and verify_refinement(rep) else 2


def _parse_dims(spec: str) -> list[int]:
    if ".." in spec:
        lo, hi = spec.split("..", 1)
        return list(range(int(lo), int(hi) + 1))
    return [int(t) for t in spec.split(",")]


def cmd_verify(cfg: RunConfig) -> int:
    dims = _parse_dims(cfg.args.dims)
    rows = run_refinement_corpus(
        dims,
        cfg.args.count,
        _resolve_seed(cfg.args),
        include_witnesses=cfg.args.include_witnesses,
        cfg=cfg.quadrature,
    )
    if cfg.fmt == "json":
        payload = [
            {
                "dim": r.dim,
                "instance": r.instance,
                "L": r.L,
                "R": r.R,
                "nR": r.nR,
                "slack": r.slack,
                "backend": r.backend,
                "verdict": r.verdict,
            }
            for r in rows
        ]
        _emit(dumps_canonical(payload) + "\n", cfg.out)
    elif cfg.fmt == "pretty":
        n_pass = sum(r.verdict for r in rows)
        _emit(
            f"{n_pass}/{len(rows)} instances satisfy 0 <= L <= n*R"
            + ("" if n_pass == len(rows) else "  [FAILURES PRESENT]")
            + "\n",
            cfg.out,
        )
    else:
        _emit(corpus_to_csv(rows), cfg.out)
    failures = [r for r in rows if not r.verdict]
    if failures:
        for r in failures:
            print(
                f"FAIL dim={r.dim} instance={r.instance} L={r.L!r} nR={r.nR!r}",
                file=sys.stderr,
            )
        return 2
    return 0


def cmd_demo_fejer(cfg: RunConfig) -> int:
    s = load_simplex(cfg.args.simplex)
    a, rep = demonstrate_no_uniform_fejer_constant(s, cfg.args.big_n, cfg.quadrature)
    dct = {"N": cfg.args.big_n, "a": a, "report": fejer_report_to_dict(rep)}
    pretty = (
        f"weighted gaps beat N = {cfg.args.big_n!r} at clamp level a = {a!r}\n"
        f"  Lg = {rep.Lg!r} > N*Rg = {cfg.args.big_n * rep.Rg!r}\n"
    )
    if cfg.fmt == "csv":
        _emit(report_to_csv({"N": cfg.args.big_n, "a": a, **fejer_report_to_dict(rep)}), cfg.out)
    else:
        _emit(_format_report(dct, pretty, cfg.fmt), cfg.out)
    return 0


_COMMANDS = {
    "bounds": cmd_bounds,
    "fejer": cmd_fejer,
    "integrate": cmd_integrate,
    "witness": cmd_witness,
    "verify": cmd_verify,
    "demo-fejer": cmd_demo_fejer,
}


def _add_io_args(sp) -> None:
    sp.add_argument("--format", choices=("json", "csv", "pretty"), default="pretty")
    sp.add_argument("--out", help="write the report here instead of stdout")
    sp.add_argument("--seed", type=int, default=None,
                    help="RNG seed (default: HH_SEED env var, then 0)")
    sp.add_argument("--abs-tol", type=float, default=None)
    sp.add_argument("--rel-tol", type=float, default=None)
    sp.add_argument("--max-depth", type=int, default=None)
    sp.add_argument("--samples", type=int, default=None,
                    help="Monte Carlo sample count")


def _add_simplex_arg(sp) -> None:
    sp.add_argument("--simplex", required=True,
                    help="simplex JSON file, unit:N, or interval:a,b")


def _add_function_args(sp, required: bool = True) -> None:
    grp = sp.add_mutually_exclusive_group(required=required)
    grp.add_argument("--fn", help="pyramid:apex,face | indicator | const:c | "
                                  "clamped:a | function JSON file")
    grp.add_argument("--expr", help="expression in x1..xn, e.g. 'x1^2+x2^2'")


def _add_weight_args(sp, required: bool = True) -> None:
    grp = sp.add_mutually_exclusive_group(required=required)
    grp.add_argument("--weight-fn", dest="weight_fn")
    grp.add_argument("--weight-expr", dest="weight_expr")


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="hhsimplex",
        description="Hermite-Hadamard bounds for convex functions on simplices",
    )
    sub = p.add_subparsers(dest="command", required=True)

    sp = sub.add_parser("bounds", help="compute L, R and the 0 <= L <= n*R verdict")
    _add_simplex_arg(sp)
    _add_function_args(sp)
    sp.add_argument("--backend", choices=("auto", "exact", "bracket", "mc"), default="auto")
    _add_io_args(sp)

    sp = sub.add_parser("fejer", help="weighted bounds and the Fejer chains")
    _add_simplex_arg(sp)
    _add_function_args(sp)
    _add_weight_args(sp)
    sp.add_argument("--backend", choices=("auto", "exact", "mc"), default="auto")
    _add_io_args(sp)

    sp = sub.add_parser("integrate", help="integrate a function (optionally times a weight)")
    _add_simplex_arg(sp)
    _add_function_args(sp)
    _add_weight_args(sp, required=False)
    sp.add_argument("--backend", choices=("auto", "exact", "bracket", "mc"), default="auto")
    _add_io_args(sp)

    sp = sub.add_parser("witness", help="the pyramid attaining L = n*R")
    _add_simplex_arg(sp)
    _add_io_args(sp)

    sp = sub.add_parser("verify", help="random convex corpus against 0 <= L <= n*R")
    sp.add_argument("--dims", default="1..5", help="e.g. 1..5 or 2 or 1,3")
    sp.add_argument("--count", type=int, default=200)
    sp.add_argument("--include-witnesses", action="store_true")
    _add_io_args(sp)

    sp = sub.add_parser("demo-fejer", help="find a weight beating L <= N*R")
    _add_simplex_arg(sp)
    sp.add_argument("--N", dest="big_n", type=float, required=True)
    _add_io_args(sp)

    return p


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return 0 if exc.code in (0, None) else 1
    try:
        cfg = RunConfig(
            command=args.command,
            fmt=args.format,
            out=args.out,
            quadrature=_quadrature_from_args(args),
            args=args,
        )
        return _COMMANDS[args.command](cfg)
    except SearchExhaustedError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3
    except (HHSimplexError, OSError, ValueError, json.JSONDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


def entrypoint() -> None:
    sys.exit(main())


if __name__ == "__main__":
    entrypoint()
