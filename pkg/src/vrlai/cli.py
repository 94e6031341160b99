"""Command-line front end.

    vrlai eval      --fixture ex2_4 --grid 0.01:2:200
    vrlai classify  --fixture ex3_2_ostat
    vrlai order     --fixture ex4_4 --relations lr,vrlai
    vrlai order     'exp(1)' 'exp(1)' --relations vrlai
    vrlai reproduce
    vrlai validate  --fixture ex3_1_conv --mc 1e6 --seed 42

Exit codes: 0 success, 2 bad model spec or arguments, 3 divergent moments
(after writing whatever could be computed), 4 a required reproduction row
failed. Any other numerical failure exits 1.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from . import intensity, oracle, orders, reproduce, residual
from .errors import DivergentIntegral, ModelSpecError, UnknownFixture, VrlaiError
from .fixtures import FORMULA_SENSITIVE, is_pair, build_fixture
from .models import SurvivalModel, load_spec

__all__ = ["main", "parse_grid", "build_parser", "EXIT_OK", "EXIT_SPEC", "EXIT_DIVERGENT", "EXIT_REPRODUCE"]

EXIT_OK = 0
EXIT_SPEC = 2
EXIT_DIVERGENT = 3
EXIT_REPRODUCE = 4
EXIT_FAILURE = 1  # numerical failure outside the contract above


class SpecError(Exception):
    """Invalid command-line input; maps to exit code 2."""


def parse_grid(text: str) -> np.ndarray:
    """``start:stop:count[:lin|log]`` to an array of times."""
    parts = text.split(":")
    if len(parts) not in (3, 4):
        raise SpecError(f"grid must be start:stop:count[:lin|log], got {text!r}")
    try:
        start, stop, count = float(parts[0]), float(parts[1]), int(parts[2])
    except ValueError as exc:
        raise SpecError(f"bad grid {text!r}: {exc}") from None
    scale = parts[3] if len(parts) == 4 else "lin"
    if scale not in ("lin", "log"):
        raise SpecError(f"grid scale must be lin or log, got {scale!r}")
    if count < 2 or not stop > start or start < 0:
        raise SpecError(f"grid needs 0 <= start < stop and count >= 2, got {text!r}")
    if scale == "log":
        if start <= 0:
            raise SpecError("log grids need start > 0")
        return np.geomspace(start, stop, count)
    return np.linspace(start, stop, count)


# model resolution -------------------------------------------------------------------


def _load_model_file(path: str) -> SurvivalModel:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise SpecError(f"cannot read model spec {path!r}: {exc}") from None
    return load_spec(text)


def _sources(args) -> list[tuple[str, str]]:
    """Model sources in command-line order as (kind, value) pairs."""
    out = [("fixture", f) for f in args.positional]
    out += [(k, v) for k, v in (args.sources or [])]
    return out


def _resolve(kind: str, value: str, mode: str):
    if kind == "model":
        return _load_model_file(value)
    return build_fixture(value, mode)


def _single_model(args) -> tuple[str, SurvivalModel]:
    srcs = _sources(args)
    if len(srcs) != 1:
        raise SpecError(f"{args.command} needs exactly one --model or --fixture")
    kind, value = srcs[0]
    m = _resolve(kind, value, args.mode or "model")
    if isinstance(m, tuple):
        raise SpecError(f"{value!r} is a pair fixture; use the order command")
    return value, m


def _pair_models(args) -> tuple[str, list[tuple[str, SurvivalModel, SurvivalModel]]]:
    """Pair label and one ``(mode, X, Y)`` entry per evaluation mode."""
    srcs = _sources(args)
    if len(srcs) == 1 and srcs[0][0] == "fixture" and is_pair(srcs[0][1]):
        fid = srcs[0][1]
        key = fid if fid.endswith("_pair") else f"{fid}_pair"
        modes = [args.mode] if args.mode else (["model", "formula"] if key in FORMULA_SENSITIVE else ["model"])
        return fid, [(mode, *build_fixture(fid, mode)) for mode in modes]
    if len(srcs) != 2:
        raise SpecError("order needs a pair fixture or two models")
    mode = args.mode or "model"
    X, Y = (_resolve(k, v, mode) for k, v in srcs)
    if isinstance(X, tuple) or isinstance(Y, tuple):
        raise SpecError("pair fixtures cannot be combined with another model")
    return f"{srcs[0][1]} vs {srcs[1][1]}", [(mode, X, Y)]


def _grid(args, positive: bool):
    if args.grid is None:
        return None
    g = parse_grid(args.grid)
    if positive and g[0] <= 0:
        raise SpecError("intensity comparisons need grid start > 0")
    return g


# output --------------------------------------------------------------------------------


def _emit(text: str, out: str | None) -> None:
    if out:
        with open(out, "w", newline="\n") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
        sys.stdout.flush()


def _json(obj) -> str:
    return json.dumps(obj, indent=2) + "\n"


# commands --------------------------------------------------------------------------------


def cmd_eval(args) -> int:
    name, m = _single_model(args)
    grid = _grid(args, positive=False)
    if grid is None:
        grid = intensity.default_grid(m, args.lower_limit)
    prof = residual.profile(m, grid, args.lower_limit, strict=False)
    _emit(prof.to_json() + "\n" if args.format == "json" else prof.to_csv(), args.out)
    if prof.divergent:
        print(f"vrlai: {name}: divergent moments, columns left empty: {', '.join(prof.divergent)}", file=sys.stderr)
        return EXIT_DIVERGENT
    return EXIT_OK


def cmd_classify(args) -> int:
    name, m = _single_model(args)
    grid = _grid(args, positive=True)
    tol = intensity.CONSTANT_TOL if args.tol is None else args.tol
    verdict = intensity.classify_vrlai(m, grid, tol=tol, lower=args.lower_limit)
    doc = {"model": name, "lower": args.lower_limit, **verdict.to_dict()}
    _emit(_json(doc), args.out)
    return EXIT_OK


def cmd_order(args) -> int:
    label, runs = _pair_models(args)
    grid = _grid(args, positive=True)
    tol = orders.DEFAULT_TOL if args.tol is None else args.tol
    rels = [r.strip() for r in args.relations.split(",") if r.strip()]
    try:
        rels = [orders.Relation(r.upper()) for r in rels]
    except ValueError as exc:
        raise SpecError(str(exc)) from None
    results = []
    for mode, X, Y in runs:
        verdicts = orders.decide(X, Y, rels, grid, tol, args.lower_limit)
        results.append({"mode": mode, "verdicts": [v.to_dict() for v in verdicts]})
    _emit(_json({"pair": label, "lower": args.lower_limit, "results": results}), args.out)
    return EXIT_OK


def cmd_reproduce(args) -> int:
    rows, ok = reproduce.run()
    _emit(reproduce.to_json(rows) + "\n" if args.format == "json" else reproduce.format_table(rows), args.out)
    failed = [r for r in rows if r.required and not r.passed]
    if failed:
        print(f"vrlai: {len(failed)} required row(s) failed", file=sys.stderr)
    return EXIT_OK if ok else EXIT_REPRODUCE


def cmd_validate(args) -> int:
    name, m = _single_model(args)
    grid = _grid(args, positive=False)
    if grid is None:
        grid = np.linspace(0.05, 10.0, 50)
    tol = 1e-4 if args.tol is None else args.tol
    report = oracle.cross_validate(m, grid, tol=tol, mc=args.mc, seed=args.seed, lower=args.lower_limit)
    _emit(report.to_table() if args.format == "table" else report.to_json() + "\n", args.out)
    return EXIT_OK


# parser ----------------------------------------------------------------------------------


class _Source(argparse.Action):
    def __call__(self, parser, namespace, values, option_string=None):
        items = getattr(namespace, "sources", None) or []
        items.append((self.dest, values))
        namespace.sources = items


def _mc_count(text: str) -> int:
    try:
        v = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a number: {text!r}") from None
    if v < 0 or v != int(v):
        raise argparse.ArgumentTypeError(f"--mc needs a nonnegative integer, got {text!r}")
    return int(v)


def _seed(text: str) -> int:
    v = int(text, 0)
    if not 0 <= v < 2**64:
        raise argparse.ArgumentTypeError("seed must fit in an unsigned 64-bit integer")
    return v


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="vrlai", description="Residual-life moments, VRLAI ageing and orders.")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, formats=("csv", "json"), default="csv"):
        p.add_argument("positional", nargs="*", metavar="FIXTURE", help="fixture ids")
        p.add_argument("--model", dest="model", action=_Source, metavar="PATH", help="model-spec JSON file")
        p.add_argument("--fixture", dest="fixture", action=_Source, metavar="ID", help="named or parametric fixture")
        p.add_argument("--grid", metavar="A:B:N[:log]")
        p.add_argument("--lower-limit", choices=residual.LOWER_MODES, default="zero")
        p.add_argument("--mode", choices=("model", "formula"), default=None)
        p.add_argument("--tol", type=float, default=None)
        p.add_argument("--seed", type=_seed, default=0)
        p.add_argument("--format", choices=formats, default=default)
        p.add_argument("--out", metavar="PATH")
        p.set_defaults(sources=None)
        return p

    common(sub.add_parser("eval", help="write the residual profile"))
    common(sub.add_parser("classify", help="IVRLAI/DVRLAI classification"), ("json",), "json")
    p = common(sub.add_parser("order", help="decide stochastic orders"), ("json",), "json")
    p.add_argument("--relations", default="vrlai", help="comma list of vrlai,vrlai_ratio,vrl,icx,lr,mrl")
    common(sub.add_parser("reproduce", help="printed values against the pipeline"), ("table", "json"), "table")
    p = common(sub.add_parser("validate", help="oracle cross-validation"), ("json", "table"), "json")
    p.add_argument("--mc", type=_mc_count, default=0, metavar="N", help="Monte Carlo sample size")
    return parser


_COMMANDS = {
    "eval": cmd_eval,
    "classify": cmd_classify,
    "order": cmd_order,
    "reproduce": cmd_reproduce,
    "validate": cmd_validate,
}


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code == 0 else EXIT_SPEC
    try:
        return _COMMANDS[args.command](args)
    except (SpecError, ModelSpecError, UnknownFixture) as exc:
        print(f"vrlai: {exc}", file=sys.stderr)
        return EXIT_SPEC
    except DivergentIntegral as exc:
        print(f"vrlai: divergent moments: {exc}", file=sys.stderr)
        return EXIT_DIVERGENT
    except VrlaiError as exc:
        print(f"vrlai: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_FAILURE


if __name__ == "__main__":
    sys.exit(main())
