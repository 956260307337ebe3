"""Command line entry point ``morrey-entropy``.

Exit codes: 0 success, 1 invalid configuration or arguments, 2 resource
limit, 3 selftest failure.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from pathlib import Path

import numpy as np

from ._numbers import as_rational
from .entropy import ResourceLimitError, covering_upper_bound, entropy_series
from .experiments import ConfigError, ExperimentConfig, run_classify, run_fit, run_sweep, write_atomic
from .norms import LpParams, MorreyLevelParams, SeqSpaceParams
from .operators import EmbeddingSpec, opnorm_bruteforce, opnorm_closed_form

EXIT_OK, EXIT_CONFIG, EXIT_RESOURCE, EXIT_SELFTEST = 0, 1, 2, 3


def _pair(text: str) -> tuple:
    parts = text.split(",")
    if len(parts) != 2:
        raise argparse.ArgumentTypeError(f"expected 'u,p', got {text!r}")
    return tuple(as_rational(x) for x in parts)


def _space(text: str):
    """``u,p`` for a Morrey level space or ``lp:P`` for ``l_P`` (``P`` may be ``inf``)."""
    if text.startswith("lp:"):
        return LpParams(as_rational(text[3:], allow_inf=True))
    return MorreyLevelParams(*_pair(text))


def _ks(text: str) -> list[int]:
    if "-" in text:
        a, b = text.split("-")
        return list(range(int(a), int(b) + 1))
    return [int(x) for x in text.split(",")]


def _emit(payload, args, name: str) -> None:
    if args.format == "json" or not isinstance(payload, str):
        text = json.dumps(payload, indent=2, default=str) + "\n"
    else:
        text = payload
    if args.out:
        path = write_atomic(Path(args.out) / name, text)
        print(path)
    else:
        sys.stdout.write(text)


def _load(args) -> ExperimentConfig:
    if not args.config:
        raise ConfigError("--config is required")
    cfg = ExperimentConfig.load(args.config)
    if args.seed is not None:
        cfg = ExperimentConfig(**{**cfg.__dict__, "seed": args.seed})
    return cfg


def cmd_classify(args) -> int:
    _emit(run_classify(_load(args)), args, "report.json")
    return EXIT_OK


def cmd_norm(args) -> int:
    values = np.array([float(x) for x in args.values.split(",")])
    if args.sigma is not None:
        sp = SeqSpaceParams(args.sigma, args.u, args.p, as_rational(args.q, allow_inf=True))
        n = float(sp.batch_norm(values, args.dim, args.level))
    elif args.u is None:
        n = float(LpParams(as_rational(args.p, allow_inf=True)).batch_norm(values, args.dim, args.level))
    else:
        n = float(MorreyLevelParams(args.u, args.p).batch_norm(values, args.dim, args.level))
    _emit({"norm": n}, args, "norm.json")
    return EXIT_OK


def cmd_opnorm(args) -> int:
    spec = EmbeddingSpec(args.dim, args.level, _space(args.source), _space(args.target))
    seed = args.seed or 0
    out = {"dim": args.dim, "level": args.level}
    try:
        cf = opnorm_closed_form(spec, oracle_budget=args.budget)
        out.update(case=cf.case_tag.value, value=cf.value, lower=cf.lower, exact=cf.exact)
    except ValueError as exc:
        out["closed_form_error"] = str(exc)
    bf = opnorm_bruteforce(spec, budget=args.budget, seed=seed)
    out.update(bruteforce=bf.value, evaluations=bf.evaluations, budget_exhausted=bf.exhausted)
    _emit(out, args, "opnorm.json")
    return EXIT_OK


def cmd_entropy(args) -> int:
    spec = EmbeddingSpec(args.dim, args.level, _space(args.source), _space(args.target))
    if args.eps is not None:
        _emit({"eps": args.eps, "k": covering_upper_bound(spec, args.eps)}, args, "entropy.json")
        return EXIT_OK
    methods = tuple(args.methods.split(","))
    series = entropy_series(spec, _ks(args.k), methods, seed=args.seed or 0, samples=args.samples)
    if args.format == "csv":
        lines = ["k,lower,upper,methods"]
        for e in series.entries:
            up = "" if e.upper == math.inf else f"{e.upper:.12g}"
            lines.append(f"{e.k},{e.lower:.12g},{up},{'+'.join(e.methods)}")
        _emit("\n".join(lines) + "\n", args, "entropy.csv")
    else:
        _emit([{"k": e.k, "lower": e.lower, "upper": None if e.upper == math.inf else e.upper,
                "methods": list(e.methods)} for e in series.entries], args, "entropy.json")
    return EXIT_OK


def cmd_sweep(args) -> int:
    cfg = _load(args)
    text = run_sweep(cfg, args.out, threads=args.threads)
    if args.out:
        print(Path(args.out) / "sweep.csv")
    else:
        sys.stdout.write(text)
    return EXIT_OK


def cmd_fit(args) -> int:
    window = tuple(int(x) for x in args.window.split(",")) if args.window else None
    res = run_fit(args.csv, args.column, window, args.mode, args.j)
    _emit(res.as_dict(), args, "fit.json")
    return EXIT_OK


def cmd_selftest(args) -> int:
    from .acceptance import run_all

    numbers = [int(x) for x in args.only.split(",")] if args.only else None
    results = run_all(numbers)
    for r in results:
        print(r.line())
    passed = sum(r.passed for r in results)
    print(f"{passed}/{len(results)} criteria passed")
    return EXIT_OK if passed == len(results) else EXIT_SELFTEST


class _Parser(argparse.ArgumentParser):
    # usage errors count as invalid input; 2 is reserved for resource limits
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_CONFIG, f"{self.prog}: error: {message}\n")


def build_parser() -> argparse.ArgumentParser:
    common = _Parser(add_help=False)
    common.add_argument("--config", help="experiment configuration (JSON)")
    common.add_argument("--seed", type=int, help="RNG seed (overrides the config)")
    common.add_argument("--out", help="output directory; stdout when omitted")
    common.add_argument("--threads", type=int, default=1)
    common.add_argument("--format", choices=("csv", "json"), default="json")

    p = _Parser(prog="morrey-entropy", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)

    sub.add_parser("classify", parents=[common], help="regime report for every tuple in --config")

    s = sub.add_parser("norm", parents=[common], help="norm of one coefficient vector")
    s.add_argument("--dim", type=int, default=1)
    s.add_argument("--level", type=int, required=True, help="level j, or max level J with --sigma")
    s.add_argument("--u", type=as_rational)
    s.add_argument("--p", required=True)
    s.add_argument("--sigma", type=as_rational)
    s.add_argument("--q", default="inf")
    s.add_argument("--values", required=True, help="comma separated coefficients")

    for name, helptext in (("opnorm", "operator norm of a level embedding"),
                           ("entropy", "entropy-number bounds of a level embedding")):
        s = sub.add_parser(name, parents=[common], help=helptext)
        s.add_argument("--dim", type=int, default=1)
        s.add_argument("--level", type=int, required=True)
        s.add_argument("--source", required=True, help="'u,p' or 'lp:P'")
        s.add_argument("--target", required=True, help="'u,p' or 'lp:P'")
        if name == "opnorm":
            s.add_argument("--budget", type=int, default=20000)
        else:
            s.add_argument("--k", default="1-8", help="'a-b' or comma list")
            s.add_argument("--methods", default="volume,packing,covering,step3,oracle")
            s.add_argument("--samples", type=int, default=256)
            s.add_argument("--eps", type=float, help="only report the covering k for this radius")

    sub.add_parser("sweep", parents=[common], help="(j, k) sweep of the first tuple -> sweep.csv")

    s = sub.add_parser("fit", parents=[common], help="fit a slope to one sweep column -> fit.json")
    s.add_argument("--csv", required=True)
    s.add_argument("--column", default="lower")
    s.add_argument("--window", help="kmin,kmax")
    s.add_argument("--mode", choices=("power", "geometric"), default="power")
    s.add_argument("--j", type=int)

    s = sub.add_parser("selftest", parents=[common], help="run the acceptance criteria")
    s.add_argument("--only", help="comma separated criterion numbers")
    return p


COMMANDS = {"classify": cmd_classify, "norm": cmd_norm, "opnorm": cmd_opnorm, "entropy": cmd_entropy,
            "sweep": cmd_sweep, "fit": cmd_fit, "selftest": cmd_selftest}


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return COMMANDS[args.command](args)
    except ResourceLimitError as exc:
        print(f"resource limit: {exc}", file=sys.stderr)
        return EXIT_RESOURCE
    except (ConfigError, ValueError, TypeError, KeyError, ZeroDivisionError, OSError) as exc:
        print(f"invalid input: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
