"""Command line entry point: ``regionsched {run,oracle,gen,bench,check}``."""

from __future__ import annotations

import argparse
import json
import sys
from fractions import Fraction
from typing import Any, Sequence

from . import adversaries as adv
from .core import AlgoParams, Instance, InstanceError, Model, ParameterError, default_params, fmt, parse_instance, rat
from .harness import ExperimentReport, TraceMismatch, bench, verify_trace
from .oracle import CapExceeded, max_throughput_subset
from .scheduler import RegionScheduler, Trace, run

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_VALIDATION = 3
EXIT_VIOLATION = 4

MODELS = {m.value: m for m in Model}


class UsageError(Exception):
    pass


def _read_text(path: str | None) -> str:
    if path is None or path == "-":
        return sys.stdin.read()
    with open(path, encoding="utf-8") as fh:
        return fh.read()


def _emit(text: str, out: str | None) -> None:
    if out:
        with open(out, "w", encoding="utf-8") as fh:
            fh.write(text if text.endswith("\n") else text + "\n")
    else:
        sys.stdout.write(text if text.endswith("\n") else text + "\n")


def _dump(data: Any) -> str:
    return json.dumps(data, indent=2)


def resolve_params(args: argparse.Namespace, epsilon: Fraction) -> AlgoParams:
    model = MODELS[args.model]
    eps = rat(args.epsilon) if args.epsilon is not None else epsilon
    delta = rat(args.delta) if args.delta is not None else None
    if model is Model.DELTA_COMMITMENT and delta is None:
        raise UsageError("--model delta requires --delta")
    if model is not Model.DELTA_COMMITMENT and delta is not None and args.alpha is None and args.beta is None:
        raise UsageError("--delta applies to --model delta or with explicit --alpha/--beta")
    if args.alpha is None and args.beta is None:
        return default_params(model, eps, delta)
    base = default_params(model, eps, delta if model is Model.DELTA_COMMITMENT else None)
    return AlgoParams(
        rat(args.alpha) if args.alpha is not None else base.alpha,
        rat(args.beta) if args.beta is not None else base.beta,
        delta if delta is not None else base.delta,
        model,
    )


def cmd_run(args: argparse.Namespace) -> int:
    instance = parse_instance(_read_text(args.instance))
    params = resolve_params(args, instance.epsilon)
    trace = run(instance, params)
    if args.format == "csv":
        summary = trace.summary()
        head = ",".join(summary)
        _emit(head + "\n" + ",".join(str(v) for v in summary.values()), args.out)
    else:
        _emit(_dump(trace.to_json()), args.out)
    return EXIT_OK


def cmd_oracle(args: argparse.Namespace) -> int:
    instance = parse_instance(_read_text(args.instance))
    result = max_throughput_subset(instance, weighted=args.weighted)
    if args.format == "csv":
        _emit("value,size\n" + f"{fmt(result.value)},{len(result.subset)}", args.out)
    else:
        _emit(_dump(result.to_json()), args.out)
    return EXIT_OK


def _params_json(raw: str | None) -> dict[str, Any]:
    if not raw:
        return {}
    try:
        data = json.loads(raw)
    except json.JSONDecodeError as exc:
        raise UsageError(f"--params is not valid JSON: {exc}") from exc
    if not isinstance(data, dict):
        raise UsageError("--params must be a JSON object")
    return data


def cmd_gen(args: argparse.Namespace) -> int:
    params = _params_json(args.params)
    family = args.family
    try:
        if family == "random":
            out: Any = adv.gen_random_slack(
                int(params.get("n", args.n)),
                params.get("epsilon", args.epsilon or "1/2"),
                params.get("horizon", 10),
                int(params.get("seed", args.seed)),
            ).to_json()
        elif family == "alpha_beta_lb":
            out = adv.gen_alpha_beta_lb(params["epsilon"], params["alpha"], params["beta"], params["phi"]).to_json()
        elif family == "commit_tight":
            out = adv.gen_commit_tight_family(
                params["epsilon"], params["delta"], params["alpha"], params["beta"], int(params["m"]), params.get("phi", "1/1000")
            ).to_json()
        elif family == "waves":
            prefixes = adv.gen_waves(params["epsilon"], params["gamma"], int(params["k"]))
            out = prefixes[-1].to_json()
            out["meta"]["prefix_sizes"] = [len(p) for p in prefixes]
        elif family == "weighted_chain":
            out = adv.gen_weighted_chain(params["epsilon"], params["delta"], int(params["n"]), params["c"]).to_json()
        elif family == "unitweight_commit_lb":
            out = adv.gen_unitweight_commit_lb(params["epsilon"]).to_json()
        elif family == "levels":
            eps = rat(params.get("epsilon", args.epsilon or "1/16"))
            levels = int(params.get("max_levels", args.max_levels))
            sched_params = resolve_params(args, eps)
            out = adv.gen_levels_adaptive(eps, levels, lambda: RegionScheduler(sched_params)).to_json()
        else:
            raise UsageError(f"unknown family {family!r}")
    except KeyError as exc:
        raise UsageError(f"--params for {family} is missing {exc}") from exc
    _emit(_dump(out), args.out)
    return EXIT_OK


def _bench_instances(args: argparse.Namespace) -> list[Instance]:
    eps = args.epsilon or "1/2"
    instances = []
    for seed in range(args.seed, args.seed + args.seeds):
        if args.family == "random":
            inst = adv.gen_random_slack(args.n, eps, seed=seed)
        elif args.family == "grid":
            inst = adv.gen_grid_instance(args.n, eps, seed)
        else:
            raise UsageError(f"bench supports --family random|grid, not {args.family!r}")
        instances.append(inst)
    return instances


def cmd_bench(args: argparse.Namespace) -> int:
    instances = _bench_instances(args)
    eps = rat(args.epsilon or "1/2")
    params = resolve_params(args, eps)
    report: ExperimentReport = bench(instances, params, with_oracle=not args.no_oracle, workers=args.workers)
    _emit(report.to_csv() if args.format == "csv" else report.dumps(), args.out)
    return EXIT_OK


def cmd_check(args: argparse.Namespace) -> int:
    text = _read_text(args.trace)
    try:
        trace = Trace.from_json(json.loads(text))
    except (json.JSONDecodeError, KeyError, TypeError) as exc:
        raise InstanceError(f"unreadable trace: {exc}") from exc
    instance = parse_instance(_read_text(args.instance)) if args.instance else None
    violations = verify_trace(trace, instance)
    _emit(_dump({"violations": [v.to_json() for v in violations], "ok": not violations}), args.out)
    return EXIT_VIOLATION if violations else EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="regionsched", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    def shared(p: argparse.ArgumentParser) -> None:
        p.add_argument("--instance", help="instance JSON path (default: stdin)")
        p.add_argument("--model", choices=sorted(MODELS), default="none")
        p.add_argument("--epsilon", help="slackness, e.g. 1/2 (default: the instance's)")
        p.add_argument("--delta")
        p.add_argument("--alpha", help="override the model's default alpha")
        p.add_argument("--beta", help="override the model's default beta")
        p.add_argument("--format", choices=["json", "csv"], default="json")
        p.add_argument("--seed", type=int, default=0)
        p.add_argument("--out")

    p = sub.add_parser("run", help="simulate the region algorithm on one instance")
    shared(p)
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("oracle", help="exact offline optimum")
    shared(p)
    p.add_argument("--weighted", action="store_true")
    p.set_defaults(func=cmd_oracle)

    p = sub.add_parser("gen", help="emit a generated instance or adversary outcome")
    shared(p)
    p.add_argument("--family", required=True)
    p.add_argument("--params", help="generator parameters as a JSON object")
    p.add_argument("--n", type=int, default=10)
    p.add_argument("--max-levels", type=int, default=4)
    p.set_defaults(func=cmd_gen)

    p = sub.add_parser("bench", help="sweep seeds and report ratios and invariant checks")
    shared(p)
    p.add_argument("--family", default="random")
    p.add_argument("--n", type=int, default=10)
    p.add_argument("--seeds", type=int, default=10)
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--no-oracle", action="store_true")
    p.set_defaults(func=cmd_bench)

    p = sub.add_parser("check", help="verify a trace file against every invariant")
    p.add_argument("trace", nargs="?", help="trace JSON path (default: stdin)")
    p.add_argument("--instance")
    p.add_argument("--out")
    p.set_defaults(func=cmd_check)
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (InstanceError, ParameterError, TraceMismatch, CapExceeded, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION


if __name__ == "__main__":
    sys.exit(main())
