"""Command-line interface.

Subcommands: gen-matrix, verify-expander, model (validate | sample),
project, recover, experiment (block | tree | fixed-d), report.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from pathlib import Path

import numpy as np

from . import experiments, io, plotting
from .expander import generate_random_matrix, verify_model_expansion
from .models import GroupModel, PlainSparseModel, TreeModel, sample_model_signal
from .projections import model_sigma, project
from .recovery import (
    RecoveryConfig,
    SketchProblem,
    eiht_recover,
    meiht_recover,
    smp_recover,
)

_SOLVERS = {"smp": smp_recover, "eiht": eiht_recover, "meiht": meiht_recover}


def _cmd_gen_matrix(args: argparse.Namespace) -> int:
    matrix = generate_random_matrix(args.n, args.m, args.d, args.seed)
    io.save_matrix(matrix, args.out)
    print(f"wrote {args.n}x{args.m} matrix with degree {args.d} to {args.out}")
    return 0


def _cmd_verify_expander(args: argparse.Namespace) -> int:
    matrix = io.load_matrix(args.matrix)
    model = io.load_model(args.model)
    samples = None if args.samples is None else args.samples
    report = verify_model_expansion(
        matrix, model, max_sets=args.max_sets, samples=samples, seed=args.seed
    )
    status = "exhaustive" if report.exhaustive else "sampled (unverified lower bound)"
    print(f"budget {report.budget}  epsilon {report.epsilon:.6g}  [{status}]")
    print(f"delta (empirical) {report.delta:.6g}")
    print(f"sets checked {report.sets_checked}")
    print("worst set " + " ".join(str(i) for i in sorted(report.worst_set)))
    return 0


def _cmd_model_validate(args: argparse.Namespace) -> int:
    model = io.load_model(args.path)
    if isinstance(model, PlainSparseModel):
        desc = f"plain n={model.n} k={model.budget}"
    elif isinstance(model, TreeModel):
        desc = f"tree n={model.n} arity={model.arity} k={model.budget}"
    else:
        desc = (
            f"group n={model.n} groups={model.n_groups} "
            f"g_max={model.g_max} k={model.budget} loopless=yes"
        )
    print(f"valid: {desc}")
    return 0


def _cmd_model_sample(args: argparse.Namespace) -> int:
    model = io.load_model(args.path)
    x = sample_model_signal(model, args.seed)
    io.save_vector(x, args.out)
    print(f"wrote signal with {int(np.count_nonzero(x))} nonzeros to {args.out}")
    return 0


def _cmd_project(args: argparse.Namespace) -> int:
    model = io.load_model(args.model)
    x = io.load_vector(args.signal, expected_length=model.n)
    result = project(x, model)
    io.save_vector(result.projected, args.out)
    sigma = model_sigma(x, model)
    print(f"{len(result.support)} {result.covered_weight!r} {sigma!r}")
    return 0


def _cmd_recover(args: argparse.Namespace) -> int:
    matrix = io.load_matrix(args.matrix)
    model = io.load_model(args.model)
    sketch = io.load_vector(args.sketch, expected_length=matrix.n_right)
    if args.normalized:
        problem = SketchProblem.from_normalized(matrix, sketch, model)
    else:
        problem = SketchProblem(matrix=matrix, sketch=sketch, model=model)
    config = RecoveryConfig(max_iterations=args.max_iters, tolerance=args.tol)
    result = _SOLVERS[args.algo](problem, config)
    io.save_vector(result.estimate, args.out)
    print(f"{result.iterations} {result.stop_reason} {result.final_residual!r}")
    return 0


def _apply_config_file(args: argparse.Namespace, path: str) -> None:
    """Config file overrides flags: one key=value per line, or a JSON object."""
    text = Path(path).read_text()
    if text.lstrip().startswith("{"):
        overrides = json.loads(text)
    else:
        overrides = {}
        for line in text.splitlines():
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            key, sep, value = line.partition("=")
            if not sep:
                raise ValueError(f"config line is not key=value: {line!r}")
            try:
                overrides[key.strip()] = json.loads(value.strip())
            except json.JSONDecodeError:
                overrides[key.strip()] = value.strip()
    for key, value in overrides.items():
        attr = key.replace("-", "_")
        if not hasattr(args, attr):
            raise ValueError(f"unknown config key {key!r}")
        if attr == "algos" and isinstance(value, list):
            value = ",".join(value)
        setattr(args, attr, value)


def _cmd_experiment(args: argparse.Namespace) -> int:
    if args.config:
        _apply_config_file(args, args.config)
    family = args.family.replace("-", "_")
    n_values = []
    n = 1 << max(1, int(math.ceil(math.log2(args.n_min))))
    while n <= args.n_max:
        if n >= args.n_min:
            n_values.append(n)
        n *= 2
    if not n_values:
        raise ValueError("no powers of two in [n_min, n_max]")
    config = experiments.ExperimentConfig(
        family=family,
        n_values=tuple(n_values),
        trials=args.trials,
        success_threshold=args.threshold,
        m_step=args.m_step,
        seed=args.seed,
        algorithms=tuple(args.algos.split(",")),
        max_iterations=args.max_iters,
        record_timing=not args.no_timing,
    )
    records = experiments.run_experiment(config)
    raw_path, summary_path = experiments.emit_results(
        records, args.out, success_threshold=config.success_threshold
    )
    echo_path = experiments.write_config_echo(config, args.out)
    written = [raw_path, summary_path, echo_path]
    if not args.no_plot:
        written.extend(plotting.render_report(args.out))
    for path in written:
        print(f"wrote {path}")
    return 0


def _cmd_report(args: argparse.Namespace) -> int:
    written = plotting.render_report(args.results, args.out)
    if not written:
        print(f"no raw.csv or summary.csv found under {args.results}", file=sys.stderr)
        return 1
    for path in written:
        print(f"wrote {path}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="expandersketch",
        description="Model-based sparse recovery from expander sketches",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("gen-matrix", help="generate a random sketching matrix")
    p.add_argument("--n", type=int, required=True, help="signal dimension (left nodes)")
    p.add_argument("--m", type=int, required=True, help="sketch length (right nodes)")
    p.add_argument("--d", type=int, required=True, help="edges per column")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_gen_matrix)

    p = sub.add_parser("verify-expander", help="measure a matrix's model expansion")
    p.add_argument("--matrix", required=True)
    p.add_argument("--model", required=True, help="model file path")
    group = p.add_mutually_exclusive_group()
    group.add_argument("--exhaustive", action="store_true", default=True)
    group.add_argument("--samples", type=int, default=None,
                       help="Monte-Carlo mode: probe this many sampled sets")
    p.add_argument("--max-sets", type=int, default=1_000_000)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=_cmd_verify_expander)

    p = sub.add_parser("model", help="model file utilities")
    model_sub = p.add_subparsers(dest="model_command", required=True)
    q = model_sub.add_parser("validate", help="validate a model file")
    q.add_argument("path")
    q.set_defaults(func=_cmd_model_validate)
    q = model_sub.add_parser("sample", help="sample a model-sparse signal")
    q.add_argument("path")
    q.add_argument("--seed", type=int, default=0)
    q.add_argument("--out", required=True)
    q.set_defaults(func=_cmd_model_sample)

    p = sub.add_parser("project", help="exact l1 projection of a signal onto a model")
    p.add_argument("--model", required=True)
    p.add_argument("--signal", required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_project)

    p = sub.add_parser("recover", help="decode a sketch")
    p.add_argument("--algo", choices=sorted(_SOLVERS), required=True)
    p.add_argument("--matrix", required=True)
    p.add_argument("--model", required=True)
    p.add_argument("--sketch", required=True)
    p.add_argument("--normalized", action="store_true",
                   help="sketch was taken with unit-l1-norm columns (A / d)")
    p.add_argument("--max-iters", type=int, default=500)
    p.add_argument("--tol", type=float, default=1e-7,
                   help="relative l1 iterate-change stopping tolerance; in noisy "
                        "runs the residual never reaches zero and this governs")
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_recover)

    p = sub.add_parser("experiment", help="run a minimum-sketch-length sweep")
    p.add_argument("family", choices=("block", "tree", "fixed-d"))
    p.add_argument("--n-min", type=int, default=128)
    p.add_argument("--n-max", type=int, default=8192)
    p.add_argument("--trials", type=int, default=50)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--threshold", type=float, default=1e-5)
    p.add_argument("--m-step", type=int, default=None)
    p.add_argument("--algos", default="eiht,meiht")
    p.add_argument("--max-iters", type=int, default=100)
    p.add_argument("--config", default=None,
                   help="key=value lines or a JSON object; overrides flags")
    p.add_argument("--no-timing", action="store_true",
                   help="write wall_time as 0.0 for byte-reproducible CSVs")
    p.add_argument("--no-plot", action="store_true")
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_experiment)

    p = sub.add_parser("report", help="render figures from experiment CSVs")
    p.add_argument("--results", required=True)
    p.add_argument("--out", default=None)
    p.set_defaults(func=_cmd_report)

    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
