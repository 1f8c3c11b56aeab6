#!/usr/bin/env python

"""
CLI commands for the Neural Matter Kit.

Every subcommand writes its files under --out (default: the current
directory) and prints a short human-readable summary on stdout.
"""

import argparse
import csv
import json
import logging
import os
import sys
from pathlib import Path
from typing import Callable, Dict, List, Optional, Sequence, Tuple

from neural_matter_kit import __version__
from neural_matter_kit.bench.counter import COUNTING_CONVENTION
from neural_matter_kit.bench.ranking import ranking_table
from neural_matter_kit.bench.kernels import (
    DEFAULT_DIMS,
    DEFAULT_REPS,
    DEFAULT_THREADS,
    bench_kernels,
)
from neural_matter_kit.config.loader import load_run_config
from neural_matter_kit.config.schema import Arch, ModelSpec
from neural_matter_kit.config.validator import validate_run_config
from neural_matter_kit.data.dataset import Dataset
from neural_matter_kit.data.idx import load_idx
from neural_matter_kit.errors import DomainError, NmkError
from neural_matter_kit.linalg.rng import RngState
from neural_matter_kit.nms.export import FORMATS, export_nms
from neural_matter_kit.nms.report import DEFAULT_KAPPA, build_nms
from neural_matter_kit.nn.checkpoint import load_checkpoint
from neural_matter_kit.nn.model import build_model
from neural_matter_kit.train.experiments import collapse_experiment, compare_baselines
from neural_matter_kit.train.gradcheck import GRAD_CASES, grad_check
from neural_matter_kit.train.loop import train
from neural_matter_kit.train.xor import solve_xor
from neural_matter_kit.utils.logging_utils import LEVELS, setup_logging
from neural_matter_kit.yat.axioms import axiom_check, default_seeded_cases
from neural_matter_kit.yat.flops import product_flop_table
from neural_matter_kit.yat.products import Measure

logger = logging.getLogger(__name__)

SEED_ENV = "NMK_SEED"
HOLDOUT_FRACTION = 0.1
ARCH_CHOICES = [Arch.E_MLP.value, Arch.LINEAR.value, Arch.MLP.value]


def resolve_seed(flag: Optional[int], fallback: int = 0) -> int:
    """
    Seed for a run: NMK_SEED when set, then --seed, then the fallback.

    Raises:
        DomainError: If NMK_SEED is not a non-negative integer
    """
    env = os.environ.get(SEED_ENV)
    if env is not None and env.strip():
        try:
            seed = int(env)
        except ValueError:
            raise DomainError(f"{SEED_ENV} must be an integer, got {env!r}")
        if seed < 0:
            raise DomainError(f"{SEED_ENV} must be non-negative, got {seed}")
        return seed
    return flag if flag is not None else fallback


def _out_dir(args: argparse.Namespace) -> Path:
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    return out


def _write_csv(
    path: Path, rows: Sequence[Sequence[object]], comment: Optional[str] = None
) -> Path:
    with open(path, "w", newline="") as f:
        if comment:
            for line in comment.splitlines():
                f.write(f"# {line}\n")
        csv.writer(f).writerows(rows)
    logger.info(f"Wrote {path}")
    return path


def _write_json(path: Path, text: str) -> Path:
    path.write_text(text)
    logger.info(f"Wrote {path}")
    return path


def _int_list(value: str) -> List[int]:
    try:
        return [int(part) for part in value.split(",") if part.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(
            f"expected comma-separated integers, got {value!r}"
        )


def _float_list(value: str) -> List[float]:
    try:
        return [float(part) for part in value.split(",") if part.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(
            f"expected comma-separated numbers, got {value!r}"
        )


def _load_split(args: argparse.Namespace) -> Tuple[Dataset, Dataset]:
    train_data = load_idx(args.images, args.labels)
    if args.test_images and args.test_labels:
        test_data = load_idx(
            args.test_images, args.test_labels, num_classes=train_data.num_classes
        )
        return train_data, test_data
    if args.test_images or args.test_labels:
        raise DomainError("--test-images and --test-labels must be given together")
    held_out = max(1, int(len(train_data) * HOLDOUT_FRACTION))
    if held_out >= len(train_data):
        raise DomainError(
            f"need at least 2 samples to hold out a test split, got {len(train_data)}"
        )
    logger.warning(f"No test files given; holding out the last {held_out} samples")
    cut = len(train_data) - held_out
    return train_data.take(range(cut)), train_data.take(range(cut, len(train_data)))


def cmd_xor(args: argparse.Namespace) -> int:
    out = _out_dir(args)
    solution, _ = solve_xor(args.restarts, RngState(resolve_seed(args.seed)))
    rows: List[List[object]] = [["x1", "x2", "output"]]
    for i, y in enumerate(solution.grid_axis):
        for j, x in enumerate(solution.grid_axis):
            value = solution.grid[i, j]
            rows.append([repr(float(x)), repr(float(y)), repr(float(value))])
    _write_csv(out / "decision_grid.csv", rows)
    correct = int(round(solution.accuracy * 4))
    print(f"XOR accuracy: {correct}/4")
    print(
        f"weights: {solution.weights.tolist()}, bias: {solution.bias:.6g}, "
        f"mse: {solution.mse:.6g}"
    )
    return 0


def cmd_train(args: argparse.Namespace) -> int:
    out = _out_dir(args)
    overrides: Dict[str, object] = {}
    if args.epochs is not None:
        overrides["epochs"] = args.epochs
    train_config, spec = load_run_config(args.config, args.arch, overrides or None)
    train_data, test_data = _load_split(args)
    spec = ModelSpec.model_validate(
        {
            **spec.model_dump(),
            "input_shape": list(train_data.image_shape or [train_data.dim]),
            "num_classes": train_data.num_classes,
        }
    )
    is_valid, errors = validate_run_config(train_config, spec)
    if not is_valid:
        for error in errors:
            logger.error(error)
        print(f"Error: invalid run configuration: {'; '.join(errors)}", file=sys.stderr)
        return 1

    train_data = train_data.head(train_config.max_train_samples)
    test_data = test_data.head(train_config.max_test_samples)
    model = build_model(spec)
    state = RngState(resolve_seed(args.seed, train_config.seed))
    report, _ = train(
        model,
        (train_data, test_data),
        train_config,
        state,
        metrics_path=out / "metrics.csv",
        checkpoint_dir=out / "checkpoint",
    )
    report.save_json(out / "train_report.json")
    print(
        f"{report.arch}: {report.param_count} parameters, "
        f"final test accuracy {report.final.test_accuracy:.4f} "
        f"after {len(report.epochs) - 1} epochs"
    )
    if report.checkpoint_path:
        print(f"checkpoint: {report.checkpoint_path}")
    return 0


def cmd_nms(args: argparse.Namespace) -> int:
    model, params = load_checkpoint(args.checkpoint)
    kernels = dict(model.yat_kernels())
    if args.layer is None:
        key = model.output_kernel()
        if key is None:
            raise DomainError("the checkpoint has no output layer with a kernel")
    else:
        candidates = (f"{args.layer}.kernel", f"{args.layer}.weight")
        key = next((k for k in candidates if k in params), None)
        if key is None:
            raise DomainError(
                f"unknown layer {args.layer!r}; layers with kernels: {sorted(kernels)}"
            )
    epsilon = kernels.get(key, model.spec.epsilon)
    report = build_nms(
        params[key],
        epsilon=epsilon,
        kappa=args.kappa,
        layer_name=key.rsplit(".", 1)[0],
    )
    written = export_nms(report, _out_dir(args), args.formats)
    print(
        f"{report.layer_name}: {report.neurons} neurons, "
        f"median similarity {report.median_similarity:.6g}, "
        f"{len(report.collapse_pairs)} collapse pairs"
    )
    for path in written:
        print(path)
    return 0


def cmd_axioms(args: argparse.Namespace) -> int:
    out = _out_dir(args)
    report, _ = axiom_check(
        Measure(args.measure),
        args.samples,
        args.dim,
        RngState(resolve_seed(args.seed)),
        seeded_cases=default_seeded_cases(),
    )
    path = _write_json(
        out / f"axioms_{report.measure.value}.json", report.model_dump_json(indent=2)
    )
    for axiom, count in report.violations.items():
        print(f"{axiom}: {count} violations")
    print(path)
    return 0


def cmd_gradcheck(args: argparse.Namespace) -> int:
    state = RngState(resolve_seed(args.seed))
    cases = args.case or list(GRAD_CASES)
    failed = 0
    reports = []
    for name in cases:
        report, state = grad_check(name, args.trials, args.tolerance, state)
        reports.append(report)
        status = "ok" if report.passed else "FAILED"
        print(
            f"{name}: max relative error {report.max_rel_err:.3e} "
            f"over {report.checked} entries [{status}]"
        )
        failed += 0 if report.passed else 1
    if args.out:
        payload = json.dumps([r.model_dump(mode="json") for r in reports], indent=2)
        _write_json(_out_dir(args) / "gradcheck.json", payload)
    if failed:
        print(
            f"Error: {failed} gradient case(s) exceeded tolerance {args.tolerance:g}",
            file=sys.stderr,
        )
        return 1
    return 0


def cmd_bench(args: argparse.Namespace) -> int:
    out = _out_dir(args)
    report = bench_kernels(
        args.dims,
        args.reps,
        RngState(resolve_seed(args.seed)),
        threads=args.threads or None,
    )
    _write_json(out / "bench.json", report.model_dump_json(indent=2))
    rows: List[List[object]] = [
        [
            "d",
            "counted_dot",
            "counted_yat",
            "model_dot",
            "model_yat",
            "model_ratio",
            "throughput_dot",
            "throughput_yat",
            "measured_ratio",
            "counted_yat_combined",
        ]
    ]
    for row in report.rows:
        rows.append(
            [
                row.d,
                row.counted_flops_dot_neuron,
                row.counted_flops_yat_neuron,
                row.model_flops.traditional,
                row.model_flops.yat,
                repr(row.model_flops.ratio),
                repr(row.throughput_dot),
                repr(row.throughput_yat),
                repr(row.measured_ratio),
                row.counted_flops_yat_combined,
            ]
        )
    comment = f"{COUNTING_CONVENTION}\n{report.environment}"
    _write_csv(out / "bench.csv", rows, comment=comment)

    table = [["d", "dot", "euclidean", "cosine", "yat", "posi_yat"]]
    for d in args.dims:
        counts = product_flop_table(d)
        table.append([d] + [counts[name] for name in table[0][1:]])
    _write_csv(out / "product_flops.csv", table)

    for row in report.rows:
        print(
            f"d={row.d}: flops dot {row.counted_flops_dot_neuron} "
            f"yat {row.counted_flops_yat_neuron} "
            f"(model ratio {row.model_flops.ratio:.4f}, "
            f"measured ratio {row.measured_ratio:.4f})"
        )
    return 0


def cmd_rank(args: argparse.Namespace) -> int:
    table = ranking_table()
    print(table.to_text())
    if args.out:
        _write_csv(_out_dir(args) / "ranking.csv", table.to_csv_rows())
    return 0


def cmd_compare(args: argparse.Namespace) -> int:
    out = _out_dir(args)
    overrides: Dict[str, object] = {}
    if args.epochs is not None:
        overrides["epochs"] = args.epochs
    data = _load_split(args)
    archs = [Arch(arch) for arch in args.archs]
    report, _ = compare_baselines(
        data,
        RngState(resolve_seed(args.seed)),
        args.config,
        overrides or None,
        archs,
        output_dir=out,
    )
    _write_json(out / "comparison.json", report.model_dump_json(indent=2))
    for entry in report.entries:
        print(
            f"{entry.arch}: {entry.param_count} parameters, "
            f"test accuracy {entry.final_test_accuracy:.4f}"
        )
    margin = report.e_mlp_margin_over_linear
    if margin is not None:
        print(f"e-mlp margin over linear: {margin:+.4f}")
    return 0


def cmd_collapse(args: argparse.Namespace) -> int:
    out = _out_dir(args)
    report, _ = collapse_experiment(
        RngState(resolve_seed(args.seed)), lambdas=args.lambdas, epochs=args.epochs
    )
    _write_json(out / "collapse.json", report.model_dump_json(indent=2))
    for run in report.runs:
        export_nms(run.nms, out / f"nms_lambda_{run.lambda_reg:g}")
        print(
            f"lambda={run.lambda_reg:g}: "
            f"max off-diagonal similarity {run.max_offdiagonal_similarity:.6g}, "
            f"{run.collapsed_pairs} collapse pairs, "
            f"test accuracy {run.final_test_accuracy:.4f}"
        )
    print(f"regularizer reduces similarity: {report.regularizer_reduces_similarity}")
    return 0


COMMANDS: Dict[str, Callable[[argparse.Namespace], int]] = {
    "xor": cmd_xor,
    "train": cmd_train,
    "nms": cmd_nms,
    "axioms": cmd_axioms,
    "gradcheck": cmd_gradcheck,
    "bench": cmd_bench,
    "rank": cmd_rank,
    "compare": cmd_compare,
    "collapse": cmd_collapse,
}


def _add_data_arguments(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--images", required=True, help="IDX images of the train set")
    parser.add_argument("--labels", required=True, help="IDX labels of the train set")
    parser.add_argument("--test-images", help="IDX image file of the test set")
    parser.add_argument("--test-labels", help="IDX label file of the test set")
    parser.add_argument("--config", help="YAML or JSON run configuration")
    parser.add_argument("--epochs", type=int, help="Override the configured epochs")


def build_parser() -> argparse.ArgumentParser:
    """Argument parser with one subparser per command."""
    parser = argparse.ArgumentParser(
        prog="nmk", description="Neural Matter Kit: activation-free E-product networks"
    )
    parser.add_argument("--version", action="store_true", help="Show version and exit")
    parser.add_argument(
        "--log-level",
        choices=list(LEVELS),
        default="WARNING",
        help="Set the logging level (default: WARNING)",
    )
    parser.add_argument("--log-file-path", help="Also write log records to this file")

    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, help=f"Run seed (overridden by {SEED_ENV})")
    common.add_argument(
        "--out", default=".", help="Output directory (default: current directory)"
    )

    subparsers = parser.add_subparsers(dest="command", help="Command to run")

    xor_parser = subparsers.add_parser(
        "xor", parents=[common], help="Solve XOR with a single E-neuron"
    )
    xor_parser.add_argument(
        "--restarts", type=int, default=10, help="Random restarts (default: 10)"
    )

    train_parser = subparsers.add_parser(
        "train", parents=[common], help="Train a model on IDX data"
    )
    train_parser.add_argument(
        "--arch", choices=[a.value for a in Arch], default=Arch.E_MLP.value
    )
    _add_data_arguments(train_parser)

    nms_parser = subparsers.add_parser(
        "nms", parents=[common], help="Neural-matter state report of a layer"
    )
    nms_parser.add_argument("--checkpoint", required=True, help="Checkpoint directory")
    nms_parser.add_argument("--layer", help="Layer name (default: the output layer)")
    nms_parser.add_argument(
        "--formats", nargs="+", choices=list(FORMATS), default=list(FORMATS)
    )
    nms_parser.add_argument(
        "--kappa",
        type=float,
        default=DEFAULT_KAPPA,
        help="Collapse threshold multiplier",
    )

    axioms_parser = subparsers.add_parser(
        "axioms", parents=[common], help="Count metric-axiom violations"
    )
    axioms_parser.add_argument(
        "--measure", choices=[m.value for m in Measure], default=Measure.E.value
    )
    axioms_parser.add_argument("--samples", type=int, default=10000)
    axioms_parser.add_argument("--dim", type=int, default=3)

    grad_parser = subparsers.add_parser(
        "gradcheck", parents=[common], help="Finite-difference gradient checks"
    )
    grad_parser.add_argument(
        "--case",
        action="append",
        choices=list(GRAD_CASES),
        help="Case to run (repeatable)",
    )
    grad_parser.add_argument("--trials", type=int, default=10)
    grad_parser.add_argument("--tolerance", type=float, default=1e-4)
    grad_parser.set_defaults(out=None)

    bench_parser = subparsers.add_parser(
        "bench", parents=[common], help="FLOP counts and kernel throughput"
    )
    bench_parser.add_argument(
        "--dims",
        type=_int_list,
        default=list(DEFAULT_DIMS),
        help="Comma-separated dimensions",
    )
    bench_parser.add_argument("--reps", type=int, default=DEFAULT_REPS)
    bench_parser.add_argument(
        "--threads",
        type=int,
        default=DEFAULT_THREADS,
        help="BLAS thread limit while timing (0 for no limit)",
    )

    rank_parser = subparsers.add_parser(
        "rank", parents=[common], help="Dot vs E-product ranking table"
    )
    rank_parser.set_defaults(out=None)

    compare_parser = subparsers.add_parser(
        "compare", parents=[common], help="E-MLP vs linear vs MLP baselines"
    )
    compare_parser.add_argument(
        "--archs", nargs="+", choices=ARCH_CHOICES, default=list(ARCH_CHOICES)
    )
    _add_data_arguments(compare_parser)

    collapse_parser = subparsers.add_parser(
        "collapse", parents=[common], help="E-regularizer collapse experiment"
    )
    collapse_parser.add_argument("--lambdas", type=_float_list, default=[0.0, 1e-3])
    collapse_parser.add_argument("--epochs", type=int, default=30)

    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    """
    Main entry point for the nmk CLI.

    Args:
        argv: Arguments without the program name; defaults to sys.argv[1:]

    Returns:
        Exit code: 0 on success, 1 on an expected error, 2 on a usage error
    """
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return int(e.code) if isinstance(e.code, int) else 2

    if args.version:
        print(f"neural-matter-kit version {__version__}")
        return 0

    if args.command is None:
        parser.print_help(sys.stderr)
        return 2

    try:
        setup_logging(args.log_level, args.log_file_path)
        return COMMANDS[args.command](args)
    except (NmkError, ValueError, OSError) as e:
        logger.error(f"{args.command} failed: {e}")
        print(f"Error: {e}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
