#!/usr/bin/env python
"""Command-line interface for blowuplab."""
import argparse
import io
import logging
import sys
from pathlib import Path
from typing import List, Optional

# Fix Unicode encoding issues on Windows
if sys.platform == 'win32':
    sys.stdout = io.TextIOWrapper(sys.stdout.buffer, encoding='utf-8', errors='replace')
    sys.stderr = io.TextIOWrapper(sys.stderr.buffer, encoding='utf-8', errors='replace')

from src.asymptotics import QUANTITIES, require_expansion
from src.config import config
from src.exceptions import BlowupLabError, ConfigError, InvariantViolation
from src.export import ReportExporter
from src.pipeline import VerificationPipeline, load_experiment

LOG_FORMAT = '%(asctime)s - %(name)s - %(levelname)s - %(message)s'

logger = logging.getLogger("blowuplab")


class _Parser(argparse.ArgumentParser):
    """argparse usage errors exit with the configuration code."""

    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        sys.exit(ConfigError.exit_code)


def _lambda_grid(value: str) -> List[float]:
    try:
        return [float(v) for v in value.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a comma-separated list of numbers: {value!r}")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(
        prog="blowuplab",
        description="Numerical verification of boundary blow-up for a critical 4D Neumann system",
    )
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", "-c", type=str, help="Experiment config (JSON)")
    common.add_argument("--out", "-o", type=str, help="Output directory (default: config.yaml output.output_directory)")
    common.add_argument("--json", type=str, metavar="PATH", help="Also write the command's record to PATH")
    common.add_argument("--tol-rel", type=float, help="Relative quadrature tolerance override")
    common.add_argument("--lambda-grid", type=_lambda_grid, help="Comma-separated lambda grid override")
    common.add_argument("--threads", type=int, help="Worker threads (fallback: BLOWUPLAB_THREADS)")
    common.add_argument("--config-yaml", type=str, help="Runtime YAML config (default: config.yaml)")
    common.add_argument("--verbose", "-v", action="store_true", help="DEBUG logging")

    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)
    specialfn = sub.add_parser("verify-specialfn", parents=[common], help="K1 and W invariant suite")
    specialfn.add_argument("--rmin", type=float, help="Smallest radius checked")
    specialfn.add_argument("--rmax", type=float, help="Largest radius checked (at most 700)")
    sub.add_parser("verify-ansatz", parents=[common], help="Ansatz identity suite")
    sub.add_parser("curvature", parents=[common], help="Boundary curvature scan and strict maxima")
    scaling = sub.add_parser("scaling", parents=[common], help="Scaling scan along the lambda grid")
    scaling.add_argument("--quantity", required=True, choices=QUANTITIES)
    sub.add_parser("fit-constants", parents=[common], help="Fit the energy expansion constants")
    predict = sub.add_parser("predict", parents=[common], help="Predict blow-up points and rates")
    predict.add_argument("--lambda", dest="lam", type=float, help="Lambda of the prediction (default: largest grid value)")
    sub.add_parser("schemas", parents=[common], help="Write JSON Schemas of every emitted record")
    return parser


def setup_logging(verbose: bool) -> None:
    level = logging.DEBUG if verbose else getattr(logging, str(config.get('logging.level', 'INFO')).upper(), logging.INFO)
    handlers: List[logging.Handler] = [logging.StreamHandler()]
    log_file = config.get('logging.file')
    if log_file:
        handlers.append(logging.FileHandler(log_file, encoding='utf-8'))
    logging.basicConfig(level=level, format=LOG_FORMAT, handlers=handlers, force=True)


def run(args: argparse.Namespace) -> int:
    """Dispatch one subcommand and return its exit code."""
    experiment = load_experiment(args.config) if args.config else None
    pipeline = VerificationPipeline(
        experiment,
        output_dir=args.out,
        tol_rel=args.tol_rel,
        lambda_grid=args.lambda_grid,
        threads=args.threads,
    )

    if args.command == "schemas":
        paths = pipeline.schemas()
        print(f"Wrote {len(paths)} schemas to {pipeline.output_dir}")
        return 0

    if args.command == "verify-specialfn":
        record = pipeline.verify_specialfn(args.rmin, args.rmax)
        passed = record.is_valid
        summary = [f"{c.name}: {'ok' if c.passed else 'FAILED'} ({c.value:.3g} vs {c.threshold:.3g})"
                   for c in record.checks]
    elif args.command == "verify-ansatz":
        record = pipeline.verify_ansatz()
        passed = record.is_valid
        summary = [f"{c.name}: {'ok' if c.passed else 'FAILED'} ({c.value:.3g} vs {c.threshold:.3g})"
                   for c in record.checks]
    elif args.command == "curvature":
        record = pipeline.curvature()
        passed = True
        summary = [f"H range: [{record.h_min:.6g}, {record.h_max:.6g}]",
                   f"Strict maxima: {len(record.maxima)}"]
        summary += [f"  H={m.h:.6g} at xi={[round(v, 6) for v in m.point.xi]}" for m in record.maxima]
    elif args.command == "scaling":
        record = pipeline.scaling(args.quantity)
        passed = record.passed
        summary = [f"{t.term} [{t.criterion}]: {'ok' if t.passed else 'FAILED'}"
                   + (f" ({t.notice})" if t.notice else "") for t in record.terms]
    elif args.command == "fit-constants":
        record = pipeline.fit_constants()
        passed = record.passed
        summary = [f"c0={record.c0:.10g} c1={record.c1:.10g} c2={record.c2:.10g} R^2={record.r_squared:.6f}"]
        summary += record.diagnostics
    else:
        record = pipeline.predict(args.lam)
        # disagreement beyond asymptotics.agreement exits 1
        passed = record.consistent is not False
        summary = [f"xi*={[p.xi for p in record.xi_star]}",
                   f"d*={record.d_star} (leading {record.d_leading}) delta*={record.delta_star}",
                   f"maxima={record.n_maxima} pairs={record.pair_count}"]
        if record.d_direct is not None:
            summary.append(f"direct d={record.d_direct} agreement={record.agreement:.3g}")

    if args.json:
        target = Path(args.json)
        ReportExporter(target.parent).write_json(record, target.name)

    print("\n" + "=" * 50)
    print(f"blowuplab {args.command}")
    print("=" * 50)
    for line in summary:
        print(line)
    print("=" * 50)
    print(f"Outputs in {pipeline.output_dir}")
    if args.command == "fit-constants" and not passed:
        # sign or R^2 failure: exit 4
        require_expansion(record)
    if args.command in ("verify-specialfn", "verify-ansatz") and not passed:
        raise InvariantViolation(f"{len(record.failed())} invariant checks failed: "
                                 f"{', '.join(c.name for c in record.failed())}")
    return 0 if passed else 1


def main(argv: Optional[List[str]] = None) -> int:
    """Main CLI entry point."""
    args = build_parser().parse_args(argv)
    if args.config_yaml:
        config.reload(args.config_yaml)
    setup_logging(args.verbose)
    try:
        return run(args)
    except BlowupLabError as e:
        logger.error("%s", e)
        print(f"Error: {e}", file=sys.stderr)
        return e.exit_code


if __name__ == "__main__":
    sys.exit(main())
