"""
CLI argument parsing for the Killing tensor analysis orchestrator.
"""

import argparse
from pathlib import Path

from killing.metric_catalog import BUILTIN_METRICS
from killing.pipeline import MODES


def _add_analysis_options(parser: argparse.ArgumentParser) -> None:
    """Options shared by 'analyze' and by plan defaults."""
    parser.add_argument("--prolong", type=int, help="Prolongation order M (default: d)")
    parser.add_argument("--seed", type=int, default=0, help="Seed for the second point and the primes (default: 0)")
    parser.add_argument("--exact", action="store_true", help="Always run exact elimination, even after a full modular rank")
    parser.add_argument("--no-gauge-fix", action="store_true", help="Keep the trivial integrals in the kernel")
    parser.add_argument("--workers", type=int, default=1, help="Number of worker processes for branches (default: 1)")


def create_parser() -> argparse.ArgumentParser:
    """Create and configure the argument parser."""
    parser = argparse.ArgumentParser(
        description="Killing Tensor Lab\n\n"
                    "Exact upper bounds on the number of independent Killing tensors of a given valence\n"
                    "for stationary axisymmetric metrics.",
        formatter_class=argparse.RawDescriptionHelpFormatter
    )
    parser.add_argument("--verbose", "-v", action="store_true", help="Debug logging")
    subparsers = parser.add_subparsers(dest="command", help="Command to execute")

    # Analyze command
    analyze_parser = subparsers.add_parser("analyze", help="Bound the Killing tensors of one valence")
    source = analyze_parser.add_mutually_exclusive_group(required=True)
    source.add_argument("--metric", choices=sorted(BUILTIN_METRICS), help="Catalog metric")
    source.add_argument("--metric-file", type=Path, help="Metric file")
    analyze_parser.add_argument("--valence", "-d", type=int, required=True, help="Valence d")
    analyze_parser.add_argument("--mode", choices=MODES, help="Branch decomposition (default: static-split for static metrics, else two-parity)")
    analyze_parser.add_argument("--parity", type=int, choices=(0, 1), help="Parity e in (p_x, p_y) for single-branch mode")
    analyze_parser.add_argument("--phi-parity", choices=("even", "any"), default="any", help="Parity in p_phi for single-branch mode")
    analyze_parser.add_argument("--point", help="Evaluation point 'r1,r2' with exact rationals (default: first suggested point)")
    analyze_parser.add_argument("--report", type=Path, help="Also write the JSON report to this path")
    analyze_parser.add_argument("--dump-matrix", type=Path, help="Directory for per-branch triplet files and row listings")
    analyze_parser.add_argument("--show-kernel", action="store_true", help="Print the order-0 part of every kernel vector")
    analyze_parser.add_argument("--fail-on-nongeneric", action="store_true", help="Exit with status 5 when points disagree")
    analyze_parser.add_argument("--experiment-id", help="Experiment ID (auto-generated if not provided)")
    _add_analysis_options(analyze_parser)

    # Counts command
    counts_parser = subparsers.add_parser("counts", help="Print equation and unknown counts")
    counts_parser.add_argument("--valence", "-d", type=int, required=True, help="Valence d")
    counts_parser.add_argument("--parity", type=int, choices=(0, 1), required=True, help="Parity e")
    counts_parser.add_argument("--prolong", type=int, help="Prolongation order M (default: d)")
    counts_parser.add_argument("--phi-parity", choices=("even", "any"), default="any", help="Parity in p_phi")

    # Run plan command
    run_parser = subparsers.add_parser("run", help="Run an analysis plan")
    run_parser.add_argument("--plan", type=Path, required=True, help="Analysis plan file")
    run_parser.add_argument("--experiment-id", help="Experiment ID (auto-generated if not provided)")
    run_parser.add_argument("--workers", type=int, help="Override the plan's worker count")

    # Report command
    report_parser = subparsers.add_parser("report", help="Regenerate report files from saved results")
    report_parser.add_argument("--experiment-id", default="latest", help="Experiment ID (default: latest)")

    # List command
    subparsers.add_parser("list", help="List experiments")

    # Export metric command
    export_parser = subparsers.add_parser("export-metric", help="Write a catalog metric in the metric file format")
    export_parser.add_argument("--metric", choices=sorted(BUILTIN_METRICS), required=True, help="Catalog metric")
    export_parser.add_argument("--output", type=Path, help="Output file (default: stdout)")

    return parser


def parse_args(argv=None):
    """Parse command line arguments; None when no command was given."""
    parser = create_parser()
    args = parser.parse_args(argv)

    if not args.command:
        parser.print_help()
        return None

    return args
