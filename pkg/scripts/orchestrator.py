#!/usr/bin/env python3
"""
Killing Tensor Analysis Orchestrator
Workflow controller for exact prolongation-projection bounds on Killing tensors
of stationary axisymmetric metrics
"""

import json
import logging
import sys
from datetime import datetime
from pathlib import Path
from typing import Dict, List, Optional, Tuple

import jsonschema
import yaml
from rich.console import Console
from rich.live import Live

from killing import (
    AnalysisOptions,
    BoundReport,
    BranchError,
    ExpressionParseError,
    InternalConsistencyError,
    MetricError,
    MetricSpec,
    NonGenericPointError,
    ZeroDenominatorError,
    builtin,
    format_metric_file,
    full_analysis,
    load_metric_file,
    meqns,
    nvars,
)
from killing.exact_algebra import Point, parse_point
from killing.pipeline import VERDICT_INCONCLUSIVE, BranchResult
from report_generator import ReportGenerator
from tui import AnalysisUI

# Setup logging
logging.basicConfig(
    level=logging.INFO,
    format='%(asctime)s - %(name)s - %(levelname)s - %(message)s'
)
logger = logging.getLogger(__name__)

# Project directories
PROJECT_ROOT = Path(__file__).parent.parent
CONFIG_DIR = PROJECT_ROOT / "config"
RESULTS_DIR = PROJECT_ROOT / "results"
SCHEMA_DIR = CONFIG_DIR / "schema"

# Exit statuses
EXIT_OK = 0
EXIT_UNEXPECTED = 1
EXIT_USAGE = 2
EXIT_METRIC = 3
EXIT_INCONCLUSIVE = 4
EXIT_NON_GENERIC = 5
EXIT_POINT = 6
EXIT_INTERNAL = 7


class OrchestratorError(Exception):
    """Base exception for orchestrator errors"""

    def __init__(self, message: str, exit_code: int = EXIT_UNEXPECTED):
        self.exit_code = exit_code
        super().__init__(message)


def exit_code_for(error: Exception) -> int:
    """Exit status for an exception escaping a command."""
    if isinstance(error, OrchestratorError):
        return error.exit_code
    if isinstance(error, (MetricError, ExpressionParseError)):
        return EXIT_METRIC
    if isinstance(error, ZeroDenominatorError):
        return EXIT_POINT
    if isinstance(error, NonGenericPointError):
        return EXIT_NON_GENERIC
    if isinstance(error, InternalConsistencyError):
        return EXIT_INTERNAL
    if isinstance(error, BranchError):
        return EXIT_USAGE
    return EXIT_UNEXPECTED


def resolve_metric(name: Optional[str] = None, metric_file: Optional[Path] = None) -> Tuple[MetricSpec, Tuple[str, str]]:
    """
    Catalog or file metric, together with the source worker processes rebuild it from.

    Raises:
        MetricError: if the metric is unknown or the file is invalid
    """
    if metric_file is not None:
        metric = load_metric_file(metric_file)
        return metric, ("file", Path(metric_file).read_text())
    if name is None:
        raise OrchestratorError("Either a catalog metric or a metric file is required", EXIT_USAGE)
    return builtin(name), ("builtin", name)


def parse_point_option(text: Optional[str]) -> Optional[Point]:
    if text is None:
        return None
    try:
        return parse_point(text)
    except ValueError as e:
        raise OrchestratorError(f"Invalid --point {text!r}: {e}", EXIT_USAGE) from e


class AnalysisOrchestrator:
    """Runs analyses and plans, and keeps their results in an experiment directory."""

    def __init__(self, experiment_id: Optional[str] = None, results_dir: Optional[Path] = None, console: Optional[Console] = None):
        """
        Initialize orchestrator with experiment tracking.

        Args:
            experiment_id: Unique experiment identifier (auto-generated if not provided)
            results_dir: Parent directory of experiment directories (default: results/)
            console: Rich console for human-facing output
        """
        self.experiment_id = experiment_id or f"exp-{datetime.now().strftime('%Y%m%d-%H%M%S')}"
        self.results_dir = results_dir or RESULTS_DIR
        self.experiment_dir = self.results_dir / self.experiment_id
        self.experiment_dir.mkdir(parents=True, exist_ok=True)

        self.ui = AnalysisUI(experiment_id=self.experiment_id, console=console)
        self.report_generator = ReportGenerator(self.experiment_dir, self.experiment_id)

        # Create/update "latest" symlink
        latest_link = self.results_dir / "latest"
        if latest_link.exists() or latest_link.is_symlink():
            latest_link.unlink()
        latest_link.symlink_to(self.experiment_dir.resolve())

        # Setup logging to file
        self._file_handler = logging.FileHandler(self.experiment_dir / "analysis.log")
        self._file_handler.setFormatter(logging.Formatter(
            '%(asctime)s - %(name)s - %(levelname)s - %(message)s'
        ))
        logging.getLogger().addHandler(self._file_handler)

        logger.info(f"Initialized orchestrator for experiment: {self.experiment_id}")

    @property
    def console(self) -> Console:
        """Delegate console access to UI."""
        return self.ui.console

    def close(self) -> None:
        logging.getLogger().removeHandler(self._file_handler)
        self._file_handler.close()

    def load_config(self, config_file: Path) -> Dict:
        """Load a YAML configuration file."""
        logger.info(f"Loading configuration from {config_file}")
        try:
            with open(config_file, 'r') as f:
                return yaml.safe_load(f)
        except OSError as e:
            raise OrchestratorError(f"Cannot read {config_file}: {e}", EXIT_USAGE) from e
        except yaml.YAMLError as e:
            raise OrchestratorError(f"Invalid YAML in {config_file}: {e}", EXIT_USAGE) from e

    def load_plan(self, plan_file: Path) -> Dict:
        """
        Load and validate an analysis plan.

        Raises:
            OrchestratorError: if the plan does not match the plan schema
        """
        plan = self.load_config(plan_file)
        with open(SCHEMA_DIR / "analysis-plan.schema.json") as f:
            schema = json.load(f)
        try:
            jsonschema.validate(plan, schema)
        except jsonschema.ValidationError as e:
            path = "/".join(str(p) for p in e.absolute_path) or "<root>"
            raise OrchestratorError(f"Invalid analysis plan {plan_file} at {path}: {e.message}", EXIT_USAGE) from e
        return plan

    def analyze(
        self,
        run_name: str,
        metric: MetricSpec,
        source: Tuple[str, str],
        valence: int,
        mode: Optional[str] = None,
        options: AnalysisOptions = AnalysisOptions(),
        point: Optional[Point] = None,
        parity: Optional[int] = None,
        phi_parity: str = "any",
        workers: int = 1,
        report_path: Optional[Path] = None,
    ) -> BoundReport:
        """Run one full analysis under the live status panel and save its report files."""
        self.ui.set_current_analysis({'name': run_name, 'metric': metric.name, 'valence': valence, 'mode': mode or 'auto'})
        self.ui.add_status(f"Starting {run_name}: {metric.name}, valence {valence}", 'info')

        with Live(self.ui.create_layout(), refresh_per_second=4, console=self.console) as live:
            def on_branch(result: BranchResult) -> None:
                self.ui.add_branch(result)
                level = 'warning' if result.genericity and result.genericity.non_generic_suspected else 'success'
                self.ui.add_status(
                    f"{result.branch.label()}: rank {result.certificate.rank}, bound {result.upper_bound}, extra {result.extra_dim}",
                    level
                )
                live.update(self.ui.create_layout())

            try:
                report = full_analysis(
                    metric,
                    valence,
                    mode=mode,
                    options=options,
                    point=point,
                    parity=parity,
                    phi_parity=phi_parity,
                    workers=workers,
                    source=source,
                    progress=on_branch,
                )
            except Exception as e:
                self.ui.add_status(f"{run_name} failed: {e}", 'error')
                live.update(self.ui.create_layout())
                raise
            self.ui.add_status(f"{run_name}: verdict {report.verdict}", 'success')
            live.update(self.ui.create_layout())

        run_dir = self.report_generator.save_run(run_name, report)
        if report_path is not None:
            self.report_generator.copy_report(run_dir, report_path)
        logger.info(f"Saved {run_name} results to {run_dir}")
        return report

    @staticmethod
    def check_expectations(report: BoundReport, expect: Dict) -> List[str]:
        """Differences between a report and the expected values of a plan run."""
        failures = []
        data = report.to_dict()
        for key in ("total_upper_bound", "total_extra_dim", "trivials_expected"):
            if key in expect and expect[key] != data[key]:
                failures.append(f"{key}: expected {expect[key]}, got {data[key]}")
        if "verdict" in expect and expect["verdict"] != data["verdict"]["kind"]:
            failures.append(f"verdict: expected {expect['verdict']}, got {data['verdict']['kind']}")
        branches = {b["branch"]: b for b in data["branches"]}
        for label, values in expect.get("branches", {}).items():
            if label not in branches:
                failures.append(f"branch {label}: not analyzed")
                continue
            for key, value in values.items():
                actual = branches[label]["counts"].get(key, branches[label].get(key))
                if actual != value:
                    failures.append(f"{label}.{key}: expected {value}, got {actual}")
        return failures

    def run_plan(self, plan_file: Path, workers: Optional[int] = None) -> List[Dict]:
        """
        Execute every run of an analysis plan and check its expectations.

        Raises:
            OrchestratorError: if any expectation fails (after all runs finished)
        """
        logger.info("=" * 60)
        logger.info("RUNNING ANALYSIS PLAN")
        logger.info("=" * 60)

        plan = self.load_plan(plan_file)
        defaults = plan.get('defaults', {})
        self.ui.show_configuration({
            "Experiment ID": self.experiment_id,
            "Plan": plan['name'],
            "Runs": len(plan['runs']),
            "Results Directory": str(self.experiment_dir),
        })

        outcomes = []
        for run in plan['runs']:
            settings = {**defaults, **run}
            metric_file = settings.get('metric_file')
            metric, source = resolve_metric(
                settings.get('metric'),
                (PROJECT_ROOT / metric_file) if metric_file else None,
            )
            valence = settings['valence']
            offset = settings['prolong'] - valence if 'prolong' in settings else settings.get('prolong_offset', 0)
            options = AnalysisOptions(
                prolong_offset=offset,
                gauge_fix=settings.get('gauge_fix', True),
                seed=settings.get('seed', 0),
                exact=settings.get('exact', False),
            )
            report = self.analyze(
                run['name'],
                metric,
                source,
                valence,
                mode=settings.get('mode'),
                options=options,
                point=parse_point_option(settings.get('point')),
                parity=settings.get('parity'),
                phi_parity=settings.get('phi_parity', 'any'),
                workers=workers or settings.get('workers', 1),
            )
            failures = self.check_expectations(report, run.get('expect', {}))
            for failure in failures:
                logger.error(f"{run['name']}: {failure}")
            outcomes.append({
                'name': run['name'],
                'metric': metric.name,
                'valence': valence,
                'total_upper_bound': report.total_upper_bound,
                'verdict': str(report.verdict),
                'expectations': 'n/a' if 'expect' not in run else ('pass' if not failures else 'fail'),
                'failures': failures,
            })

        summary = {'plan': plan['name'], 'description': plan.get('description', ''), 'runs': outcomes}
        self.report_generator.generate_json_export(summary, self.experiment_dir / "plan_summary.json")
        self.report_generator.create_report_package(summary)

        failed = [o['name'] for o in outcomes if o['expectations'] == 'fail']
        if failed:
            raise OrchestratorError(f"Expectations failed for: {', '.join(failed)}")
        logger.info(f"Plan {plan['name']} finished: {len(outcomes)} run(s)")
        return outcomes

    def generate_report(self) -> Path:
        """Regenerate overview and HTML report from the saved run reports."""
        summary_file = self.experiment_dir / "plan_summary.json"
        summary = json.loads(summary_file.read_text()) if summary_file.exists() else None
        report_file = self.report_generator.create_report_package(summary)
        logger.info("=" * 60)
        logger.info("REPORT GENERATED")
        logger.info(f"  HTML:     {report_file}")
        logger.info(f"  Overview: {self.experiment_dir / 'overview.md'}")
        logger.info("=" * 60)
        return report_file

    @staticmethod
    def resolve_experiment_id(experiment_id: str, results_dir: Optional[Path] = None) -> str:
        """Resolve experiment ID, handling 'latest' shortcut"""
        results_dir = results_dir or RESULTS_DIR
        if experiment_id == "latest":
            latest_link = results_dir / "latest"
            if not latest_link.exists():
                raise OrchestratorError("No experiments found")
            return latest_link.resolve().name
        if not (results_dir / experiment_id).is_dir():
            raise OrchestratorError(f"Experiment {experiment_id} not found")
        return experiment_id

    @staticmethod
    def list_experiments(results_dir: Optional[Path] = None) -> List[str]:
        """List all experiments with timestamps"""
        results_dir = results_dir or RESULTS_DIR
        experiments = sorted(
            [d for d in results_dir.iterdir() if d.is_dir() and d.name.startswith("exp-")] if results_dir.exists() else [],
            key=lambda x: x.stat().st_mtime,
            reverse=True
        )
        if not experiments:
            print("No experiments found.")
            return []

        latest_link = results_dir / "latest"
        print("\nAvailable Experiments:")
        print("=" * 60)
        for exp_dir in experiments:
            timestamp = datetime.fromtimestamp(exp_dir.stat().st_mtime)
            is_latest = " (latest)" if latest_link.exists() and latest_link.resolve() == exp_dir.resolve() else ""
            print(f"{exp_dir.name:30} {timestamp.strftime('%Y-%m-%d %H:%M:%S')}{is_latest}")
        print("=" * 60)
        return [d.name for d in experiments]


def print_counts(valence: int, parity: int, prolong: Optional[int], phi_parity: str) -> Dict[str, int]:
    """Equation and unknown counts of a branch without building it."""
    order = valence if prolong is None else prolong
    counts = {
        'meqns': meqns(valence, parity, order, phi_parity),
        'nvars': nvars(valence, parity, order, phi_parity),
    }
    print(f"d={valence} e={parity} M={order} phi={phi_parity}: meqns={counts['meqns']} nvars={counts['nvars']}")
    return counts


def run_analyze(args) -> int:
    """The 'analyze' command; returns the exit status for the verdict."""
    metric, source = resolve_metric(args.metric, args.metric_file)
    point = parse_point_option(args.point)
    if args.mode == "single-branch" and args.parity is None:
        raise OrchestratorError("--mode single-branch needs --parity", EXIT_USAGE)
    options = AnalysisOptions(
        prolong_offset=(args.prolong - args.valence) if args.prolong is not None else 0,
        gauge_fix=not args.no_gauge_fix,
        seed=args.seed,
        exact=args.exact,
        show_kernel=args.show_kernel,
        dump_dir=str(args.dump_matrix) if args.dump_matrix else None,
    )

    orchestrator = AnalysisOrchestrator(args.experiment_id)
    try:
        run_name = f"{metric.name}-d{args.valence}"
        report = orchestrator.analyze(
            run_name,
            metric,
            source,
            args.valence,
            mode=args.mode,
            options=options,
            point=point,
            parity=args.parity,
            phi_parity=args.phi_parity,
            workers=args.workers,
            report_path=args.report,
        )
        orchestrator.report_generator.create_report_package()
        orchestrator.ui.show_report(report)
        if args.show_kernel:
            orchestrator.ui.show_kernels(report)
    finally:
        orchestrator.close()

    suspected = [b.branch.label() for b in report.branches if b.genericity and b.genericity.non_generic_suspected]
    if suspected and args.fail_on_nongeneric:
        raise NonGenericPointError(f"Nullity depends on the point for {', '.join(suspected)}")
    if report.verdict.kind == VERDICT_INCONCLUSIVE:
        return EXIT_INCONCLUSIVE
    return EXIT_OK


def main(argv=None) -> int:
    """Main entry point"""
    from cli import parse_args

    args = parse_args(argv)
    if args is None:
        return EXIT_USAGE
    if args.verbose:
        logging.getLogger().setLevel(logging.DEBUG)

    try:
        if args.command == "list":
            AnalysisOrchestrator.list_experiments()
            return EXIT_OK

        if args.command == "counts":
            print_counts(args.valence, args.parity, args.prolong, args.phi_parity)
            return EXIT_OK

        if args.command == "export-metric":
            text = format_metric_file(builtin(args.metric))
            if args.output:
                args.output.write_text(text)
                logger.info(f"Wrote metric {args.metric} to {args.output}")
            else:
                sys.stdout.write(text)
            return EXIT_OK

        if args.command == "analyze":
            return run_analyze(args)

        experiment_id = getattr(args, "experiment_id", None)
        if experiment_id and args.command == "report":
            experiment_id = AnalysisOrchestrator.resolve_experiment_id(experiment_id)

        orchestrator = AnalysisOrchestrator(experiment_id)
        try:
            if args.command == "run":
                orchestrator.run_plan(args.plan, args.workers)
            elif args.command == "report":
                orchestrator.generate_report()
        finally:
            orchestrator.close()
        return EXIT_OK

    except OrchestratorError as e:
        logger.error(f"Orchestrator error: {e}")
        return e.exit_code
    except (MetricError, ExpressionParseError) as e:
        logger.error(f"Metric error: {e}")
        return exit_code_for(e)
    except ZeroDenominatorError as e:
        logger.error(f"Point not admissible: {e}")
        return exit_code_for(e)
    except (NonGenericPointError, InternalConsistencyError, BranchError) as e:
        logger.error(f"{type(e).__name__}: {e}")
        return exit_code_for(e)
    except Exception as e:
        logger.exception(f"Unexpected error: {e}")
        return EXIT_UNEXPECTED


if __name__ == "__main__":
    sys.exit(main())
