#!/usr/bin/env python3
"""
Report Generation Module
Writes deterministic JSON reports, CSV branch tables, a Markdown overview and an
HTML report for analysis experiments
"""

import json
import logging
import shutil
from datetime import datetime
from pathlib import Path
from typing import Dict, List, Optional, Tuple

import jsonschema
import pandas as pd
from jinja2 import Environment, FileSystemLoader

from killing.pipeline import BoundReport

logger = logging.getLogger(__name__)

# Template and schema directories
TEMPLATE_DIR = Path(__file__).parent.parent / "reporting" / "templates"
SCHEMA_DIR = Path(__file__).parent.parent / "config" / "schema"

REPORT_FILE = "report.json"
TIMINGS_FILE = "timings.json"
BRANCHES_FILE = "branches.csv"

CSV_COLUMNS = [
    'branch', 'multiplicity', 'point', 'prolongation_order', 'meqns', 'nvars', 'rows_nonzero',
    'rows_after_elim', 'cols_after_elim', 'eliminated_cols', 'gauge_fixed_cols', 'rank', 'method',
    'nullity', 'upper_bound', 'trivial_span_dim', 'trivials_in_branch', 'extra_dim', 'non_generic_suspected',
]


class ReportGenerator:
    """Generate experiment reports"""

    def __init__(self, experiment_dir: Path, experiment_id: Optional[str] = None):
        """Initialize report generator"""
        self.experiment_dir = experiment_dir
        self.experiment_id = experiment_id or experiment_dir.name
        # Only load Jinja2 templates if template directory exists
        if TEMPLATE_DIR.exists():
            self.env = Environment(loader=FileSystemLoader(str(TEMPLATE_DIR)), autoescape=True)
        else:
            self.env = None
            logger.warning(f"Template directory not found: {TEMPLATE_DIR}")
        with open(SCHEMA_DIR / "report.schema.json") as f:
            self.report_schema = json.load(f)

    def validate_report(self, report: Dict) -> None:
        """
        Raises:
            jsonschema.ValidationError: if the report does not match the report schema
        """
        jsonschema.validate(report, self.report_schema)

    def generate_json_export(self, data: Dict, output_file: Path) -> None:
        """Write JSON with sorted keys so equal content gives identical files."""
        logger.info(f"Generating JSON export: {output_file}")
        with open(output_file, 'w') as f:
            json.dump(data, f, indent=2, sort_keys=True)
            f.write("\n")

    def generate_csv_export(self, report: Dict, output_file: Path) -> None:
        """Export the branch table to CSV"""
        logger.info(f"Generating CSV export: {output_file}")
        df = pd.DataFrame(branch_rows(report), columns=CSV_COLUMNS)
        df.to_csv(output_file, index=False)

    def save_run(self, run_name: str, report: BoundReport) -> Path:
        """Write report.json, timings.json and branches.csv of one run into its own directory."""
        run_dir = self.experiment_dir / run_name
        run_dir.mkdir(parents=True, exist_ok=True)
        data = report.to_dict()
        self.validate_report(data)
        self.generate_json_export(data, run_dir / REPORT_FILE)
        self.generate_json_export(report.timings(), run_dir / TIMINGS_FILE)
        self.generate_csv_export(data, run_dir / BRANCHES_FILE)
        return run_dir

    def copy_report(self, run_dir: Path, target: Path) -> Path:
        """Copy a run's report to a user path: a .json file, or a directory receiving all run files."""
        if target.suffix == ".json":
            target.parent.mkdir(parents=True, exist_ok=True)
            shutil.copy(run_dir / REPORT_FILE, target)
            return target
        target.mkdir(parents=True, exist_ok=True)
        for name in (REPORT_FILE, TIMINGS_FILE, BRANCHES_FILE):
            shutil.copy(run_dir / name, target / name)
        return target / REPORT_FILE

    def load_runs(self) -> List[Tuple[str, Dict]]:
        """Saved run reports of the experiment, sorted by run name."""
        runs = []
        for report_file in sorted(self.experiment_dir.glob(f"*/{REPORT_FILE}")):
            with open(report_file) as f:
                runs.append((report_file.parent.name, json.load(f)))
        return runs

    def generate_overview_markdown(self, runs: List[Tuple[str, Dict]], plan_summary: Optional[Dict] = None) -> str:
        """
        Generate overview.md with a results table per run and the file index.

        Args:
            runs: (run name, report) pairs
            plan_summary: Outcome of a plan run, if any

        Returns:
            Markdown content as string
        """
        lines = [f"# Experiment Overview: {self.experiment_id}", ""]
        lines.append(f"Generated: {datetime.now().strftime('%Y-%m-%d %H:%M:%S')}")
        lines.append("")

        if plan_summary:
            lines.append(f"## Plan: {plan_summary['plan']}")
            lines.append("")
            if plan_summary.get('description'):
                lines.append(plan_summary['description'])
                lines.append("")
            lines.append("| Run | Metric | d | Bound | Verdict | Expectations |")
            lines.append("|-----|--------|---|-------|---------|--------------|")
            for outcome in plan_summary['runs']:
                lines.append(
                    f"| {outcome['name']} | {outcome['metric']} | {outcome['valence']} | "
                    f"{outcome['total_upper_bound']} | {outcome['verdict']} | {outcome['expectations']} |"
                )
            lines.append("")

        for name, report in runs:
            lines.append(f"## {name}")
            lines.append("")
            lines.append(
                f"Metric `{report['metric']['name']}`, valence {report['valence']}, mode {report['mode']}: "
                f"total bound **{report['total_upper_bound']}**, trivial {report['trivials_expected']}, "
                f"verdict **{verdict_text(report)}**"
            )
            lines.append("")
            lines.append("| Branch | x | Eqns | Vars | Cols | Rank | Nullity | Bound | Extra |")
            lines.append("|--------|---|------|------|------|------|---------|-------|-------|")
            for b in report['branches']:
                lines.append(
                    f"| {b['branch']} | {b['multiplicity']} | {b['counts']['meqns']} | {b['counts']['nvars']} | "
                    f"{b['counts']['cols_after_elim']} | {b['rank']} | {b['nullity']} | {b['upper_bound']} | {b['extra_dim']} |"
                )
            lines.append("")
            lines.append(f"Files: [{REPORT_FILE}]({name}/{REPORT_FILE}), [{BRANCHES_FILE}]({name}/{BRANCHES_FILE}), "
                         f"[{TIMINGS_FILE}]({name}/{TIMINGS_FILE})")
            lines.append("")

        return "\n".join(lines)

    def generate_html_report(self, runs: List[Tuple[str, Dict]], plan_summary: Optional[Dict] = None) -> str:
        """Generate HTML report using Jinja2 templates"""
        if not self.env:
            raise RuntimeError("Jinja2 templates not available")
        logger.info("Generating HTML report")
        context = {
            'generated_at': datetime.now().strftime('%Y-%m-%d %H:%M:%S'),
            'experiment_id': self.experiment_id,
            'runs': [{'name': name, 'report': report, 'verdict': verdict_text(report)} for name, report in runs],
            'plan_summary': plan_summary,
        }
        template = self.env.get_template('report.html')
        return template.render(**context)

    def create_report_package(self, plan_summary: Optional[Dict] = None) -> Path:
        """Write overview.md and report.html for every saved run; returns the HTML path."""
        runs = self.load_runs()
        (self.experiment_dir / "overview.md").write_text(self.generate_overview_markdown(runs, plan_summary))
        html_file = self.experiment_dir / "report.html"
        if self.env:
            html_file.write_text(self.generate_html_report(runs, plan_summary))
        return html_file


def verdict_text(report: Dict) -> str:
    verdict = report['verdict']
    if verdict['kind'] == 'extra-candidates':
        return f"extra-candidates({verdict['extra']})"
    return verdict['kind']


def branch_rows(report: Dict) -> List[Dict]:
    """One flat row per branch of a report."""
    rows = []
    for b in report['branches']:
        rows.append({
            'branch': b['branch'],
            'multiplicity': b['multiplicity'],
            'point': b['point'],
            'prolongation_order': b['prolongation_order'],
            **{key: b['counts'][key] for key in (
                'meqns', 'nvars', 'rows_nonzero', 'rows_after_elim', 'cols_after_elim', 'eliminated_cols', 'gauge_fixed_cols'
            )},
            'rank': b['rank'],
            'method': b['certificate']['method'],
            'nullity': b['nullity'],
            'upper_bound': b['upper_bound'],
            'trivial_span_dim': b['trivial_span_dim'],
            'trivials_in_branch': b['trivials_in_branch'],
            'extra_dim': b['extra_dim'],
            'non_generic_suspected': b.get('genericity', {}).get('non_generic_suspected', False),
        })
    return rows
