"""
Terminal UI components for the Killing tensor analysis orchestrator.
"""

from datetime import datetime
from typing import Dict, List, Optional

from rich import box
from rich.console import Console
from rich.layout import Layout
from rich.panel import Panel
from rich.table import Table
from rich.text import Text

from killing.pipeline import VERDICT_EXTRA, VERDICT_INCONCLUSIVE, VERDICT_NONE, BoundReport, BranchResult

VERDICT_STYLES = {
    VERDICT_NONE: "bold green",
    VERDICT_EXTRA: "bold yellow",
    VERDICT_INCONCLUSIVE: "bold red",
}


class AnalysisUI:
    """Manages terminal UI for the orchestrator."""

    def __init__(self, experiment_id: str, console: Optional[Console] = None):
        self.console = console or Console()
        self.experiment_id = experiment_id
        self.status_messages: List[Dict[str, str]] = []
        self.current_analysis: Optional[Dict] = None
        self.finished_branches: List[BranchResult] = []
        self._start_time: Optional[datetime] = None

    def add_status(self, message: str, level: str = 'info') -> None:
        """Add a status message to the log."""
        now = datetime.now()
        if self._start_time is None:
            self._start_time = now
        elapsed = now - self._start_time
        minutes, seconds = divmod(int(elapsed.total_seconds()), 60)
        self.status_messages.append({
            'time': f"{minutes:02d}:{seconds:02d}",
            'message': message,
            'level': level
        })

    def set_current_analysis(self, analysis: Optional[Dict]) -> None:
        self.current_analysis = analysis
        self.finished_branches = []

    def add_branch(self, result: BranchResult) -> None:
        self.finished_branches.append(result)

    def create_layout(self) -> Layout:
        """Split-pane layout: analysis info and finished branches on top, status log below."""
        layout = Layout()
        layout.split_column(
            Layout(name="top", ratio=1),
            Layout(name="bottom", ratio=1)
        )
        layout["top"].update(self._create_metadata_panel())
        layout["bottom"].update(self._create_status_panel())
        return layout

    def _create_metadata_panel(self) -> Panel:
        info = Table(show_header=False, box=None, padding=(0, 1))
        info.add_column("Key", style="bold cyan", width=18)
        info.add_column("Value", style="white")
        info.add_row("Experiment ID", self.experiment_id)
        if self.current_analysis:
            for key in ('name', 'metric', 'valence', 'mode'):
                info.add_row(key.capitalize(), str(self.current_analysis.get(key, 'N/A')))

        content = Table.grid()
        content.add_row(info)
        if self.finished_branches:
            content.add_row("")
            content.add_row(branch_table(self.finished_branches))

        return Panel(content, title="[bold cyan]Analysis[/bold cyan]", border_style="cyan", padding=(1, 2))

    def _create_status_panel(self) -> Panel:
        if not self.status_messages:
            content = Text("Waiting for analysis to start...", style="dim italic")
        else:
            style_map = {
                'info': 'white',
                'success': 'green',
                'warning': 'yellow',
                'error': 'red'
            }
            content = Text()
            for msg in self.status_messages[-20:]:
                content.append(f"[{msg['time']}] ", style="dim")
                content.append(f"{msg['message']}\n", style=style_map.get(msg['level'], 'white'))

        return Panel(content, title="[bold green]Status Log[/bold green]", border_style="green", padding=(1, 2))

    def show_configuration(self, rows: Dict[str, str]) -> None:
        table = Table(show_header=False, box=box.ROUNDED, border_style="cyan")
        table.add_column("Key", style="bold cyan")
        table.add_column("Value", style="white")
        for key, value in rows.items():
            table.add_row(key, str(value))
        self.console.print()
        self.console.print(Panel(table, title="[bold cyan]Experiment Configuration[/bold cyan]", border_style="cyan"))
        self.console.print()

    def show_report(self, report: BoundReport) -> None:
        """Print the branch table and the verdict of a finished analysis."""
        self.console.print(branch_table(report.branches))
        summary = Table(show_header=False, box=box.SIMPLE)
        summary.add_column("Key", style="bold")
        summary.add_column("Value")
        summary.add_row("Total upper bound", str(report.total_upper_bound))
        summary.add_row("Trivial integrals", str(report.trivials_expected))
        summary.add_row("Additional (bound)", str(report.total_extra_dim))
        summary.add_row("Verdict", Text(str(report.verdict), style=VERDICT_STYLES.get(report.verdict.kind, "bold")))
        self.console.print(summary)

    def show_kernels(self, report: BoundReport) -> None:
        for result in report.branches:
            if not result.kernel_order0:
                continue
            self.console.print(f"[bold]{result.branch.label()}[/bold] kernel at ({result.to_dict()['point']}):")
            for n, vector in enumerate(result.kernel_order0, start=1):
                self.console.print(f"  [{n}] {vector}")


def branch_table(results) -> Table:
    table = Table(box=box.ROUNDED, title="Branches", title_justify="left")
    for column in ("Branch", "x", "M", "Eqns", "Vars", "Cols", "Rank", "Method", "Nullity", "Gauge", "Bound", "Trivial", "Extra", "Generic"):
        table.add_column(column, justify="right" if column not in ("Branch", "Method") else "left")
    for r in results:
        generic = "-" if r.genericity is None else ("suspect" if r.genericity.non_generic_suspected else "ok")
        table.add_row(
            r.branch.label(),
            str(r.branch.multiplicity),
            str(r.order),
            str(r.counts.meqns),
            str(r.counts.nvars),
            str(r.counts.cols_after_elim),
            str(r.certificate.rank),
            r.certificate.method,
            str(r.nullity),
            str(r.counts.gauge_fixed_cols),
            str(r.upper_bound),
            str(r.trivial_span_dim),
            str(r.extra_dim),
            generic,
        )
    return table
