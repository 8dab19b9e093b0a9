import io

from rich.console import Console

from tui import AnalysisUI, branch_table


def _ui():
    return AnalysisUI("exp-tui", console=Console(file=io.StringIO(), width=200))


def test_status_log_and_layout(flat_report):
    ui = _ui()
    ui.set_current_analysis({'name': 'flat-d1', 'metric': 'flat_cyl', 'valence': 1, 'mode': 'auto'})
    ui.add_status("Starting flat-d1")
    for result in flat_report.branches:
        ui.add_branch(result)
    assert ui.status_messages[0]['time'] == "00:00"
    assert len(ui.finished_branches) == 2
    ui.console.print(ui.create_layout())
    ui.set_current_analysis(None)
    assert ui.finished_branches == []


def test_report_and_kernels_are_printed(flat_report):
    ui = _ui()
    ui.show_report(flat_report)
    ui.show_kernels(flat_report)
    output = ui.console.file.getvalue()
    assert "extra-candidates(1)" in output
    assert "S1" in output
    assert "p_y" in output


def test_branch_table_has_a_row_per_branch(flat_report):
    assert branch_table(flat_report.branches).row_count == 2
