"""Run folders on disk and the markdown tables built from them."""
import datetime as dt
from pathlib import Path
from typing import Dict, List, Union

import srsly
from jinja2 import Template
from lazylines import LazyLines

from .constants import ERROR_CATEGORIES, REPORT_TEMPLATE_PATH
from .types import EvalReport, InstanceRecord, RunConfig
from .utils import console

PathLike = Union[str, Path]

RECORDS_FILE = "records.jsonl"
SUMMARY_FILE = "summary.json"
REPORT_FILE = "report.md"


def run_folder(report: EvalReport, root: PathLike) -> Path:
    return Path(root) / f"{report.task}-{report.config_hash[:8]}"


def save_report(report: EvalReport, root: PathLike) -> Path:
    folder = run_folder(report, root)
    folder.mkdir(parents=True, exist_ok=True)
    srsly.write_jsonl(folder / RECORDS_FILE, (r.dict() for r in report.records))
    srsly.write_json(folder / SUMMARY_FILE, report.summary())
    (folder / REPORT_FILE).write_text(render_report([report], title=f"Run {folder.name}"))
    return folder


def load_report(folder: PathLike) -> EvalReport:
    folder = Path(folder)
    summary = srsly.read_json(folder / SUMMARY_FILE)
    records = LazyLines(srsly.read_jsonl(folder / RECORDS_FILE)).map(lambda d: InstanceRecord(**d)).collect()
    return EvalReport(
        task=summary["task"],
        config=RunConfig(**summary["config"]),
        config_hash=summary["config_hash"],
        module_versions=summary.get("module_versions", {}),
        records=records,
        accuracy=summary["accuracy"],
        histogram=summary.get("histogram", {}),
        created=summary.get("created", ""),
    )


def find_reports(root: PathLike) -> List[EvalReport]:
    """Every run under ``root``, oldest first."""
    folders = sorted(p.parent for p in Path(root).glob(f"*/{SUMMARY_FILE}"))
    reports = [load_report(f) for f in folders]
    console.log(f"Found [bold]{len(reports)}[/bold] runs in {root}")
    return sorted(reports, key=lambda r: r.created)


def _row(report: EvalReport) -> Dict:
    return {
        "task": report.task,
        "parser": report.config.parser,
        "solver": report.config.solver,
        "k": report.config.k,
        "total": len(report.records),
        "correct": sum(r.correct for r in report.records),
        "accuracy": report.accuracy,
    }


def render_report(reports: List[EvalReport], title: str = "Evaluation report") -> str:
    """Task accuracy, StepGame accuracy per hop count, error histograms and the mismatches."""
    tasks = [_row(r) for r in reports]
    hops = sorted((row for row in tasks if row["task"] == "stepgame" and row["k"] is not None), key=lambda row: row["k"])
    histograms = [{"task": r.task, "counts": r.histogram} for r in reports if r.histogram]
    mismatches = [
        {"task": r.task, "source": m.source, "attribution": m.attribution or "unattributed", "detail": m.detail}
        for r in reports
        for m in r.mismatches
    ]
    template = Template(REPORT_TEMPLATE_PATH.read_text())
    return template.render(
        title=title,
        today=dt.date.today(),
        reports=reports,
        tasks=tasks,
        hops=hops,
        histograms=histograms,
        categories=ERROR_CATEGORIES,
        mismatches=mismatches,
    )
