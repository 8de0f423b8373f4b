from stableqa.report import find_reports, load_report, render_report, save_report
from stableqa.types import EvalReport, InstanceRecord, RunConfig


def make_report(task="stepgame", k=2, created="2023-05-01T10:00:00"):
    config = RunConfig(task=task, k=k)
    records = [
        InstanceRecord(index=0, source="qa2_test.json:0", gold="left", predicted="left", correct=True),
        InstanceRecord(
            index=1,
            source="qa2_test.json:1",
            gold="right",
            predicted="left",
            attribution="dataset-error-candidate",
            detail="derived 'left', gold 'right'",
        ),
    ]
    return EvalReport(
        task=task,
        config=config,
        config_hash=config.config_hash,
        records=records,
        accuracy=0.5,
        histogram={"dataset-error-candidate": 1},
        created=created,
    )


def test_save_and_load(tmp_path):
    report = make_report()
    folder = save_report(report, tmp_path)
    assert folder.name == f"stepgame-{report.config_hash[:8]}"
    assert {p.name for p in folder.iterdir()} == {"records.jsonl", "summary.json", "report.md"}
    again = load_report(folder)
    assert again.config == report.config
    assert again.records[1].attribution == "dataset-error-candidate"
    assert again.accuracy == 0.5


def test_find_reports_orders_by_creation(tmp_path):
    save_report(make_report(k=3, created="2023-05-02T10:00:00"), tmp_path)
    save_report(make_report(k=1, created="2023-05-01T10:00:00"), tmp_path)
    assert [r.config.k for r in find_reports(tmp_path)] == [1, 3]


def test_render_lists_hops_and_mismatches():
    text = render_report([make_report(k=1), make_report(task="babi_1", k=None)])
    assert "## StepGame accuracy by hops" in text
    assert "| 1 | oracle | 2 | 50.0% |" in text
    assert "`qa2_test.json:1` (stepgame): **dataset-error-candidate**, derived 'left', gold 'right'" in text
    assert "| babi_1 | oracle | internal | 2 | 1 | 50.0% |" in text


def test_render_without_stepgame_has_no_hop_table():
    assert "by hops" not in render_report([make_report(task="babi_1", k=None)])
