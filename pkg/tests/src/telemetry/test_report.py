import csv
import io

from src.models import CompletionRecord, IoOp, LatencyBreakdown, PageType, SubOp, Topology, TransactionPhases, \
    TransactionRecord
from src.telemetry.report import REPORT_COLUMNS, TRANSACTION_COLUMNS, TransactionLog, render_csv, render_human, \
    render_wear_csv, report, write_reports
from src.telemetry.stats import StatsCollector


def sample_report():
    collector = StatsCollector(Topology(channels=1, packages=1, dies=1, planes=1, blocks=4, pages=4))
    for i, size in enumerate((8192, 8192, 65536)):
        collector.accumulate(CompletionRecord(
            request_id=i,
            op=IoOp.WRITE,
            n_bytes=size,
            arrival_tick=i * 1000,
            finish_tick=i * 1000 + 2500,
            device_latency=2500,
            breakdown=LatencyBreakdown(queueing=500, firmware=0, flash=2000),
        ))
    return collector.report()


def test_csv_round_trip():
    rows = list(csv.reader(io.StringIO(render_csv(sample_report()))))

    assert tuple(rows[0]) == REPORT_COLUMNS
    assert rows[1][:3] == ["8192", "W", "2"]
    assert rows[1][3] == "2.500"
    assert rows[2][0] == "65536"


def test_human_contains_every_csv_field():
    stats = sample_report()
    human = render_human(stats)
    for row in csv.reader(io.StringIO(render_csv(stats))):
        for cell in row:
            assert cell in human


def test_report_format_switch():
    stats = sample_report()
    assert report(stats, "csv") == render_csv(stats)
    assert report(stats, "human") == render_human(stats)


def test_report_is_deterministic():
    assert render_csv(sample_report()) == render_csv(sample_report())


def test_write_reports(tmp_path):
    write_reports(sample_report(), tmp_path / "out")
    names = sorted(path.name for path in (tmp_path / "out").iterdir())
    assert names == ["page_types.csv", "report.csv", "summary.csv"]
    summary = (tmp_path / "out" / "summary.csv").read_text()
    assert summary.startswith("metric,value\n")
    assert "write_amplification,1.000" in summary


def test_wear_csv():
    assert render_wear_csv([(0, 3, 1)]) == "block_id,erase_count,invalid_count\n0,3,1\n"


def test_transaction_log():
    stream = io.StringIO()
    log = TransactionLog(stream)
    log.write([TransactionRecord(
        sub_request_id=7,
        op=SubOp.GC_WRITE,
        page_type=PageType.META_CSB,
        channel=1,
        die=3,
        start_tick=10,
        cell_start=510,
        bus_start=110,
        finish_tick=2010,
        phases=TransactionPhases(t_cmd=100, t_bus=400, t_cell=1500),
    )])
    header, row = stream.getvalue().splitlines()

    assert tuple(header.split(",")) == TRANSACTION_COLUMNS
    assert row == "7,1,3,10,2010,100,400,1500,GcWrite,MetaCsb,510,110"
