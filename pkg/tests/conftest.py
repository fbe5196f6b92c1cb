import sys
import json

import pytest

from txlife.ingest import RecordBatch, TransactionRecord, parse_records


def rec(tx, ts, a, b, value=1, project="P", token=None):
    return TransactionRecord(tx, ts, a, b, value, project, token)


def ndjson_line(**kw):
    base = {"tx_id": "a", "timestamp": 0, "from_addr": "0x1", "to_addr": "0x2",
            "value": "5", "project_id": "P"}
    base.update(kw)
    return json.dumps(base)


@pytest.fixture
def two_day_batch():
    """3 edges on day 100 (A->B, A->B, B->C) and 1 edge on day 102."""
    d = 86400
    return RecordBatch.from_records([
        rec("t1", 100 * d + 5, "A", "B", 5),
        rec("t2", 100 * d + 6, "A", "B", 3),
        rec("t3", 100 * d + 7, "B", "C", 1),
        rec("t4", 102 * d + 1, "C", "A", 2),
    ], "test")


@pytest.fixture
def parse():
    def _parse(text, fmt="ndjson", **kw):
        return parse_records(text.encode(), fmt, **kw)
    return _parse


def pytest_terminal_summary(terminalreporter):
    mod = sys.modules.get("test_acceptance") or sys.modules.get("tests.test_acceptance")
    results = getattr(mod, "RESULTS", None)
    if not results:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(results):
        terminalreporter.write_line(results[n])
