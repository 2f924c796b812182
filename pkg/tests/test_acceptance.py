"""Acceptance criteria, each run at its stated tolerance.

Every criterion prints one PASS/FAIL line; the lines are repeated in the
pytest terminal summary.
"""
import pytest

from petalflow.verify import CRITERIA, format_report, verify_suite

LINES = []


@pytest.fixture(scope="module")
def report():
    return {e["id"]: e for e in verify_suite()}


@pytest.mark.parametrize("cid", sorted(CRITERIA))
def test_criterion(report, cid):
    entry = report[cid]
    line = format_report([entry])
    LINES.append(line)
    print(line)
    assert not entry["skipped"], entry["detail"]
    assert entry["passed"], f"{line}\n{entry['detail']}"


def test_suite_runtime(report):
    total = sum(e["seconds"] for e in report.values())
    line = f"[{'PASS' if total < 60 else 'FAIL'}] suite runtime {total:.1f}s (limit 60s)"
    LINES.append(line)
    print(line)
    assert total < 60
