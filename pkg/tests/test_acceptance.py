"""One test per acceptance criterion; each records a PASS/FAIL line with its residual.

The lines are printed in the terminal summary (see conftest.py).  Running this
file directly prints them without pytest.
"""
import time

import pytest

from bergtilde import acceptance

LINES = []


def _run(check):
    return check(0) if "seed" in check.__code__.co_varnames else check()


@pytest.mark.parametrize("check", acceptance.CHECKS, ids=lambda c: c.__name__)
def test_criterion(check):
    result = _run(check)
    LINES.append(result.line())
    print(result.line())
    assert result.passed, result.detail


def test_norm_identity_runtime():
    start = time.perf_counter()
    acceptance.norm_identity(0)
    seconds = time.perf_counter() - start
    line = f"[{'PASS' if seconds < 10 else 'FAIL'}] 1. norm identity runtime: {seconds:.2f} s (limit 10 s)"
    LINES.append(line)
    assert seconds < 10


def test_full_report_runtime():
    start = time.perf_counter()
    results = acceptance.run_all(0)
    seconds = time.perf_counter() - start
    ok = seconds < 300 and all(r.passed for r in results)
    LINES.append(f"[{'PASS' if ok else 'FAIL'}] full report: {seconds:.1f} s (limit 300 s)")
    assert ok


if __name__ == "__main__":
    for check in acceptance.CHECKS:
        print(_run(check).line())
