import time
from contextlib import contextmanager

ACCEPTANCE_LINES = []


@contextmanager
def criterion(number, title, budget=None):
    """Record a PASS/FAIL line for one acceptance criterion, enforcing a runtime budget."""
    start = time.perf_counter()
    status, detail = "FAIL", ""
    try:
        yield
        elapsed = time.perf_counter() - start
        if budget is not None and elapsed >= budget:
            detail = f"over budget ({elapsed:.2f}s >= {budget}s)"
            raise AssertionError(f"criterion {number} took {elapsed:.2f}s, budget {budget}s")
        status = "PASS"
    except BaseException as exc:
        detail = detail or f"{type(exc).__name__}: {exc}"[:200]
        raise
    finally:
        elapsed = time.perf_counter() - start
        line = f"criterion {number:>2} {status} ({elapsed:.2f}s) {title}"
        if detail:
            line += f" :: {detail}"
        ACCEPTANCE_LINES.append(line)
        print(line)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
