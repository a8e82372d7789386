import os
import time

from hypothesis import HealthCheck, settings

settings.register_profile(
    "default", max_examples=40, deadline=None,
    suppress_health_check=[HealthCheck.too_slow])
settings.register_profile("thorough", max_examples=400, deadline=None)
settings.load_profile(os.environ.get("HYPOTHESIS_PROFILE", "default"))

# acceptance criteria append "PASS/FAIL ..." lines here (see test_acceptance)
ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[2].rstrip(":"))):
        terminalreporter.write_line(line)
    elapsed = getattr(terminalreporter._session, "_lpai_elapsed", None)
    if elapsed is not None and terminalreporter._session.testscollected > 10:
        ok = elapsed < _SUITE_LIMIT
        terminalreporter.write_line(f"{'PASS' if ok else 'FAIL'} criterion 10 (runtime): "
                                    f"full suite {elapsed:.1f} s (< {_SUITE_LIMIT:.0f} s)")


_SUITE_LIMIT = 30.0


def pytest_sessionstart(session):
    session._lpai_t0 = time.perf_counter()


def pytest_sessionfinish(session, exitstatus):
    elapsed = time.perf_counter() - session._lpai_t0
    session._lpai_elapsed = elapsed
    if ACCEPTANCE_LINES and session.testscollected > 10 and elapsed >= _SUITE_LIMIT:
        session.exitstatus = 1
