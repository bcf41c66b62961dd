"""Per-criterion PASS/FAIL summary for the acceptance tests.

Tests tagged ``@pytest.mark.criterion(n)`` are grouped by ``n``; a criterion
passes only when every one of its tests passed.
"""
from collections import defaultdict

import pytest

CRITERIA = {
    1: "closed-form origin values match series sums (1e-8, L=300)",
    2: "negativity thresholds, bisection and the nu ~ eta/2 band (0.08)",
    3: "origin-value sign pattern and monotone rise over the noise levels",
    4: "end-to-end tomography (coefficients < 0.02, threshold within 10%)",
    5: "Fock-basis heralded states match the Gaussian integral (1e-4)",
    6: "heralded state negativity at the origin and its transition",
    7: "property suites",
}

_outcomes = defaultdict(list)
_durations = defaultdict(float)


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    report = outcome.get_result()
    marker = item.get_closest_marker("criterion")
    if marker is None:
        return
    _durations[item.nodeid] += report.duration
    if report.when == "call" or (report.when == "setup" and not report.passed):
        _outcomes[marker.args[0]].append((item.nodeid, item.name, report.passed))


def pytest_terminal_summary(terminalreporter):
    if not _outcomes:
        return
    tr = terminalreporter
    tr.section("acceptance criteria")
    for n, text in CRITERIA.items():
        results = _outcomes.get(n)
        if not results:
            tr.write_line(f"criterion {n}: NOT RUN  {text}")
            continue
        ok = all(passed for _, _, passed in results)
        seconds = sum(_durations[nodeid] for nodeid, _, _ in results)
        line = f"criterion {n}: {'PASS' if ok else 'FAIL'}  {text}  [{len(results)} checks, {seconds:.1f}s]"
        tr.write_line(line)
        for _, name, passed in results:
            if not passed:
                tr.write_line(f"    failed: {name}")
