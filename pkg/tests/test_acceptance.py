"""Full-size acceptance runs, one per criterion.

Each test prints a single ``PASS/FAIL criterion k`` line followed by the
individual checks, then asserts. Runtime budgets are checked alongside the
statistical tolerances. These runs take several minutes in total; skip them
with ``-m "not slow"``.
"""

import time

import pytest

from rrtperc.experiments import preset, run_replicated
from rrtperc.stats import Check

CRITERIA = [
    (1, "splitting", 60),
    (2, "generator-equivalence", 300),
    (3, "root-cluster", 600),
    (4, "largest-clusters", 600),
    (5, "coupling", 120),
    (6, "components", 900),
    (7, "rank-vs-generation", 120),
    (8, "limit-selfchecks", 60),
    (9, "martingale", 300),
    (10, "joint-marginal", None),
]


@pytest.mark.slow
@pytest.mark.parametrize("number,name,budget", CRITERIA, ids=[f"criterion-{c[0]}-{c[1]}" for c in CRITERIA])
def test_criterion(number, name, budget, capsys):
    start = time.perf_counter()
    report = run_replicated(preset(name))
    elapsed = time.perf_counter() - start
    if budget is not None:
        report.checks.append(Check.below("runtime seconds", elapsed, budget))
    failed = [c.name for c in report.checks if not c.passed]
    verdict = "PASS" if report.passed else "FAIL"
    with capsys.disabled():
        print(f"\n{verdict} criterion {number} ({name}, {elapsed:.0f}s)" + (f": failed {failed}" if failed else ""))
        for line in report.summary_lines():
            print(f"    {line}")
    assert report.passed, f"criterion {number} failed: {failed}"
