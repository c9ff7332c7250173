"""One test per acceptance criterion; each prints a PASS/FAIL line with its detail."""

import pytest

from amalgamkit.acceptance import CRITERIA, DEFAULT_SEED, run_criterion


@pytest.mark.parametrize("criterion", CRITERIA, ids=lambda c: f"{c.number:02d}-{c.name.replace(' ', '-')}")
def test_criterion(criterion, capsys):
    ok, detail = run_criterion(criterion, seed=DEFAULT_SEED)
    with capsys.disabled():
        print(f"\n[{'PASS' if ok else 'FAIL'}] criterion {criterion.number}: {criterion.name}: {detail}")
    assert ok, detail
