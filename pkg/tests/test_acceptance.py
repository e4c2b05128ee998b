"""Acceptance gate: every shipped criterion at its stated tolerance.

Each criterion prints one PASS/FAIL line with its measured detail, so a
verbose test run doubles as the verification report. The same checks are
reachable as `cycle-census verify`.
"""

import pytest

from cycle_census import acceptance

CRITERION_IDS = [cid for cid, _, _ in acceptance.CRITERIA]


def test_criterion_ids_are_unique_and_described():
    assert len(set(CRITERION_IDS)) == len(CRITERION_IDS) == 11
    for _, description, _ in acceptance.CRITERIA:
        assert description


@pytest.mark.parametrize("cid", CRITERION_IDS)
def test_acceptance(cid, capsys):
    passed, detail = acceptance.run_criterion(cid)
    with capsys.disabled():
        print(f"\n{'PASS' if passed else 'FAIL'} {cid}: {detail}")
    assert passed, f"{cid}: {detail}"
