"""The shipped golden tables, re-derived independently where possible."""

import math

import numpy as np
import pytest

from critflow import golden
from critflow.rankone import RankOneSpace, hd_bound


def table_reference(family, n, delta):
    """Hand transcription of the rank-one tables, independent of the JSON file."""
    if family == "real":
        return math.floor(delta) + 1 if delta <= n - 1 else None
    if family == "complex":
        if delta < 2 * n - 2:
            return math.floor(delta) + 1
        if delta < 2 * n:
            return 2 * n - 1
        return 2 * n if delta == 2 * n else None
    if family == "quaternionic":
        if delta < 4 * n - 4:
            return math.floor(delta) + 1
        if delta < 4 * n - 2:
            return 4 * n - 3
        if delta < 4 * n:
            return 4 * n - 2
        return 4 * n if delta == 4 * n + 2 else None
    if delta < 8:
        return math.floor(delta) + 1
    for lo, val in ((8, 9), (10, 10), (12, 11), (14, 12)):
        if lo <= delta < lo + 2:
            return val
    return 16 if delta == 22 else None


@pytest.mark.parametrize("family,ns", [("real", range(2, 9)), ("complex", range(2, 5)),
                                       ("quaternionic", (2, 3)), ("cayley", (2,))])
def test_json_table_matches_reference(family, ns):
    pieces = golden.load("rank_one_tables.json")["families"][family]["pieces"]
    for n in ns:
        for d in np.arange(0, 24, 0.25):
            assert golden.table_value(pieces, n, float(d)) == table_reference(family, n, float(d))


def test_sweep_covers_endpoints():
    pieces = golden.load("rank_one_tables.json")["families"]["quaternionic"]["pieces"]
    grid = golden.sweep(pieces, 2)
    assert 0.0 in grid and 10.0 in grid and 8.0 not in grid and 9.0 not in grid
    assert hd_bound(RankOneSpace("quaternionic", 2), 10.0) == 8


def test_all_golden_checks_pass():
    results = golden.run_all()
    assert results == {name: [] for name in golden.GOLDEN_FILES}


def test_corrupted_table_is_reported():
    data = golden.load("higher_rank.json")
    data["s_rho_type_A"]["5"] = 3
    bad = golden.check_higher_rank(data)
    assert len(bad) == 1 and "A5" in bad[0]
