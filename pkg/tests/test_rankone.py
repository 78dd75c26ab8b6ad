import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from critflow.rankone import (
    RankOneSpace,
    cheeger_lower,
    critical_index,
    hd_bound,
    holo_trace_check,
    rank_one_report,
    sullivan_lambda0,
)


def test_spectra_and_dims():
    assert RankOneSpace("real", 5).spectrum.tolist() == [0, 1, 1, 1, 1]
    assert RankOneSpace("complex", 2).spectrum.tolist() == [0, 1, 1, 2]
    assert RankOneSpace("quaternionic", 2).spectrum.tolist() == [0] + [1] * 4 + [2] * 3
    assert RankOneSpace("cayley").spectrum.tolist() == [0] + [1] * 8 + [2] * 7
    for fam, n, dim in [("real", 3, 3), ("complex", 3, 6), ("quaternionic", 2, 8), ("cayley", 2, 16)]:
        s = RankOneSpace(fam, n)
        assert s.real_dim == dim == len(s.spectrum)
    with pytest.raises(ValueError):
        RankOneSpace("cayley", 3)
    with pytest.raises(ValueError):
        RankOneSpace("octonionic", 2)
    with pytest.raises(ValueError):
        RankOneSpace("real", 1)


def test_critical_index_examples():
    assert critical_index(RankOneSpace("real", 4), 1.3) == 3
    assert critical_index(RankOneSpace("complex", 2), 2.5) == 4
    for n in (2, 3):
        assert critical_index(RankOneSpace("quaternionic", n), 4 * n + 2) == 4 * n + 1
    with pytest.raises(ValueError):
        critical_index(RankOneSpace("real", 3), -0.5)


def test_hd_bound_examples():
    assert hd_bound(RankOneSpace("cayley"), 13) == 11
    for n in (2, 3):
        assert hd_bound(RankOneSpace("quaternionic", n), 4 * n - 3) == 4 * n - 3
    for n in (2, 3, 4):
        assert hd_bound(RankOneSpace("complex", n), 2 * n) == 2 * n


def test_real_family_is_floor_plus_one():
    for n in range(2, 9):
        s = RankOneSpace("real", n)
        for d in np.arange(0, n - 1 + 1e-9, 0.125):
            assert hd_bound(s, d) == math.floor(d) + 1


@given(st.sampled_from([("real", 5), ("complex", 3), ("quaternionic", 2), ("cayley", 2)]),
       st.floats(0, 30), st.floats(0, 30))
def test_critical_index_monotone(fam_n, a, b):
    s = RankOneSpace(*fam_n)
    lo, hi = sorted((a, b))
    assert critical_index(s, lo) <= critical_index(s, hi)
    if lo > 0:
        assert critical_index(s, lo) >= 2


def test_report_flags():
    q = RankOneSpace("quaternionic", 2)
    assert "excluded by Corlette gap" in rank_one_report(q, 9.0)["flags"]
    assert "edge case not covered by the table" in rank_one_report(q, 8.0)["flags"]
    assert "lattice exponent" in rank_one_report(q, 10.0)["flags"]
    c = RankOneSpace("cayley")
    assert "excluded by Corlette gap" in rank_one_report(c, 20.0)["flags"]
    assert "edge case not covered by the table" in rank_one_report(c, 16.0)["flags"]
    assert rank_one_report(c, 16.0)["hd_bound"] == 13
    assert rank_one_report(RankOneSpace("real", 3), 2.5)["flags"] == ["exceeds volume entropy"]


def test_cheeger_examples():
    assert cheeger_lower(3, 0.5) == 1.5
    assert cheeger_lower(4, 3.5) == 0
    assert cheeger_lower(2, 0) == 1


def test_sullivan_examples():
    assert sullivan_lambda0(3, 0.5) == (1.0, 0.5625)
    assert sullivan_lambda0(3, 1.5)[0] == pytest.approx(0.75)
    assert sullivan_lambda0(5, 4) == (0, 0)
    with pytest.raises(ValueError):
        sullivan_lambda0(3, 2.5)


@given(st.integers(2, 10), st.floats(0, 1))
def test_sullivan_and_cheeger_consistency(n, frac):
    d = frac * (n - 1)
    lam, low = sullivan_lambda0(n, d)
    assert lam >= low - 1e-12
    assert cheeger_lower(n, d) <= 2 * math.sqrt(lam) + 1e-12
    mid = (n - 1) / 2
    assert mid * (n - 1 - mid) == pytest.approx((n - 1) ** 2 / 4, abs=1e-12)


def test_holo_trace_examples():
    for n in (2, 3):
        for d in (0.0, 1.0, 2.5):
            rep = holo_trace_check(n, d, n, num_samples=200)
            assert rep["min_sampled_trace"] == pytest.approx(2 * n - d, abs=1e-9)
    rep = holo_trace_check(4, 1.0, 2, num_samples=500)
    # coordinate planes in lexicographic order; the last avoids line 0
    assert rep["coordinate_traces"][-1] == pytest.approx(4)
    assert rep["plane_through_e1_trace"] == pytest.approx(2 * 2 - 1.0, abs=1e-12)
    assert rep["pass"]
    with pytest.raises(ValueError):
        holo_trace_check(3, 7.0, 1)


def test_holo_trace_is_seeded():
    a = holo_trace_check(3, 1.0, 2, num_samples=300, seed=5)
    b = holo_trace_check(3, 1.0, 2, num_samples=300, seed=5)
    assert a == b


def test_table_rows_and_text():
    from critflow.rankone import format_table, rank_one_table

    rows = rank_one_table(RankOneSpace("real", 4), 0.5)
    assert [r["delta"] for r in rows] == [0.0, 0.5, 1.0, 1.5, 2.0, 2.5, 3.0]
    assert [r["hd_bound"] for r in rows] == [1, 1, 2, 2, 3, 3, 4]
    assert rows[-1]["flags"] == ["lattice exponent"]
    text = format_table(rows).splitlines()
    assert len(text) == 8 and text[0].split() == ["delta", "j_X", "hd_bound", "flags"]
    # the flags column starts at the same offset on every line
    assert len({len(line.rsplit("  ", 1)[0]) for line in text}) == 1
