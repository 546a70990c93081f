import json
from fractions import Fraction as Fr
from itertools import permutations

import pytest

from cachelab.converse import appearance_count, demand_from_circular
from cachelab.fds import FdsStructure, FileId, Permutation, SubfileId
from cachelab.oracle import (
    CountReport,
    all_subfiles,
    appearance_counter,
    count_appearances,
    lemma2_count,
    lemma2_formula,
    lemma2_reports,
    mais_vs_construction,
    report_json,
    subfile_symmetry_check,
)
from cachelab.schemes import CapExceeded, DemandInstance, selfish_symmetric_placement

S431 = FdsStructure(4, 3, 1)


def test_shift_count_examples():
    assert lemma2_count((1, 2, 3, 4), 1, 3) == 2
    assert lemma2_count((1, 2, 3, 4), 1, 2) == 3  # adjacent pair
    assert lemma2_count((1, 2, 3, 4), 2, 1) == 1  # ell = K - 1
    assert lemma2_formula((1, 2, 3, 4), 2, 1) == 1


def test_shift_count_rejects_equal_users():
    with pytest.raises(ValueError):
        lemma2_count((1, 2, 3), 2, 2)


@pytest.mark.parametrize("K", range(2, 7))
def test_shift_count_exhaustive(K):
    for pi in permutations(range(1, K + 1)):
        for k1, k2 in permutations(range(1, K + 1), 2):
            assert lemma2_count(pi, k1, k2) == lemma2_formula(pi, k1, k2)
    assert all(r.match for r in lemma2_reports(K))


def test_count_appearances_examples():
    assert count_appearances(S431, SubfileId(FileId(1, (1, 2, 3)), (2,))) == 10
    assert count_appearances(S431, SubfileId(FileId(1, (1, 2, 3)), (1, 2, 3))) == 0
    s = FdsStructure(3, 2, 2)
    for sub in all_subfiles(s, 1):
        assert count_appearances(s, sub) == appearance_count(3, 2, 2, 1) == 8


@pytest.mark.parametrize("s", [S431, FdsStructure(4, 2, 1), FdsStructure(3, 2, 2), FdsStructure(5, 3, 1)], ids=str)
def test_counts_match_formula_for_every_subfile(s):
    counts = appearance_counter(s)
    for tp in range(s.alpha + 1):
        assert subfile_symmetry_check(s, tp, counts)
        assert {counts[x] for x in all_subfiles(s, tp)} == {appearance_count(s.K, s.alpha, s.F, tp)}


def test_symmetry_examples():
    assert subfile_symmetry_check(S431, 1)
    assert subfile_symmetry_check(S431, 3)
    assert subfile_symmetry_check(FdsStructure(3, 2, 2), 0)


def test_oracle_cap():
    with pytest.raises(CapExceeded):
        appearance_counter(FdsStructure(3, 2, 2), cap=3)


def test_mais_vs_construction_examples():
    d = demand_from_circular(S431, Permutation((1, 2, 3, 4)))
    rep = mais_vs_construction(S431, selfish_symmetric_placement(S431, 1), d)
    assert rep.match and rep.brute_value >= rep.formula_value >= Fr(5, 3)
    full = mais_vs_construction(S431, selfish_symmetric_placement(S431, 3), d)
    assert full.formula_value == full.brute_value == 0
    empty = mais_vs_construction(S431, selfish_symmetric_placement(S431, 0), d)
    assert empty.brute_value == 4 and empty.match


def test_mais_vs_construction_without_provenance():
    d = demand_from_circular(S431, Permutation((1, 2, 3, 4)))
    bare = DemandInstance(d.d, d.f)
    rep = mais_vs_construction(S431, selfish_symmetric_placement(S431, 1), bare)
    assert rep.match


def test_count_report_semantics():
    assert CountReport.compare("x", 3, 3).match
    assert not CountReport.compare("x", 3, 4).match
    assert CountReport.compare("x", 3, 4, relation=">=").match
    assert not CountReport.compare("x", 4, 3, relation=">=").match
    with pytest.raises(ValueError):
        CountReport.compare("x", 1, 1, relation="<")


def test_report_json_roundtrip():
    reports = [CountReport.compare("a", Fr(5, 3), Fr(5, 3)), CountReport.compare("b", 1, 2)]
    doc = json.loads(report_json(reports))
    assert doc["summary"] == {"total": 2, "passed": 1, "failed": 1, "failures": ["b"], "ok": False}
    assert Fr(doc["reports"][0]["brute_value"]) == Fr(5, 3)
