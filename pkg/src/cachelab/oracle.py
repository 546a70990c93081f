"""Brute-force cross-checks for the counting claims behind the converse.

Nothing here reuses the counting or family-construction code in
``converse``: demand families, shifts and acyclic sets are rebuilt from
scratch so the two routes can disagree.
"""

from __future__ import annotations

import json
import math
from collections import Counter
from dataclasses import asdict, dataclass
from fractions import Fraction
from itertools import chain, combinations, permutations, product

from .fds import FdsStructure, FileId, SubfileId
from .index_coding import DEFAULT_MAIS_CAP, bound_from_set, build_graph, mais, paper_acyclic_set
from .schemes import CapExceeded, DemandInstance, Placement

DEFAULT_ORACLE_CAP = 100_000


@dataclass(frozen=True)
class CountReport:
    """One formula-vs-brute-force comparison.

    ``relation`` is "==" for identities; for one-sided claims (">=") the
    brute value must dominate the formula value.
    """

    subject: str
    formula_value: int | Fraction
    brute_value: int | Fraction
    match: bool
    relation: str = "=="

    @classmethod
    def compare(cls, subject, formula_value, brute_value, relation="=="):
        if relation == "==":
            ok = formula_value == brute_value
        elif relation == ">=":
            ok = brute_value >= formula_value
        else:
            raise ValueError(f"unknown relation {relation!r}")
        return cls(subject, formula_value, brute_value, ok, relation)

    def to_json(self) -> dict:
        d = asdict(self)
        d["formula_value"] = str(self.formula_value)
        d["brute_value"] = str(self.brute_value)
        return d


def report_json(reports: list[CountReport]) -> str:
    failed = [r.subject for r in reports if not r.match]
    doc = {
        "reports": [r.to_json() for r in reports],
        "summary": {
            "total": len(reports),
            "passed": len(reports) - len(failed),
            "failed": len(failed),
            "failures": failed,
            "ok": not failed,
        },
    }
    return json.dumps(doc, indent=2) + "\n"


# -- circular shift lemma ---------------------------------------------------


def lemma2_count(pi, k1: int, k2: int) -> int:
    """Rotations of ``pi`` in which k1 comes before k2, by enumeration."""
    pi = list(pi)
    if k1 == k2:
        raise ValueError("k1 and k2 must differ")
    count = 0
    for s in range(len(pi)):
        rot = pi[s:] + pi[:s]
        if rot.index(k1) < rot.index(k2):
            count += 1
    return count


def lemma2_formula(pi, k1: int, k2: int) -> int:
    """K - ell, where ell = (pi^-1(k2) - pi^-1(k1)) mod K taken in 1..K."""
    pi = list(pi)
    K = len(pi)
    ell = (pi.index(k2) - pi.index(k1)) % K or K
    return K - ell


def lemma2_reports(K: int) -> list[CountReport]:
    """All pi in S_K and all ordered pairs, aggregated into one report."""
    checked = mismatches = 0
    for pi in permutations(range(1, K + 1)):
        for k1, k2 in permutations(range(1, K + 1), 2):
            checked += 1
            if lemma2_count(pi, k1, k2) != lemma2_formula(pi, k1, k2):
                mismatches += 1
    return [CountReport.compare(f"lemma2 K={K} ({checked} cases)", 0, mismatches)]


# -- appearance counting ----------------------------------------------------


def _family(structure: FdsStructure):
    """Yield (d, f, shifts) for every circularly generated demand."""
    K, a, F = structure.K, structure.alpha, structure.F
    for rest in permutations(range(2, K + 1)):
        cycle = (1,) + rest
        d = []
        for k in range(1, K + 1):
            p = cycle.index(k)
            d.append(tuple(sorted(cycle[(p + s) % K] for s in range(a))))
        shifts = [cycle[s:] + cycle[:s] for s in range(K)]
        for f in product(range(1, F + 1), repeat=K):
            yield tuple(d), f, shifts


def _powerset(items):
    return chain.from_iterable(combinations(items, r) for r in range(len(items) + 1))


def appearance_counter(structure: FdsStructure, cap: int = DEFAULT_ORACLE_CAP) -> Counter:
    """Occurrences of every subfile across all acyclic-set expansions."""
    need = math.factorial(structure.K - 1) * structure.F ** structure.K
    if need > cap:
        raise CapExceeded("oracle demand family", need, cap)
    counts: Counter = Counter()
    for d, f, shifts in _family(structure):
        for u in shifts:
            for pos, k in enumerate(u):
                cls = d[k - 1]
                later = set(u[pos + 1:])
                free = [j for j in cls if j in later]
                for T in _powerset(free):
                    counts[SubfileId(FileId(f[k - 1], cls), T)] += 1
    return counts


def count_appearances(structure: FdsStructure, subfile: SubfileId, cap: int = DEFAULT_ORACLE_CAP) -> int:
    return appearance_counter(structure, cap)[subfile]


def all_subfiles(structure: FdsStructure, tp: int) -> list[SubfileId]:
    return [
        SubfileId(FileId(f, cls), T)
        for cls in combinations(range(1, structure.K + 1), structure.alpha)
        for f in range(1, structure.F + 1)
        for T in combinations(cls, tp)
    ]


def subfile_symmetry_check(structure: FdsStructure, tp: int, counts: Counter | None = None) -> bool:
    if counts is None:
        counts = appearance_counter(structure)
    return len({counts[s] for s in all_subfiles(structure, tp)}) == 1


# -- MAIS versus the constructed acyclic set --------------------------------


def mais_vs_construction(
    structure: FdsStructure,
    placement: Placement,
    demand: DemandInstance,
    mais_cap: int | None = None,
) -> CountReport:
    """Exhaustive MAIS value against the best constructed-set bound.

    The constructed bound is maximized over the circular shifts of the
    demand's generating permutation (all of S_K if it has none).
    """
    graph = build_graph(structure, demand, placement)
    value, _ = mais(graph, DEFAULT_MAIS_CAP if mais_cap is None else mais_cap)
    if demand.provenance is not None:
        cyc = list(demand.provenance)
        candidates = [cyc[s:] + cyc[:s] for s in range(len(cyc))]
    else:
        candidates = [list(p) for p in permutations(range(1, structure.K + 1))]
    constructed = max(bound_from_set(graph, paper_acyclic_set(demand, u)) for u in candidates)
    subject = f"mais >= constructed set, d={demand.d}, f={demand.f}, gap={value - constructed}"
    return CountReport.compare(subject, constructed, value, relation=">=")
