"""Lower bound on the worst-case load under uncoded selfish placement.

Pipeline: a family of demands built from circular permutations, one
acyclic-set bound per (demand, circular shift), subfile appearance counts,
the replication cost f(t'), the two-constraint LP over the replication
profile x, and the resulting piecewise-linear memory/load curve.

Everything is exact (``Fraction``).
"""

from __future__ import annotations

import math
from collections.abc import Sequence
from dataclasses import dataclass
from fractions import Fraction
from itertools import combinations, product

from .fds import (
    FdsStructure,
    FileId,
    Permutation,
    SubfileId,
    binom,
    circular_representatives,
    circular_shifts,
    mod1,
    subsets,
)
from .schemes import CapExceeded, DemandInstance, Placement, profile_placement

DEFAULT_FAMILY_CAP = 100_000


@dataclass(frozen=True)
class DemandFamily:
    structure: FdsStructure
    entries: tuple[DemandInstance, ...]

    def __len__(self) -> int:
        return len(self.entries)

    def shifts(self, demand: DemandInstance) -> list[Permutation]:
        return circular_shifts(demand.provenance)

    def pairs(self):
        """Every (demand, shift) pair entering the averaged bound."""
        for demand in self.entries:
            for u in circular_shifts(demand.provenance):
                yield demand, u


@dataclass(frozen=True)
class BoundCurve:
    corner_points: tuple[tuple[Fraction, Fraction], ...]

    def __post_init__(self) -> None:
        ms = [m for m, _ in self.corner_points]
        if ms != sorted(ms) or len(set(ms)) != len(ms):
            raise ValueError("corner points must be strictly ascending in M")

    def __call__(self, M) -> Fraction:
        """Memory-sharing interpolation; flat beyond the last corner."""
        M = Fraction(M)
        pts = self.corner_points
        if M < pts[0][0]:
            raise ValueError(f"M = {M} below the first corner {pts[0][0]}")
        for (m0, r0), (m1, r1) in zip(pts, pts[1:]):
            if m0 <= M <= m1:
                return r0 + (r1 - r0) * (M - m0) / (m1 - m0)
        return pts[-1][1]

    def slopes(self) -> list[Fraction]:
        pts = self.corner_points
        return [(r1 - r0) / (m1 - m0) for (m0, r0), (m1, r1) in zip(pts, pts[1:])]

    def is_convex(self) -> bool:
        s = self.slopes()
        return all(a <= b for a, b in zip(s, s[1:]))

    def is_nonincreasing(self) -> bool:
        return all(s <= 0 for s in self.slopes())


@dataclass(frozen=True)
class LpSolution:
    x: tuple[Fraction, ...]
    value: Fraction


# -- demand family ----------------------------------------------------------


def demand_classes(structure: FdsStructure, pi: Permutation) -> tuple[tuple[int, ...], ...]:
    """D_k = {k and its alpha - 1 successors along the cycle of pi}."""
    K, a = structure.K, structure.alpha
    if len(pi) != K:
        raise ValueError(f"permutation has length {len(pi)}, expected K = {K}")
    d = []
    for k in structure.users:
        pos = pi.index(k)
        d.append(tuple(sorted(pi(mod1(pos + s, K)) for s in range(a))))
    return tuple(d)


def demand_from_circular(structure: FdsStructure, pi: Permutation, f: Sequence[int] | None = None) -> DemandInstance:
    if f is None:
        f = (1,) * structure.K
    demand = DemandInstance(demand_classes(structure, pi), tuple(f), provenance=pi)
    demand.validate(structure)
    return demand


def family_size(structure: FdsStructure) -> int:
    return math.factorial(structure.K - 1) * structure.F ** structure.K


def demand_family(structure: FdsStructure, cap: int = DEFAULT_FAMILY_CAP) -> DemandFamily:
    need = family_size(structure)
    if need > cap:
        raise CapExceeded("demand family", need, cap)
    entries = []
    for pi in circular_representatives(structure.K):
        d = demand_classes(structure, pi)
        for f in product(range(1, structure.F + 1), repeat=structure.K):
            entries.append(DemandInstance(d, f, provenance=pi))
    return DemandFamily(structure, tuple(entries))


# -- per-demand bound and counting ------------------------------------------


def per_demand_bound(
    structure: FdsStructure, placement: Placement, demand: DemandInstance, u: Sequence[int]
) -> Fraction:
    """Sum of |W_{f_{u_k}, D_{u_k}, T}| over k and T inside D_{u_k} \\ {u_1..u_k}."""
    u = list(u)
    total = Fraction(0)
    for k in range(1, structure.K + 1):
        user = u[k - 1]
        prefix = set(u[:k])
        file = FileId(demand.f[user - 1], demand.d[user - 1])
        allowed = [j for j in file.cls if j not in prefix]
        for T in subsets(allowed):
            total += placement.size(SubfileId(file, T))
    return total


def a_ell(K: int, alpha: int, F: int, tp: int, ell: int) -> int:
    """Family demands where a fixed requester sits at distance ell from the
    farthest member of a t'-subset T.

    binom(ell - 1, t' - 1) is taken as 1 at t' = ell = 0 (only the empty T,
    which every shift admits).
    """
    if not 0 <= tp <= alpha - 1:
        raise ValueError(f"t' must lie in [0..{alpha - 1}], got {tp}")
    if not tp <= ell <= alpha - 1:
        raise ValueError(f"ell must lie in [{tp}..{alpha - 1}], got {ell}")
    c = 1 if tp == ell == 0 else binom(ell - 1, tp - 1)
    return (
        math.factorial(tp)
        * math.factorial(alpha - 1 - tp)
        * math.factorial(K - alpha)
        * c
        * F ** (K - 1)
    )


def appearance_count(K: int, alpha: int, F: int, tp: int) -> int:
    """How often one subfile cached by t' users appears across all bounds."""
    if not 0 <= tp <= alpha:
        raise ValueError(f"t' must lie in [0..{alpha}], got {tp}")
    if tp == alpha:
        return 0
    return (alpha - tp) * sum(a_ell(K, alpha, F, tp, ell) * (K - ell) for ell in range(tp, alpha))


def f_coeff(K: int, alpha: int, tp: int) -> Fraction:
    """Per-unit load cost of putting library mass at replication t'."""
    if not 0 <= tp <= alpha:
        raise ValueError(f"t' must lie in [0..{alpha}], got {tp}")
    return Fraction(binom(alpha, tp + 1) + (K - alpha) * binom(alpha - 1, tp), binom(alpha, tp))


def f_coeff_raw(K: int, alpha: int, F: int, tp: int) -> Fraction:
    """f(t') from its definition N (alpha - t') / (F^K K!) * sum_l a_l (K - l)."""
    N = F * binom(K, alpha)
    if tp == alpha:
        return Fraction(0)
    s = sum(a_ell(K, alpha, F, tp, ell) * (K - ell) for ell in range(tp, alpha))
    return Fraction(N * (alpha - tp) * s, F**K * math.factorial(K))


# -- LP ---------------------------------------------------------------------


def _check_m(alpha: int, m) -> Fraction:
    m = Fraction(m)
    if not 0 <= m <= alpha:
        raise ValueError(f"normalized memory KM/N = {m} outside [0, {alpha}]")
    return m


def solve_lp_analytic(K: int, alpha: int, m) -> LpSolution:
    """Closed form: f is convex and decreasing, so the optimum mixes floor(m) and ceil(m)."""
    m = _check_m(alpha, m)
    x = [Fraction(0)] * (alpha + 1)
    lo = math.floor(m)
    if lo == m:
        x[lo] = Fraction(1)
    else:
        x[lo] = lo + 1 - m
        x[lo + 1] = m - lo
    value = sum((f_coeff(K, alpha, tp) * v for tp, v in enumerate(x)), Fraction(0))
    return LpSolution(tuple(x), value)


def solve_lp_vertices(K: int, alpha: int, m) -> LpSolution:
    """Optimum over every basic feasible solution of
    {x >= 0, sum x = 1, sum t' x <= m}.

    Two equality rows allow at most two nonzero coordinates: a single atom
    i <= m with the memory row slack, or a pair i < j with it tight.
    Uses no convexity of f.
    """
    m = _check_m(alpha, m)
    f = [f_coeff(K, alpha, tp) for tp in range(alpha + 1)]
    best: LpSolution | None = None

    def consider(x):
        nonlocal best
        value = sum((fi * xi for fi, xi in zip(f, x)), Fraction(0))
        if best is None or value < best.value:
            best = LpSolution(tuple(x), value)

    for i in range(alpha + 1):
        if i <= m:
            x = [Fraction(0)] * (alpha + 1)
            x[i] = Fraction(1)
            consider(x)
    for i, j in combinations(range(alpha + 1), 2):
        xi = (j - m) / (j - i)
        xj = (m - i) / (j - i)
        if xi >= 0 and xj >= 0:
            x = [Fraction(0)] * (alpha + 1)
            x[i], x[j] = xi, xj
            consider(x)
    return best


def solve_lp(K: int, alpha: int, m) -> LpSolution:
    """Solve the replication LP both ways; disagreement is an error."""
    analytic = solve_lp_analytic(K, alpha, m)
    vertex = solve_lp_vertices(K, alpha, m)
    if analytic.value != vertex.value:
        raise ArithmeticError(
            f"LP mismatch at (K, alpha, m) = ({K}, {alpha}, {m}): "
            f"{analytic.value} analytic vs {vertex.value} by vertex enumeration"
        )
    return analytic


# -- curves -----------------------------------------------------------------


def corner_load(K: int, alpha: int, t: int) -> Fraction:
    return f_coeff(K, alpha, t)


def closed_form_load(K: int, alpha: int, gamma) -> Fraction:
    """K (1 - K gamma / alpha) ((K - alpha) gamma + 1) / (K gamma + 1), gamma = M/N."""
    gamma = Fraction(gamma)
    if not 0 <= gamma <= Fraction(alpha, K):
        raise ValueError(f"gamma = {gamma} outside [0, {Fraction(alpha, K)}]")
    g_alpha = K * gamma / alpha
    return K * (1 - g_alpha) * ((K - alpha) * gamma + 1) / (K * gamma + 1)


def bound_curve(structure: FdsStructure) -> BoundCurve:
    K, a, N = structure.K, structure.alpha, structure.N
    return BoundCurve(tuple((Fraction(t * N, K), corner_load(K, a, t)) for t in range(a + 1)))


def man_load(K: int, t: int) -> Fraction:
    return Fraction(K - t, t + 1)


def man_curve(K: int, N: int | None = None) -> BoundCurve:
    """MAN corners (tN/K, (K - t)/(t + 1)); with N omitted, M is reported as t."""
    if K < 1:
        raise ValueError(f"K must be positive, got {K}")
    N = K if N is None else N
    return BoundCurve(tuple((Fraction(t * N, K), man_load(K, t)) for t in range(K + 1)))


def simplified_ratio(K: int, alpha: int, t: int) -> Fraction:
    return Fraction((alpha - t) * (K + (K - alpha) * t), alpha * (K - t))


def ratio_report(K: int, alpha: int) -> list[tuple[int, Fraction]]:
    """(t, R_LB / R_MAN) for t in [0..alpha-1], with alpha in [2..K-1]."""
    if not 2 <= alpha <= K - 1:
        raise ValueError(f"ratio comparison needs alpha in [2..{K - 1}], got {alpha}")
    rows = []
    for t in range(alpha):
        r = corner_load(K, alpha, t) / man_load(K, t)
        if r != simplified_ratio(K, alpha, t):
            raise ArithmeticError(f"ratio mismatch at (K, alpha, t) = ({K}, {alpha}, {t})")
        rows.append((t, r))
    return rows


# -- aggregate --------------------------------------------------------------


def average_bound(structure: FdsStructure, placement: Placement, cap: int = DEFAULT_FAMILY_CAP) -> Fraction:
    """Mean of the per-demand bounds over every (family demand, shift) pair."""
    family = demand_family(structure, cap)
    total, count = Fraction(0), 0
    for demand, u in family.pairs():
        total += per_demand_bound(structure, placement, demand, u)
        count += 1
    return total / count


def profile_of(placement: Placement) -> list[Fraction]:
    """x_{t'}: fraction of the library stored at replication t'."""
    s = placement.structure
    x = [Fraction(0)] * (s.alpha + 1)
    for sub, v in placement.sizes.items():
        if sub.is_selfish():
            x[sub.t] += v
    return [v / s.N for v in x]


def aggregate_check(
    structure: FdsStructure, x: Sequence[Fraction] | Placement, cap: int = DEFAULT_FAMILY_CAP
) -> tuple[Fraction, Fraction]:
    """(averaged per-demand bound, sum_t' f(t') x_t'); these should be equal.

    ``x`` may be a replication profile or any selfish placement.
    """
    placement = x if isinstance(x, Placement) else profile_placement(structure, x)
    lhs = average_bound(structure, placement, cap)
    xs = profile_of(placement)
    rhs = sum((f_coeff(structure.K, structure.alpha, tp) * v for tp, v in enumerate(xs)), Fraction(0))
    return lhs, rhs
