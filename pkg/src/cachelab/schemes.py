"""Uncoded cache placements, delivery algorithms and load simulation.

File size is normalized to 1 and every subfile size is a ``Fraction``, so
loads and memory budgets are exact. XOR of unequal parts is zero-padded: a
message costs as much as its largest part.
"""

from __future__ import annotations

import logging
from collections.abc import Iterator, Sequence
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import combinations, islice, product

from .fds import (
    ClassId,
    FdsStructure,
    FileId,
    Permutation,
    SubfileId,
    binom,
    make_class,
    subsets,
)

log = logging.getLogger(__name__)

ZERO = Fraction(0)
DEFAULT_DEMAND_CAP = 200_000


class CapExceeded(RuntimeError):
    """An enumeration would exceed its configured cap."""

    def __init__(self, what: str, required: int, cap: int) -> None:
        super().__init__(f"{what}: {required} items required, cap is {cap}")
        self.what = what
        self.required = required
        self.cap = cap


@dataclass
class Placement:
    structure: FdsStructure
    sizes: dict[SubfileId, Fraction]
    M: Fraction
    selfish_flag: bool
    kind: str = "custom"
    t: int | None = None

    def __post_init__(self) -> None:
        self.check()
        # treated as immutable from here on; lookups below are precomputed
        self._parts: dict[FileId, list[SubfileId]] = {}
        self._cached: dict[int, frozenset[SubfileId]] = {}
        for sub in sorted(self.sizes):
            if self.sizes[sub] > 0:
                self._parts.setdefault(sub.file, []).append(sub)
        for k in self.structure.users:
            self._cached[k] = frozenset(
                s for s, v in self.sizes.items() if v > 0 and k in s.cached_by
            )

    def size(self, sub: SubfileId) -> Fraction:
        return self.sizes.get(sub, ZERO)

    def parts(self, file: FileId) -> list[SubfileId]:
        """Positive-size subfiles of ``file`` in lexicographic order."""
        return list(self._parts.get(file, ()))

    def cached_at(self, k: int) -> set[SubfileId]:
        return set(self._cached[k])

    def memory(self, k: int) -> Fraction:
        return sum((v for s, v in self.sizes.items() if k in s.cached_by), ZERO)

    def is_selfish(self) -> bool:
        return all(s.is_selfish() for s, v in self.sizes.items() if v > 0)

    def check(self) -> None:
        """Raise ``ValueError`` unless partition, memory and selfishness hold."""
        totals: dict[FileId, Fraction] = {f: ZERO for f in self.structure.files()}
        for sub, v in self.sizes.items():
            if not 0 <= v <= 1:
                raise ValueError(f"subfile size {v} outside [0, 1] for {sub}")
            if sub.file not in totals:
                raise ValueError(f"{sub.file} is not a library file")
            totals[sub.file] += v
        bad = [f for f, tot in totals.items() if tot != 1]
        if bad:
            raise ValueError(f"file {bad[0]} is split into total size {totals[bad[0]]}, not 1")
        for k in self.structure.users:
            if self.memory(k) > self.M:
                raise ValueError(f"user {k} caches {self.memory(k)} > M = {self.M}")
        if self.selfish_flag and not self.is_selfish():
            raise ValueError("selfish placement caches a file outside some user's FDS")


@dataclass(frozen=True)
class DemandInstance:
    """User k requests file ``f[k-1]`` of class ``d[k-1]``."""

    d: tuple[ClassId, ...]
    f: tuple[int, ...]
    provenance: Permutation | None = field(default=None, compare=False)

    @property
    def K(self) -> int:
        return len(self.d)

    def requested(self, k: int) -> FileId:
        return FileId(self.f[k - 1], self.d[k - 1])

    def files(self) -> list[FileId]:
        return [self.requested(k) for k in range(1, self.K + 1)]

    def is_distinct(self) -> bool:
        return len(set(self.files())) == self.K

    def validate(self, structure: FdsStructure) -> None:
        if len(self.d) != structure.K or len(self.f) != structure.K:
            raise ValueError(f"demand must list exactly K = {structure.K} requests")
        for k in structure.users:
            cls = self.d[k - 1]
            if len(cls) != structure.alpha or make_class(cls, structure.K) != cls:
                raise ValueError(f"user {k} requests malformed class {cls!r}")
            if k not in cls:
                raise ValueError(f"user {k} requests class {cls!r} outside its FDS")
            if not 1 <= self.f[k - 1] <= structure.F:
                raise ValueError(f"user {k} requests file index {self.f[k - 1]} outside [1..{structure.F}]")


@dataclass(frozen=True)
class DeliveryMessage:
    parts: frozenset[SubfileId]
    size: Fraction

    @classmethod
    def xor(cls, parts, placement: Placement) -> DeliveryMessage:
        parts = frozenset(parts)
        if not parts:
            raise ValueError("empty message")
        sizes = [placement.size(p) for p in parts]
        if min(sizes) <= 0:
            raise ValueError("message contains a subfile with no placed size")
        return cls(parts, max(sizes))


def total_load(messages: Sequence[DeliveryMessage]) -> Fraction:
    return sum((m.size for m in messages), ZERO)


# -- placements -------------------------------------------------------------


def man_placement(structure: FdsStructure, t: int) -> Placement:
    K = structure.K
    if not 0 <= t <= K:
        raise ValueError(f"t must lie in [0..{K}], got {t}")
    share = Fraction(1, binom(K, t))
    sizes = {
        SubfileId(file, T): share
        for file in structure.files()
        for T in combinations(range(1, K + 1), t)
    }
    M = Fraction(t * structure.N, K)
    return Placement(structure, sizes, M, selfish_flag=False, kind="man", t=t)


def selfish_symmetric_placement(structure: FdsStructure, t: int) -> Placement:
    """Split every file evenly over the t-subsets of its interest class."""
    a = structure.alpha
    if not 0 <= t <= a:
        raise ValueError(f"t must lie in [0..{a}], got {t}")
    share = Fraction(1, binom(a, t))
    sizes = {
        SubfileId(file, T): share
        for file in structure.files()
        for T in combinations(file.cls, t)
    }
    M = Fraction(t * structure.N, structure.K)
    return Placement(structure, sizes, M, selfish_flag=True, kind="selfish", t=t)


def profile_placement(structure: FdsStructure, x: Sequence[Fraction]) -> Placement:
    """Symmetric selfish placement putting mass ``x[t']`` on replication t'.

    Every subfile cached by exactly t' users of its class gets size
    ``x[t'] / binom(alpha, t')``.
    """
    a = structure.alpha
    x = [Fraction(v) for v in x]
    if len(x) != a + 1:
        raise ValueError(f"profile needs alpha + 1 = {a + 1} entries, got {len(x)}")
    if any(v < 0 for v in x):
        raise ValueError(f"profile has a negative entry: {x}")
    if sum(x) != 1:
        raise ValueError(f"profile sums to {sum(x)}, not 1")
    sizes = {
        SubfileId(file, T): x[len(T)] / binom(a, len(T))
        for file in structure.files()
        for T in subsets(file.cls)
    }
    M = Fraction(structure.N, structure.K) * sum(tp * v for tp, v in enumerate(x))
    return Placement(structure, sizes, M, selfish_flag=True, kind="profile")


# -- delivery ---------------------------------------------------------------


def man_delivery(placement: Placement, demand: DemandInstance) -> list[DeliveryMessage]:
    """One XOR per (t+1)-subset Q of users, carrying W_{d_k, Q minus k} for k in Q."""
    if placement.kind != "man" or placement.t is None:
        raise ValueError(f"MAN delivery needs a MAN placement, got kind {placement.kind!r}")
    K = placement.structure.K
    messages = []
    for Q in combinations(range(1, K + 1), placement.t + 1):
        parts = [SubfileId(demand.requested(k), tuple(j for j in Q if j != k)) for k in Q]
        messages.append(DeliveryMessage.xor(parts, placement))
    return messages


def greedy_clique_delivery(placement: Placement, demand: DemandInstance) -> list[DeliveryMessage]:
    """Greedy clique cover of the needed (subfile, user) pairs.

    Two pairs (a, i) and (b, j) can share an XOR when i != j and either they
    are the same subfile, or j caches a and i caches b. Pairs are seeded in
    lexicographic order and each clique absorbs every later pair compatible
    with all of its members.
    """
    K = placement.structure.K
    needed = sorted(
        (sub, k)
        for k in range(1, K + 1)
        for sub in placement.parts(demand.requested(k))
        if k not in sub.cached_by
    )

    def compatible(v, w) -> bool:
        (a, i), (b, j) = v, w
        return i != j and (a == b or (j in a.cached_by and i in b.cached_by))

    messages = []
    remaining = needed
    while remaining:
        clique = [remaining[0]]
        rest = []
        for v in remaining[1:]:
            if all(compatible(v, w) for w in clique):
                clique.append(v)
            else:
                rest.append(v)
        messages.append(DeliveryMessage.xor((sub for sub, _ in clique), placement))
        remaining = rest
    return messages


def verify_decodability(
    placement: Placement, demand: DemandInstance, messages: Sequence[DeliveryMessage]
) -> bool:
    """Symbolically decode every user to a fixpoint.

    A user resolves a message once all but one of its parts are known;
    known parts are the cached ones plus everything decoded so far.
    """
    for k in range(1, placement.structure.K + 1):
        known = placement.cached_at(k)
        want = set(placement.parts(demand.requested(k)))
        progress = True
        while progress and not want <= known:
            progress = False
            for msg in messages:
                unknown = msg.parts - known
                if len(unknown) == 1:
                    known |= unknown
                    progress = True
        if not want <= known:
            return False
    return True


# -- worst-case simulation --------------------------------------------------


def count_distinct_demands(structure: FdsStructure) -> int:
    """Number of demands in which all K users request pairwise distinct files."""
    options = [structure.user_files(k) for k in structure.users]
    index = {f: i for i, f in enumerate(structure.files())}
    masks = [[1 << index[f] for f in opts] for opts in options]
    layer = {0: 1}
    for user_masks in masks:
        nxt: dict[int, int] = {}
        for used, ways in layer.items():
            for bit in user_masks:
                if not used & bit:
                    nxt[used | bit] = nxt.get(used | bit, 0) + ways
        layer = nxt
    return sum(layer.values())


def distinct_demands(structure: FdsStructure) -> Iterator[DemandInstance]:
    options = [structure.user_files(k) for k in structure.users]
    chosen: list[FileId] = []

    def walk(k: int):
        if k == structure.K:
            yield DemandInstance(tuple(f.cls for f in chosen), tuple(f.f for f in chosen))
            return
        for file in options[k]:
            if file not in chosen:
                chosen.append(file)
                yield from walk(k + 1)
                chosen.pop()

    yield from walk(0)


def all_demands_iter(structure: FdsStructure) -> Iterator[DemandInstance]:
    """Every demand with each user requesting from its FDS (files may repeat)."""
    options = [structure.user_files(k) for k in structure.users]
    for combo in product(*options):
        yield DemandInstance(tuple(f.cls for f in combo), tuple(f.f for f in combo))


def make_placement(structure: FdsStructure, scheme: str, t: int | None = None, profile=None) -> Placement:
    if scheme == "man":
        return man_placement(structure, t)
    if scheme == "selfish":
        return selfish_symmetric_placement(structure, t)
    if scheme == "profile":
        if profile is None:
            raise ValueError("profile scheme needs a profile vector")
        return profile_placement(structure, profile)
    raise ValueError(f"unknown scheme {scheme!r}")


def deliver(placement: Placement, demand: DemandInstance) -> list[DeliveryMessage]:
    if placement.kind == "man":
        return man_delivery(placement, demand)
    return greedy_clique_delivery(placement, demand)


@dataclass(frozen=True)
class SimulationReport:
    scheme: str
    t: int | None
    M: Fraction
    worst_case_load: Fraction
    demands: int
    decodable: bool


def _simulate_chunk(args) -> tuple[Fraction, bool]:
    placement, demands = args
    worst, ok = ZERO, True
    for demand in demands:
        msgs = deliver(placement, demand)
        ok = ok and verify_decodability(placement, demand, msgs)
        worst = max(worst, total_load(msgs))
    return worst, ok


def _chunks(it, size):
    it = iter(it)
    while chunk := list(islice(it, size)):
        yield chunk


def simulate(placement: Placement, cap: int = DEFAULT_DEMAND_CAP, jobs: int = 1) -> SimulationReport:
    """Deliver every distinct-file demand and report the worst load."""
    structure = placement.structure
    required = count_distinct_demands(structure)
    if required > cap:
        raise CapExceeded("distinct-file demands", required, cap)
    log.debug("simulating %d demands for %s placement", required, placement.kind)
    if jobs > 1:
        size = max(1, required // (4 * jobs))
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            results = list(pool.map(_simulate_chunk, ((placement, c) for c in _chunks(distinct_demands(structure), size))))
    else:
        results = [_simulate_chunk((placement, distinct_demands(structure)))]
    worst = max((w for w, _ in results), default=ZERO)
    ok = all(o for _, o in results)
    return SimulationReport(placement.kind, placement.t, placement.M, worst, required, ok)


def worst_case_load(
    structure: FdsStructure,
    scheme: str,
    t: int | None = None,
    *,
    profile=None,
    cap: int = DEFAULT_DEMAND_CAP,
    jobs: int = 1,
) -> Fraction:
    report = simulate(make_placement(structure, scheme, t, profile), cap=cap, jobs=jobs)
    if not report.decodable:
        raise RuntimeError(f"{scheme} delivery failed to decode some demand")
    return report.worst_case_load
