"""Side-information graphs of the index-coding problem induced by a demand.

Each user k desires the subfiles W_{f_k, D_k, T} with T a subset of D_k not
containing k. There is an edge i -> j when the user requesting j caches i,
i.e. requester(j) is in cached_by(i). The graph shape depends only on the
demand; vertex sizes come from a placement and may be zero.
"""

from __future__ import annotations

from collections.abc import Iterable, Sequence
from dataclasses import dataclass
from fractions import Fraction

from .fds import FdsStructure, Permutation, SubfileId, subsets
from .schemes import CapExceeded, DemandInstance, Placement

DEFAULT_MAIS_CAP = 20


@dataclass(frozen=True)
class SideInfoGraph:
    vertices: tuple[SubfileId, ...]
    requesters: tuple[int, ...]
    sizes: tuple[Fraction, ...]
    succ: tuple[int, ...]  # bitmask of out-neighbours per vertex

    def __len__(self) -> int:
        return len(self.vertices)

    def index(self, sub: SubfileId) -> int:
        return self._lookup[sub]

    @property
    def _lookup(self) -> dict[SubfileId, int]:
        cache = self.__dict__.get("_lookup_cache")
        if cache is None:
            cache = {v: i for i, v in enumerate(self.vertices)}
            object.__setattr__(self, "_lookup_cache", cache)
        return cache

    def has_edge(self, i: int, j: int) -> bool:
        return bool(self.succ[i] >> j & 1)

    def edges(self) -> list[tuple[int, int]]:
        n = len(self.vertices)
        return [(i, j) for i in range(n) for j in range(n) if self.has_edge(i, j)]

    def size_of(self, sub: SubfileId) -> Fraction:
        return self.sizes[self.index(sub)]

    def to_dot(self, name: str = "sideinfo") -> str:
        lines = [f"digraph {name} {{"]
        for i, (sub, k, w) in enumerate(zip(self.vertices, self.requesters, self.sizes)):
            lines.append(f'  v{i} [label="u{k}:{subfile_label(sub)}", weight="{w}"];')
        for i, j in self.edges():
            lines.append(f"  v{i} -> v{j};")
        lines.append("}")
        return "\n".join(lines) + "\n"


def _set_str(items) -> str:
    return "{" + ",".join(map(str, items)) + "}"


def subfile_label(sub: SubfileId) -> str:
    return f"W_{{{sub.file.f},{_set_str(sub.file.cls)},{_set_str(sub.cached_by)}}}"


def build_graph(
    structure: FdsStructure, demand: DemandInstance, placement: Placement | None = None
) -> SideInfoGraph:
    """Side-information graph for ``demand`` under full 2^alpha splitting.

    Sizes are read from ``placement`` (zero when it is omitted or does not
    place a given subfile).
    """
    demand.validate(structure)
    if not demand.is_distinct():
        raise ValueError("side-information graph needs pairwise distinct requested files")
    vertices, requesters = [], []
    for k in structure.users:
        file = demand.requested(k)
        for T in subsets([j for j in file.cls if j != k]):
            vertices.append(SubfileId(file, T))
            requesters.append(k)
    succ = []
    for sub in vertices:
        mask = 0
        for j, req in enumerate(requesters):
            if req in sub.cached_by:
                mask |= 1 << j
        succ.append(mask)
    sizes = tuple(placement.size(v) if placement else Fraction(0) for v in vertices)
    return SideInfoGraph(tuple(vertices), tuple(requesters), sizes, tuple(succ))


def paper_acyclic_set(demand: DemandInstance, u: Permutation | Sequence[int]) -> list[SubfileId]:
    """Vertices W_{f_{u_k}, D_{u_k}, T} with T inside D_{u_k} minus {u_1..u_k}.

    Walking ``u`` left to right, each user contributes the subfiles of its
    request cached only by users that come later in ``u``. Returned in
    construction order.
    """
    order = list(u)
    if sorted(order) != list(range(1, demand.K + 1)):
        raise ValueError(f"{order!r} does not permute the users")
    out = []
    seen: set[int] = set()
    for k in order:
        seen.add(k)
        file = demand.requested(k)
        later = [j for j in file.cls if j not in seen]
        out.extend(SubfileId(file, T) for T in subsets(later))
    return out


def _mask(graph: SideInfoGraph, vertex_set: Iterable[SubfileId]) -> int:
    mask = 0
    for v in vertex_set:
        mask |= 1 << graph.index(v)
    return mask


def _is_acyclic_mask(succ: Sequence[int], mask: int) -> bool:
    # Kahn: repeatedly strip vertices with no in-edges from inside the mask
    remaining = mask
    while remaining:
        m = remaining
        targets = 0
        while m:
            low = m & -m
            i = low.bit_length() - 1
            targets |= succ[i] & remaining
            m ^= low
        sources = remaining & ~targets
        if not sources:
            return False
        remaining &= ~sources
    return True


def is_acyclic(graph: SideInfoGraph, vertex_set: Iterable[SubfileId]) -> bool:
    return _is_acyclic_mask(graph.succ, _mask(graph, vertex_set))


def bound_from_set(graph: SideInfoGraph, vertex_set: Iterable[SubfileId]) -> Fraction:
    """Acyclic-subgraph lower bound: total size of an acyclic vertex set."""
    vertex_set = list(vertex_set)
    if not is_acyclic(graph, vertex_set):
        raise ValueError("vertex set induces a directed cycle")
    return sum((graph.size_of(v) for v in set(vertex_set)), Fraction(0))


def _reaches(succ: Sequence[int], start: int, allowed: int, targets: int) -> bool:
    frontier = start & allowed
    seen = frontier
    while frontier:
        if frontier & targets:
            return True
        nxt = 0
        m = frontier
        while m:
            low = m & -m
            nxt |= succ[low.bit_length() - 1]
            m ^= low
        frontier = nxt & allowed & ~seen
        seen |= frontier
    return False


def mais(graph: SideInfoGraph, cap: int = DEFAULT_MAIS_CAP) -> tuple[Fraction, list[SubfileId]]:
    """Maximum-weight acyclic induced subgraph, by exact branch and bound.

    Zero-size vertices never change the objective, so only positive ones are
    searched. Returns the value and a witness in vertex order.
    """
    n = len(graph)
    if n > cap:
        raise CapExceeded("side-information graph vertices", n, cap)
    succ = graph.succ
    pred = [0] * n
    for i in range(n):
        m = succ[i]
        while m:
            low = m & -m
            pred[low.bit_length() - 1] |= 1 << i
            m ^= low
    order = sorted((i for i in range(n) if graph.sizes[i] > 0), key=lambda i: (-graph.sizes[i], i))
    weights = [graph.sizes[i] for i in order]
    suffix = [Fraction(0)] * (len(order) + 1)
    for p in range(len(order) - 1, -1, -1):
        suffix[p] = suffix[p + 1] + weights[p]

    best_value = Fraction(-1)
    best_mask = 0

    def search(p: int, mask: int, value: Fraction) -> None:
        nonlocal best_value, best_mask
        if value + suffix[p] <= best_value:
            return
        if p == len(order):
            best_value, best_mask = value, mask
            return
        v = order[p]
        # v closes a cycle iff some out-neighbour inside the set reaches an in-neighbour
        if not (succ[v] & mask and _reaches(succ, succ[v], mask, pred[v])):
            search(p + 1, mask | 1 << v, value + weights[p])
        search(p + 1, mask, value)

    search(0, 0, Fraction(0))
    witness = [graph.vertices[i] for i in range(n) if best_mask >> i & 1]
    return max(best_value, Fraction(0)), witness
