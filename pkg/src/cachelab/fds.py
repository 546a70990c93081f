"""Symmetric (K, alpha, F) file-demand-set structures and the combinatorial
primitives everything else is built on: classes, FDS membership, the
1-based modulo, and circular permutations.

Users are numbered 1..K. A class is an ascending tuple of alpha users.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from itertools import combinations, permutations
from typing import Iterator, NamedTuple, Sequence

ClassId = tuple[int, ...]


def binom(n: int, k: int) -> int:
    """Binomial coefficient, zero whenever n < 0, k < 0 or n < k."""
    if n < 0 or k < 0 or n < k:
        return 0
    return math.comb(n, k)


def mod1(m: int, n: int) -> int:
    """``m mod n`` mapped into 1..n (so multiples of n give n, not 0)."""
    if n < 1:
        raise ValueError(f"modulus must be positive, got {n}")
    r = m % n
    return n if r == 0 else r


def make_class(members, K: int | None = None) -> ClassId:
    cls = tuple(sorted(members))
    if len(set(cls)) != len(cls):
        raise ValueError(f"duplicate users in class {members!r}")
    if any(k < 1 or (K is not None and k > K) for k in cls):
        raise ValueError(f"class {members!r} has users outside [1..{K}]")
    return cls


class FileId(NamedTuple):
    f: int
    cls: ClassId


class SubfileId(NamedTuple):
    """Part of file ``file`` stored exactly at the users in ``cached_by``."""

    file: FileId
    cached_by: tuple[int, ...]

    @property
    def t(self) -> int:
        return len(self.cached_by)

    def is_selfish(self) -> bool:
        return set(self.cached_by) <= set(self.file.cls)


@dataclass(frozen=True)
class FdsStructure:
    K: int
    alpha: int
    F: int

    def __post_init__(self) -> None:
        if self.K < 1:
            raise ValueError(f"K must be positive, got {self.K}")
        if not 1 <= self.alpha <= self.K:
            raise ValueError(f"alpha must lie in [1..K], got {self.alpha}")
        if self.F < 1:
            raise ValueError(f"F must be positive, got {self.F}")
        need = -(-self.K // self.C)
        if self.F < need:
            raise ValueError(
                f"N >= K requires F >= ceil(K/C) = {need} for "
                f"(K, alpha) = ({self.K}, {self.alpha}), got F = {self.F}"
            )

    @property
    def C(self) -> int:
        return math.comb(self.K, self.alpha)

    @property
    def N(self) -> int:
        return self.F * self.C

    @property
    def fds_size(self) -> int:
        return self.F * math.comb(self.K - 1, self.alpha - 1)

    @property
    def users(self) -> range:
        return range(1, self.K + 1)

    def classes(self) -> list[ClassId]:
        return enumerate_classes(self)

    def files(self) -> list[FileId]:
        return [FileId(f, cls) for cls in self.classes() for f in range(1, self.F + 1)]

    def user_files(self, k: int) -> list[FileId]:
        return [FileId(f, cls) for cls in user_fds(self, k) for f in range(1, self.F + 1)]

    def check_user(self, k: int) -> None:
        if not 1 <= k <= self.K:
            raise ValueError(f"user {k} outside [1..{self.K}]")


def enumerate_classes(structure: FdsStructure) -> list[ClassId]:
    return list(combinations(range(1, structure.K + 1), structure.alpha))


def user_fds(structure: FdsStructure, k: int) -> list[ClassId]:
    """Classes of interest to user ``k``, in ascending order."""
    structure.check_user(k)
    return [cls for cls in enumerate_classes(structure) if k in cls]


def subsets(items: Sequence[int]) -> Iterator[tuple[int, ...]]:
    """All subsets of ``items`` by size, then lexicographically."""
    items = sorted(items)
    for r in range(len(items) + 1):
        yield from combinations(items, r)


@dataclass(frozen=True)
class Permutation:
    """A bijection on 1..n, stored as its image vector (pi(1), ..., pi(n))."""

    image: tuple[int, ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "image", tuple(self.image))
        if sorted(self.image) != list(range(1, len(self.image) + 1)):
            raise ValueError(f"{self.image!r} is not a permutation of 1..{len(self.image)}")

    def __call__(self, i: int) -> int:
        return self.image[mod1(i, len(self.image)) - 1]

    def __len__(self) -> int:
        return len(self.image)

    def __iter__(self):
        return iter(self.image)

    def index(self, k: int) -> int:
        """pi^{-1}(k), 1-based."""
        return self.image.index(k) + 1

    def inverse(self) -> Permutation:
        inv = [0] * len(self.image)
        for pos, k in enumerate(self.image, start=1):
            inv[k - 1] = pos
        return Permutation(tuple(inv))

    def rotate(self, s: int) -> Permutation:
        s %= max(len(self.image), 1)
        return Permutation(self.image[s:] + self.image[:s])


def circular_representatives(K: int) -> list[Permutation]:
    """One representative per rotation class of S_K, each starting with 1.

    Ordered lexicographically, which reproduces the worked-example listing
    for K = 4.
    """
    if K < 1:
        raise ValueError(f"K must be positive, got {K}")
    return [Permutation((1,) + rest) for rest in permutations(range(2, K + 1))]


def circular_shifts(u: Permutation | Sequence[int]) -> list[Permutation]:
    if not isinstance(u, Permutation):
        u = Permutation(tuple(u))
    return [u.rotate(s) for s in range(len(u))]
