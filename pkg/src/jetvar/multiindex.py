"""Symmetric multi-indices over the base directions of a jet bundle.

A multi-index is stored densely as its multiplicity vector, so ``(t, x, x)``
over base ``(t, x)`` is ``MultiIndex((1, 2))``.  Ordering and hashing are
those of the underlying tuple, which gives the canonical lexicographic order
on counts used everywhere else in the package.
"""
from __future__ import annotations

from dataclasses import dataclass
from math import comb, factorial, prod
from typing import Iterator, Sequence


@dataclass(frozen=True)
class BaseSpec:
    """Base manifold chart: dimension and coordinate names."""

    names: tuple[str, ...]

    def __post_init__(self):
        if len(self.names) < 1:
            raise ValueError("base dimension must be at least 1")
        if len(set(self.names)) != len(self.names):
            raise ValueError(f"duplicate base coordinate names: {self.names}")

    @property
    def n(self) -> int:
        return len(self.names)

    def index(self, name: str) -> int:
        try:
            return self.names.index(name)
        except ValueError:
            raise KeyError(f"unknown base coordinate {name}") from None


class MultiIndex(tuple):
    """Multiplicity vector of a symmetric multi-index."""

    __slots__ = ()

    def __new__(cls, counts: Sequence[int] = ()):
        counts = tuple(int(c) for c in counts)
        if any(c < 0 for c in counts):
            raise ValueError(f"negative multiplicity in {counts}")
        return super().__new__(cls, counts)

    @classmethod
    def zero(cls, n: int) -> "MultiIndex":
        return cls((0,) * n)

    @classmethod
    def unit(cls, n: int, direction: int) -> "MultiIndex":
        counts = [0] * n
        counts[direction] = 1
        return cls(counts)

    @classmethod
    def from_directions(cls, n: int, directions: Sequence[int]) -> "MultiIndex":
        counts = [0] * n
        for d in directions:
            if not 0 <= d < n:
                raise ValueError(f"direction {d} out of range for n={n}")
            counts[d] += 1
        return cls(counts)

    @classmethod
    def from_names(cls, base: BaseSpec, names: Sequence[str]) -> "MultiIndex":
        return cls.from_directions(base.n, [base.index(s) for s in names])

    @property
    def n(self) -> int:
        return len(self)

    def degree(self) -> int:
        return sum(self)

    def is_empty(self) -> bool:
        return not any(self)

    def __add__(self, other: "MultiIndex") -> "MultiIndex":  # type: ignore[override]
        if len(self) != len(other):
            raise ValueError(
                f"multi-index base dimension mismatch: {len(self)} vs {len(other)}"
            )
        return MultiIndex(a + b for a, b in zip(self, other))

    def add_direction(self, direction: int) -> "MultiIndex":
        counts = list(self)
        counts[direction] += 1
        return MultiIndex(counts)

    def minus_direction(self, direction: int) -> "MultiIndex | None":
        """Remove one copy of ``direction``; ``None`` if it does not occur."""
        if self[direction] == 0:
            return None
        counts = list(self)
        counts[direction] -= 1
        return MultiIndex(counts)

    def contains(self, other: "MultiIndex") -> bool:
        return all(a >= b for a, b in zip(self, other))

    def __sub__(self, other: "MultiIndex") -> "MultiIndex":
        return MultiIndex(a - b for a, b in zip(self, other))

    def directions(self) -> tuple[int, ...]:
        """Sorted sequence of directions, e.g. ``(0, 1, 1)`` for t,x,x."""
        return tuple(d for d, c in enumerate(self) for _ in range(c))

    def orderings(self) -> int:
        """Number of distinct sequences representing this multi-index."""
        return factorial(self.degree()) // prod(factorial(c) for c in self)

    def format(self, base: BaseSpec) -> str:
        return ",".join(base.names[d] for d in self.directions())

    def __repr__(self):
        return f"MultiIndex({tuple(self)})"


def add(a: MultiIndex, b: MultiIndex) -> MultiIndex:
    return a + b


def enumerate_indices(n: int, k: int) -> list[MultiIndex]:
    """All multi-indices of degree exactly ``k`` over ``n`` directions.

    Returned in decreasing lexicographic order of the multiplicity vector,
    which lists the sorted direction sequences lexicographically:
    ``(t,t), (t,x), (x,x)``.
    """
    if k < 0:
        raise ValueError("order must be non-negative")
    return sorted((MultiIndex(c) for c in _compositions(n, k)), reverse=True)


def indices_up_to(n: int, k: int) -> list[MultiIndex]:
    """All multi-indices of degree ``0..k``, grouped by degree."""
    out: list[MultiIndex] = []
    for d in range(k + 1):
        out.extend(enumerate_indices(n, d))
    return out


def count(n: int, k: int) -> int:
    return comb(n + k - 1, k)


def _compositions(n: int, k: int) -> Iterator[tuple[int, ...]]:
    if n == 1:
        yield (k,)
        return
    for first in range(k + 1):
        for rest in _compositions(n - 1, k - first):
            yield (first,) + rest
