"""Finitely supported probability measures with exact rational weights."""
from __future__ import annotations

from fractions import Fraction
from typing import Callable, Generic, Hashable, Iterable, Iterator, TypeVar

S = TypeVar("S", bound=Hashable)
T = TypeVar("T", bound=Hashable)

ONE = Fraction(1)


class DistributionError(ValueError):
    pass


class Distribution(Generic[S]):
    """A discrete measure over hashable states.

    Equal states are merged by adding their weights.  Iteration follows
    insertion order, which keeps every exploration built on top of it
    deterministic.
    """

    __slots__ = ("_weights", "_hash")

    def __init__(self, pairs: Iterable[tuple[S, Fraction]] = (), *, check: bool = True):
        weights: dict[S, Fraction] = {}
        for state, w in pairs:
            if w == 0:
                continue
            weights[state] = weights.get(state, 0) + w
        self._weights = weights
        self._hash = None
        if check:
            for w in weights.values():
                if not 0 < w <= 1:
                    raise DistributionError(f"probability {w} outside (0,1]")
            total = sum(weights.values(), Fraction(0))
            if total != 1:
                raise DistributionError(f"total mass is {total}, expected 1")

    @classmethod
    def dirac(cls, state: S) -> Distribution[S]:
        d = cls.__new__(cls)
        d._weights = {state: ONE}
        d._hash = None
        return d

    @classmethod
    def convex(cls, parts: Iterable[tuple[Fraction, Distribution[S]]]) -> Distribution[S]:
        """The convex combination ``sum_i [p_i] mu_i``."""
        pairs = []
        for p, mu in parts:
            pairs.extend((s, p * w) for s, w in mu.items())
        return cls(pairs)

    def map(self, fn: Callable[[S], T]) -> Distribution[T]:
        """Push ``fn`` through the support, merging states that become equal."""
        if len(self._weights) == 1:
            (s,) = self._weights
            return Distribution.dirac(fn(s))
        return Distribution(((fn(s), w) for s, w in self._weights.items()), check=False)

    def items(self):
        return self._weights.items()

    def support(self) -> list[S]:
        return list(self._weights)

    def is_dirac(self) -> bool:
        return len(self._weights) == 1

    def total(self) -> Fraction:
        return sum(self._weights.values(), Fraction(0))

    def __getitem__(self, state: S) -> Fraction:
        return self._weights.get(state, Fraction(0))

    def __contains__(self, state) -> bool:
        return state in self._weights

    def __iter__(self) -> Iterator[S]:
        return iter(self._weights)

    def __len__(self):
        return len(self._weights)

    def __eq__(self, other):
        if not isinstance(other, Distribution):
            return NotImplemented
        return self._weights == other._weights

    def __hash__(self):
        if self._hash is None:
            self._hash = hash(frozenset(self._weights.items()))
        return self._hash

    def __repr__(self):
        inner = ", ".join(f"{s!r}: {w}" for s, w in self._weights.items())
        return f"Distribution({{{inner}}})"


def lift_distribution(mu: Distribution, op: Callable) -> Distribution:
    """Apply a syntactic operator pointwise, e.g. ``lambda p: Par(p, q)``."""
    return mu.map(op)
