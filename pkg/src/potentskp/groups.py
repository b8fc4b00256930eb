"""Finite groups given by explicit multiplication, as consumed by the search and spectral code."""

from __future__ import annotations

from abc import ABC, abstractmethod
from typing import Hashable, Iterable, Sequence


class ThresholdError(RuntimeError):
    """A requested computation exceeds the configured size threshold."""


class FiniteQuotient(ABC):
    """A finite group with hashable canonical keys.

    ``order`` is the group order when known in closed form, else ``None``.
    """

    name: str = "group"
    order: int | None = None

    @abstractmethod
    def identity(self): ...

    @abstractmethod
    def mul(self, g, h): ...

    @abstractmethod
    def inv(self, g): ...

    @abstractmethod
    def key(self, g) -> Hashable: ...

    def serialize(self, g) -> str:
        return str(self.key(g))

    def parse(self, s: str):
        raise NotImplementedError

    def eq(self, g, h) -> bool:
        return self.key(g) == self.key(h)

    def is_identity(self, g) -> bool:
        return self.key(g) == self.key(self.identity())

    def power(self, g, k: int):
        r = self.identity()
        base = g
        while k > 0:
            if k & 1:
                r = self.mul(r, base)
            base = self.mul(base, base)
            k >>= 1
        return r

    def conj(self, g, h):
        """g^h = h^-1 g h."""
        return self.mul(self.mul(self.inv(h), g), h)

    def comm(self, g, h):
        """[g, h] = g^-1 h^-1 g h."""
        return self.mul(self.mul(self.inv(g), self.inv(h)), self.mul(g, h))

    def product(self, elems: Iterable):
        r = self.identity()
        for x in elems:
            r = self.mul(r, x)
        return r

    def describe(self) -> str:
        return self.name


class CyclicGroup(FiniteQuotient):
    """Z/m written multiplicatively; the canonical generator is 1."""

    def __init__(self, m: int):
        if m < 1:
            raise ValueError("cyclic group order must be positive")
        self.m = m
        self.order = m
        self.name = f"C{m}"

    def identity(self):
        return 0

    def mul(self, g, h):
        return (g + h) % self.m

    def inv(self, g):
        return (-g) % self.m

    def key(self, g):
        return g % self.m

    def parse(self, s: str):
        return int(s) % self.m


def closure(G: FiniteQuotient, gens: Sequence, limit: int = 10**7) -> dict:
    """All elements generated by ``gens`` as ``key -> element`` (right-multiplication BFS)."""
    e = G.identity()
    seen = {G.key(e): e}
    frontier = [e]
    while frontier:
        nxt = []
        for g in frontier:
            for s in gens:
                h = G.mul(g, s)
                k = G.key(h)
                if k not in seen:
                    seen[k] = h
                    nxt.append(h)
                    if len(seen) > limit:
                        raise ThresholdError(f"closure exceeds {limit} elements")
        frontier = nxt
    return seen
