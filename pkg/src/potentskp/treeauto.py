"""Automorphisms of the ternary rooted tree truncated at depth m, with Z/3 vertex labels.

A portrait stores one label per internal vertex (levels 0..m-1) in
breadth-first order; the vertex word x_1...x_l sits at offset (3^l - 1)/2
plus its base-3 value, first letter most significant.  A label s at vertex v
means that the element sends v x w to v' (x + s) w' locally.

Products act on the right: ``fg`` applies f first, so
s_fg(v) = s_f(v) + s_g(f(v)).  With [x, y] = x^-1 y^-1 x y this convention
gives [a, b] = (b^-1 a, a^-1, b) and [a, [a, b]] = (ba, a^-1 b a^-1, ab).
"""

from __future__ import annotations

from functools import lru_cache
from typing import Sequence

import numpy as np

from .groups import FiniteQuotient


class PortraitError(ValueError):
    """Depth mismatch, a malformed serialization or a section request outside Stab(1)."""


@lru_cache(maxsize=None)
def offsets(m: int) -> tuple:
    """Start index of each level 0..m in the breadth-first label array."""
    return tuple((3**l - 1) // 2 for l in range(m + 1))


def size(m: int) -> int:
    return (3**m - 1) // 2


_SHIFT = ((np.arange(3)[None, :] + np.arange(3)[:, None]) % 3).astype(np.int32)  # _SHIFT[s, x] = x + s


class Portrait:
    """A depth-m portrait; ``labels`` is a read-only uint8 array of length (3^m - 1)/2."""

    __slots__ = ("depth", "labels", "_perms", "_key")

    def __init__(self, depth: int, labels):
        arr = np.asarray(labels, dtype=np.uint8)
        if arr.shape != (size(depth),):
            raise PortraitError(f"depth {depth} needs {size(depth)} labels, got {arr.shape}")
        if arr.size and arr.max() > 2:
            raise PortraitError("labels must lie in {0, 1, 2}")
        arr = arr.copy() if arr.flags.writeable else arr
        arr.flags.writeable = False
        self.depth = depth
        self.labels = arr
        self._perms = None
        self._key = None

    @classmethod
    def _raw(cls, depth: int, arr: np.ndarray) -> "Portrait":
        p = object.__new__(cls)
        arr.flags.writeable = False
        p.depth, p.labels, p._perms, p._key = depth, arr, None, None
        return p

    @classmethod
    def identity(cls, m: int) -> "Portrait":
        return cls._raw(m, np.zeros(size(m), np.uint8))

    def level(self, l: int) -> np.ndarray:
        off = offsets(self.depth)
        return self.labels[off[l]:off[l + 1]]

    def perms(self) -> np.ndarray:
        """Flat gather index: entry off[l] + i is off[l] + (image of level-l vertex i), for levels 0..m-1."""
        if self._perms is None:
            m = self.depth
            off = offsets(m)
            lab = self.labels
            parts = [np.zeros(1, np.int32)]
            p = parts[0]
            for l in range(m - 1):
                p = (3 * p).repeat(3) + _SHIFT[lab[off[l]:off[l + 1]]].ravel()
                parts.append(p + off[l + 1])
            self._perms = np.concatenate(parts) if m else np.zeros(0, np.int32)
        return self._perms

    def key(self) -> bytes:
        if self._key is None:
            self._key = self.labels.tobytes()
        return self._key

    def truncate(self, m: int) -> "Portrait":
        if m > self.depth:
            raise PortraitError("cannot truncate to a larger depth")
        return Portrait._raw(m, self.labels[:size(m)].copy())

    def __eq__(self, other):
        return isinstance(other, Portrait) and self.depth == other.depth and self.key() == other.key()

    def __hash__(self):
        return hash((self.depth, self.key()))

    def __mul__(self, other: "Portrait") -> "Portrait":
        return pt_mul(self, other)

    def __repr__(self):
        s = pt_to_str(self)
        return f"Portrait({s if len(s) < 60 else s[:57] + '...'})"


def _same(f: Portrait, g: Portrait) -> None:
    if f.depth != g.depth:
        raise PortraitError(f"depth mismatch: {f.depth} vs {g.depth}")


def pt_mul(f: Portrait, g: Portrait) -> Portrait:
    """fg: apply f, then g."""
    _same(f, g)
    return Portrait._raw(f.depth, (f.labels + g.labels[f.perms()]) % 3)


def pt_inv(f: Portrait) -> Portrait:
    out = np.empty(f.labels.size, np.uint8)
    out[f.perms()] = (3 - f.labels) % 3
    return Portrait._raw(f.depth, out)


def pt_conj(f: Portrait, g: Portrait) -> Portrait:
    """f^g = g^-1 f g."""
    return pt_mul(pt_mul(pt_inv(g), f), g)


def pt_comm(f: Portrait, g: Portrait) -> Portrait:
    """[f, g] = f^-1 g^-1 f g."""
    return pt_mul(pt_mul(pt_inv(f), pt_inv(g)), pt_mul(f, g))


def pt_pow(f: Portrait, k: int) -> Portrait:
    k %= 3 ** f.depth if f.depth else 1
    r = Portrait.identity(f.depth)
    base = f
    while k:
        if k & 1:
            r = pt_mul(r, base)
        base = pt_mul(base, base)
        k >>= 1
    return r


def gen_a(m: int) -> Portrait:
    if m < 1:
        raise PortraitError("depth must be at least 1")
    arr = np.zeros(size(m), np.uint8)
    arr[0] = 1
    return Portrait._raw(m, arr)


def gen_b(m: int) -> Portrait:
    """b = (a, 1, b): label 1 at the vertices 0, 20, 220, ...; zero elsewhere."""
    if m < 1:
        raise PortraitError("depth must be at least 1")
    arr = np.zeros(size(m), np.uint8)
    off = offsets(m)
    for l in range(1, m):
        arr[off[l] + 3**l - 3] = 1
    return Portrait._raw(m, arr)


def root_label(g: Portrait) -> int:
    return int(g.labels[0]) if g.depth else 0


def sections(g: Portrait) -> tuple[Portrait, Portrait, Portrait]:
    """(g_0, g_1, g_2) for g in Stab(1), each of depth m - 1."""
    if g.depth < 1:
        raise PortraitError("depth-0 portraits have no sections")
    if g.labels[0] != 0:
        raise PortraitError("sections are taken in Stab(1) only")
    return tuple(place_sections(g, 1))


def place_sections(g: Portrait, j: int) -> list[Portrait]:
    """The 3^j sections at level j, in breadth-first order (g must fix level j)."""
    m = g.depth
    if stab_level(g) < j:
        raise PortraitError(f"element does not fix level {j}")
    blocks = section_array(g, j)
    return [Portrait._raw(m - j, blocks[p].copy()) for p in range(3**j)]


def section_array(g: Portrait, j: int) -> np.ndarray:
    """Labels of the level-j sections as a (3^j, size(m - j)) array (no Stab check)."""
    m = g.depth
    off, sub = offsets(m), offsets(m - j)
    n = 3**j
    out = np.empty((n, size(m - j)), np.uint8)
    for l in range(m - j):
        seg = g.labels[off[j + l]:off[j + l + 1]].reshape(n, 3**l)
        out[:, sub[l]:sub[l + 1]] = seg
    return out


def place_array(blocks: np.ndarray, j: int, root: np.ndarray | None = None) -> Portrait:
    """Element fixing level j whose level-j sections have the given label rows."""
    n, sz = blocks.shape
    if n != 3**j:
        raise PortraitError(f"level {j} needs {3**j} sections, got {n}")
    d = 0
    while size(d) < sz:
        d += 1
    if size(d) != sz:
        raise PortraitError("section arrays have an invalid length")
    m = d + j
    off, sub = offsets(m), offsets(d)
    out = np.zeros(size(m), np.uint8)
    if root is not None:
        out[:off[j]] = root
    for l in range(d):
        out[off[j + l]:off[j + l + 1]] = blocks[:, sub[l]:sub[l + 1]].ravel()
    return Portrait._raw(m, out)


def place(parts: Sequence[Portrait], j: int) -> Portrait:
    """The element of Stab(j) with level-j sections ``parts`` (all of one depth)."""
    d = parts[0].depth
    for p in parts:
        if p.depth != d:
            raise PortraitError("sections must share one depth")
    return place_array(np.stack([p.labels for p in parts]), j)


def assemble(parts: Sequence[Portrait], root: int = 0) -> Portrait:
    """psi^-1((g_0, g_1, g_2) sigma^root)."""
    if len(parts) != 3:
        raise PortraitError("need exactly three sections")
    g = place(parts, 1)
    arr = g.labels.copy()
    arr[0] = root % 3
    return Portrait._raw(g.depth, arr)


def stab_level(g: Portrait) -> int:
    """Largest n <= depth such that g fixes every vertex of level n."""
    nz = np.flatnonzero(g.labels)
    if nz.size == 0:
        return g.depth
    i = int(nz[0])
    off = offsets(g.depth)
    return int(np.searchsorted(off, i, side="right")) - 1


def bold(kind: int, x: Portrait) -> Portrait:
    """0(x) = (x, 1, 1), 1(x) = (x, x^-1, 1), 2(x) = (x, x^-2, x), one level deeper than x."""
    e = Portrait.identity(x.depth)
    xi = pt_inv(x)
    parts = {0: (x, e, e), 1: (x, xi, e), 2: (x, pt_mul(xi, xi), x)}[kind]
    return assemble(parts, 0)


def bold_word(digits: str, x: Portrait) -> Portrait:
    """Composite bold operator: "rs"(x) = r(s(x)), the first digit outermost."""
    for ch in reversed(digits):
        x = bold(int(ch), x)
    return x


def pt_to_str(g: Portrait) -> str:
    return f"{g.depth}:" + "".join("012"[v] for v in g.labels)


def pt_from_str(s: str) -> Portrait:
    head, sep, body = s.strip().partition(":")
    if not sep:
        raise PortraitError(f"malformed portrait {s!r}")
    try:
        m = int(head)
    except ValueError:
        raise PortraitError(f"malformed depth in {s!r}") from None
    if len(body) != size(m) or any(c not in "012" for c in body):
        raise PortraitError(f"depth {m} needs {size(m)} digits in 0-2")
    return Portrait(m, np.frombuffer(body.encode(), dtype=np.uint8) - ord("0"))


def quotient_order(m: int) -> int:
    """|Gamma / Stab(m)|."""
    if m == 0:
        return 1
    if m == 1:
        return 3
    return 3 ** (3 ** (m - 1) + 1)


class PortraitGroup(FiniteQuotient):
    """Gamma / Stab(m) realised on depth-m portraits.

    With ``key_depth`` < m the elements keep depth m but equality only sees
    the first ``key_depth`` levels, which realises Gamma / Stab(key_depth)
    while carrying the finer values along.
    """

    def __init__(self, m: int, key_depth: int | None = None):
        self.m = m
        self.key_depth = m if key_depth is None else key_depth
        if not 0 <= self.key_depth <= m:
            raise PortraitError("key depth must lie between 0 and the depth")
        self._key_len = size(self.key_depth)
        self.order = quotient_order(self.key_depth)
        self.name = f"FG/Stab({self.key_depth})"

    def identity(self):
        return Portrait.identity(self.m)

    def mul(self, g, h):
        return pt_mul(g, h)

    def inv(self, g):
        return pt_inv(g)

    def power(self, g, k):
        return pt_pow(g, k)

    def key(self, g):
        if self._key_len == g.labels.size:
            return g.key()
        return g.labels[:self._key_len].tobytes()

    def serialize(self, g) -> str:
        return pt_to_str(g)

    def parse(self, s: str):
        g = pt_from_str(s)
        if g.depth != self.m:
            raise PortraitError(f"expected depth {self.m}, got {g.depth}")
        return g

    def generators(self) -> list[Portrait]:
        return [gen_a(self.m), gen_b(self.m)]

    def describe(self) -> str:
        return f"fabgup:m={self.m}:key={self.key_depth}"
