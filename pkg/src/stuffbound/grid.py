"""Exact integer geometry on Z^2: index sets, configurations, shifts, boundaries.

Indexes are plain ``(i, j)`` tuples (row, column).  The raster order used
everywhere is the natural tuple order: ``(i', j') < (i, j)`` iff ``i' < i``,
or ``i' == i`` and ``j' < j``.  All containers here are immutable and
hashable, so they can be shared freely and used as dict keys.
"""

from __future__ import annotations

from typing import Iterable, Iterator, Optional


class IndexSet:
    """Immutable finite subset of Z^2 with O(1) membership and raster iteration."""

    __slots__ = ("_set", "_sorted", "_hash")

    def __init__(self, members: Iterable[tuple[int, int]] = ()):
        cells = []
        for m in members:
            i, j = m
            cells.append((int(i), int(j)))
        self._set = frozenset(cells)
        self._sorted = tuple(sorted(self._set))
        self._hash = hash(self._set)

    @property
    def cells(self) -> tuple[tuple[int, int], ...]:
        """Members in raster order."""
        return self._sorted

    def __contains__(self, idx) -> bool:
        return idx in self._set

    def __iter__(self) -> Iterator[tuple[int, int]]:
        return iter(self._sorted)

    def __len__(self) -> int:
        return len(self._set)

    def __eq__(self, other) -> bool:
        return isinstance(other, IndexSet) and self._set == other._set

    def __hash__(self) -> int:
        return self._hash

    def __le__(self, other: "IndexSet") -> bool:
        return self._set <= other._set

    def __repr__(self) -> str:
        return f"IndexSet({list(self._sorted)!r})"

    def shift(self, di: int, dj: int) -> "IndexSet":
        return IndexSet((i + di, j + dj) for (i, j) in self._sorted)

    def union(self, other: "IndexSet") -> "IndexSet":
        return IndexSet(self._set | other._set)

    def difference(self, other: "IndexSet") -> "IndexSet":
        return IndexSet(self._set - other._set)

    def issubset(self, other: "IndexSet") -> bool:
        return self._set <= other._set


class Configuration:
    """Immutable assignment of symbols to the cells of an IndexSet.

    Values are stored as a tuple aligned with the raster order of the
    support, which makes configurations hashable and gives every set of
    configurations on a common support a canonical "value string" order.
    """

    __slots__ = ("support", "values", "_lookup", "_hash")

    def __init__(self, support: IndexSet, values):
        self.support = support
        if isinstance(values, dict):
            if set(values.keys()) != set(support.cells):
                raise ValueError("values must be defined exactly on the support")
            vals = tuple(int(values[c]) for c in support.cells)
        else:
            vals = tuple(int(v) for v in values)
            if len(vals) != len(support):
                raise ValueError(
                    f"got {len(vals)} values for support of size {len(support)}"
                )
        self.values = vals
        self._lookup = dict(zip(support.cells, vals))
        self._hash = hash((support, vals))

    def __getitem__(self, idx: tuple[int, int]) -> int:
        return self._lookup[idx]

    def get(self, idx, default=None):
        return self._lookup.get(idx, default)

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, Configuration)
            and self.support == other.support
            and self.values == other.values
        )

    def __hash__(self) -> int:
        return self._hash

    def __len__(self) -> int:
        return len(self.values)

    def __repr__(self) -> str:
        pairs = ", ".join(f"{c}:{v}" for c, v in zip(self.support.cells, self.values))
        return f"Configuration({{{pairs}}})"


EMPTY_SET = IndexSet()
EMPTY_CONFIG = Configuration(EMPTY_SET, ())


def parallelogram_cells(r: int, s: int, t: int) -> list[tuple[int, int]]:
    # Row i covers the half-open column range [-t*i, s - t*i).
    return [(i, j) for i in range(r) for j in range(-t * i, s - t * i)]


def parallelogram(r: int, s: int, t: int = 0) -> IndexSet:
    """Sheared parallelogram {(i, j) : 0 <= i < r, 0 <= t*i + j < s}.

    ``t = 0`` gives the plain r x s rectangle anchored at the origin.
    """
    if r <= 0 or s <= 0:
        raise ValueError(f"parallelogram needs r, s >= 1 (got r={r}, s={s})")
    if t < 0:
        raise ValueError(f"shear t must be nonnegative (got t={t})")
    return IndexSet(parallelogram_cells(r, s, t))


def shift_set(di: int, dj: int, u: IndexSet) -> IndexSet:
    return u.shift(di, dj)


def shift_config(di: int, dj: int, a: Configuration) -> Configuration:
    return Configuration(a.support.shift(di, dj), a.values)


def restrict(a: Configuration, p: IndexSet) -> Configuration:
    """Restriction of ``a`` to ``p``; requires p to be inside a's support."""
    if not p.issubset(a.support):
        missing = [c for c in p if c not in a.support]
        raise ValueError(f"restriction target escapes the support at {missing[:4]}")
    return Configuration(p, tuple(a[c] for c in p.cells))


def context_at(di: int, dj: int, a: Configuration, p: IndexSet) -> Configuration:
    """Read ``a`` through the window ``p`` anchored at ``(di, dj)``.

    The result lives on ``p`` itself: result[(q, w)] = a[(q + di, w + dj)].
    Equivalent to shifting ``a`` so that (di, dj) becomes the origin and
    restricting to ``p``.
    """
    vals = []
    for (q, w) in p.cells:
        cell = (q + di, w + dj)
        if cell not in a.support:
            raise ValueError(
                f"window anchored at {(di, dj)} escapes the support at {cell}"
            )
        vals.append(a[cell])
    return Configuration(p, tuple(vals))


def boundary(u: IndexSet, p: IndexSet) -> IndexSet:
    """Cells of ``u`` whose ``p``-window pokes outside ``u``."""
    out = []
    for (i, j) in u.cells:
        for (q, w) in p.cells:
            if (i + q, j + w) not in u:
                out.append((i, j))
                break
    return IndexSet(out)


def interior(u: IndexSet, p: IndexSet) -> IndexSet:
    """Cells of ``u`` whose ``p``-window stays inside ``u`` (complement of boundary)."""
    out = []
    for (i, j) in u.cells:
        if all((i + q, j + w) in u for (q, w) in p.cells):
            out.append((i, j))
    return IndexSet(out)


def largest_covering_shift(
    r: int, s: int, t: int, p: IndexSet
) -> Optional[tuple[int, int]]:
    """Raster-largest shift of the (r, s, t) parallelogram covering p and the origin.

    Returns the largest (di, dj) such that every cell of ``p`` plus (0, 0)
    lies inside the shifted parallelogram, or None when no shift works
    (the parallelogram is too small for the window).
    """
    if r <= 0 or s <= 0 or t < 0:
        raise ValueError(f"invalid parallelogram parameters r={r}, s={s}, t={t}")
    cells = parallelogram_cells(r, s, t)
    targets = list(p.cells) + [(0, 0)]
    # (di, dj) works iff q - (di, dj) is in the parallelogram for every target q,
    # so the candidate set is the intersection of the reflected target shifts.
    candidates = {(targets[0][0] - i, targets[0][1] - j) for (i, j) in cells}
    for q in targets[1:]:
        candidates &= {(q[0] - i, q[1] - j) for (i, j) in cells}
        if not candidates:
            return None
    return max(candidates) if candidates else None
