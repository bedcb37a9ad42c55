"""2-D constraints given by finite forbidden patterns, and their restrictions.

A constraint is a set of arrays over a finite alphabet avoiding every
(shifted) forbidden pattern.  The restriction of a constraint to a finite
index set U is the set of configurations on U that extend to a valid array;
extendability is decided on a bounding box inflated by a configurable
margin, with a fast path when the constraint has a safe symbol.  For the
built-in constraints the box check is exact; for arbitrary user patterns it
is a documented approximation (see ``extendable``).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterator, Optional

from .errors import ParseError
from .grid import Configuration, IndexSet


def _anchor_pattern(pat: Configuration) -> Configuration:
    """Shift a pattern so its raster-last support cell sits at the origin."""
    mi, mj = max(pat.support.cells)
    return Configuration(
        pat.support.shift(-mi, -mj), pat.values
    )


@dataclass(frozen=True)
class Constraint:
    """Alphabet plus anchored forbidden patterns defining a 2-D constraint."""

    alphabet_size: int
    forbidden: tuple[Configuration, ...]
    safe_symbol: Optional[int] = None
    margin: int = -1  # -1: use the max forbidden-pattern extent
    name: str = "custom"

    def __post_init__(self):
        if self.alphabet_size < 2:
            raise ValueError("alphabet must have at least two symbols")
        anchored = []
        ext = 0
        for pat in self.forbidden:
            if len(pat.support) == 0:
                raise ValueError("forbidden patterns must have nonempty support")
            for v in pat.values:
                if not (0 <= v < self.alphabet_size):
                    raise ValueError(f"pattern symbol {v} outside alphabet")
            pat = _anchor_pattern(pat)
            anchored.append(pat)
            rows = [i for (i, _) in pat.support.cells]
            cols = [j for (_, j) in pat.support.cells]
            ext = max(ext, max(rows) - min(rows), max(cols) - min(cols))
        object.__setattr__(self, "forbidden", tuple(anchored))
        if self.margin < 0:
            object.__setattr__(self, "margin", ext)
        if self.safe_symbol is not None:
            if not (0 <= self.safe_symbol < self.alphabet_size):
                raise ValueError("safe symbol outside alphabet")
            for pat in self.forbidden:
                if all(v == self.safe_symbol for v in pat.values):
                    raise ValueError(
                        "declared safe symbol completes a forbidden pattern"
                    )

    @property
    def symbols(self) -> range:
        return range(self.alphabet_size)


def pattern_checks(
    c: Constraint, cells: tuple[tuple[int, int], ...]
) -> list[list[tuple[tuple[int, ...], tuple[int, ...]]]]:
    """Per-cell forbidden-pattern matchers for a fixed raster-sorted support.

    checks[k] lists the patterns whose anchor lands on cells[k] and whose
    support lies entirely inside ``cells``; each entry is (positions, values)
    with positions indexing into ``cells``.  Because patterns are anchored at
    their raster-last cell, every listed position is <= k, so testing
    checks[k] right after assigning cell k catches every violation exactly
    once.
    """
    pos = {cell: k for k, cell in enumerate(cells)}
    checks: list[list[tuple[tuple[int, ...], tuple[int, ...]]]] = [
        [] for _ in cells
    ]
    for k, (i, j) in enumerate(cells):
        for pat in c.forbidden:
            positions = []
            for (q, w) in pat.support.cells:
                p = pos.get((i + q, j + w))
                if p is None:
                    break
                positions.append(p)
            else:
                checks[k].append((tuple(positions), pat.values))
    return checks


def locally_valid(c: Constraint, a: Configuration) -> bool:
    """True iff no forbidden pattern matches anywhere inside a's support."""
    cells = a.support.cells
    checks = pattern_checks(c, cells)
    vals = a.values
    for k in range(len(cells)):
        for positions, pvals in checks[k]:
            if all(vals[p] == v for p, v in zip(positions, pvals)):
                return False
    return True


def _inflated_box(support: IndexSet, margin: int) -> list[tuple[int, int]]:
    cells = support.cells
    imin = min(i for (i, _) in cells) - margin
    imax = max(i for (i, _) in cells) + margin
    jmin = min(j for (_, j) in cells) - margin
    jmax = max(j for (_, j) in cells) + margin
    return [
        (i, j) for i in range(imin, imax + 1) for j in range(jmin, jmax + 1)
    ]


def extendable(c: Constraint, a: Configuration, margin: Optional[int] = None) -> bool:
    """Can ``a`` be completed to a valid configuration on its inflated box?

    The box is the bounding box of the support inflated by ``margin`` cells
    on every side (default: the constraint's margin).  With a safe symbol,
    the safe completion is tried first; otherwise (or if it fails) the free
    cells are filled by backtracking.  A completable box certifies plane
    extendability for the built-in constraints; for arbitrary patterns it is
    a finite approximation controlled by the margin.
    """
    if len(a.support) == 0:
        return True
    m = c.margin if margin is None else margin
    box = _inflated_box(a.support, m)
    free = [cell for cell in box if cell not in a.support]
    all_cells = tuple(sorted(set(box) | set(a.support.cells)))
    values = {cell: a[cell] for cell in a.support.cells}

    if c.safe_symbol is not None:
        padded = dict(values)
        for cell in free:
            padded[cell] = c.safe_symbol
        cfg = Configuration(IndexSet(all_cells), [padded[cl] for cl in all_cells])
        if locally_valid(c, cfg):
            return True

    checks = pattern_checks(c, all_cells)
    fixed = [values.get(cell) for cell in all_cells]

    def ok_at(vals: list, k: int) -> bool:
        for positions, pvals in checks[k]:
            if all(vals[p] == v for p, v in zip(positions, pvals)):
                return False
        return True

    n = len(all_cells)

    def search(k: int, vals: list) -> bool:
        while k < n and fixed[k] is not None:
            vals[k] = fixed[k]
            if not ok_at(vals, k):
                return False
            k += 1
        if k == n:
            return True
        for sym in range(c.alphabet_size):
            vals[k] = sym
            if ok_at(vals, k) and search(k + 1, vals):
                return True
        vals[k] = None
        return False

    return search(0, [None] * n)


@dataclass
class RestrictionSet:
    """All configurations on a support extendable to a valid array.

    Members are listed in raster-lexicographic order of their value strings,
    which fixes variable indexing for everything built on top of them.
    """

    support: IndexSet
    members: tuple[Configuration, ...]
    _index: dict = field(default_factory=dict, repr=False)

    def __post_init__(self):
        self._index = {m.values: k for k, m in enumerate(self.members)}

    def __len__(self) -> int:
        return len(self.members)

    def __iter__(self) -> Iterator[Configuration]:
        return iter(self.members)

    def index_of(self, values: tuple[int, ...]) -> int:
        return self._index[values]

    def __contains__(self, cfg: Configuration) -> bool:
        return cfg.support == self.support and cfg.values in self._index


def enumerate_valid(
    c: Constraint, cells: tuple[tuple[int, int], ...]
) -> Iterator[tuple[int, ...]]:
    """Yield locally valid value tuples on raster-sorted ``cells`` in order."""
    checks = pattern_checks(c, cells)
    n = len(cells)
    vals = [0] * n

    def ok_at(k: int) -> bool:
        for positions, pvals in checks[k]:
            if all(vals[p] == v for p, v in zip(positions, pvals)):
                return False
        return True

    def rec(k: int):
        if k == n:
            yield tuple(vals)
            return
        for sym in range(c.alphabet_size):
            vals[k] = sym
            if ok_at(k):
                yield from rec(k + 1)

    if n == 0:
        yield ()
    else:
        yield from rec(0)


def restriction(c: Constraint, u: IndexSet) -> RestrictionSet:
    """Enumerate the restriction of the constraint to ``u``.

    Backtracks over u's cells in raster order with pattern pruning, then
    filters by extendability.
    """
    members = []
    for vals in enumerate_valid(c, u.cells):
        cfg = Configuration(u, vals)
        if extendable(c, cfg):
            members.append(cfg)
    return RestrictionSet(u, tuple(members))


def _pat(pairs: dict[tuple[int, int], int]) -> Configuration:
    return Configuration(IndexSet(pairs.keys()), pairs)


def builtin_constraint(name: str, params: Optional[list[int]] = None) -> Constraint:
    """Standard constraints by name: kings, rll_d_inf, rll_0_k, nib."""
    params = params or []
    if name == "kings":
        pats = [
            _pat({(0, 0): 1, (0, 1): 1}),
            _pat({(0, 0): 1, (1, 0): 1}),
            _pat({(0, 0): 1, (1, 1): 1}),
            _pat({(0, 1): 1, (1, 0): 1}),
        ]
        return Constraint(2, tuple(pats), safe_symbol=0, name="kings")
    if name == "rll_d_inf":
        if len(params) != 1 or params[0] < 1:
            raise ValueError("rll_d_inf needs one parameter d >= 1")
        d = params[0]
        pats = []
        for g in range(1, d + 1):
            pats.append(_pat({(0, 0): 1, (0, g): 1}))
            pats.append(_pat({(0, 0): 1, (g, 0): 1}))
        return Constraint(2, tuple(pats), safe_symbol=0, name=f"rll_{d}_inf")
    if name == "rll_0_k":
        if len(params) != 1 or params[0] < 1:
            raise ValueError("rll_0_k needs one parameter k >= 1")
        k = params[0]
        horiz = _pat({(0, j): 0 for j in range(k + 1)})
        vert = _pat({(i, 0): 0 for i in range(k + 1)})
        return Constraint(2, (horiz, vert), safe_symbol=1, name=f"rll_0_{k}")
    if name == "nib":
        arity = params[0] if params else 4
        if arity == 4:
            nbrs = [(-1, 0), (0, -1), (0, 1), (1, 0)]
        elif arity == 8:
            nbrs = [
                (i, j) for i in (-1, 0, 1) for j in (-1, 0, 1) if (i, j) != (0, 0)
            ]
        else:
            raise ValueError("nib arity must be 4 or 8")
        pats = []
        for v in (0, 1):
            cells = {(0, 0): v}
            for nb in nbrs:
                cells[nb] = 1 - v
            pats.append(_pat(cells))
        return Constraint(2, tuple(pats), safe_symbol=None, name=f"nib{arity}")
    raise ValueError(f"unknown builtin constraint {name!r}")


def parse_constraint_text(text: str, name: str = "custom") -> Constraint:
    """Parse the constraint definition format.

    One directive per line: ``alphabet = <k>``, ``forbid = (i,j):v ...``,
    optional ``safe = <symbol>`` and ``margin = <m>``; ``#`` starts a comment.
    """
    alphabet = None
    patterns = []
    safe = None
    margin = -1
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ParseError(f"line {lineno}: expected 'key = value', got {raw!r}")
        key, _, rhs = line.partition("=")
        key = key.strip()
        rhs = rhs.strip()
        try:
            if key == "alphabet":
                alphabet = int(rhs)
            elif key == "forbid":
                pairs = {}
                for tok in rhs.split():
                    cell, _, v = tok.partition(":")
                    if not (cell.startswith("(") and cell.endswith(")")) or not v:
                        raise ValueError(tok)
                    i, j = cell[1:-1].split(",")
                    pairs[(int(i), int(j))] = int(v)
                if not pairs:
                    raise ValueError("empty pattern")
                patterns.append(_pat(pairs))
            elif key == "safe":
                safe = int(rhs)
            elif key == "margin":
                margin = int(rhs)
            else:
                raise ParseError(f"line {lineno}: unknown key {key!r}")
        except ParseError:
            raise
        except ValueError as e:
            raise ParseError(f"line {lineno}: cannot parse {raw!r} ({e})") from e
    if alphabet is None:
        raise ParseError("constraint definition is missing 'alphabet = <k>'")
    if not patterns:
        raise ParseError("constraint definition has no 'forbid' lines")
    try:
        return Constraint(
            alphabet, tuple(patterns), safe_symbol=safe, margin=margin, name=name
        )
    except ValueError as e:
        raise ParseError(str(e)) from e


def load_constraint(source: str) -> Constraint:
    """Resolve a constraint source: ``builtin:<name>[:<param>]`` or a file path."""
    if source.startswith("builtin:"):
        parts = source.split(":")[1:]
        name, params = parts[0], [int(p) for p in parts[1:]]
        try:
            return builtin_constraint(name, params)
        except ValueError as e:
            raise ParseError(str(e)) from e
    try:
        with open(source) as fh:
            text = fh.read()
    except OSError as e:
        raise ParseError(f"cannot read constraint file {source!r}: {e}") from e
    return parse_constraint_text(text, name=source)
