"""Bit-stuffing encoders: validation, seeded sampling, windowed sampling, rate estimation.

An encoder is a neighbor set of already-written offsets, a table of coin
distributions conditioned on the neighbor-set contents, and a boundary
distribution used for the cells whose neighbor window pokes outside the
array.  Arrays are written in raster order; every stochastic operation
takes an explicit seed and is reproducible (numpy ``default_rng`` /
``SeedSequence`` streams, chunked deterministically).
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Optional

import numpy as np

from . import grid
from .constraint import Constraint, extendable, locally_valid, restriction
from .errors import ValidationError
from .grid import Configuration, IndexSet

# Contexts are looked up through a dense table indexed by base-|alphabet|
# codes of the neighbor values; beyond this many codes we refuse (the table
# would not fit) rather than fall back to something slow and untested.
MAX_CONTEXT_CODES = 1 << 22


@dataclass(frozen=True)
class BoundaryDist:
    """Boundary law: constant fill, or explicit per-(M, N) tables."""

    kind: str
    fill_symbol: Optional[int] = None
    tables: Optional[dict] = None  # (M, N) -> list of (Configuration, prob)

    @staticmethod
    def fill(symbol: int) -> "BoundaryDist":
        return BoundaryDist(kind="fill", fill_symbol=int(symbol))

    @staticmethod
    def explicit(tables: dict) -> "BoundaryDist":
        return BoundaryDist(kind="explicit", tables=dict(tables))


@dataclass(frozen=True, eq=False)
class EncoderSpec:
    """Neighbor set, per-context coin table, boundary distribution.

    ``mu`` maps a context value tuple (neighbor values in raster order of
    ``psi``) to a probability vector over the alphabet.
    """

    psi: IndexSet
    mu: dict
    boundary: BoundaryDist

    def coin_probs(self, ctx: tuple[int, ...]) -> tuple[float, ...]:
        return self.mu[ctx]


@dataclass
class ValidationReport:
    ok: bool
    problems: list[str]

    def __str__(self) -> str:
        if self.ok:
            return "encoder valid"
        return "encoder invalid:\n" + "\n".join(f"  - {p}" for p in self.problems)


@dataclass
class SampleArray:
    m: int
    n: int
    grid: np.ndarray  # (M, N) int8, raster-generated
    seed: object

    def config(self) -> Configuration:
        support = grid.parallelogram(self.m, self.n)
        return Configuration(support, [int(self.grid[i, j]) for (i, j) in support.cells])


@dataclass
class RateEstimate:
    mean: float
    stderr: float
    trials: int
    m: int
    n: int
    per_trial: np.ndarray


def entropy_bits(probs) -> float:
    """Shannon entropy in bits, with 0 * log(0) = 0."""
    h = 0.0
    for p in probs:
        if p > 0.0:
            h -= p * math.log2(p)
    return h


def validate_encoder(c: Constraint, e: EncoderSpec) -> ValidationReport:
    """Check the encoder against the constraint.

    Conditions: the neighbor set precedes the origin in raster order; every
    admissible context has a proper coin distribution; every forbidden
    pattern anchored at its raster-last cell fits inside the neighbor set;
    and no positive-probability symbol completes a forbidden pattern inside
    the context window.  Together these guarantee that raster writing can
    never violate the constraint, whatever was written before.  The check is
    sufficient, not necessary: encoders that are safe for subtler reasons
    are rejected.
    """
    problems = []
    for cell in e.psi.cells:
        if not (cell < (0, 0)):
            problems.append(f"neighbor offset {cell} does not precede the origin")

    contexts = restriction(c, e.psi)
    for ctx_cfg in contexts:
        ctx = ctx_cfg.values
        if ctx not in e.mu:
            problems.append(f"context {ctx} has no coin distribution")
            continue
        probs = e.mu[ctx]
        if len(probs) != c.alphabet_size:
            problems.append(f"context {ctx}: {len(probs)} probabilities for "
                            f"alphabet of {c.alphabet_size}")
            continue
        if any(p < 0.0 or p > 1.0 for p in probs):
            problems.append(f"context {ctx}: probability outside [0, 1]")
        if abs(sum(probs) - 1.0) > 1e-12:
            problems.append(f"context {ctx}: probabilities sum to {sum(probs)!r}")
    known = {cfg.values for cfg in contexts}
    for ctx in e.mu:
        if ctx not in known:
            problems.append(f"coin table lists inadmissible context {ctx}")

    psi_cells = set(e.psi.cells)
    for pat in c.forbidden:
        rest = [cell for cell in pat.support.cells if cell != (0, 0)]
        if not all(cell in psi_cells for cell in rest):
            problems.append(
                f"forbidden pattern on {pat.support.cells} is not covered by the "
                f"neighbor set (missing {[q for q in rest if q not in psi_cells]})"
            )
    if not problems:
        # Coin support check: a positive-probability symbol must never be
        # the anchor of a completed forbidden pattern inside the window.
        for ctx_cfg in contexts:
            ctx = ctx_cfg.values
            for w, p in enumerate(e.mu[ctx]):
                if p <= 0.0:
                    continue
                for pat in c.forbidden:
                    match = True
                    for cell, v in zip(pat.support.cells, pat.values):
                        got = w if cell == (0, 0) else ctx_cfg[cell]
                        if got != v:
                            match = False
                            break
                    if match:
                        problems.append(
                            f"mu({w}|{ctx}) = {p} completes forbidden pattern "
                            f"on {pat.support.cells}"
                        )

    if e.boundary.kind == "fill":
        if not (0 <= e.boundary.fill_symbol < c.alphabet_size):
            problems.append(f"fill symbol {e.boundary.fill_symbol} outside alphabet")
    elif e.boundary.kind == "explicit":
        for (m, n), entries in e.boundary.tables.items():
            total = sum(p for _, p in entries)
            if abs(total - 1.0) > 1e-12 or any(p < 0 for _, p in entries):
                problems.append(f"explicit boundary table for {(m, n)} is not a "
                                f"distribution (total {total!r})")
    else:
        problems.append(f"unknown boundary kind {e.boundary.kind!r}")

    return ValidationReport(ok=not problems, problems=problems)


def ensure_valid(c: Constraint, e: EncoderSpec) -> None:
    report = validate_encoder(c, e)
    if not report.ok:
        raise ValidationError(str(report))


class _ContextTables:
    """Dense per-context lookup tables keyed by base-|alphabet| codes."""

    def __init__(self, c: Constraint, e: EncoderSpec):
        self.psi_cells = e.psi.cells
        self.base = c.alphabet_size
        k = len(self.psi_cells)
        ncodes = self.base ** k
        if ncodes > MAX_CONTEXT_CODES:
            raise ValidationError(
                f"neighbor set too large for dense context tables "
                f"({self.base}^{k} codes)"
            )
        self.weights = np.array(
            [self.base ** (k - 1 - i) for i in range(k)], dtype=np.int64
        )
        self.cum = np.full((ncodes, self.base), np.inf)
        self.ent = np.zeros(ncodes)
        self.known = np.zeros(ncodes, dtype=bool)
        for ctx, probs in e.mu.items():
            code = int(sum(v * w for v, w in zip(ctx, self.weights)))
            self.cum[code] = np.cumsum(probs)
            self.ent[code] = entropy_bits(probs)
            self.known[code] = True

    def codes(self, arrays: np.ndarray, i: int, j: int) -> np.ndarray:
        k = len(self.psi_cells)
        out = np.zeros(arrays.shape[0], dtype=np.int64)
        for idx in range(k):
            di, dj = self.psi_cells[idx]
            out += arrays[:, i + di, j + dj].astype(np.int64) * self.weights[idx]
        return out


def batch_locally_valid(c: Constraint, arrays: np.ndarray) -> np.ndarray:
    """Vectorized constraint check; returns a boolean per trial."""
    trials, m, n = arrays.shape
    ok = np.ones(trials, dtype=bool)
    for pat in c.forbidden:
        cells = pat.support.cells
        qmin = min(q for (q, _) in cells)
        wmin = min(w for (_, w) in cells)
        wmax = max(w for (_, w) in cells)
        i0 = -qmin
        j0 = -min(wmin, 0)
        ni = m - i0
        nj = n - j0 - max(wmax, 0)
        if ni <= 0 or nj <= 0:
            continue
        hit = np.ones((trials, ni, nj), dtype=bool)
        for (q, w), v in zip(cells, pat.values):
            hit &= arrays[:, i0 + q : i0 + q + ni, j0 + w : j0 + w + nj] == v
        ok &= ~hit.any(axis=(1, 2))
    return ok


def _boundary_support(c: Constraint, e: EncoderSpec, m: int, n: int):
    box = grid.parallelogram(m, n)
    bd = grid.boundary(box, e.psi)
    inter = grid.interior(box, e.psi)
    return box, bd, inter


def _check_boundary_config(c: Constraint, cfg: Configuration, what: str) -> None:
    if not locally_valid(c, cfg):
        raise ValidationError(f"{what} boundary violates the constraint")
    if not extendable(c, cfg):
        raise ValidationError(f"{what} boundary is not extendable")


def _fill_boundary(
    c: Constraint, e: EncoderSpec, arrays: np.ndarray, bd: IndexSet, rng
) -> None:
    m, n = arrays.shape[1:]
    if e.boundary.kind == "fill":
        sym = e.boundary.fill_symbol
        # The all-safe boundary is valid by construction; anything else gets
        # the full check once per call.
        if sym != c.safe_symbol and len(bd) > 0:
            cfg = Configuration(bd, [sym] * len(bd))
            _check_boundary_config(c, cfg, f"fill:{sym}")
        for (i, j) in bd.cells:
            arrays[:, i, j] = sym
        return
    entries = e.boundary.tables.get((m, n))
    if entries is None:
        raise ValidationError(f"no explicit boundary table for {(m, n)}")
    opts = []
    probs = []
    for cfg, p in entries:
        if cfg.support != bd:
            raise ValidationError(
                f"explicit boundary configuration support does not match the "
                f"{(m, n)} boundary"
            )
        _check_boundary_config(c, cfg, "explicit")
        opts.append(cfg.values)
        probs.append(p)
    bvals = np.array(opts, dtype=np.int8)
    choice = rng.choice(len(opts), size=arrays.shape[0], p=np.array(probs))
    rows = np.array([i for (i, _) in bd.cells])
    cols = np.array([j for (_, j) in bd.cells])
    if len(bd) > 0:
        arrays[:, rows, cols] = bvals[choice]


def _sample_batch_rng(
    c: Constraint,
    e: EncoderSpec,
    m: int,
    n: int,
    trials: int,
    rng,
    check: bool = True,
) -> np.ndarray:
    tables = _ContextTables(c, e)
    _, bd, inter = _boundary_support(c, e, m, n)
    arrays = np.zeros((trials, m, n), dtype=np.int8)
    _fill_boundary(c, e, arrays, bd, rng)
    for (i, j) in inter.cells:
        codes = tables.codes(arrays, i, j)
        if not tables.known[codes].all():
            raise ValidationError(
                f"cell {(i, j)} saw a context with no coin distribution"
            )
        u = rng.random(trials)
        sym = (u[:, None] >= tables.cum[codes]).sum(axis=1)
        arrays[:, i, j] = np.minimum(sym, c.alphabet_size - 1)
    if check and not batch_locally_valid(c, arrays).all():
        raise ValidationError("sampled array violates the constraint")
    return arrays


def sample_batch(
    c: Constraint, e: EncoderSpec, m: int, n: int, trials: int, seed
) -> np.ndarray:
    """Sample ``trials`` arrays; shape (trials, M, N); reproducible per seed."""
    ensure_valid(c, e)
    rng = np.random.default_rng(seed)
    return _sample_batch_rng(c, e, m, n, trials, rng)


def sample(c: Constraint, e: EncoderSpec, m: int, n: int, seed) -> SampleArray:
    """Sample one array: boundary from the boundary law, interior in raster order."""
    return SampleArray(m, n, sample_batch(c, e, m, n, 1, seed)[0], seed)


def sample_quasistationary_batch(
    c: Constraint, e: EncoderSpec, m: int, n: int, k: int, trials: int, seed
) -> np.ndarray:
    """Windowed sampling: draw (M+k-1, N+k-1) arrays and a uniform window shift.

    For k = 1 this is plain sampling.  The uniform window mixture makes
    shifted event probabilities differ by at most (|di| + |dj|) / k.
    """
    if k < 1:
        raise ValueError("window parameter k must be >= 1")
    ensure_valid(c, e)
    rng = np.random.default_rng(seed)
    if k == 1:
        return _sample_batch_rng(c, e, m, n, trials, rng)
    big = _sample_batch_rng(c, e, m + k - 1, n + k - 1, trials, rng)
    offs = rng.integers(0, k, size=(trials, 2))
    ti = np.arange(trials)[:, None, None]
    ii = offs[:, 0][:, None, None] + np.arange(m)[None, :, None]
    jj = offs[:, 1][:, None, None] + np.arange(n)[None, None, :]
    return big[ti, ii, jj]


def sample_quasistationary(
    c: Constraint, e: EncoderSpec, m: int, n: int, k: int, seed
) -> SampleArray:
    return SampleArray(
        m, n, sample_quasistationary_batch(c, e, m, n, k, 1, seed)[0], seed
    )


def coin_entropy_sums(c: Constraint, e: EncoderSpec, arrays: np.ndarray) -> np.ndarray:
    """Per-trial sum of coin entropies over interior cells of each array."""
    trials, m, n = arrays.shape
    tables = _ContextTables(c, e)
    _, _, inter = _boundary_support(c, e, m, n)
    out = np.zeros(trials)
    for (i, j) in inter.cells:
        codes = tables.codes(arrays, i, j)
        out += tables.ent[codes]
    return out


def empirical_rate(
    c: Constraint,
    e: EncoderSpec,
    m: int,
    n: int,
    trials: int,
    seed,
    quasi_k: Optional[int] = None,
    threads: int = 1,
    chunk: int = 16,
) -> RateEstimate:
    """Monte Carlo rate estimate: mean per-cell coin entropy over sampled arrays.

    Per trial the estimator averages the entropy of each interior cell's
    coin given its realized context, normalized by M*N; its expectation is
    exactly the conditional entropy of the interior given the boundary over
    M*N (entropy chain rule).  Trials are split into fixed-size chunks with
    seeds spawned from ``seed``, so results do not depend on ``threads``.
    """
    ensure_valid(c, e)
    nchunks = (trials + chunk - 1) // chunk
    seeds = np.random.SeedSequence(seed).spawn(nchunks)
    sizes = [min(chunk, trials - i * chunk) for i in range(nchunks)]

    def run(idx: int) -> np.ndarray:
        rng = np.random.default_rng(seeds[idx])
        if quasi_k is None or quasi_k == 1:
            arrays = _sample_batch_rng(c, e, m, n, sizes[idx], rng)
        else:
            big = _sample_batch_rng(
                c, e, m + quasi_k - 1, n + quasi_k - 1, sizes[idx], rng
            )
            offs = rng.integers(0, quasi_k, size=(sizes[idx], 2))
            ti = np.arange(sizes[idx])[:, None, None]
            ii = offs[:, 0][:, None, None] + np.arange(m)[None, :, None]
            jj = offs[:, 1][:, None, None] + np.arange(n)[None, None, :]
            arrays = big[ti, ii, jj]
        return coin_entropy_sums(c, e, arrays) / (m * n)

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            parts = list(pool.map(run, range(nchunks)))
    else:
        parts = [run(i) for i in range(nchunks)]
    per_trial = np.concatenate(parts)
    mean = float(per_trial.mean())
    stderr = float(per_trial.std(ddof=1) / math.sqrt(trials)) if trials > 1 else 0.0
    return RateEstimate(mean, stderr, trials, m, n, per_trial)
