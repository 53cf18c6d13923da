"""Zero-potential runs, the sine-wave bound sequence, and the fixed-n ensemble.

A *zero interval* is a maximal block of consecutive sites with ``V = 0``.
Runs touching a wall count as intervals: the wall supplies the zero boundary
value a sine state needs, exactly like an occupied site would.
"""

from dataclasses import dataclass
import math

import numpy as np

from . import rng
from .lattice import ModelParams, PotentialRealization


@dataclass(frozen=True)
class ZeroInterval:
    """Sites ``x0+1 .. x0+length``; ``x0`` is the left neighbour (0 at the wall)."""

    x0: int
    length: int

    @property
    def sites(self) -> range:
        return range(self.x0 + 1, self.x0 + self.length + 1)


@dataclass(frozen=True, eq=False)
class ZeroIntervalSet:
    x0: np.ndarray
    lengths: np.ndarray
    L: int | None = None

    def __post_init__(self):
        for name in ("x0", "lengths"):
            arr = np.ascontiguousarray(getattr(self, name), dtype=np.int64)
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)
        if self.x0.shape != self.lengths.shape:
            raise ValueError("x0 and lengths must have equal shapes")

    @property
    def n(self) -> int:
        return int(self.lengths.shape[0])

    @property
    def ell0(self) -> int:
        return int(self.lengths.max()) if self.n else 0

    @property
    def Lprime(self) -> int:
        return int(self.lengths.sum())

    def __len__(self):
        return self.n

    def __getitem__(self, i) -> ZeroInterval:
        return ZeroInterval(int(self.x0[i]), int(self.lengths[i]))

    def __iter__(self):
        for i in range(self.n):
            yield self[i]


@dataclass(frozen=True, eq=False)
class USequence:
    """Sorted sine-wave energy bounds ``w^2 pi^2 / (l+1)^2`` with provenance."""

    energies: np.ndarray
    interval_ids: np.ndarray
    frequencies: np.ndarray

    def __len__(self):
        return int(self.energies.shape[0])


def scan_zero_intervals(v) -> ZeroIntervalSet:
    """All maximal zero runs, left to right.

    Accepts a :class:`PotentialRealization` or a raw boolean occupancy array.
    """
    occ = v.occupancy if isinstance(v, PotentialRealization) else np.asarray(v, dtype=np.bool_)
    L = occ.shape[0]
    # pad with occupied walls; edges of the zero indicator mark run starts/ends
    zero = np.concatenate(([0], (~occ).view(np.int8), [0])).astype(np.int8)
    edges = np.diff(zero)
    starts = np.flatnonzero(edges == 1)   # 0-based index of first zero site
    ends = np.flatnonzero(edges == -1)    # 0-based index one past the last zero site
    return ZeroIntervalSet(x0=starts, lengths=ends - starts, L=L)


def u_energy(ell, w):
    """``w^2 pi^2 / (ell+1)^2``; written as ``(pi * (w/(ell+1)))**2`` so equal ratios tie exactly."""
    r = np.asarray(w, dtype=np.float64) / (np.asarray(ell, dtype=np.float64) + 1.0)
    return (math.pi * r) ** 2


def build_U_sequence(s: ZeroIntervalSet) -> USequence:
    """Merged non-decreasing multiset of all sine-wave bounds.

    Interval ``i`` of length ``l`` contributes frequencies ``w = 1..l``, so the
    result has exactly ``s.Lprime`` entries. Ties are broken by (interval, w).
    """
    lengths = s.lengths
    ids = np.repeat(np.arange(s.n, dtype=np.int64), lengths)
    offsets = np.repeat(np.cumsum(lengths) - lengths, lengths)
    w = np.arange(ids.shape[0], dtype=np.int64) - offsets + 1
    energies = u_energy(lengths[ids], w)
    order = np.lexsort((w, ids, energies))
    return USequence(energies[order], ids[order], w[order])


def count_longer_than(s: ZeroIntervalSet, Y: float) -> int:
    """``#{I : |I| > Y}``."""
    return int(np.count_nonzero(s.lengths > Y))


def geometric_survival(m: int, p: float) -> float:
    """``P[|I| > m] = p**m`` for geometric interval lengths."""
    if m < 0:
        raise ValueError("m must be non-negative")
    return float(p) ** int(m)


def sample_fixed_n_intervals(n: int, p: float, seed: int, index: int = 0) -> ZeroIntervalSet:
    """``n`` i.i.d. geometric lengths laid out with single occupied separators.

    ``P[|I| = k] = p**(k-1) (1-p)`` for ``k >= 1``. The implied lattice size
    ``sum(lengths) + n - 1`` is random.
    """
    if n < 1:
        raise ValueError("n must be at least 1")
    lengths = rng.geometric(rng.stream_key(seed, index), p, n)
    x0 = np.empty(n, dtype=np.int64)
    x0[0] = 0
    np.cumsum(lengths[:-1] + 1, out=x0[1:])
    return ZeroIntervalSet(x0=x0, lengths=lengths, L=int(lengths.sum()) + n - 1)


def longest_fixed_n_interval(n: int, p: float, seed: int, index: int = 0) -> int:
    """``ell0`` of :func:`sample_fixed_n_intervals` without materializing the lengths."""
    return rng.geometric_max(rng.stream_key(seed, index), p, n)


def sample_fixed_n_potential(params: ModelParams, n: int, seed: int, index: int = 0) -> PotentialRealization:
    """Lattice with exactly ``n`` zero runs and Bernoulli-faithful barriers.

    Each block is an occupied run of geometric(q) length followed by a zero run
    of geometric(p) length, which is the run structure of a Bernoulli sequence
    conditioned on ``n`` zero runs. Mean size is ``n / (p q)``. Zero runs use
    the odd outputs of the stream, barriers the even ones.
    """
    if n < 1:
        raise ValueError("n must be at least 1")
    if not 0.0 < params.p < 1.0:
        raise ValueError("fixed-n ensemble needs 0 < p < 1")
    key = rng.stream_key(seed, index)
    zeros = rng.geometric(key, params.p, n, first=1, step=2)
    barriers = rng.geometric(key, params.q, n, first=2, step=2)
    blocks = np.empty(2 * n, dtype=np.int64)
    blocks[0::2] = barriers
    blocks[1::2] = zeros
    occ = np.repeat(np.tile([True, False], n), blocks)
    return PotentialRealization(params.with_L(occ.shape[0]), occ, seed, index)


def interval_density_check(v: PotentialRealization) -> float:
    """``n / L``; tends to ``p q`` as ``L`` grows (a run starts where 0 follows b)."""
    return scan_zero_intervals(v).n / v.params.L
