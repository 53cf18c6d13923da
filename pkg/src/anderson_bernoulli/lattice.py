"""Bernoulli potentials and the tridiagonal Schroedinger operator on 1..L.

The lattice has interior sites ``x = 1..L``; sites 0 and L+1 are Dirichlet
walls and are never stored. Arrays are 0-based, so ``occupancy[x - 1]`` is
site ``x``. A site is *occupied* when ``V(x) = b``.
"""

from dataclasses import dataclass, field
import math

import numpy as np

from . import rng


@dataclass(frozen=True)
class ModelParams:
    """Model parameters.

    ``p`` is the probability of a zero-potential site and ``q = 1 - p`` the
    probability of height ``b``. ``p = 1`` is accepted as the degenerate
    free lattice; ``p = 0`` is rejected.
    """

    L: int
    p: float
    b: float
    q: float = field(init=False)

    def __post_init__(self):
        if isinstance(self.L, bool) or int(self.L) != self.L or self.L < 1:
            raise ValueError(f"L must be a positive integer, got {self.L!r}")
        if not (0.0 < self.p <= 1.0):
            raise ValueError(f"p must satisfy 0 < p <= 1, got {self.p!r}")
        if not (self.b > 0.0):
            raise ValueError(f"b must be positive, got {self.b!r}")
        object.__setattr__(self, "L", int(self.L))
        object.__setattr__(self, "p", float(self.p))
        object.__setattr__(self, "b", float(self.b))
        object.__setattr__(self, "q", 1.0 - self.p)

    @property
    def spectral_bound(self) -> float:
        """Upper Gershgorin bound ``4 + b``; the spectrum lies in [0, 4 + b]."""
        return 4.0 + self.b

    def with_L(self, L: int) -> "ModelParams":
        return ModelParams(L=L, p=self.p, b=self.b)


@dataclass(frozen=True, eq=False)
class PotentialRealization:
    params: ModelParams
    occupancy: np.ndarray
    seed: int
    realization_index: int

    def __post_init__(self):
        occ = np.asarray(self.occupancy, dtype=np.bool_)
        if occ.ndim != 1 or occ.shape[0] != self.params.L:
            raise ValueError("occupancy length must equal params.L")
        occ.setflags(write=False)
        object.__setattr__(self, "occupancy", occ)

    @property
    def potential(self) -> np.ndarray:
        return np.where(self.occupancy, self.params.b, 0.0)

    @classmethod
    def from_pattern(cls, pattern, b: float, p: float = 0.5, seed: int = 0, index: int = 0):
        """Build a fixed realization from a 0/1 (or 0/b) pattern, for crafted cases."""
        occ = np.asarray(pattern) != 0
        return cls(ModelParams(L=occ.shape[0], p=p, b=b), occ, seed, index)


@dataclass(frozen=True)
class StreamingPotential:
    """A realization that is never materialized.

    Sites are regenerated from the counter-based stream on demand, so the
    streaming eigenvalue counter runs in O(1) memory at any ``L``.
    """

    params: ModelParams
    seed: int
    realization_index: int = 0

    @property
    def key(self) -> int:
        return rng.stream_key(self.seed, self.realization_index)

    @property
    def threshold(self) -> int:
        return rng.bernoulli_threshold(self.params.q)

    def materialize(self) -> PotentialRealization:
        return sample_potential(self.params, self.seed, self.realization_index)


def sample_potential(params: ModelParams, seed: int, index: int = 0) -> PotentialRealization:
    """Sample one Bernoulli potential; a pure function of ``(params, seed, index)``."""
    key = rng.stream_key(seed, index)
    occ = rng.occupancy(key, rng.bernoulli_threshold(params.q), params.L)
    return PotentialRealization(params, occ, seed, index)


@dataclass(frozen=True, eq=False)
class TridiagonalOperator:
    """``H = -Delta + V`` with Dirichlet walls; off-diagonals are all -1."""

    diag: np.ndarray
    b: float

    def __post_init__(self):
        d = np.ascontiguousarray(self.diag, dtype=np.float64)
        d.setflags(write=False)
        object.__setattr__(self, "diag", d)

    @property
    def L(self) -> int:
        return self.diag.shape[0]

    @property
    def offdiag(self) -> np.ndarray:
        return np.full(max(self.L - 1, 0), -1.0)

    @property
    def spectral_bound(self) -> float:
        return 4.0 + self.b

    def to_dense(self) -> np.ndarray:
        n = self.L
        m = np.diag(self.diag.copy())
        if n > 1:
            idx = np.arange(n - 1)
            m[idx, idx + 1] = -1.0
            m[idx + 1, idx] = -1.0
        return m

    @classmethod
    def free(cls, L: int, b: float = 1.0) -> "TridiagonalOperator":
        """Free Dirichlet Laplacian on ``L`` sites (``b`` only sets the Gershgorin bound)."""
        return cls(np.full(L, 2.0), b)


def build_hamiltonian(v: PotentialRealization) -> TridiagonalOperator:
    b = v.params.b
    return TridiagonalOperator(2.0 + b * v.occupancy.astype(np.float64), b)


def apply(h: TridiagonalOperator, f) -> np.ndarray:
    """Matrix-vector product ``(Hf)(x) = diag[x] f(x) - f(x-1) - f(x+1)``, f(0) = f(L+1) = 0."""
    f = np.asarray(f, dtype=np.float64)
    if f.shape != (h.L,):
        raise ValueError(f"vector of shape {f.shape} does not match operator size {h.L}")
    out = h.diag * f
    out[1:] -= f[:-1]
    out[:-1] -= f[1:]
    return out


def rayleigh(h: TridiagonalOperator, f) -> float:
    f = np.asarray(f, dtype=np.float64)
    norm2 = float(f @ f)
    if norm2 == 0.0 or not math.isfinite(norm2):
        raise ValueError("Rayleigh quotient of a zero (or non-finite) vector")
    return float(f @ apply(h, f)) / norm2
