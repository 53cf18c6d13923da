"""Counter-based random streams built on the SplitMix64 output function.

Every random quantity in the package is addressed by a 64-bit stream key and
a 1-based counter, so any draw can be regenerated in isolation::

    mix64(z)              SplitMix64 finalizer (Stafford variant 13)
    output(key, n)      = mix64(key + n * GAMMA)           (mod 2**64)
    stream_key(seed, i) = output(seed, i + 1)
    uniform(key, n)     = (output(key, n) >> 11) * 2**-53   in [0, 1)

``output(key, n)`` is the n-th value a SplitMix64 generator seeded with
``key`` would produce, so the streams agree with the reference C generator.
Realization ``i`` of a run with master seed ``s`` reads its potential from the
stream ``stream_key(s, i)``; site ``x`` (1-based) uses output ``x``. The
mixing function is part of the external contract: changing it changes every
output file.
"""

from fractions import Fraction
import math

import numba as nb
import numpy as np

MASK64 = (1 << 64) - 1
GAMMA = 0x9E3779B97F4A7C15
_MUL1 = 0xBF58476D1CE4E5B9
_MUL2 = 0x94D049BB133111EB

_U_GAMMA = np.uint64(GAMMA)
_U_MUL1 = np.uint64(_MUL1)
_U_MUL2 = np.uint64(_MUL2)
_S30 = np.uint64(30)
_S27 = np.uint64(27)
_S31 = np.uint64(31)
_S11 = np.uint64(11)


def mix64(z: int) -> int:
    """Pure-Python SplitMix64 finalizer (reference for the compiled kernels)."""
    z &= MASK64
    z = ((z ^ (z >> 30)) * _MUL1) & MASK64
    z = ((z ^ (z >> 27)) * _MUL2) & MASK64
    return z ^ (z >> 31)


def output(key: int, n: int) -> int:
    return mix64((key + n * GAMMA) & MASK64)


def stream_key(master_seed: int, index: int) -> int:
    """Key of the per-realization stream ``index`` under ``master_seed``."""
    if index < 0:
        raise ValueError("realization index must be non-negative")
    return output(master_seed & MASK64, index + 1)


def uniform(key: int, n: int) -> float:
    return (output(key, n) >> 11) * 2.0**-53


def bernoulli_threshold(prob: float) -> int:
    """Integer cut ``T`` with ``uniform < prob  <=>  (output >> 11) < T``.

    Computed in exact rational arithmetic so the compiled and pure-Python
    paths agree bit for bit.
    """
    if not 0.0 <= prob <= 1.0:
        raise ValueError(f"probability out of range: {prob!r}")
    return math.ceil(Fraction(prob) * 2**53)


def splitmix64(seed: int):
    """Infinite generator of raw SplitMix64 outputs (used by the tests)."""
    n = 1
    while True:
        yield output(seed, n)
        n += 1


@nb.njit(cache=True, nogil=True, inline="always")
def _mix64(z):
    z = (z ^ (z >> _S30)) * _U_MUL1
    z = (z ^ (z >> _S27)) * _U_MUL2
    return z ^ (z >> _S31)


@nb.njit(cache=True, nogil=True)
def _occupancy_kernel(key, threshold, out):
    # out[x - 1] holds site x
    z = key
    for i in range(out.shape[0]):
        z += _U_GAMMA
        out[i] = (_mix64(z) >> _S11) < threshold


@nb.njit(cache=True, nogil=True)
def _geometric_kernel(key, log_p, first, step, out):
    # out[j] = 1 + floor(log(u) / log(p)), u in (0, 1] from output first + j*step
    inv = 1.0 / log_p
    for j in range(out.shape[0]):
        n = np.uint64(first + j * step)
        u = ((_mix64(key + n * _U_GAMMA) >> _S11) + np.uint64(1)) * 1.1102230246251565e-16
        out[j] = 1 + np.int64(math.floor(math.log(u) * inv))


@nb.njit(cache=True, nogil=True)
def _geometric_max_kernel(key, log_p, n):
    inv = 1.0 / log_p
    best = 0
    z = key
    for _ in range(n):
        z += _U_GAMMA
        u = ((_mix64(z) >> _S11) + np.uint64(1)) * 1.1102230246251565e-16
        k = 1 + np.int64(math.floor(math.log(u) * inv))
        if k > best:
            best = k
    return best


def occupancy(key: int, threshold: int, size: int) -> np.ndarray:
    """Boolean array of ``size`` Bernoulli draws from stream ``key``."""
    out = np.empty(size, dtype=np.bool_)
    _occupancy_kernel(np.uint64(key), np.uint64(threshold), out)
    return out


def geometric(key: int, p: float, size: int, first: int = 1, step: int = 1) -> np.ndarray:
    """Geometric lengths on {1, 2, ...} with ``P[K > m] = p**m``.

    Draw ``j`` uses stream output ``first + j*step``; ``step=2`` lets two
    interleaved families share one stream without overlap.
    """
    if not 0.0 < p < 1.0:
        raise ValueError("geometric sampling needs 0 < p < 1")
    out = np.empty(size, dtype=np.int64)
    _geometric_kernel(np.uint64(key), math.log(p), first, step, out)
    return out


def geometric_max(key: int, p: float, n: int) -> int:
    """Maximum of ``n`` geometric draws, identical to ``geometric(key, p, n).max()``."""
    if not 0.0 < p < 1.0:
        raise ValueError("geometric sampling needs 0 < p < 1")
    return int(_geometric_max_kernel(np.uint64(key), math.log(p), n))
