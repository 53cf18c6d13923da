"""Eigenvalue counting, bisection and a dense oracle for the lattice operator.

``count_below`` uses Sylvester inertia: the number of negative pivots in the
LDL^T factorization of ``H - eps*I`` equals the number of eigenvalues below
``eps``. For a tridiagonal matrix with unit off-diagonals the pivots obey::

    d_1 = diag[1] - eps,     d_x = (diag[x] - eps) - 1 / d_{x-1}

Pivots with ``|d| < mu*(4+b)`` are replaced by ``+mu*(4+b)``. That is the
pivot sequence of a shift lowered by O(mu), so an eigenvalue sitting exactly
at ``eps`` is *not* counted, matching the strict inequality ``E_k < eps``.

The dense oracle is an implicit-shift QL iteration, so it shares no code path
with the inertia counter it is used to check.
"""

from dataclasses import dataclass
import math

import numba as nb
import numpy as np
from scipy.linalg import eigh_tridiagonal

from . import rng
from .lattice import StreamingPotential, TridiagonalOperator, apply

MACHINE_EPS = float(np.finfo(np.float64).eps)
DEFAULT_TOL = 1e-10
DEFAULT_ORACLE_LIMIT = 5000


class OracleLimitError(ValueError):
    """Dense oracle requested beyond its configured size limit."""


class ConvergenceError(RuntimeError):
    pass


@dataclass(frozen=True)
class EigenCount:
    epsilon: float
    count: int
    L: int


@dataclass(frozen=True, eq=False)
class SpectrumSlice:
    """Sorted eigenvalues E_1 <= ... <= E_k.

    ``lower``/``upper`` are the final bisection brackets (``None`` for the
    dense method); ``vectors[:, i]`` is the eigenvector of ``eigenvalues[i]``
    when requested.
    """

    eigenvalues: np.ndarray
    tolerance: float
    method: str
    lower: np.ndarray | None = None
    upper: np.ndarray | None = None
    vectors: np.ndarray | None = None

    def __len__(self):
        return self.eigenvalues.shape[0]


@nb.njit(cache=True, nogil=True)
def _count_diag(diag, tiny, eps, counts):
    m = eps.shape[0]
    d = np.full(m, np.inf)
    for x in range(diag.shape[0]):
        a = diag[x]
        for j in range(m):
            dj = (a - eps[j]) - 1.0 / d[j]
            if abs(dj) < tiny:
                dj = tiny
            if dj < 0.0:
                counts[j] += 1
            d[j] = dj


@nb.njit(cache=True, nogil=True)
def _count_stream(key, threshold, L, b, tiny, eps, counts):
    # Same arithmetic as _count_diag with the diagonal drawn on the fly;
    # also returns the longest zero-potential run seen.
    m = eps.shape[0]
    d = np.full(m, np.inf)
    high = 2.0 + b
    run = 0
    longest = 0
    z = key
    for _ in range(L):
        z += rng._U_GAMMA
        if (rng._mix64(z) >> rng._S11) < threshold:
            a = high
            run = 0
        else:
            a = 2.0
            run += 1
            if run > longest:
                longest = run
        for j in range(m):
            dj = (a - eps[j]) - 1.0 / d[j]
            if abs(dj) < tiny:
                dj = tiny
            if dj < 0.0:
                counts[j] += 1
            d[j] = dj
    return longest


@nb.njit(cache=True, nogil=True)
def _count_one(diag, tiny, eps):
    d = np.inf
    c = 0
    for x in range(diag.shape[0]):
        d = (diag[x] - eps) - 1.0 / d
        if abs(d) < tiny:
            d = tiny
        if d < 0.0:
            c += 1
    return c


@nb.njit(cache=True, nogil=True)
def _bisect(diag, tiny, k, tol, lo0, hi0, lo, hi):
    for j in range(k):
        lo[j] = lo0
        hi[j] = hi0
    for i in range(k):
        while hi[i] - lo[i] > tol:
            mid = 0.5 * (lo[i] + hi[i])
            if mid <= lo[i] or mid >= hi[i]:
                break
            c = _count_one(diag, tiny, mid)
            # count(mid) = #{E < mid}: E_{j+1} < mid for j < c
            for j in range(i, k):
                if j < c:
                    if mid < hi[j]:
                        hi[j] = mid
                elif mid > lo[j]:
                    lo[j] = mid


def _tiny(b: float) -> float:
    return MACHINE_EPS * (4.0 + b)


def _as_grid(epsilon) -> np.ndarray:
    eps = np.atleast_1d(np.asarray(epsilon, dtype=np.float64))
    if eps.ndim != 1 or not np.all(np.isfinite(eps)):
        raise ValueError("epsilon must be finite")
    return np.ascontiguousarray(eps)


def count_below_grid(source, epsilons) -> np.ndarray:
    """Counts ``N_L(eps)`` for every threshold in ``epsilons`` in one pass over the lattice.

    ``source`` is a :class:`TridiagonalOperator` or a :class:`StreamingPotential`.
    """
    if isinstance(source, StreamingPotential):
        return stream_counts(source, epsilons)[0]
    return _diag_counts(source, epsilons)


def _diag_counts(h: TridiagonalOperator, epsilons) -> np.ndarray:
    eps = _as_grid(epsilons)
    counts = np.zeros(eps.shape[0], dtype=np.int64)
    _count_diag(h.diag, _tiny(h.b), eps, counts)
    return counts


def stream_counts(source: StreamingPotential, epsilons):
    """One streaming pass: ``(counts over the grid, longest zero run)``."""
    eps = _as_grid(epsilons)
    counts = np.zeros(eps.shape[0], dtype=np.int64)
    params = source.params
    longest = _count_stream(np.uint64(source.key), np.uint64(source.threshold), params.L,
                            params.b, _tiny(params.b), eps, counts)
    return counts, int(longest)


def count_below(source, epsilon: float) -> EigenCount:
    """Number of eigenvalues strictly below ``epsilon``.

    Parameters
    ----------
    source : TridiagonalOperator or StreamingPotential
        Streaming sources are never materialized; memory use is O(1).
    epsilon : float
        Energy threshold.
    """
    eps = float(epsilon)
    if not math.isfinite(eps):
        raise ValueError("epsilon must be finite")
    n = source.params.L if isinstance(source, StreamingPotential) else source.L
    return EigenCount(eps, int(count_below_grid(source, [eps])[0]), n)


def lowest_eigenvalues(h: TridiagonalOperator, k: int, tol: float = DEFAULT_TOL) -> SpectrumSlice:
    """E_1..E_k by bisection on the inertia count, brackets starting from [0, 4+b].

    Every count evaluation tightens the brackets of all pending indices, so
    clustered or repeated eigenvalues cost no extra passes and come out with
    the right multiplicity.
    """
    if not 1 <= k <= h.L:
        raise ValueError(f"k must satisfy 1 <= k <= L = {h.L}, got {k}")
    if not tol > 0:
        raise ValueError("tol must be positive")
    tiny = _tiny(h.b)
    hi0 = h.spectral_bound
    while _count_one(h.diag, tiny, hi0) < k:
        hi0 *= 2.0
    lo = np.empty(k)
    hi = np.empty(k)
    _bisect(h.diag, tiny, k, tol, 0.0, hi0, lo, hi)
    return SpectrumSlice(0.5 * (lo + hi), tol, "bisection", lower=lo, upper=hi)


@nb.njit(cache=True, nogil=True)
def _ql_eigenvalues(d, e):
    """Implicit QL with Wilkinson-type shift; d is overwritten with the eigenvalues.

    e[i] couples d[i] and d[i+1]; e has length n and e[n-1] is scratch.
    Returns 0 on success, or the index that failed to converge plus one.
    """
    n = d.shape[0]
    eps = 2.220446049250313e-16
    for l in range(n):
        it = 0
        while True:
            m = l
            while m < n - 1:
                dd = abs(d[m]) + abs(d[m + 1])
                if abs(e[m]) <= eps * dd:
                    break
                m += 1
            if m == l:
                break
            it += 1
            if it > 60:
                return l + 1
            g = (d[l + 1] - d[l]) / (2.0 * e[l])
            r = math.hypot(g, 1.0)
            g = d[m] - d[l] + e[l] / (g + math.copysign(r, g))
            s = 1.0
            c = 1.0
            p = 0.0
            underflow = False
            i = m - 1
            while i >= l:
                f = s * e[i]
                bb = c * e[i]
                r = math.hypot(f, g)
                e[i + 1] = r
                if r == 0.0:
                    d[i + 1] -= p
                    e[m] = 0.0
                    underflow = True
                    break
                s = f / r
                c = g / r
                g = d[i + 1] - p
                r = (d[i] - g) * s + 2.0 * c * bb
                p = s * r
                d[i + 1] = g + p
                g = c * r - bb
                i -= 1
            if underflow:
                continue
            d[l] -= p
            e[l] = g
            e[m] = 0.0
    return 0


def ql_eigenvalues(diag, offdiag) -> np.ndarray:
    """Sorted eigenvalues of a symmetric tridiagonal matrix by implicit QL."""
    d = np.array(diag, dtype=np.float64)
    e = np.zeros_like(d)
    e[: d.shape[0] - 1] = offdiag
    status = _ql_eigenvalues(d, e)
    if status:
        raise ConvergenceError(f"QL iteration did not converge for eigenvalue {status - 1}")
    d.sort()
    return d


def dense_spectrum(h: TridiagonalOperator, vectors: bool = False, below: float | None = None,
                   limit: int = DEFAULT_ORACLE_LIMIT) -> SpectrumSlice:
    """Full spectrum from the QL oracle, optionally with eigenvectors.

    With ``below`` set, only eigenvalues ``< below`` (and their vectors) are
    returned. Vectors come from LAPACK inverse iteration and are validated
    against the QL eigenvalues: ``||Hv - lambda v|| <= 1e-10 (4 + b)``.
    """
    if h.L > limit:
        raise OracleLimitError(f"dense oracle limited to L <= {limit}, got L = {h.L}")
    values = ql_eigenvalues(h.diag, h.offdiag)
    if below is not None:
        values = values[values < below]
    vecs = None
    if vectors and values.size:
        if h.L == 1:
            vecs = np.ones((1, 1))
        else:
            _, vecs = eigh_tridiagonal(h.diag, h.offdiag, select="i",
                                       select_range=(0, values.size - 1),
                                       lapack_driver="stebz")
        bound = 1e-10 * h.spectral_bound
        for i, lam in enumerate(values):
            res = np.linalg.norm(apply(h, vecs[:, i]) - lam * vecs[:, i])
            if res > bound:
                raise ConvergenceError(f"eigenvector {i} residual {res:.3g} exceeds {bound:.3g}")
    elif vectors:
        vecs = np.empty((h.L, 0))
    return SpectrumSlice(values, MACHINE_EPS * h.spectral_bound, "dense", vectors=vecs)
