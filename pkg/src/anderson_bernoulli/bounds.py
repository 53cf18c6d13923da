"""Closed-form Lifschitz-tail bounds and the fitted tail exponent.

All powers ``p**(pi/sqrt(eps))`` are evaluated as ``exp(x log p)`` and the
``1 - p**x`` denominators with ``expm1``; naive powering loses everything to
underflow and cancellation at small ``eps``. ``p = 1`` (free lattice,
``q = 0``) is evaluated as the ``p -> 1`` limit, where both bounds collapse to
``sqrt(eps)/pi``.
"""

from dataclasses import dataclass
import math

import numpy as np
from scipy import stats

TINY_LOG = math.log(np.finfo(np.float64).tiny)


def _exponent(epsilon):
    eps = np.asarray(epsilon, dtype=np.float64)
    if np.any(~(eps > 0)):
        raise ValueError("epsilon must be positive")
    return math.pi / np.sqrt(eps)


def _q_over_one_minus_pow(q, p, x):
    # q / (1 - p**x), with the p -> 1 limit 1/x
    if p == 1.0:
        return 1.0 / x
    return q / -np.expm1(x * math.log(p))


def _scalar(value, like):
    return float(value) if np.ndim(like) == 0 else value


def _q(p, q):
    return 1.0 - p if q is None else q


def log_lower_bound_ids(epsilon, p, q=None):
    """Natural log of :func:`lower_bound_ids`; never underflows."""
    a = _exponent(epsilon)
    q = _q(p, q)
    val = a * math.log(p) + np.log(_q_over_one_minus_pow(q, p, a))
    return _scalar(val, epsilon)


def lower_bound_ids(epsilon, p, q=None):
    """``q p^(pi/sqrt(eps)) / (1 - p^(pi/sqrt(eps)))``; 0 once the value underflows."""
    return _scalar(np.exp(log_lower_bound_ids(epsilon, p, q)), epsilon)


def log_upper_bound_ids(epsilon, p, q=None, b=1.0, C=0.0):
    a = _exponent(epsilon)
    q = _q(p, q)
    corr = C * np.sqrt(np.asarray(epsilon, dtype=np.float64))
    val = (a - math.pi**2 / b - 2.0) * math.log(p) + np.log(_q_over_one_minus_pow(q, p, a + corr))
    return _scalar(val, epsilon)


def upper_bound_ids(epsilon, p, q=None, b=1.0, C=0.0):
    """``q p^(pi/sqrt(eps) - pi^2/b) / (p^2 (1 - p^(pi/sqrt(eps) + C sqrt(eps))))``.

    ``C`` replaces the unspecified O(sqrt(eps)) term in the denominator
    exponent; 0 by default. ``b = inf`` removes the barrier correction.
    """
    return _scalar(np.exp(log_upper_bound_ids(epsilon, p, q, b, C)), epsilon)


def finite_lower_bound_coeff(epsilon, p, q=None, ell0=0):
    """Per-site coefficient of the finite-volume lower bound on ``N_L(eps)``.

    ``q (1 - p^(pi l0/sqrt(eps))) p^(pi/sqrt(eps)) / (p (1 - p^(pi/sqrt(eps))))``,
    which saturates at ``lower_bound_ids / p`` as ``l0`` grows.
    """
    if ell0 < 0:
        raise ValueError("ell0 must be non-negative")
    a = _exponent(epsilon)
    q = _q(p, q)
    if p == 1.0:
        # q (1 - p^(a l0)) / (1 - p^a) -> q l0 -> 0
        return _scalar(np.zeros_like(a), epsilon)
    logp = math.log(p)
    val = q * np.exp(a * logp) * (-np.expm1(a * ell0 * logp)) / (p * -np.expm1(a * logp))
    return _scalar(val, epsilon)


def longest_run_limit_probability(y: float) -> float:
    """Limit law ``1 - exp(-y)`` of the event ``l0 > threshold(y, n, p)``."""
    if y < 0:
        raise ValueError("y must be non-negative")
    return -math.expm1(-y)


def longest_run_threshold(y: float, n: int, p: float) -> float:
    """``(log n - log y) / log(1/p)``; ``inf`` at ``y = 0``."""
    if y < 0 or n < 1:
        raise ValueError("need y >= 0 and n >= 1")
    if y == 0:
        return math.inf
    return (math.log(n) - math.log(y)) / math.log(1.0 / p)


def longest_run_exact_probability(y: float, n: int, p: float) -> float:
    """Finite-n value of ``P[l0 > threshold]`` for n i.i.d. geometric lengths.

    ``1 - (1 - p^floor(thr))^n``; differs from the limit law by a factor up to
    ``1/p`` inside the exponent because ``l0`` is integer valued.
    """
    thr = longest_run_threshold(y, n, p)
    if math.isinf(thr):
        return 0.0
    m = math.floor(thr)
    return -math.expm1(n * math.log1p(-p**m)) if m > 0 else 1.0


@dataclass(frozen=True, eq=False)
class BoundsCurve:
    epsilons: np.ndarray
    lower: np.ndarray
    upper: np.ndarray
    finite_lower: np.ndarray | None
    p: float
    q: float
    b: float
    C: float
    ell0: int | None
    underflow: np.ndarray


def evaluate_bounds(epsilons, p, b, C=0.0, ell0=None, q=None) -> BoundsCurve:
    """Both tail bounds (and optionally the finite-volume coefficient) on a grid."""
    eps = np.asarray(epsilons, dtype=np.float64)
    q = _q(p, q)
    log_lo = np.atleast_1d(log_lower_bound_ids(eps, p, q))
    log_up = np.atleast_1d(log_upper_bound_ids(eps, p, q, b, C))
    finite = None if ell0 is None else np.atleast_1d(finite_lower_bound_coeff(eps, p, q, ell0))
    return BoundsCurve(epsilons=np.atleast_1d(eps), lower=np.exp(log_lo), upper=np.exp(log_up),
                       finite_lower=finite, p=p, q=q, b=b, C=C, ell0=ell0,
                       underflow=(log_lo < TINY_LOG) | (log_up < TINY_LOG))


@dataclass(frozen=True)
class LifschitzFit:
    slope: float
    stderr: float
    intercept: float
    points: int

    def target(self, p: float) -> float:
        """Exponent ``pi log p`` shared by both tail bounds."""
        return math.pi * math.log(p)

    def relative_error(self, p: float) -> float:
        return abs(self.slope - self.target(p)) / abs(self.target(p))


def fit_lifschitz_exponent(dos=None, *, epsilons=None, ids=None) -> LifschitzFit:
    """Least-squares slope of ``log k(eps)`` against ``1/sqrt(eps)``.

    Pass a ``DosEstimate`` or explicit ``epsilons``/``ids`` arrays. Points with
    non-positive IDS are dropped; at least three must remain.
    """
    if dos is not None:
        epsilons, ids = dos.epsilons, dos.mean_ids
    eps = np.asarray(epsilons, dtype=np.float64)
    k = np.asarray(ids, dtype=np.float64)
    keep = (k > 0) & (eps > 0)
    if np.count_nonzero(keep) < 3:
        raise ValueError("need at least 3 grid points with positive IDS")
    x = 1.0 / np.sqrt(eps[keep])
    y = np.log(k[keep])
    res = stats.linregress(x, y)
    return LifschitzFit(float(res.slope), float(res.stderr), float(res.intercept), int(keep.sum()))
