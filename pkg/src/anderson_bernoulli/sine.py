"""Discrete sine states on zero intervals and distorted-sine fits of eigenvectors.

On a zero interval ``I = (x0, x0+l+1)`` the Dirichlet Laplacian has the exact
eigenvectors ``sin(w pi (x-x0)/(l+1))``, ``w = 1..l``, with energies
``4 sin^2(w pi / (2(l+1)))``. A true eigenvector of ``H`` with energy
``0 < E < 4`` restricted to ``I`` is still a sine, but with a non-integer
frequency ``alpha`` fixed by the same dispersion relation and a phase ``t``
set by its values on the two boundary sites.
"""

from dataclasses import dataclass
import math

import numba as nb
import numpy as np

from .intervals import ZeroInterval, ZeroIntervalSet


class UnsupportedRegimeError(ValueError):
    """Energy outside the elliptic window 0 < E < 4 where the sine form applies."""


@nb.njit(cache=True, nogil=True)
def _sine_table(ell):
    # T[k] = sqrt(2/(l+1)) sin(k pi/(l+1)), k = 0..2l+1; exact zeros at k = 0, l+1.
    # Amplitude at offset j for frequency w is T[(w*j) mod 2(l+1)].
    m = 2 * (ell + 1)
    norm = math.sqrt(2.0 / (ell + 1))
    table = np.empty(m)
    for k in range(m):
        table[k] = math.sin(math.pi * k / (ell + 1)) * norm
    table[0] = 0.0
    table[ell + 1] = 0.0
    return table


@nb.njit(cache=True, nogil=True)
def _max_sine_residual(ell):
    # max over w = 1..l and interior offsets j = 1..l of
    # |(2 - lam_w) S_j - S_{j-1} - S_{j+1}|, S_0 = S_{l+1} = 0 (table zeros).
    # Eight frequencies are advanced together to keep the gathers independent.
    m = 2 * (ell + 1)
    table = _sine_table(ell)
    group = 8
    ws = np.empty(group, np.int64)
    ks = np.empty(group, np.int64)
    coef = np.empty(group)
    prev = np.empty(group)
    cur = np.empty(group)
    worst = 0.0
    for w0 in range(1, ell + 1, group):
        for i in range(group):
            w = w0 + i if w0 + i <= ell else w0
            ws[i] = w
            ks[i] = w
            s = math.sin(w * math.pi / (2.0 * (ell + 1)))
            coef[i] = 2.0 - 4.0 * s * s
            prev[i] = 0.0
            cur[i] = table[w]
        for _ in range(ell):
            for i in range(group):
                k = ks[i] + ws[i]
                k = k - m if k >= m else k
                nxt = table[k]
                r = abs(coef[i] * cur[i] - prev[i] - nxt)
                if r > worst:
                    worst = r
                prev[i] = cur[i]
                cur[i] = nxt
                ks[i] = k
    return worst


def max_sine_residual(ell: int) -> float:
    """Largest interior residual of ``H~ S - lambda S`` over all frequencies on length ``ell``."""
    if ell < 1:
        raise ValueError("interval length must be at least 1")
    return float(_max_sine_residual(ell))


def sine_energy(ell: int, w: int) -> float:
    if not 1 <= w <= ell:
        raise ValueError(f"frequency must satisfy 1 <= w <= {ell}, got {w}")
    return 4.0 * math.sin(w * math.pi / (2.0 * (ell + 1))) ** 2


@dataclass(frozen=True, eq=False)
class SineState:
    """Normalized sine state; ``amplitudes[x]`` is the value at site ``x = 0..L+1``."""

    interval: ZeroInterval
    w: int
    amplitudes: np.ndarray
    normalized: bool = True

    @property
    def energy(self) -> float:
        return sine_energy(self.interval.length, self.w)

    @property
    def interior(self) -> np.ndarray:
        """Values on sites 1..L, the layout the lattice operator uses."""
        return self.amplitudes[1:-1]


def sine_state(interval: ZeroInterval, w: int, L: int) -> SineState:
    ell, x0 = interval.length, interval.x0
    if not 1 <= w <= ell:
        raise ValueError(f"frequency must satisfy 1 <= w <= {ell}, got {w}")
    if x0 < 0 or x0 + ell > L:
        raise ValueError("interval does not fit in the lattice")
    table = _sine_table(ell)
    j = np.arange(1, ell + 1)
    amps = np.zeros(L + 2)
    amps[x0 + 1: x0 + ell + 1] = table[(w * j) % (2 * (ell + 1))]
    return SineState(interval, w, amps)


def dirichlet_residual(state: SineState) -> float:
    """Max over interior sites of ``|(-Delta S)(x) - lambda S(x)|`` with zero boundaries."""
    x0, ell = state.interval.x0, state.interval.length
    seg = state.amplitudes[x0: x0 + ell + 2].copy()
    seg[0] = seg[-1] = 0.0
    lap = 2.0 * seg[1:-1] - seg[:-2] - seg[2:]
    return float(np.max(np.abs(lap - state.energy * seg[1:-1])))


def dispersion_frequency(energy: float, ell: int) -> float:
    """Invert ``E = 4 sin^2(alpha pi / (2(l+1)))`` for ``alpha``."""
    return 2.0 * (ell + 1) / math.pi * math.asin(math.sqrt(energy) / 2.0)


@dataclass(frozen=True)
class DistortedSineFit:
    """``f(x) = c/sqrt(l+1) sin(alpha pi (x-x0)/(l+1) + t)`` on ``x0..x0+l+1``.

    The eigenvector sign is fixed so that ``c > 0`` and ``t`` lies in
    ``(-pi/2, pi/2]``; ``delta_left``/``delta_right`` are the values on the
    two boundary sites of the unit-norm restriction.
    """

    alpha: float
    t: float
    c: float
    delta_left: float
    delta_right: float
    residual: float
    energy: float
    interval: ZeroInterval
    flagged: bool = False

    @property
    def delta(self) -> float:
        return max(abs(self.delta_left), abs(self.delta_right))

    @property
    def nearest_frequency(self) -> int:
        return int(math.floor(self.alpha + 0.5))

    @property
    def stretched_case(self) -> bool:
        """``{alpha} pi + t > pi/2``: the state is a stretched sine of frequency ``[alpha] + 1``."""
        return (self.alpha - math.floor(self.alpha)) * math.pi + self.t > math.pi / 2

    @property
    def alpha_lower_bound(self) -> float:
        """``[alpha] + 1 - delta sqrt(l+1)``, a lower bound on ``alpha`` in the stretched case."""
        return math.floor(self.alpha) + 1 - self.delta * math.sqrt(self.interval.length + 1)


def fit_distorted_sine(f, energy: float, interval: ZeroInterval, tol: float = 1e-8) -> DistortedSineFit:
    """Fit the distorted sine form to the restriction of an eigenvector.

    ``alpha`` comes from the dispersion relation, which the restriction obeys
    exactly (``f(x+1) + f(x-1) = (2 - E) f(x)`` inside the interval). Amplitude
    and phase then follow from the left boundary value and the first interior
    value; the remaining sites give the residual.

    Parameters
    ----------
    f : array_like
        Eigenvector on sites 1..L (walls are implicit zeros).
    energy : float
        Its eigenvalue; must satisfy ``0 < E < 4``.
    interval : ZeroInterval
    tol : float
        Fits with a larger residual are returned with ``flagged=True``.
    """
    if not 0.0 < energy < 4.0:
        raise UnsupportedRegimeError(f"sine form needs 0 < E < 4, got {energy!r}")
    ell, x0 = interval.length, interval.x0
    padded = np.concatenate(([0.0], np.asarray(f, dtype=np.float64), [0.0]))
    if x0 < 0 or x0 + ell + 1 >= padded.shape[0]:
        raise ValueError("interval does not fit the eigenvector")
    g = padded[x0: x0 + ell + 2].copy()
    norm = np.linalg.norm(g[1:-1])
    if norm == 0.0:
        raise ValueError("eigenvector vanishes on the interval")
    g /= norm

    theta = 2.0 * math.asin(math.sqrt(energy) / 2.0)
    alpha = theta * (ell + 1) / math.pi
    # g[j] = a sin(theta j) + g[0] cos(theta j)
    sin_part = (g[1] - g[0] * math.cos(theta)) / math.sin(theta)
    amp = math.hypot(sin_part, g[0])
    t = math.atan2(g[0], sin_part)
    if t > math.pi / 2:
        t -= math.pi
        g = -g
    elif t <= -math.pi / 2:
        t += math.pi
        g = -g

    j = np.arange(1, ell + 1)
    residual = float(np.max(np.abs(g[1:-1] - amp * np.sin(theta * j + t))))
    return DistortedSineFit(alpha=alpha, t=t, c=amp * math.sqrt(ell + 1),
                            delta_left=float(g[0]), delta_right=float(g[-1]),
                            residual=residual, energy=float(energy), interval=interval,
                            flagged=residual > tol)


def min_length_for_energy(w: int, epsilon: float, b: float, C: float = 0.0) -> float:
    """Smallest ``l + 1`` able to carry frequency ``w`` below energy ``epsilon``.

    ``w pi / sqrt(eps) - pi^2 / b + C (w + 1/w) sqrt(eps)``; ``C`` stands in for
    the unknown constant of the O(sqrt(eps)) correction and defaults to 0.
    ``b = inf`` drops the barrier term.
    """
    if not epsilon > 0:
        raise ValueError("epsilon must be positive")
    if w < 1:
        raise ValueError("w must be at least 1")
    root = math.sqrt(epsilon)
    return w * math.pi / root - math.pi**2 / b + C * (w + 1.0 / w) * root


def mass_dominant_interval(f, intervals: ZeroIntervalSet) -> int:
    """Index of the zero interval holding the largest l2 mass of ``f`` (sites 1..L)."""
    if intervals.n == 0:
        raise ValueError("no zero intervals")
    cum = np.concatenate(([0.0], np.cumsum(np.asarray(f, dtype=np.float64) ** 2)))
    mass = cum[intervals.x0 + intervals.lengths] - cum[intervals.x0]
    return int(np.argmax(mass))
