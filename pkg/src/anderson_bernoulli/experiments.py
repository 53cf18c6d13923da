"""Monte Carlo harness: disorder-averaged IDS, bound checks and audits.

Realization ``i`` of a run always reads the stream ``stream_key(master_seed, i)``
(see :mod:`anderson_bernoulli.rng`), and per-realization results are merged
in index order by exact integer addition. Output is therefore identical for
any number of workers. Workers are threads; the compiled kernels release the
GIL.
"""

from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field
import logging
import math
import os

import numpy as np

from . import bounds
from .intervals import (build_U_sequence, longest_fixed_n_interval, sample_fixed_n_intervals,
                        sample_fixed_n_potential, scan_zero_intervals)
from .lattice import ModelParams, StreamingPotential, build_hamiltonian, sample_potential
from .sine import fit_distorted_sine, mass_dominant_interval, min_length_for_energy
from .spectral import (DEFAULT_ORACLE_LIMIT, OracleLimitError, count_below_grid,
                       dense_spectrum, stream_counts)

log = logging.getLogger(__name__)

ENSEMBLES = ("fixed-L", "fixed-n")
AUDIT_TOL = 1e-10
MIN_SANDWICH_REALIZATIONS = 30


def resolve_workers(workers: int | None = None) -> int:
    """Explicit value, else ``$SIM_WORKERS``, else 1."""
    if workers is None:
        env = os.environ.get("SIM_WORKERS")
        workers = int(env) if env else 1
    if workers < 1:
        raise ValueError("workers must be at least 1")
    return workers


def _map(fn, items, workers):
    if workers == 1:
        return [fn(i) for i in items]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, items))


@dataclass(frozen=True)
class ExperimentConfig:
    params: ModelParams
    epsilons: tuple
    realizations: int = 1
    master_seed: int = 0
    ensemble: str = "fixed-L"
    n: int | None = None
    oracle_limit: int = DEFAULT_ORACLE_LIMIT
    C: float = 0.0

    def __post_init__(self):
        eps = tuple(float(e) for e in self.epsilons)
        object.__setattr__(self, "epsilons", eps)
        if not eps:
            raise ValueError("epsilon grid is empty")
        if any(b <= a for a, b in zip(eps, eps[1:])):
            raise ValueError("epsilon grid must be strictly increasing")
        top = self.params.spectral_bound
        if not all(0.0 < e < top for e in eps):
            raise ValueError(f"epsilons must lie in (0, {top})")
        if self.realizations < 1:
            raise ValueError("realizations must be at least 1")
        if self.ensemble not in ENSEMBLES:
            raise ValueError(f"ensemble must be one of {ENSEMBLES}")
        if self.ensemble == "fixed-n" and (self.n is None or self.n < 1):
            raise ValueError("fixed-n ensemble needs n >= 1")
        if not 0 <= self.master_seed < 2**64:
            raise ValueError("master seed must be a 64-bit unsigned integer")

    def to_dict(self) -> dict:
        return {"L": self.params.L, "p": self.params.p, "b": self.params.b,
                "epsilons": list(self.epsilons), "realizations": self.realizations,
                "master_seed": self.master_seed, "ensemble": self.ensemble, "n": self.n,
                "oracle_limit": self.oracle_limit, "C": self.C}

    @classmethod
    def from_dict(cls, d: dict) -> "ExperimentConfig":
        params = ModelParams(L=d["L"], p=d["p"], b=d["b"])
        return cls(params=params, epsilons=tuple(d["epsilons"]),
                   realizations=d.get("realizations", 1), master_seed=d.get("master_seed", 0),
                   ensemble=d.get("ensemble", "fixed-L"), n=d.get("n"),
                   oracle_limit=d.get("oracle_limit", DEFAULT_ORACLE_LIMIT), C=d.get("C", 0.0))


@dataclass(frozen=True, eq=False)
class DosEstimate:
    """Disorder-averaged ``N_L(eps)/L`` on a grid.

    ``mean_ids = total_counts / total_sites`` exactly; for the fixed-L
    ensemble ``total_sites = realizations * L``. ``stderr`` is the standard
    error of the per-realization fractions.
    """

    epsilons: np.ndarray
    mean_ids: np.ndarray
    stderr: np.ndarray
    total_counts: np.ndarray
    total_sites: int
    realizations: int
    L: int
    seed: int
    ensemble: str
    fractions: np.ndarray = field(repr=False)
    ell0: np.ndarray = field(repr=False)
    sites: np.ndarray = field(repr=False)


def _dos_realization(cfg: ExperimentConfig, eps: np.ndarray, i: int):
    if cfg.ensemble == "fixed-L":
        counts, ell0 = stream_counts(StreamingPotential(cfg.params, cfg.master_seed, i), eps)
        return counts, cfg.params.L, ell0
    v = sample_fixed_n_potential(cfg.params, cfg.n, cfg.master_seed, i)
    counts = count_below_grid(build_hamiltonian(v), eps)
    return counts, v.params.L, scan_zero_intervals(v).ell0


def estimate_dos(cfg: ExperimentConfig, workers: int | None = None) -> DosEstimate:
    eps = np.asarray(cfg.epsilons, dtype=np.float64)
    workers = resolve_workers(workers)
    log.info("estimate_dos: %d realizations, ensemble %s, %d workers",
             cfg.realizations, cfg.ensemble, workers)
    results = _map(lambda i: _dos_realization(cfg, eps, i), range(cfg.realizations), workers)
    counts = np.array([r[0] for r in results], dtype=np.int64).reshape(cfg.realizations, eps.size)
    sites = np.array([r[1] for r in results], dtype=np.int64)
    ell0 = np.array([r[2] for r in results], dtype=np.int64)
    total_counts = counts.sum(axis=0)
    total_sites = int(sites.sum())
    fractions = counts / sites[:, None]
    if cfg.realizations > 1:
        stderr = fractions.std(axis=0, ddof=1) / math.sqrt(cfg.realizations)
    else:
        stderr = np.full(eps.size, math.nan)
    return DosEstimate(epsilons=eps, mean_ids=total_counts / total_sites, stderr=stderr,
                       total_counts=total_counts, total_sites=total_sites,
                       realizations=cfg.realizations, L=cfg.params.L, seed=cfg.master_seed,
                       ensemble=cfg.ensemble, fractions=fractions, ell0=ell0, sites=sites)


def finite_lower_overlay(dos: DosEstimate, p: float) -> np.ndarray:
    """Finite-volume lower-bound coefficient averaged over the realizations' ``l0``."""
    vals = [bounds.finite_lower_bound_coeff(dos.epsilons, p, ell0=int(l0)) for l0 in dos.ell0]
    return np.mean(vals, axis=0)


@dataclass(frozen=True)
class SandwichRow:
    epsilon: float
    mean_ids: float
    stderr: float
    lower: float
    upper: float
    lower_ok: bool
    upper_ok: bool


@dataclass(frozen=True, eq=False)
class SandwichReport:
    rows: list
    applicable: bool
    assertable: bool
    fit: bounds.LifschitzFit | None
    target_slope: float
    dos: DosEstimate = field(repr=False)

    @property
    def contained(self) -> bool:
        return all(r.lower_ok and r.upper_ok for r in self.rows)

    @property
    def passed(self) -> bool:
        return self.applicable and self.assertable and self.contained


def verify_sandwich(cfg: ExperimentConfig, workers: int | None = None,
                    dos: DosEstimate | None = None) -> SandwichReport:
    """Compare the empirical IDS (within two standard errors) with both tail bounds at ``C = 0``.

    ``applicable`` is false outside the Bernoulli regime (``p = 1``); a report
    is only assertable with at least 30 realizations.
    """
    if any(e > math.pi**2 for e in cfg.epsilons):
        raise ValueError("sandwich check needs every epsilon <= pi^2")
    p, b = cfg.params.p, cfg.params.b
    if dos is None:
        dos = estimate_dos(cfg, workers)
    lower = np.atleast_1d(bounds.lower_bound_ids(dos.epsilons, p))
    upper = np.atleast_1d(bounds.upper_bound_ids(dos.epsilons, p, b=b, C=0.0))
    se = np.nan_to_num(dos.stderr, nan=0.0)
    rows = [SandwichRow(float(e), float(k), float(s), float(lo), float(up),
                        bool(lo <= k + 2 * s), bool(k - 2 * s <= up))
            for e, k, s, lo, up in zip(dos.epsilons, dos.mean_ids, se, lower, upper)]
    try:
        fit = bounds.fit_lifschitz_exponent(dos)
    except ValueError:
        fit = None
    target = math.pi * math.log(p) if p < 1 else 0.0
    return SandwichReport(rows=rows, applicable=0.0 < p < 1.0,
                          assertable=dos.realizations >= MIN_SANDWICH_REALIZATIONS,
                          fit=fit, target_slope=target, dos=dos)


@dataclass(frozen=True, eq=False)
class RunLengthReport:
    n: int
    p: float
    samples: int
    seed: int
    ell0: np.ndarray = field(repr=False)
    law: list = field(default_factory=list)
    survival: list = field(default_factory=list)

    @property
    def median_ell0(self) -> float:
        return float(np.median(self.ell0))


def run_length_experiment(n: int, p: float, samples: int, master_seed: int,
                          ys=(0.25, 0.5, 1.0, 2.0, 4.0), workers: int | None = None) -> RunLengthReport:
    """Longest-run statistics in the fixed-n ensemble.

    ``law`` rows compare the empirical ``P[l0 > threshold(y, n)]`` with the
    limit ``1 - exp(-y)`` and with its exact finite-n value; ``survival`` rows
    compare the empirical ``P[|I| > m]`` of sample 0 with ``p**m`` for every
    ``m`` with ``n p^m >= 100``.
    """
    if n < 1000 or samples < 100:
        raise ValueError("run-length experiment needs n >= 1000 and samples >= 100")
    workers = resolve_workers(workers)
    ell0 = np.array(_map(lambda i: longest_fixed_n_interval(n, p, master_seed, i),
                         range(samples), workers), dtype=np.int64)
    law = []
    for y in ys:
        thr = bounds.longest_run_threshold(y, n, p)
        law.append({"y": y, "threshold": thr,
                    "empirical": float(np.mean(ell0 > thr)),
                    "limit": bounds.longest_run_limit_probability(y),
                    "exact_finite_n": bounds.longest_run_exact_probability(y, n, p)})
    lengths = sample_fixed_n_intervals(n, p, master_seed, 0).lengths
    survival = []
    m = 0
    while n * p**m >= 100:
        expected = p**m
        sigma = math.sqrt(expected * (1 - expected) / n)
        emp = float(np.mean(lengths > m))
        survival.append({"m": m, "empirical": emp, "expected": expected, "sigma": sigma,
                         "within_3sigma": abs(emp - expected) <= 3 * sigma})
        m += 1
    return RunLengthReport(n=n, p=p, samples=samples, seed=master_seed, ell0=ell0,
                           law=law, survival=survival)


@dataclass(frozen=True, eq=False)
class Theorem21Report:
    """Per realization, ``max_k (E_k - U_k)`` over ``k <= L'`` (``-inf`` when ``L' = 0``)."""

    params: ModelParams
    seed: int
    max_gaps: np.ndarray
    lprimes: np.ndarray
    tolerance: float = AUDIT_TOL

    @property
    def max_gap(self) -> float:
        return float(self.max_gaps.max())

    @property
    def violations(self) -> int:
        return int(np.count_nonzero(self.max_gaps > self.tolerance))

    @property
    def passed(self) -> bool:
        return self.violations == 0


def theorem21_gap(v) -> tuple[float, int]:
    """``max_k (E_k - U_k)`` for one realization, with the dense oracle."""
    u = build_U_sequence(scan_zero_intervals(v))
    if len(u) == 0:
        return -math.inf, 0
    e = dense_spectrum(build_hamiltonian(v), limit=max(v.params.L, 1)).eigenvalues
    return float(np.max(e[: len(u)] - u.energies)), len(u)


def theorem21_audit(params: ModelParams, realizations: int, L: int | None = None,
                    master_seed: int = 0, oracle_limit: int = DEFAULT_ORACLE_LIMIT,
                    workers: int | None = None) -> Theorem21Report:
    """Check ``E_k <= U_k`` for ``k <= L'`` on every realization."""
    if L is not None:
        params = params.with_L(L)
    if params.L > oracle_limit:
        raise OracleLimitError(f"audit limited to L <= {oracle_limit}, got {params.L}")
    gaps = _map(lambda i: theorem21_gap(sample_potential(params, master_seed, i)),
                range(realizations), resolve_workers(workers))
    return Theorem21Report(params, master_seed, np.array([g[0] for g in gaps]),
                           np.array([g[1] for g in gaps], dtype=np.int64))


@dataclass(frozen=True, eq=False)
class Lemma2Report:
    """Length check on the mass-dominant interval of every low eigenstate.

    ``records`` holds one dict per state; ``margin`` is
    ``(l+1) - (w pi/sqrt(E) - pi^2/b - slack)`` and must be non-negative.
    States whose nearest frequency is 0 satisfy the check trivially.
    """

    records: list
    slack: float

    @property
    def violations(self) -> int:
        return sum(r["margin"] < 0 for r in self.records)

    @property
    def min_c(self) -> float:
        return min((r["c"] for r in self.records), default=math.inf)

    @property
    def max_residual(self) -> float:
        return max((r["residual"] for r in self.records), default=0.0)

    @property
    def alpha_bound_violations(self) -> int:
        return sum(r["stretched"] and r["alpha"] < r["alpha_bound"] - AUDIT_TOL for r in self.records)


def lemma2_audit(params: ModelParams, realizations: int, master_seed: int = 0,
                 energy_cut: float = 0.3, slack: float = 2.0, C: float = 0.0,
                 oracle_limit: int = DEFAULT_ORACLE_LIMIT) -> Lemma2Report:
    b = params.b
    records = []
    for i in range(realizations):
        v = sample_potential(params, master_seed, i)
        h = build_hamiltonian(v)
        spec = dense_spectrum(h, vectors=True, below=energy_cut, limit=oracle_limit)
        ivs = scan_zero_intervals(v)
        for k, energy in enumerate(spec.eigenvalues):
            f = spec.vectors[:, k]
            interval = ivs[mass_dominant_interval(f, ivs)]
            fit = fit_distorted_sine(f, energy, interval)
            w = fit.nearest_frequency
            if w >= 1:
                need = min_length_for_energy(w, energy, b, C)
                margin = interval.length + 1 - (need - slack)
            else:
                need, margin = -math.inf, math.inf
            records.append({"realization": i, "k": k + 1, "energy": float(energy),
                            "x0": interval.x0, "length": interval.length,
                            "alpha": fit.alpha, "w": w, "c": fit.c, "t": fit.t,
                            "delta": fit.delta, "residual": fit.residual,
                            "stretched": fit.stretched_case, "alpha_bound": fit.alpha_lower_bound,
                            "required": need, "margin": margin})
    return Lemma2Report(records, slack)


def report_dict(obj) -> dict:
    """JSON-ready view of a report dataclass (arrays become lists)."""
    def conv(x):
        if isinstance(x, np.ndarray):
            return x.tolist()
        if isinstance(x, (np.floating, np.integer, np.bool_)):
            return x.item()
        if isinstance(x, dict):
            return {k: conv(v) for k, v in x.items()}
        if isinstance(x, (list, tuple)):
            return [conv(v) for v in x]
        return x
    return conv(asdict(obj))
