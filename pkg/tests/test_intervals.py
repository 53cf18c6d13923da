import math

import numpy as np
import pytest

from anderson_bernoulli.intervals import (ZeroIntervalSet, build_U_sequence, count_longer_than,
                                          geometric_survival, interval_density_check,
                                          longest_fixed_n_interval, sample_fixed_n_intervals,
                                          sample_fixed_n_potential, scan_zero_intervals, u_energy)
from anderson_bernoulli.lattice import ModelParams, PotentialRealization, sample_potential


def test_single_interval():
    s = scan_zero_intervals(PotentialRealization.from_pattern([1, 0, 0, 0, 1], b=1.0))
    assert (s.n, s.ell0, s.Lprime) == (1, 3, 3)
    assert s[0].x0 == 1 and list(s[0].sites) == [2, 3, 4]


def test_all_occupied():
    s = scan_zero_intervals(np.ones(8, dtype=bool))
    assert (s.n, s.ell0, s.Lprime) == (0, 0, 0)


def test_pattern_with_wall_runs():
    s = scan_zero_intervals(np.array([0, 0, 1, 0, 1, 1, 0], dtype=bool))
    assert s.lengths.tolist() == [2, 1, 1]
    assert (s.n, s.ell0, s.Lprime) == (3, 2, 4)
    assert s.x0.tolist() == [0, 3, 6]


def test_scan_matches_naive():
    v = sample_potential(ModelParams(L=5000, p=0.6, b=1.0), 9)
    runs, cur = [], 0
    for occ in v.occupancy:
        if occ:
            if cur:
                runs.append(cur)
            cur = 0
        else:
            cur += 1
    if cur:
        runs.append(cur)
    assert scan_zero_intervals(v).lengths.tolist() == runs


def test_u_sequence_example():
    u = build_U_sequence(ZeroIntervalSet(x0=[0, 4], lengths=[3, 1]))
    pi2 = math.pi**2
    assert np.allclose(u.energies, [pi2 / 16, pi2 / 4, pi2 / 4, 9 * pi2 / 16], rtol=1e-15)
    assert u.energies[1] == u.energies[2]
    assert u.interval_ids.tolist() == [0, 0, 1, 0]
    assert u.frequencies.tolist() == [1, 2, 1, 3]


def test_u_sequence_empty_and_sorted():
    assert len(build_U_sequence(ZeroIntervalSet(x0=[], lengths=[]))) == 0
    s = scan_zero_intervals(sample_potential(ModelParams(L=3000, p=0.5, b=1.0), 4))
    u = build_U_sequence(s)
    assert len(u) == s.Lprime
    assert np.all(np.diff(u.energies) >= 0)
    assert np.array_equal(u.energies, u_energy(s.lengths[u.interval_ids], u.frequencies))


def test_count_longer_than():
    s = ZeroIntervalSet(x0=[0, 3, 6], lengths=[2, 1, 1])
    assert count_longer_than(s, 1) == 1
    assert count_longer_than(s, 0.5) == 3


def test_geometric_survival():
    assert geometric_survival(0, 0.3) == 1.0
    assert geometric_survival(10, 0.5) == 2.0**-10
    with pytest.raises(ValueError):
        geometric_survival(-1, 0.5)


@pytest.mark.parametrize("p", [0.3, 0.5, 0.7])
def test_fixed_n_lengths_are_geometric(p):
    s = sample_fixed_n_intervals(200_000, p, seed=21)
    assert s.lengths.min() >= 1
    n = s.n
    assert abs(s.lengths.mean() - 1 / (1 - p)) < 5 * math.sqrt(p) / (1 - p) / math.sqrt(n)
    for m in range(0, 6):
        pm = geometric_survival(m, p)
        se = math.sqrt(pm * (1 - pm) / n)
        assert abs(count_longer_than(s, m) / n - pm) <= 4 * se + 1e-15


def test_fixed_n_layout_and_longest():
    s = sample_fixed_n_intervals(1000, 0.5, seed=3, index=1)
    assert s.L == s.Lprime + 999
    assert longest_fixed_n_interval(1000, 0.5, seed=3, index=1) == s.ell0


def test_fixed_n_potential_has_n_runs():
    v = sample_fixed_n_potential(ModelParams(L=1, p=0.5, b=1.0), 5000, seed=2)
    s = scan_zero_intervals(v)
    assert s.n == 5000
    assert v.occupancy[0]                     # starts with a barrier
    assert not v.occupancy[-1]                # ends with a zero run
    # mean size n/(pq)
    assert abs(v.params.L / (5000 / 0.25) - 1) < 0.05


def test_interval_density():
    assert interval_density_check(PotentialRealization.from_pattern([0] * 10, b=1.0)) == 0.1
    assert interval_density_check(PotentialRealization.from_pattern([0, 1] * 50, b=1.0)) == 0.5
    v = sample_potential(ModelParams(L=10**7, p=0.5, b=1.0), 17)
    assert abs(interval_density_check(v) - 0.25) < 3e-4
