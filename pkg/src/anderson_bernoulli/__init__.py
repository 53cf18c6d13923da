"""Simulation and verification tools for the 1D Anderson-Bernoulli model.

The model is ``H = -Delta + V`` on sites 1..L with Dirichlet walls and an
i.i.d. potential taking the value 0 with probability ``p`` and ``b`` with
probability ``q = 1 - p``. The package estimates the integrated density of
states ``k(eps) = lim N_L(eps)/L`` and checks its Lifschitz-tail bounds.
"""

__version__ = "0.1.0"

from .lattice import (ModelParams, PotentialRealization, StreamingPotential, TridiagonalOperator,
                      apply, build_hamiltonian, rayleigh, sample_potential)
from .spectral import (EigenCount, SpectrumSlice, count_below, count_below_grid, dense_spectrum,
                       lowest_eigenvalues)
from .intervals import (USequence, ZeroInterval, ZeroIntervalSet, build_U_sequence,
                        count_longer_than, geometric_survival, interval_density_check,
                        sample_fixed_n_intervals, scan_zero_intervals)
from .sine import (DistortedSineFit, SineState, fit_distorted_sine, min_length_for_energy,
                   sine_energy, sine_state)
from .bounds import (finite_lower_bound_coeff, fit_lifschitz_exponent,
                     longest_run_limit_probability, longest_run_threshold, lower_bound_ids,
                     upper_bound_ids)
from .experiments import (DosEstimate, ExperimentConfig, estimate_dos, run_length_experiment,
                          theorem21_audit, verify_sandwich)
