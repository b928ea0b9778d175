"""Reduced dynamics of N two-level atoms collectively coupled to a bosonic
bath, with and without initial system-bath correlations.

Three engines share one parameter vocabulary:

- ``master_equation``: second-order time-local master equation with the
  explicit initial-correlation drive f_corr(t);
- ``exact_dephasing``: closed-form solution of the epsilon = 0 (pure
  dephasing) limit, the accuracy oracle;
- ``short_time``: second-order expansion about t = 0, usable at N ~ 1000.

See the ``spinbath`` console script (``spinbath list-presets``) for the
bundled scenarios, and demos/ for narrative walkthroughs.
"""

__version__ = "0.1.0"

from .bath import (BathSpec, DEFAULT_POLICY, IntegrationError,
                   QuadraturePolicy, correlation, correlation_table,
                   discretize_modes, integrate, spectral_density)
from .corr_kernel import (Preparation, PrepCoefficients, ThermalSpinFactors,
                          coefficients, f_corr, f_corr_oracle, initial_state,
                          prep_vector, thermal_spin_factors)
from .exact_dephasing import (DephasingFactors, dephasing_factors,
                              dephasing_trajectory, exact_jz_mainframe,
                              exact_rho_correlated, exact_rho_uncorrelated,
                              rotated_amplitudes)
from .master_equation import (FailedRunError, MemoryKernel, SimConfig,
                              Trajectory, build_memory_kernel, evolve, rhs)
from .short_time import (ShortTimeCoeffs, jy_short, jz_short, rho_short,
                         short_time_coeffs, short_time_expectations)
from .spin_algebra import (EigenSystem, SpinOperators, SystemParams,
                           build_spin_operators, diagonalize_hs, expect,
                           hamiltonian, heisenberg_f)

__all__ = [
    "BathSpec", "DEFAULT_POLICY", "DephasingFactors", "EigenSystem",
    "FailedRunError", "IntegrationError", "MemoryKernel", "Preparation",
    "PrepCoefficients", "QuadraturePolicy", "ShortTimeCoeffs", "SimConfig",
    "SpinOperators", "SystemParams", "ThermalSpinFactors", "Trajectory",
    "build_memory_kernel", "build_spin_operators", "coefficients",
    "correlation", "correlation_table", "dephasing_factors",
    "dephasing_trajectory", "discretize_modes", "diagonalize_hs", "evolve",
    "exact_jz_mainframe", "exact_rho_correlated", "exact_rho_uncorrelated",
    "expect", "f_corr", "f_corr_oracle", "hamiltonian", "heisenberg_f",
    "initial_state", "integrate", "jy_short", "jz_short", "prep_vector",
    "rho_short", "rhs", "rotated_amplitudes", "short_time_coeffs",
    "short_time_expectations", "spectral_density", "thermal_spin_factors",
]
