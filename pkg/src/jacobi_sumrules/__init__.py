"""Sum rules, spectral densities and divergence diagnostics for
eventually-free Jacobi matrices."""

__version__ = "0.1.0"

from .coefficients import (CoefficientFamily, JacobiCoefficients, differences,
                           r_sequence, strip, truncate_to_free)
from .bandmatrix import (BandWindow, chebyshev_of_half, p_w_matrix, pad,
                         trace_p_w, xi_ell, xi_weighted)
from .spectrum import (PointSpectrum, beta_from_energy, energy_from_beta,
                       eigenvalues_outside, f_w, lieb_thirring_sum,
                       sturm_count, sturm_eigenvalues, x_ell, x_weighted)
from .measure import (DensityEvaluator, density, free_density, m_free,
                      szego_integral_32, szego_integral_32_direct, z_w,
                      z_w_result)
from .sumrules import (DiagnoseThresholds, DivergenceVerdict, SumRuleReport,
                       convergence_study, diagnose, full_rule,
                       step_rule_residual, step_rule_terms, t1b_equivalence)
from .weights import TrigWeight, eq211, named_weight, one_minus_cos, one_plus_cos

__all__ = [
    "BandWindow", "CoefficientFamily", "DensityEvaluator",
    "DiagnoseThresholds", "DivergenceVerdict", "JacobiCoefficients",
    "PointSpectrum", "SumRuleReport", "TrigWeight", "beta_from_energy",
    "chebyshev_of_half", "convergence_study", "density", "diagnose",
    "differences", "eigenvalues_outside", "energy_from_beta", "eq211", "f_w",
    "free_density", "full_rule", "lieb_thirring_sum", "m_free",
    "named_weight", "one_minus_cos", "one_plus_cos", "p_w_matrix", "pad",
    "r_sequence", "step_rule_residual", "step_rule_terms", "strip",
    "sturm_count", "sturm_eigenvalues", "szego_integral_32",
    "szego_integral_32_direct", "t1b_equivalence", "trace_p_w",
    "truncate_to_free", "x_ell", "x_weighted", "xi_ell", "xi_weighted", "z_w",
    "z_w_result",
]
