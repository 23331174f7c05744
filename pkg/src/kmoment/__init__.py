"""Moment and correlation realizability for random measures on a finite site grid."""

__version__ = "0.1.0"

from .grid import (DiscreteMeasure, GridSizeError, GridSpec, PointConfiguration, SiteFunction,
                   SymTensor, multiplicity, sym_outer, tensor_pairing, tensor_power_pairing)
from .factorial import (enumerate_compositions, enumerate_set_partitions, factorial_pairing,
                        factorial_pairing_config, factorial_poly_expand, power_poly_expand,
                        t_restrict)
from .conversion import (CorrelationSequence, DegreeError, MomentSequence, corr_to_moment,
                         moment_to_corr, riesz_corr, riesz_moment)
from .ktransform import (CoeffSequence, factorial_basis_element, h_tilde, k_transform,
                         phi_sequence, shift_corr, shift_corr_bruteforce, star)
from .realizability import (CheckReport, ConstraintPoly, DeterminacyDiagnostic, MonomialBasis,
                            TestSetConfig, almost_increasing, check_corr_multi,
                            check_corr_simple, check_multi_config, check_prob,
                            check_simple_config, check_subprob, check_subprob_alt,
                            check_thm_suff, hankel_matrix, localizing_matrix, psd_verdict,
                            stieltjes_diagnostic)
from .oracles import (ModelSpec, bernoulli_correlations, dirichlet_subprob_moments,
                      fixed_config_moments, fixed_measure_moments, mc_correlations,
                      poisson_correlations, sample_poisson)
