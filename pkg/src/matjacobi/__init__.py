"""Matrix measures on [0,1] and the Kesten-McKay sum rule, numerically.

The package encodes p x p matrix measures three equivalent ways -- support
points and weights, block Jacobi recursion coefficients, and canonical
moments -- samples the classical unitary ensembles, and verifies the exact
and distributional identities tying the encodings together.
"""

__version__ = "0.1.0"

from .canonical import (CanonicalChain, canonical_chain_from_u,
                        canonical_from_recursion, canonical_to_recursion,
                        hermitian_canonical_direct)
from .chains import (RecursionChain, build_block_jacobi, eval_monic_op,
                     gram_schmidt, moments_from_chain, spectral_measure)
from .ensembles import (EnsembleSpec, SpectralSample, sample_gue, sample_jue,
                        sample_lue, sample_weights, spectral_sample, split_seeds)
from .exceptions import (BoundaryDegeneracy, NumericDegeneracy,
                         SpectrumOutOfDomain, TrivialityBreakdown)
from .hermitian import (EPS_PD, EigenDecomposition, herm_eigen, hermitize,
                        invsqrtm_pd, loewner_strictly_between, logdet_pd,
                        matrix_function, sqrtm_pd)
from .identities import (IdentityReport, VerblunskySeq, check_det_identities,
                         check_phi_det_product, check_schur_recursion, check_ym,
                         check_ym_from_chain, free_canonical_chain, szego_phi,
                         transform_chain_to_sym, verblunsky_from_canonical)
from .kmk import KMKParams, kmk_density, kmk_params, kmk_quadrature
from .measures import (MatrixMeasure, MatrixPolynomial, from_atoms,
                       inner_product, kmk_measure, moment)
from .mcverify import (McTestConfig, McTestReport, run_gue_coefficient_test,
                       run_jacobi_canonical_test, run_kmk_limit_test,
                       theorem_parameters)
from .sumrule import (CoefficientSide, GemReport, MeasureSide, StructuredMeasure,
                      SumRuleReport, coefficient_side, evaluate_sum_rule,
                      gem_check, h_even, h_odd, kl_divergence,
                      kmk_mismatch_family, measure_side, outlier_energy,
                      rate_fixed_size, uniform_vs_arcsine_family)

__all__ = [name for name in dir() if not name.startswith("_")]
