"""Finite-truncation diagnostics for power dilation systems f(z^k)."""

from .scalars import EXACT, FLOAT, ExactnessError, GaussianRational, ModeError
from .series import (DirichletWeight, GramReport, TruncatedSeries, dilate, entry_tail_bound, gram,
                     gram_entry, inner_product, norm, norm_sq, scale_st)
from .bohr import (BohrSeries, MultiIndex, Tau, TorusPoint, apply_tau, bohr_lift, bohr_lift_t,
                   evaluate, factorize, h2_inner, index_to_int, sample_modulus, sample_moduli)
from .criteria import (ResidualReport, WeightLaw, coprime_pairs, coprime_residual, inner_test,
                       monomial_diagnostic, orthogonality_test, product_constant_test, proof_chain,
                       tau_symmetry_test)
from .basis import (biorthogonal_check, frame_bounds, norm_profile, omega_solve, parseval_check,
                    riesz_probe, synthesize)
from .moment import (MomentProblem, boundedness_probe, build_operator, isometry_check,
                     monomial_problem, operator_norm_estimate)

__version__ = "0.1.0"
