"""Spectral toolkit for Fourier-Lebesgue analysis on the torus.

Periodic FFT plumbing, dyadic (Littlewood-Paley) decompositions,
FL/Besov/Triebel-Lizorkin norms with exact embedding predicates,
oscillatory-integral operators with certified phases, a factorized
solver for higher-order hyperbolic Cauchy problems, and an empirical
probe harness with a `hypfl` command line on top.
"""

from .core import (GridFunction, GridSpec, SpectralFunction, apply_multiplier,
                   bessel_potential, bessel_weights, bracket, forward_transform,
                   inverse_transform, set_max_threads, spatial_lp_norm)
from .fio import (FioSpec, apply_fio, compose_with_bessel, make_fio,
                  required_order_fl, required_order_fl_pq)
from .gfn import (BadMagic, GfnError, NonPowerOfTwo, TruncatedPayload,
                  UnequalAxes, UnsupportedDimension, read_gfn, write_gfn)
from .hyperbolic import (CoefficientSymbol, HyperbolicProblemSpec, NegativeImaginary,
                         RegularityReport, RootCollision, SolveReport,
                         UnsupportedProblem, characteristic_roots,
                         coefficient_from_descriptor, constant_coefficient,
                         first_order_propagate, regularity_report, solve_cauchy,
                         trigpoly_coefficient, vandermonde_data_map)
from .lp import (DyadicFamily, PartitionError, block_bracket_ratios,
                 build_dyadic_family, dyadic_block, lp_decompose, phi_profile,
                 psi_profile, smooth_step)
from .phases import (CATALOGUE, PhaseReport, PhaseSpec, PhaseValidationError,
                     SymbolReport, SymbolSpec, TrigPolynomial,
                     bracket_power_symbol, dissipative_phase, ensure_valid_phase,
                     half_wave_phase, identity_phase, phase_from_descriptor,
                     symbol_check, torus_diffeo_phase, unit_symbol, validate_phase)
from .probe import (NyquistHeadroomError, ScanReport, TestFamily, classify_trend,
                    default_grid, default_ladder, embedding_ratio_sweep,
                    estimate_operator_norm, family_members, fit_loglog,
                    regularity_scan, threshold_scan)
from .spaces import (INF, IndexTuple, NormResult, admissibility_decision,
                     besov_embedding_decision, besov_embeds_fl, besov_norm,
                     conjugate, fio_besov_to_fl_admissible,
                     fio_triebel_to_fl_admissible, fl_norm, recip, triebel_norm,
                     triebel_embedding_decision, triebel_embeds_fl)

__version__ = "0.1.0"

__all__ = [name for name in dir() if not name.startswith("_")]
