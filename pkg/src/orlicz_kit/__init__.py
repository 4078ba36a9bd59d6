"""Numerics for generalized Orlicz spaces: integrands, modulars and Luxemburg
norms on sampled boxes, curve integrals, the modulus of curve families, and
discrete absolute-continuity diagnostics.
"""

__version__ = "0.1.0"

from .errors import InputError, IntegrityError, OrliczKitError, UnsupportedError
from .phi import (FAMILIES, ConjugatePhi, PhiFunction, conjugate_phi, eval_phi, left_inverse,
                  phi_from_descriptor)
from .conditions import Condition, ConditionReport, SampleSpec, check_condition, check_equivalence, rescaled_beta
from .field import (BoxGrid, NormResult, ScalarField, holder_check, in_lphi, luxemburg_norm, modular,
                    norm_modular_bounds, parse_field, read_field, write_field, format_field)
from .curve import (Curve, CurveFamily, constraint_matrix, curve_integral, curves_meeting_set, diagonal_family,
                    format_family, parse_family, read_family, segment_family, star_family, write_family)
from .modulus import (ModulusResult, SolverOptions, estimate_modulus_modular, estimate_modulus_norm,
                      modulus_properties_suite, verify_exceptional_witness)
from .acsob import ACReport, acc_check, acl_check, fuglede_subsequence, gradient, sobolev_report
from .generators import GENERATORS, generate
from .scenario import builtin_scenarios, run_scenario

import types as _types

__all__ = sorted(n for n, v in globals().items() if not n.startswith("_") and not isinstance(v, _types.ModuleType))
