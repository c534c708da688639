"""Function calculus of rank-one dissipative extensions of symmetric operators."""

from .errors import (ConvergenceError, DecompositionError, DegeneracyError, DomainError,
                     EigenvalueError, ExtcalcError, MeasureError, NormalizationError,
                     QuadratureError, SupportError)
from .herglotz import (HerglotzEvaluator, boundary_density, eval_M, eval_s, eval_s_by_ratio,
                       livsic_criterion_diagnostic)
from .measure import (Atom, AtomSequence, ConstantDensity, DensityPiece, Lattice, Measure,
                      RationalDensity, TabulatedDensity, atomic_measure, herglotz_kernel_integral,
                      lebesgue_measure, load_measure, normalization_defect, resolvent_inner_product)
from .model import (ModelVector, apply_hat_B, decompose_dom_hat_B, deficiency_element,
                    eigenfunction_check, in_dom_dot_B)
from .resolvent import (Extension, apply_resolvent, cal_M_via_resolvent, deficiency_norm, krein_p,
                        krein_q)
from .spectral import SearchRegion, classify_spectral_point, find_eigenvalues
from .triple import (DissipativeTriple, equivalence_check, eval_cal_M, eval_S, load_triple,
                     range_disk, recover_invariants, verify_linear_relation)

__version__ = "0.1.0"
