"""Rank-one perturbations of diagonal operators with empty point spectrum,
at finite truncation.

Construct vectors u avoiding every resolvent range over the spectrum,
non-vanishing partial-fraction functions 1 - sum c_i/(z - lambda_i), and
the resulting perturbation bundle (u, c, v, delta); verify the identities
and bounds of the construction numerically.
"""

from ._kernels import BACKEND, USING_COMPILED
from .dyadic import LRegion, ShrinkCertificate, SquareIndex, l_region, p_max, square_index
from .models import (Ball, DensityClass, SpectrumModel, cover_budget,
                     cover_hits, density_class, distance, exceptional_cover,
                     lambda_block, lambda_point, make_model, measure_in_rect,
                     validate_model)
from .nonvanishing import (CoefficientTable, EpsSchedule, GammaSchedule,
                           build_table, choose_mu, coefficients,
                           eval_product, eval_sum, nonvanishing_certificate,
                           tail_bound)
from .perturbation import (Branch, CellAssignment, IonascuProbe, IonascuVerdict,
                           PerturbationBundle, assemble_bundle,
                           cell_partition, cell_weights, construct_bundle,
                           ionascu_grid, ionascu_test, secular_eigenvalues,
                           truncate_matrix)
from .range_avoidance import (GrowthReport, SelectionPlan, WeightedVector,
                              assemble_u, build_selection,
                              divergence_diagnostic, resolvent_energy,
                              summability_diagnostic)

__version__ = "0.1.0"

__all__ = [
    "BACKEND", "USING_COMPILED", "__version__",
    "Ball", "DensityClass", "SpectrumModel", "make_model", "lambda_point",
    "lambda_block", "distance", "measure_in_rect", "density_class",
    "exceptional_cover", "cover_budget", "cover_hits", "validate_model",
    "SquareIndex", "ShrinkCertificate", "LRegion", "square_index", "p_max",
    "l_region",
    "SelectionPlan", "WeightedVector", "GrowthReport", "build_selection",
    "assemble_u", "resolvent_energy", "divergence_diagnostic",
    "summability_diagnostic",
    "CoefficientTable", "EpsSchedule", "GammaSchedule", "build_table",
    "choose_mu", "coefficients", "eval_product", "eval_sum", "tail_bound",
    "nonvanishing_certificate",
    "PerturbationBundle", "Branch", "IonascuProbe", "IonascuVerdict",
    "CellAssignment",
    "assemble_bundle", "construct_bundle", "ionascu_test", "ionascu_grid",
    "truncate_matrix", "secular_eigenvalues", "cell_partition",
    "cell_weights",
]
