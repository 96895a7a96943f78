"""Hierarchical max-margin multiclass linear SVM and its weighted-sum baseline.

The hierarchical model picks, among all classifiers minimizing the
generalized hinge loss, one that maximizes the smallest pairwise margin; it is
trained by a hybrid steepest descent iteration over the fixed-point set of a
composed projection/splitting operator. The baseline is the classic
weighted-sum formulation solved by a forward-backward primal-dual method.
"""

from .data import (DatasetSchema, IRIS_SCHEMA, SubsetSpec, builtin_subset_spec,
                   load_builtin_iris, load_delimited, make_subset)
from .drs import (apply_t_drs, apply_t_drs_relaxed, extract_minimizer,
                  fixed_point_residual, minimize_hinge)
from .errors import (ConfigError, DegeneratePairError, DivergenceError, HiersvmError,
                     InputError, InternalError, UnsupportedDimensionError)
from .hsdm import HsdmConfig, apply_T, hsdm_step, lambda_schedule, solve_rhc
from .model import (ClassifierParams, EvaluationReport, TrainingDataset, check_margin_witness,
                    classify, evaluate, halfspace_distance, hinge_loss, label_pairs,
                    pairwise_margin, worst_pair_objective)
from .ncr import NcrConfig, objective_ncr, power_iteration, quadratic_term_gradient, solve_ncr
from .operators import DataOperator
from .points import ProductPoint, SplitPoint
from .projections import (BoundingBox, compute_radii, hinge_shift, project_bounding_box,
                          project_simplex, project_soc, prox_shifted_max)
from .report import SolverReport

__version__ = "0.1.0"
