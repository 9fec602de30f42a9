"""Cubic-matrix algebras, two-time stochastic process families, and
simplex dynamics."""

from .algebra import (BinaryOp, CubicMatrix, OpAnalysis, SquareMatrix,
                      analyze_op, basis, first_slice, middle_marginal,
                      op_product, slice_product, square_product)
from .dynamics import (Distribution, LimitReport, StochasticityError,
                       Trajectory, closed_form, limit_estimate,
                       m7_quadratic_form, quadratic_map, split_kernel,
                       step_quadratic, step_split, trajectory)
from .families import (FamilyDomainError, GqDemo, M7Spec, MatrixFamily,
                       ParamFn, Violation, build_m7, classify_m7_type,
                       eval_family, make_family, make_m7,
                       negative_example_gq, validate_domain)
from .kce import (ImpossibilityCertificate, KceReport, TimeGrid,
                  impossibility_demo, kce_residual, square_kce_residual,
                  verify_grid, verify_square_grid)
from .stochasticity import (ClassReport, KindCheck, SquareClass, StochKind,
                            check_kind, classify, square_class)

__version__ = "0.1.0"
