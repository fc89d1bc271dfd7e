"""Periods, kappa = eta (2 omega)^-1 and partition-number tables of
hyperelliptic curves y^2 = f(x), deg f = 2g + 2."""

import math as _math

__version__ = "0.1.0"

from .curve import (Curve, DifferentialBasis, ScalingReport, baker_numerator,
                    curve_from_coefficients, curve_from_roots, differential_basis,
                    elementary_symmetric, polar, rescale)
from .errors import (ConvergenceError, HyperkappaError, NumericalError,
                     UnsupportedConfigurationError, ValidationError)
from .kappa import (KappaResult, eta_from_kappa, kappa_direct, kappa_modular,
                    kappa_single_characteristic, klein_shift, pure_theta_kappa)
from .lambda_exact import (LambdaMatrix, Partition, antidiagonal_sum_coefficient,
                           enumerate_partitions, first_row_coefficient, integer_table,
                           lambda_matrix, m_matrix, q_value, solve_partition_lambda,
                           verify_lemma_identity)
from .periods import (CycleSpec, PeriodSet, compute_periods, cycle_basis,
                      integrate_basis, legendre_residual, tau)
from .theta import (Characteristic, branch_characteristic, directional_hessian,
                    enumerate_nonsingular_even, parity, partition_characteristic,
                    riemann_constants, theta, theta_hessian_at_zero)

__all__ = sorted(name for name, obj in globals().items()
                 if not name.startswith("_") and not isinstance(obj, type(_math)))
