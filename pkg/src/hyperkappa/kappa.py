"""kappa = eta (2 omega)^-1 by direct, single-characteristic and modular routes.

Every route takes the ``PeriodSet`` it works in; kappa depends on the
homology basis, so mixing period sets would compare different objects.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import NumericalError, ValidationError
from .lambda_exact import LambdaMatrix, Partition, solve_partition_lambda
from .periods import PeriodSet, _safe_inverse
from .theta import (directional_hessian, enumerate_nonsingular_even,
                    partition_characteristic, theta)

ROUTES = ("direct", "single_char", "modular", "klein")
SYMMETRY_TOL = 1e-9


@dataclass(frozen=True)
class KappaResult:
    kappa: np.ndarray
    route: str
    #: max-norm distance to kappa_direct on the same periods; for the klein
    #: route the reference is the pure theta-constant sum instead
    residual_vs_direct: float = float("nan")

    def __post_init__(self):
        if self.route not in ROUTES:
            raise ValidationError(f"unknown route {self.route!r}", "route")
        k = self.kappa
        scale = max(float(np.max(np.abs(k))), 1e-300)
        asym = float(np.max(np.abs(k - k.T)))
        if asym > SYMMETRY_TOL * max(scale, 1.0):
            raise NumericalError(f"kappa not symmetric (|k - k^T| = {asym:.3g})",
                                 "kappa_symmetry")


def _symmetrize(k):
    return (k + k.T) / 2


def _residual(kappa, direct):
    if direct is None:
        return float("nan")
    return float(np.max(np.abs(kappa - direct)))


def kappa_direct(periods: PeriodSet) -> KappaResult:
    inv = _safe_inverse(periods.two_omega)
    k = periods.eta @ inv
    # checked for symmetry before symmetrizing
    KappaResult(k, "direct", 0.0)
    return KappaResult(_symmetrize(k), "direct", 0.0)


def eta_from_kappa(kappa, two_omega, two_omega_prime):
    """(2 eta, 2 eta') = (2 kappa 2omega, 2 kappa 2omega' - 2 i pi (2omega)^-T)."""
    kappa = np.asarray(kappa, dtype=complex)
    two_omega = np.asarray(two_omega, dtype=complex)
    two_omega_prime = np.asarray(two_omega_prime, dtype=complex)
    if not (kappa.shape == two_omega.shape == two_omega_prime.shape) or kappa.ndim != 2:
        raise ValidationError("kappa, 2omega and 2omega' must share one square shape",
                              "shape")
    inv_t = _safe_inverse(two_omega).T
    two_eta = 2 * kappa @ two_omega
    two_eta_prime = 2 * kappa @ two_omega_prime - 2j * math.pi * inv_t
    return two_eta, two_eta_prime


def _require_monic(curve):
    if curve.leading != 1:
        raise ValidationError(
            "modular routes need a monic curve; rescale f first", "monic")


def theta_sum(periods: PeriodSet, tol: float = 1e-12, characteristics=None) -> np.ndarray:
    """sum over non-singular even [eps] of Theta_ab[eps] / Theta[eps]."""
    g = periods.genus
    if characteristics is None:
        characteristics = enumerate_nonsingular_even(periods.tau, tol)
    total = np.zeros((g, g), dtype=complex)
    for char in characteristics:
        th = theta(char, np.zeros(g), periods.tau, tol).value
        total = total + directional_hessian(char, periods, tol) / th
    return total


def pure_theta_kappa(periods: PeriodSet, tol: float = 1e-12) -> np.ndarray:
    """-(1 / 2N) sum Theta_ab / Theta: kappa in a Klein basis."""
    n = math.comb(2 * periods.genus + 1, periods.genus)
    return _symmetrize(-theta_sum(periods, tol) / (2 * n))


def kappa_modular(curve, periods: PeriodSet, lam: LambdaMatrix,
                  tol: float = 1e-12) -> KappaResult:
    """kappa = Lambda_g / (8 N) - (1 / 2N) sum Theta_ab / Theta."""
    _require_monic(curve)
    g = curve.genus
    n = math.comb(2 * g + 1, g)
    L = lam.evaluate(curve)
    k = _symmetrize(L / (8 * n) - theta_sum(periods, tol) / (2 * n))
    return KappaResult(k, "modular", _residual(k, kappa_direct(periods).kappa))


def kappa_single_characteristic(curve, periods: PeriodSet, partition,
                                tol: float = 1e-12) -> KappaResult:
    """kappa = Lambda^[eps] / 8 - Theta_ab[eps] / (2 Theta[eps]) for one partition."""
    _require_monic(curve)
    g = curve.genus
    if not isinstance(partition, Partition):
        partition = Partition.from_subset(partition, g)
    char = partition_characteristic(curve, periods, partition, tol=tol)
    L = np.asarray(solve_partition_lambda(curve, partition, exact=False), dtype=complex)
    th = theta(char, np.zeros(g), periods.tau, tol).value
    k = _symmetrize(L / 8 - directional_hessian(char, periods, tol) / (2 * th))
    return KappaResult(k, "single_char", _residual(k, kappa_direct(periods).kappa))


def klein_shift(periods: PeriodSet, lam: LambdaMatrix, curve=None,
                tol: float = 1e-12) -> tuple[PeriodSet, KappaResult]:
    """Move to the Klein basis, C = -Lambda_g / (4N), kappa -> kappa + C / 2.

    The second-kind periods shift by 2eta -> 2eta + C 2omega and
    2eta' -> 2eta' + C 2omega', which keeps the Legendre relation since C is
    symmetric.
    """
    curve = curve if curve is not None else periods.curve
    if curve is None:
        raise ValidationError("klein_shift needs the curve behind the periods", "curve")
    g = periods.genus
    n = math.comb(2 * g + 1, g)
    L = lam.evaluate(curve)
    if np.max(np.abs(L - L.T)) > 1e-12 * max(1.0, float(np.max(np.abs(L)))):
        raise NumericalError("Lambda_g is not symmetric", "lambda_symmetry")
    C = -L / (4 * n)
    shifted = periods.with_eta(periods.two_eta + C @ periods.two_omega,
                               periods.two_eta_prime + C @ periods.two_omega_prime)
    k = kappa_direct(shifted).kappa
    return shifted, KappaResult(k, "klein", _residual(k, pure_theta_kappa(shifted, tol)))
