"""Riemann theta functions with half-integer characteristics.

The series

    theta[eps](z; tau) = sum_n exp(i pi (n+eps)^T tau (n+eps)
                                   + 2 i pi (n+eps)^T (z+eps'))

is summed over the lattice points inside an ellipsoid whose radius comes
from a Gaussian tail bound (Deconinck et al., Math. Comp. 73 (2004)), with
the shortest lattice vector replaced by the lower bound sqrt(pi lambda_min).

Also here: the dictionary between branch points / partitions and
characteristics via Abel images of the branch points.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

import numpy as np
from scipy.special import gammaincc, gamma as gamma_fn

from .errors import NumericalError, ValidationError

MAX_LATTICE_POINTS = 10_000_000
NONSINGULAR_DELTA = 1e-6
ROUNDING_TOL = 1e-6


@dataclass(frozen=True)
class Characteristic:
    """Half-integer characteristic stored as doubled integers in {0, 1}."""

    eps: tuple
    eps_prime: tuple

    def __post_init__(self):
        if len(self.eps) != len(self.eps_prime):
            raise ValidationError("characteristic rows differ in length", "characteristic")
        for v in self.eps + self.eps_prime:
            if v not in (0, 1):
                raise ValidationError(
                    "characteristic entries must be 0 or 1 (doubled halves)",
                    "characteristic")

    @classmethod
    def from_halves(cls, eps, eps_prime):
        """Build from entries in {0, 1/2} (reduced mod 1)."""
        def dbl(v):
            k = round(2 * float(v))
            if abs(2 * float(v) - k) > 1e-12:
                raise ValidationError(f"{v} is not a half-integer", "characteristic")
            return k % 2
        return cls(tuple(dbl(v) for v in eps), tuple(dbl(v) for v in eps_prime))

    @classmethod
    def zero(cls, g):
        return cls((0,) * g, (0,) * g)

    @property
    def genus(self) -> int:
        return len(self.eps)

    @property
    def eps_vec(self) -> np.ndarray:
        return np.array(self.eps, dtype=float) / 2

    @property
    def eps_prime_vec(self) -> np.ndarray:
        return np.array(self.eps_prime, dtype=float) / 2

    @property
    def parity(self) -> str:
        return parity(self)

    @property
    def is_even(self) -> bool:
        return parity(self) == "even"

    def __str__(self):
        half = lambda v: "1/2" if v else "0"
        top = " ".join(half(v) for v in self.eps)
        bot = " ".join(half(v) for v in self.eps_prime)
        return f"[{top}; {bot}]"


@dataclass(frozen=True)
class ThetaValue:
    value: complex
    truncation_radius: float
    est_error: float


def parity(char: Characteristic) -> str:
    # 4 eps.eps' with eps = d/2 is just d.d'
    s = sum(a * b for a, b in zip(char.eps, char.eps_prime))
    return "even" if s % 2 == 0 else "odd"


def all_characteristics(g: int, which: str | None = None):
    """All 4**g characteristics, optionally only ``"even"`` or ``"odd"`` ones."""
    out = []
    for bits in itertools.product((0, 1), repeat=2 * g):
        c = Characteristic(tuple(bits[:g]), tuple(bits[g:]))
        if which is None or parity(c) == which:
            out.append(c)
    return out


# -- truncation -------------------------------------------------------------

def _validate_tau(tau):
    tau = np.asarray(tau, dtype=complex)
    if tau.ndim != 2 or tau.shape[0] != tau.shape[1]:
        raise ValidationError("tau must be a square matrix", "tau")
    scale = max(1.0, float(np.max(np.abs(tau))))
    if np.max(np.abs(tau - tau.T)) > 1e-8 * scale:
        raise ValidationError("tau is not symmetric", "tau_symmetry")
    Y = (tau.imag + tau.imag.T) / 2
    lam_min = float(np.linalg.eigvalsh(Y).min())
    if lam_min <= 0:
        raise ValidationError("Im tau is not positive definite", "tau_positive")
    return (tau + tau.T) / 2, Y, lam_min


def _tail_bound(R, g, rho, order, tinv_norm):
    """Bound on the neglected tail of a derivative of the given order."""
    x = max(R - rho / 2, 0.0) ** 2
    total = 0.0
    for k in range(order + 1):
        a = (g + k) / 2
        inc = gammaincc(a, x) * gamma_fn(a)
        total += (math.comb(order, k) * math.pi ** (-k / 2) * tinv_norm ** k
                  * math.sqrt(g) ** (order - k) * inc)
    return (2 * math.pi) ** order * g / 2 * (2 / rho) ** g * total


def truncation_radius(Y, lam_min, tol, order=0, boost=1.0):
    """Smallest R (in the sqrt(pi Y) metric) with tail bound below tol."""
    g = Y.shape[0]
    rho = math.sqrt(math.pi * lam_min)
    tinv_norm = 1.0 / math.sqrt(lam_min)
    target = tol / boost
    R = max(rho / 2 + math.sqrt(g) / 2, 1.0)
    while _tail_bound(R, g, rho, order, tinv_norm) >= target:
        R += 0.25
        if R > 1e3:
            raise NumericalError("theta tolerance unreachable", "theta_radius")
    est = _tail_bound(R, g, rho, order, tinv_norm) * boost
    return R, est


def _lattice_points(Y, center, R):
    """Integer n with pi (n - center)^T Y (n - center) <= R^2."""
    g = Y.shape[0]
    Yinv = np.linalg.inv(Y)
    half = R * np.sqrt(np.diag(Yinv) / math.pi)
    lo = np.ceil(center - half).astype(int)
    hi = np.floor(center + half).astype(int)
    sizes = hi - lo + 1
    total = int(np.prod(np.maximum(sizes, 0)))
    if total > MAX_LATTICE_POINTS:
        raise NumericalError(
            f"theta truncation needs {total} lattice points (cap {MAX_LATTICE_POINTS})",
            "theta_radius")
    axes = [np.arange(l, h + 1) for l, h in zip(lo, hi)]
    grid = np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1).reshape(-1, g)
    d = grid - center
    q = math.pi * np.einsum("ij,jk,ik->i", d, Y, d)
    return grid[q <= R * R]


def _terms(char, z, tau, Y, lam_min, tol, order):
    g = tau.shape[0]
    z = np.asarray(z, dtype=complex).reshape(g)
    eps, epsp = char.eps_vec, char.eps_prime_vec
    shift = np.linalg.solve(Y, z.imag)
    # |term| = exp(-pi (v+shift)^T Y (v+shift)) * exp(pi Im z^T Y^-1 Im z)
    boost = math.exp(math.pi * float(z.imag @ shift))
    R, est = truncation_radius(Y, lam_min, tol, order=order, boost=boost)
    n = _lattice_points(Y, -shift - eps, R)
    v = n + eps
    expo = 1j * math.pi * np.einsum("ij,jk,ik->i", v, tau, v) + 2j * math.pi * (v @ (z + epsp))
    return v, np.exp(expo), R, est


def theta(char: Characteristic, z, tau, tol: float = 1e-12) -> ThetaValue:
    tau, Y, lam_min = _validate_tau(tau)
    if char.genus != tau.shape[0]:
        raise ValidationError("characteristic and tau genus differ", "genus")
    z = np.asarray(z, dtype=complex).reshape(tau.shape[0])
    if not char.is_even and not np.any(z):
        R, _ = truncation_radius(Y, lam_min, tol)
        return ThetaValue(0j, R, 0.0)
    _, t, R, est = _terms(char, z, tau, Y, lam_min, tol, order=0)
    return ThetaValue(complex(t.sum()), R, est)


def theta_gradient(char, z, tau, tol=1e-12) -> np.ndarray:
    tau, Y, lam_min = _validate_tau(tau)
    v, t, _, _ = _terms(char, z, tau, Y, lam_min, tol, order=1)
    return 2j * math.pi * (v.T @ t)


def theta_hessian(char, z, tau, tol=1e-12) -> np.ndarray:
    tau, Y, lam_min = _validate_tau(tau)
    v, t, _, _ = _terms(char, z, tau, Y, lam_min, tol, order=2)
    H = (2j * math.pi) ** 2 * (v.T * t) @ v
    return (H + H.T) / 2


def theta_hessian_at_zero(char: Characteristic, tau, tol: float = 1e-12) -> np.ndarray:
    """Matrix of second derivatives of theta[char] at z = 0 (even char only)."""
    if not char.is_even:
        raise ValidationError("Hessian at zero is defined here for even characteristics",
                              "parity")
    g = char.genus
    return theta_hessian(char, np.zeros(g), tau, tol)


def directional_hessian(char: Characteristic, periods, tol: float = 1e-12) -> np.ndarray:
    """(Theta_{a,b}[char]) = V^T theta'' V with V = (2 omega)^-1."""
    V = periods.inv_two_omega
    H = theta_hessian_at_zero(char, periods.tau, tol)
    return V.T @ H @ V


def theta_constants(tau, tol=1e-12, which="even") -> dict:
    return {c: theta(c, np.zeros(np.shape(tau)[0]), tau, tol).value
            for c in all_characteristics(np.shape(tau)[0], which)}


def enumerate_nonsingular_even(tau, tol: float = 1e-12, delta: float = NONSINGULAR_DELTA,
                               hyperelliptic: bool = True) -> list:
    """Even characteristics whose theta constant does not vanish.

    For a hyperelliptic tau the count must be binomial(2g+1, g); a mismatch
    raises (with ``hyperelliptic=False`` the list is returned as is).
    """
    g = np.shape(tau)[0]
    consts = theta_constants(tau, tol)
    top = max(abs(v) for v in consts.values())
    chars = [c for c, v in consts.items() if abs(v) > delta * top]
    if hyperelliptic:
        expected = math.comb(2 * g + 1, g)
        if len(chars) != expected:
            raise NumericalError(
                f"census mismatch: {len(chars)} non-singular even characteristics, "
                f"expected {expected}", "census")
    return chars


# -- Abel images and characteristics ---------------------------------------

def _interval_lifts(curve, periods):
    P = periods.interval_periods
    if P is None:
        from .periods import interval_integrals
        P = interval_integrals(curve, periods.tol)
    g = curve.genus
    return P[:, :g]


def abel_image(curve, periods, j: int, base_index: int | None = None) -> np.ndarray:
    """Integral of u from the base branch point to e_j along the real axis.

    Indices are 1-based into the sorted branch points; the base defaults to
    the largest one, e_{2g+2}.  The path runs on the upper sheet, so each
    interval contributes half its lift period.
    """
    n = curve.degree
    base = n if base_index is None else base_index
    for idx in (j, base):
        if not 1 <= idx <= n:
            raise ValidationError(f"branch index {idx} outside 1..{n}", "index")
    lifts = _interval_lifts(curve, periods)
    lo, hi = sorted((j, base))
    seg = 0.5 * lifts[lo - 1:hi - 1].sum(axis=0)
    return seg if j > base else -seg


def half_period_characteristic(periods, vector, tol: float = ROUNDING_TOL):
    """Theta characteristic of the half period ``vector``.

    Writes vector = 2 omega x + 2 omega' y.  In normalized coordinates that is
    x + tau y, and theta[eps; eps'] is (up to a factor) theta shifted by
    eps' + tau eps, so the characteristic is [y; x].  Returns
    (characteristic, residual); raises if (x, y) is not within ``tol`` of a
    half-integer point.
    """
    g = periods.genus
    M = np.hstack([periods.two_omega, periods.two_omega_prime])
    A = np.vstack([M.real, M.imag])
    b = np.concatenate([np.real(vector), np.imag(vector)])
    x = np.linalg.solve(A, b)
    doubled = np.rint(2 * x)
    residual = float(np.max(np.abs(x - doubled / 2)))
    if residual >= tol:
        raise NumericalError(
            f"Abel image is not a half period (rounding residual {residual:.3g})",
            "half_period")
    d = [int(v) % 2 for v in doubled]
    return Characteristic(tuple(d[g:]), tuple(d[:g])), residual


def branch_characteristic(curve, periods, j: int, base_index: int | None = None):
    return half_period_characteristic(periods, abel_image(curve, periods, j, base_index))[0]


def riemann_constants(curve, periods, base_index: int | None = None) -> np.ndarray:
    """K = sum of the Abel images of the odd branch points."""
    g = curve.genus
    K = np.zeros(g, dtype=complex)
    for j in range(1, curve.degree + 1):
        A = abel_image(curve, periods, j, base_index)
        char, _ = half_period_characteristic(periods, A)
        if not char.is_even:
            K = K + A
    return K


def partition_characteristic(curve, periods, partition, base_index: int | None = None,
                             tol: float = 1e-12, check: bool = True) -> Characteristic:
    """Characteristic of sum_{i in I0} A_i + K; must be even and non-singular."""
    idx = partition.I0 if hasattr(partition, "I0") else tuple(partition)
    vec = riemann_constants(curve, periods, base_index)
    for i in idx:
        vec = vec + abel_image(curve, periods, i, base_index)
    char, _ = half_period_characteristic(periods, vec)
    if check:
        if not char.is_even:
            raise NumericalError(f"partition {idx} maps to odd characteristic {char}",
                                 "partition_parity")
        consts = theta_constants(periods.tau, tol)
        top = max(abs(v) for v in consts.values())
        if abs(consts[char]) <= NONSINGULAR_DELTA * top:
            raise NumericalError(f"partition {idx} maps to singular characteristic {char}",
                                 "partition_singular")
    return char
