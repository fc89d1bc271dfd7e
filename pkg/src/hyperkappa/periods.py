"""Period matrices of the Baker basis for curves with real branch points.

Branch points e_1 < ... < e_{2g+2} are joined by the cuts [e_1, e_2], ...,
[e_{2g+1}, e_{2g+2}].  Lifting the real interval between two consecutive
branch points to a closed loop (upper sheet there, lower sheet back) gives a
cycle gamma_i; with y continued through the upper half plane from
x > e_{2g+2}, consecutive lifts meet once and gamma_i . gamma_{i+1} = +1.
The canonical basis is

    a_k = gamma_{2k-1}                   (around the k-th cut)
    b_k = gamma_{2k} + ... + gamma_{2g}  (the gaps from cut k to the last cut)

Periods of the second-kind differentials carry the sign for which the
Legendre relation reads eta^T omega' - omega^T eta' = +i pi / 2 together with
Im tau > 0 (the convention under which the modular representation of kappa
holds); numerically this is 2 eta = -oint r.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from functools import lru_cache

import numpy as np

from .curve import Curve, baker_numerator_coefficients
from .errors import (ConvergenceError, NumericalError, UnsupportedConfigurationError,
                     ValidationError)

MIN_TOL = 1e-14
MAX_TOL = 1e-4
START_NODES = 16
MAX_NODES = 4096


@dataclass(frozen=True)
class Segment:
    """Lift of the interval between branch points ``start`` and ``start + 1``.

    Indices are 0-based into the sorted branch points.  ``sheet`` is +1 when
    the outbound leg uses y = sqrt(f(mid)) (principal root at the interval
    midpoint), -1 for the other sheet.
    """

    start: int
    end: int
    sheet: int


@dataclass(frozen=True)
class CycleSpec:
    branch_points: tuple
    a_cycles: tuple
    b_cycles: tuple
    #: y_+(mid) / sqrt(f(mid)) on each interval, y_+ being the upper half
    #: plane continuation; converts per-segment sheets to homology coefficients
    branch_signs: tuple

    def __post_init__(self):
        g = len(self.a_cycles)
        if len(self.b_cycles) != g:
            raise ValidationError("need as many b-cycles as a-cycles", "cycles")
        pairing = self.pairing_matrix()
        J = np.block([[np.zeros((g, g)), np.eye(g)], [-np.eye(g), np.zeros((g, g))]])
        if not np.array_equal(pairing, J):
            raise ValidationError("cycle basis is not canonical", "intersection")

    @property
    def genus(self) -> int:
        return len(self.a_cycles)

    def coefficient_vector(self, cycle) -> np.ndarray:
        """Homology coefficients of ``cycle`` on the interval lifts gamma_i."""
        vec = np.zeros(len(self.branch_points) - 1, dtype=int)
        for seg in cycle:
            lo = min(seg.start, seg.end)
            if abs(seg.end - seg.start) != 1:
                raise ValidationError("segments must join neighbouring branch points",
                                      "cycles")
            orient = 1 if seg.end > seg.start else -1
            vec[lo] += orient * seg.sheet * self.branch_signs[lo]
        return vec

    def pairing_matrix(self) -> np.ndarray:
        cycles = list(self.a_cycles) + list(self.b_cycles)
        vecs = np.array([self.coefficient_vector(c) for c in cycles])
        n = vecs.shape[1]
        gam = np.zeros((n, n), dtype=int)
        for i in range(n - 1):
            gam[i, i + 1] = 1
            gam[i + 1, i] = -1
        return vecs @ gam @ vecs.T


@dataclass(frozen=True)
class PeriodSet:
    two_omega: np.ndarray
    two_omega_prime: np.ndarray
    two_eta: np.ndarray
    two_eta_prime: np.ndarray
    tau: np.ndarray
    inv_two_omega: np.ndarray
    curve: Curve | None = field(default=None, compare=False)
    #: oint over gamma_i of (u_1..u_g, r_1..r_g) on the upper sheet, one row
    #: per interval; used for Abel images
    interval_periods: np.ndarray | None = field(default=None, compare=False, repr=False)
    tol: float = 1e-12

    @property
    def genus(self) -> int:
        return self.two_omega.shape[0]

    @property
    def omega(self):
        return self.two_omega / 2

    @property
    def omega_prime(self):
        return self.two_omega_prime / 2

    @property
    def eta(self):
        return self.two_eta / 2

    @property
    def eta_prime(self):
        return self.two_eta_prime / 2

    @property
    def V(self) -> np.ndarray:
        """Columns V_k of (2 omega)^-1."""
        return self.inv_two_omega

    def with_eta(self, two_eta, two_eta_prime) -> "PeriodSet":
        return replace(self, two_eta=np.asarray(two_eta, dtype=complex),
                       two_eta_prime=np.asarray(two_eta_prime, dtype=complex))

    @classmethod
    def from_matrices(cls, two_omega, two_omega_prime, two_eta, two_eta_prime,
                      curve=None, interval_periods=None, tol=1e-12, check=True):
        two_omega = np.asarray(two_omega, dtype=complex)
        two_omega_prime = np.asarray(two_omega_prime, dtype=complex)
        inv = _safe_inverse(two_omega)
        t = inv @ two_omega_prime
        if check:
            _check_tau(t)
        return cls(two_omega, two_omega_prime,
                   np.asarray(two_eta, dtype=complex),
                   np.asarray(two_eta_prime, dtype=complex),
                   t, inv, curve, interval_periods, tol)


def _safe_inverse(m):
    cond = np.linalg.cond(m)
    if not np.isfinite(cond) or cond >= 1e12:
        raise NumericalError(f"2*omega is singular (condition number {cond:.3g})",
                             "singular_omega")
    return np.linalg.inv(m)


def _check_tau(t, sym_tol=1e-9):
    scale = max(1.0, float(np.max(np.abs(t))))
    if np.max(np.abs(t - t.T)) > sym_tol * scale:
        raise NumericalError("tau is not symmetric", "tau_symmetry")
    eig = np.linalg.eigvalsh((t.imag + t.imag.T) / 2)
    if eig.min() <= 0:
        raise NumericalError("Im tau is not positive definite", "tau_positive")


# -- cycle basis ------------------------------------------------------------

def _upper_branch(curve: Curve, pts: np.ndarray, x: complex) -> complex:
    """y at x via continuation through the upper half plane from +infinity."""
    lead = np.sqrt(complex(curve.leading))
    return complex(lead * np.prod(np.sqrt(x - pts + 0j)))


def _sorted_real_points(curve: Curve) -> np.ndarray:
    if not curve.real_branch_points:
        raise UnsupportedConfigurationError(
            "real branch points required for period computation", "real_branch_points")
    return np.sort(curve.roots.real)


def cycle_basis(curve: Curve) -> CycleSpec:
    """Canonical a/b cycles built from sorted-pair cuts."""
    pts = _sorted_real_points(curve)
    g = curve.genus
    signs = []
    for i in range(len(pts) - 1):
        mid = 0.5 * (pts[i] + pts[i + 1])
        # evaluate just above the axis so the upper branch is well defined
        x = mid + 1e-300j
        yu = _upper_branch(curve, pts, x)
        yp = np.sqrt(complex(curve.f(mid)))
        signs.append(int(round((yu / yp).real)))
    a = tuple((Segment(2 * k, 2 * k + 1, signs[2 * k]),) for k in range(g))
    b = tuple(tuple(Segment(2 * m + 1, 2 * m + 2, signs[2 * m + 1]) for m in range(k, g))
              for k in range(g))
    return CycleSpec(tuple(float(p) for p in pts), a, b, tuple(signs))


# -- quadrature -------------------------------------------------------------

@lru_cache(maxsize=None)
def chebyshev_nodes(n: int):
    """Nodes of the n-point Gauss-Chebyshev rule (first kind); weights pi/n."""
    k = np.arange(1, n + 1)
    return np.cos((2 * k - 1) * np.pi / (2 * n))


def _numerators(curve: Curve):
    g = curve.genus
    hol = [np.eye(1, g, i).ravel() for i in range(g)]
    mer = [np.array([complex(c) for c in baker_numerator_coefficients(curve, j)])
           for j in range(1, g + 1)]
    return hol, mer


def _interval_integral(curve, pts, i, n, hol, mer):
    """oint over one lift with y = sqrt(f(mid)) outbound, n nodes."""
    a, b = pts[i], pts[i + 1]
    m, h = 0.5 * (a + b), 0.5 * (b - a)
    t = chebyshev_nodes(n)
    x = m + h * t
    others = np.delete(pts, [i, i + 1])
    rest = np.prod(np.abs(x[:, None] - others[None, :]), axis=1)
    # |f| = |lead| h^2 (1 - t^2) rest; the h sqrt(1-t^2) cancels with dx
    lead = complex(curve.leading)
    yphase = np.sqrt(complex(curve.f(m)))
    yphase = yphase / abs(yphase)
    den = yphase * np.sqrt(abs(lead)) * np.sqrt(rest)
    w = np.pi / n
    out = []
    for num in hol:
        out.append(w * np.sum(np.polyval(num[::-1], x) / den))
    for num in mer:
        out.append(w * np.sum(np.polyval(num[::-1], x) / (4 * den)))
    return 2 * np.array(out)


def interval_integrals(curve: Curve, tol: float = 1e-12,
                       max_nodes: int = MAX_NODES) -> np.ndarray:
    """Periods of (u, r) over each interval lift gamma_i on the upper sheet.

    Returns an array of shape (2g+1, 2g).  Node counts double from 16 until
    successive estimates agree to ``tol`` (relative to max(1, |value|)).
    """
    if not (MIN_TOL <= tol <= MAX_TOL):
        raise ValidationError(
            f"tol={tol:g} outside supported range [{MIN_TOL:g}, {MAX_TOL:g}]", "tol")
    pts = _sorted_real_points(curve)
    spec = cycle_basis(curve)
    hol, mer = _numerators(curve)
    rows = []
    for i in range(len(pts) - 1):
        n = START_NODES
        prev = _interval_integral(curve, pts, i, n, hol, mer)
        while True:
            n *= 2
            cur = _interval_integral(curve, pts, i, n, hol, mer)
            err = float(np.max(np.abs(cur - prev) / np.maximum(1.0, np.abs(cur))))
            if err < tol:
                break
            if n >= max_nodes:
                raise ConvergenceError(
                    f"quadrature on interval {i} did not converge "
                    f"(achieved {err:.3g} with {n} nodes)", achieved=err)
            prev = cur
        rows.append(spec.branch_signs[i] * cur)
    return np.array(rows)


def integrate_basis(curve: Curve, spec: CycleSpec | None = None,
                    tol: float = 1e-12) -> PeriodSet:
    """Compute 2omega, 2omega', 2eta, 2eta' over the cycles of ``spec``."""
    if spec is None:
        spec = cycle_basis(curve)
    P = interval_integrals(curve, tol)
    g = curve.genus
    flat = [spec.coefficient_vector(c) for c in spec.a_cycles + spec.b_cycles]
    C = np.array(flat, dtype=float)  # cycles x intervals
    per = C @ P  # cycles x differentials
    A, B = per[:g].T, per[g:].T  # differentials x cycles
    two_omega, two_eta = A[:g], -A[g:]
    two_omega_p, two_eta_p = B[:g], -B[g:]
    try:
        return PeriodSet.from_matrices(two_omega, two_omega_p, two_eta, two_eta_p,
                                       curve=curve, interval_periods=P, tol=tol)
    except NumericalError as exc:
        if exc.invariant != "tau_positive":
            raise
    # one orientation retry: b -> -b
    out = PeriodSet.from_matrices(two_omega, -two_omega_p, two_eta, -two_eta_p,
                                  curve=curve, interval_periods=P, tol=tol,
                                  check=False)
    try:
        _check_tau(out.tau)
    except NumericalError as exc:
        raise NumericalError("no b-cycle orientation gives Im tau > 0",
                             "orientation") from exc
    return out


def compute_periods(curve: Curve, tol: float = 1e-12) -> PeriodSet:
    return integrate_basis(curve, cycle_basis(curve), tol)


def tau(periods: PeriodSet) -> np.ndarray:
    """Riemann matrix omega^-1 omega' (checked symmetric with Im > 0)."""
    inv = _safe_inverse(periods.two_omega)
    t = inv @ periods.two_omega_prime
    _check_tau(t)
    return t


def legendre_residual(periods: PeriodSet) -> float:
    w, wp = periods.omega, periods.omega_prime
    e, ep = periods.eta, periods.eta_prime
    g = w.shape[0]
    r1 = e.T @ w - w.T @ e
    r2 = e.T @ wp - w.T @ ep - 0.5j * math.pi * np.eye(g)
    r3 = ep.T @ wp - wp.T @ ep
    return float(max(np.max(np.abs(r1)), np.max(np.abs(r2)), np.max(np.abs(r3))))
