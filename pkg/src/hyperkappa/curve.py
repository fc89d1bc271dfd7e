"""Hyperelliptic curves y^2 = f(x) with deg f = 2g + 2.

Coefficients are stored lowest degree first, so ``coefficients[i]`` is the
coefficient of x**i.  Curves built from rational roots keep exact
``Fraction`` coefficients, which the exact partition solver relies on.
"""

from __future__ import annotations

import cmath
import numbers
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

import numpy as np

from .errors import NumericalError, ValidationError

#: relative root separation below which a curve is declared singular
SEPARATION_TOL = 1e-9
#: relative tolerance of the coefficient/branch point consistency check
CONSISTENCY_TOL = 1e-12


def _is_exact(value) -> bool:
    return isinstance(value, (numbers.Rational,)) and not isinstance(value, bool)


def _sort_key(value):
    c = complex(value)
    return (c.real, c.imag)


@dataclass(frozen=True)
class DifferentialBasis:
    """Numerators of the holomorphic and second-kind differentials.

    ``holomorphic[i]`` and ``meromorphic[j]`` are coefficient lists (lowest
    degree first).  The holomorphic differentials are ``num dx / y``, the
    second-kind ones ``num dx / (4 y)``.
    """

    holomorphic: tuple
    meromorphic: tuple


@dataclass(frozen=True)
class ScalingReport:
    """Multipliers picked up by kappa, eta and omega under f -> c f."""

    c: complex
    kappa_factor: complex
    eta_factor: complex
    omega_factor: complex

    @property
    def is_identity(self) -> bool:
        return self.c == 1


@dataclass(frozen=True)
class Curve:
    genus: int
    coefficients: tuple
    branch_points: tuple
    monic: bool = field(default=False)

    def __post_init__(self):
        g = self.genus
        if g < 1:
            raise ValidationError(f"genus must be >= 1, got {g}", "genus")
        if len(self.coefficients) != 2 * g + 3:
            raise ValidationError(
                f"expected {2 * g + 3} coefficients for genus {g}, "
                f"got {len(self.coefficients)}", "coefficients")
        if len(self.branch_points) != 2 * g + 2:
            raise ValidationError(
                f"expected {2 * g + 2} branch points, got {len(self.branch_points)}",
                "branch_points")
        if self.coefficients[-1] == 0:
            raise ValidationError("leading coefficient is zero", "degree")
        _check_separation(self.branch_points)

    # -- convenience views -------------------------------------------------
    @property
    def degree(self) -> int:
        return 2 * self.genus + 2

    @property
    def lam(self) -> np.ndarray:
        """Coefficients as a complex array."""
        return np.array([complex(c) for c in self.coefficients])

    @property
    def roots(self) -> np.ndarray:
        return np.array([complex(e) for e in self.branch_points])

    @property
    def leading(self):
        return self.coefficients[-1]

    @property
    def exact(self) -> bool:
        """True when coefficients and branch points are all rational."""
        return all(_is_exact(c) for c in self.coefficients) and all(
            _is_exact(e) for e in self.branch_points)

    @property
    def real_branch_points(self) -> bool:
        scale = max(1.0, float(np.max(np.abs(self.roots))))
        return bool(np.all(np.abs(self.roots.imag) <= 1e-12 * scale))

    def f(self, x):
        """Evaluate f at x (Horner; exact for exact inputs)."""
        acc = 0
        for c in reversed(self.coefficients):
            acc = acc * x + c
        return acc

    def df(self, x):
        acc = 0
        n = len(self.coefficients)
        for k in range(n - 1, 0, -1):
            acc = acc * x + k * self.coefficients[k]
        return acc

    def normalized(self) -> tuple["Curve", ScalingReport]:
        """Return the monic curve f / lambda_{2g+2} and its scaling report.

        The report describes how to get from the monic curve back to this one.
        """
        lead = self.leading
        if lead == 1:
            return self, rescale_report(1)
        coeffs = tuple(c / lead for c in self.coefficients)
        monic = Curve(self.genus, coeffs, self.branch_points, monic=True)
        return monic, rescale_report(lead)

    def summary(self) -> dict:
        return {
            "genus": self.genus,
            "monic": self.monic,
            "coefficients": [complex(c) for c in self.coefficients],
            "branch_points": [complex(e) for e in self.branch_points],
        }


def _check_separation(points, tol=SEPARATION_TOL):
    pts = np.array([complex(p) for p in points])
    scale = max(1.0, float(np.max(np.abs(pts)))) if len(pts) else 1.0
    diff = np.abs(pts[:, None] - pts[None, :])
    diff[np.diag_indices_from(diff)] = np.inf
    dmin = float(diff.min())
    if dmin <= tol * scale:
        raise ValidationError(
            f"branch points not distinct (min separation {dmin:.3g}); "
            "curve is singular", "singular")


def _expand_roots(roots):
    """Coefficients of prod (x - r), lowest degree first."""
    coeffs = [1]
    for r in roots:
        nxt = [0] * (len(coeffs) + 1)
        for k, c in enumerate(coeffs):
            nxt[k + 1] += c
            nxt[k] -= r * c
        coeffs = nxt
    return coeffs


def _as_number(v):
    if _is_exact(v):
        return Fraction(v)
    if isinstance(v, (list, tuple)) and len(v) == 2:
        return complex(float(v[0]), float(v[1]))
    c = complex(v)
    return c.real if c.imag == 0 else c


def _polish(coeffs, roots, iterations=8):
    p = np.array(coeffs[::-1], dtype=complex)
    dp = np.polyder(p)
    out = []
    for r in roots:
        for _ in range(iterations):
            d = np.polyval(dp, r)
            if d == 0:
                break
            step = np.polyval(p, r) / d
            r = r - step
            if abs(step) <= 1e-17 * max(1.0, abs(r)):
                break
        out.append(complex(r))
    return out


def curve_from_coefficients(coeffs: Sequence) -> Curve:
    """Build a curve from lambda_0 ... lambda_{2g+2}."""
    coeffs = [_as_number(c) for c in coeffs]
    n = len(coeffs)
    if n % 2 == 0:
        raise ValidationError(f"coefficient list length {n} is even", "coefficients")
    if n < 5:
        raise ValidationError(
            f"coefficient list of length {n} gives genus {(n - 3) // 2} < 1", "genus")
    if coeffs[-1] == 0:
        raise ValidationError("leading coefficient is zero", "degree")
    g = (n - 3) // 2
    c = np.array([complex(x) for x in coeffs])
    raw = np.roots(c[::-1])
    if len(raw) != 2 * g + 2:
        raise ValidationError("polynomial has fewer roots than its degree", "singular")
    _check_separation(raw)
    roots = _polish(coeffs, raw)
    _check_separation(roots)
    lam_max = float(np.max(np.abs(c)))
    for r in roots:
        res = abs(np.polyval(c[::-1], r))
        bound = 1e-12 * lam_max * max(1.0, abs(r)) ** (2 * g + 2)
        if res >= bound:
            raise NumericalError(
                f"root polish failed: |f(e)| = {res:.3g} not below {bound:.3g}",
                "root_residual")
    roots = [r.real if abs(r.imag) <= 1e-14 * max(1.0, abs(r)) else r for r in roots]
    roots = sorted(roots, key=_sort_key)
    curve = Curve(g, tuple(coeffs), tuple(roots), monic=(coeffs[-1] == 1))
    _check_consistency(curve)
    return curve


def curve_from_roots(roots: Sequence, leading=1) -> Curve:
    """Monic (or ``leading``-scaled) curve with the given branch points."""
    roots = [_as_number(r) for r in roots]
    n = len(roots)
    if n % 2:
        raise ValidationError(f"odd number of roots ({n})", "roots")
    if n < 4:
        raise ValidationError(f"{n} roots give genus {(n - 2) // 2} < 1", "genus")
    _check_separation(roots)
    roots = sorted(roots, key=_sort_key)
    coeffs = [leading * c for c in _expand_roots(roots)]
    if all(_is_exact(c) for c in coeffs):
        coeffs = [Fraction(c) for c in coeffs]
    else:
        coeffs = [complex(c) for c in coeffs]
        coeffs = [c.real if c.imag == 0 else c for c in coeffs]
    return Curve((n - 2) // 2, tuple(coeffs), tuple(roots), monic=(leading == 1))


def _check_consistency(curve: Curve):
    g = curve.genus
    lead = complex(curve.leading)
    scale = max(1.0, float(np.max(np.abs(curve.roots))))
    lam = curve.lam
    for k in range(2 * g + 3):
        x = 1.5 * scale * cmath.exp(2j * cmath.pi * (k + 0.25) / (2 * g + 3))
        prod = lead * np.prod(x - curve.roots)
        fx = np.polyval(lam[::-1], x)
        ref = float(np.sum(np.abs(lam) * abs(x) ** np.arange(len(lam))))
        if abs(prod - fx) > CONSISTENCY_TOL * ref:
            raise NumericalError(
                "branch points inconsistent with coefficients", "consistency")


def polar(curve: Curve, x, z):
    """Kleinian 2-polar F(x, z); F(x, x) = 2 f(x)."""
    g = curve.genus
    lam = curve.coefficients
    acc = 2 * lam[2 * g + 2] * z ** (g + 1) * x ** (g + 1)
    xz = 1
    for k in range(g + 1):
        acc += xz * (2 * lam[2 * k] + (x + z) * lam[2 * k + 1])
        xz = xz * x * z
    return acc


def baker_numerator(curve: Curve, j: int, x):
    """Numerator of the j-th second-kind differential (without 1/(4y))."""
    g = curve.genus
    if not 1 <= j <= g:
        raise ValidationError(f"index j={j} outside 1..{g}", "index")
    lam = curve.coefficients
    acc = 0
    for k in range(2 * g + 1 - j, j - 1, -1):
        acc = acc * x + (k + 1 - j) * lam[k + 1 + j]
    return acc * x ** j


def baker_numerator_coefficients(curve: Curve, j: int) -> list:
    g = curve.genus
    if not 1 <= j <= g:
        raise ValidationError(f"index j={j} outside 1..{g}", "index")
    lam = curve.coefficients
    out = [0] * (2 * g + 2 - j)
    for k in range(j, 2 * g + 2 - j):
        out[k] = (k + 1 - j) * lam[k + 1 + j]
    return out


def differential_basis(curve: Curve) -> DifferentialBasis:
    g = curve.genus
    hol = tuple(tuple([0] * i + [1]) for i in range(g))
    mer = tuple(tuple(baker_numerator_coefficients(curve, j)) for j in range(1, g + 1))
    return DifferentialBasis(hol, mer)


def elementary_symmetric(values: Sequence, order: int):
    """Elementary symmetric polynomial S_order of ``values``."""
    values = list(values)
    if order < 0 or order > len(values):
        raise ValidationError(
            f"order {order} outside 0..{len(values)}", "order")
    # e[k] after processing a prefix; only the first order+1 entries matter
    e = [1] + [0] * order
    for v in values:
        for k in range(order, 0, -1):
            e[k] = e[k] + e[k - 1] * v
    return e[order]


def rescale_report(c) -> ScalingReport:
    if c == 0:
        raise ValidationError("rescaling factor must be nonzero", "scale")
    root = cmath.sqrt(complex(c))
    return ScalingReport(c=c, kappa_factor=c, eta_factor=root, omega_factor=1 / root)


def rescale(curve: Curve, c) -> tuple[Curve, ScalingReport]:
    """Return (c f, report) where the report holds the induced multipliers."""
    report = rescale_report(c)
    coeffs = tuple(c * x for x in curve.coefficients)
    new = Curve(curve.genus, coeffs, curve.branch_points,
                monic=(coeffs[-1] == 1))
    return new, report
