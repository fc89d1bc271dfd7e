"""The rational matrices Lambda_g^[eps] and their partition sum Lambda_g.

For a partition I0 u J0 of the branch point indices, Lambda^[eps] is the
symmetric solution of the g(g+1)/2 equations

    X_r^T Lambda X_s = -F(e_r, e_s) / (e_r - e_s)^2,   {r, s} subset of I0,

with X_r = (1, e_r, ..., e_r^(g-1)).  Summing over the binomial(2g+1, g)
unordered partitions gives Lambda_g with entries C_ij * lambda_{i+j} for an
integer table C.  Rational branch points go through a fraction-free
(Bareiss) elimination so the tables come out exactly.
"""

from __future__ import annotations

import itertools
import math
import random
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .curve import Curve, curve_from_roots, elementary_symmetric, polar
from .errors import NumericalError, ValidationError

MAX_GENUS = 8
EXTRACTION_TOL = 1e-6
DEGENERATE_LAMBDA = 1e-8


@dataclass(frozen=True)
class Partition:
    """Unordered split of {1..2g+2}; canonical form keeps 2g+2 in J0."""

    I0: tuple
    J0: tuple

    def __post_init__(self):
        n = len(self.I0) + len(self.J0)
        if len(self.I0) != len(self.J0):
            raise ValidationError("partition halves must have equal size", "partition")
        if sorted(self.I0 + self.J0) != list(range(1, n + 1)):
            raise ValidationError("partition must cover 1..2g+2 exactly once", "partition")
        if n in self.I0:
            raise ValidationError("canonical partitions keep 2g+2 in J0", "partition")
        if list(self.I0) != sorted(self.I0) or list(self.J0) != sorted(self.J0):
            raise ValidationError("partition halves must be sorted", "partition")

    @classmethod
    def from_subset(cls, subset, g: int) -> "Partition":
        n = 2 * g + 2
        I0 = sorted(set(int(i) for i in subset))
        if len(I0) != g + 1 or len(set(subset)) != len(subset) or \
                not all(1 <= i <= n for i in I0):
            raise ValidationError(
                f"need {g + 1} distinct indices in 1..{n}, got {tuple(subset)}",
                "partition")
        J0 = [i for i in range(1, n + 1) if i not in I0]
        if n in I0:
            I0, J0 = J0, I0
        return cls(tuple(I0), tuple(J0))

    @property
    def genus(self) -> int:
        return len(self.I0) - 1


@dataclass(frozen=True)
class LambdaMatrix:
    matrix: np.ndarray
    coefficients: np.ndarray
    extraction_residual: float
    exact: bool = False

    @property
    def genus(self) -> int:
        return self.coefficients.shape[0]

    def evaluate(self, curve: Curve) -> np.ndarray:
        """C_ij * lambda_{i+j} for the given curve (1-based i, j)."""
        g = self.genus
        if curve.genus != g:
            raise ValidationError("genus mismatch", "genus")
        lam = curve.lam
        out = np.empty((g, g), dtype=complex)
        for i in range(g):
            for j in range(g):
                out[i, j] = self.coefficients[i, j] * lam[i + j + 2]
        return out


def enumerate_partitions(g: int) -> list:
    if not 1 <= g <= MAX_GENUS:
        raise ValidationError(f"genus {g} outside 1..{MAX_GENUS}", "genus")
    n = 2 * g + 2
    out = []
    for I0 in itertools.combinations(range(1, n), g + 1):
        J0 = tuple(i for i in range(1, n + 1) if i not in I0)
        out.append(Partition(I0, J0))
    return out


# -- right-hand side -------------------------------------------------------

def _check_pair(curve, i, j):
    n = curve.degree
    if i == j:
        raise ValidationError("q_value needs distinct indices", "index")
    for k in (i, j):
        if not 1 <= k <= n:
            raise ValidationError(f"index {k} outside 1..{n}", "index")
    if curve.leading != 1:
        raise ValidationError("q_value requires a monic curve", "monic")


def q_value(curve: Curve, i: int, j: int, cross_check: bool = True):
    """-F(e_i, e_j) / (e_i - e_j)^2, checked against its symmetric-function form."""
    _check_pair(curve, i, j)
    ei, ej = curve.branch_points[i - 1], curve.branch_points[j - 1]
    q = -polar(curve, ei, ej) / (ei - ej) ** 2
    if cross_check:
        alt = q_expansion(curve, i, j)
        scale = max(abs(complex(q)), abs(complex(alt)), 1e-300)
        if abs(complex(q) - complex(alt)) > 1e-9 * max(scale, _q_scale(curve, i, j)):
            raise NumericalError("q_value formulas disagree", "q_dual")
    return q


def _q_scale(curve, i, j):
    g = curve.genus
    ei, ej = curve.branch_points[i - 1], curve.branch_points[j - 1]
    rest = [abs(complex(e)) for k, e in enumerate(curve.branch_points) if k not in (i - 1, j - 1)]
    return sum(abs(complex(ei * ej)) ** n * elementary_symmetric(rest, 2 * g - 2 * n)
               for n in range(g + 1))


def q_expansion(curve: Curve, i: int, j: int):
    """sum_n (e_i e_j)^n S_{2g-2n} of the branch points other than e_i, e_j."""
    _check_pair(curve, i, j)
    g = curve.genus
    ei, ej = curve.branch_points[i - 1], curve.branch_points[j - 1]
    rest = [e for k, e in enumerate(curve.branch_points) if k not in (i - 1, j - 1)]
    # all needed orders at once
    e = [1] + [0] * len(rest)
    for v in rest:
        for k in range(len(rest), 0, -1):
            e[k] = e[k] + e[k - 1] * v
    return sum((ei * ej) ** n * e[2 * g - 2 * n] for n in range(g + 1))


# -- linear system ----------------------------------------------------------

def _unknowns(g):
    return [(a, b) for a in range(1, g + 1) for b in range(a, g + 1)]


def _system(curve, I0):
    """Rows of M and entries of Q, as Python numbers (exact when possible)."""
    g = curve.genus
    pts = curve.branch_points
    cols = _unknowns(g)
    M, Q = [], []
    for r, s in itertools.combinations(I0, 2):
        er, es = pts[r - 1], pts[s - 1]
        pr = [er ** k for k in range(g)]
        ps = [es ** k for k in range(g)]
        row = []
        for a, b in cols:
            if a == b:
                row.append(pr[a - 1] * ps[a - 1])
            else:
                row.append(pr[a - 1] * ps[b - 1] + ps[a - 1] * pr[b - 1])
        M.append(row)
        Q.append(-polar(curve, er, es) / (er - es) ** 2)
    return M, Q


def m_matrix(curve: Curve, partition: Partition) -> np.ndarray:
    """Coefficient matrix of the system; object dtype for exact curves."""
    _check_partition(curve, partition)
    M, _ = _system(curve, partition.I0)
    return np.array(M, dtype=object if curve.exact else complex)


def q_vector(curve: Curve, partition: Partition) -> np.ndarray:
    _check_partition(curve, partition)
    _, Q = _system(curve, partition.I0)
    return np.array(Q, dtype=object if curve.exact else complex)


def vandermonde(points):
    acc = 1
    for a, b in itertools.combinations(points, 2):
        acc *= (b - a)
    return acc


def _check_partition(curve, partition):
    if partition.genus != curve.genus:
        raise ValidationError(
            f"partition of genus {partition.genus} for a genus {curve.genus} curve",
            "partition")


def solve_exact(M, Q) -> list:
    """Solve M x = Q over the rationals by fraction-free elimination."""
    n = len(M)
    rows = []
    for row, q in zip(M, Q):
        vals = [Fraction(v) for v in row] + [Fraction(q)]
        den = math.lcm(*(v.denominator for v in vals))
        rows.append([int(v * den) for v in vals])
    prev = 1
    for k in range(n):
        piv = next((i for i in range(k, n) if rows[i][k] != 0), None)
        if piv is None:
            raise NumericalError("singular system", "vandermonde")
        if piv != k:
            rows[k], rows[piv] = rows[piv], rows[k]
        rk = rows[k]
        akk = rk[k]
        for i in range(k + 1, n):
            ri = rows[i]
            aik = ri[k]
            for j in range(k + 1, n + 1):
                ri[j] = (ri[j] * akk - aik * rk[j]) // prev
            ri[k] = 0
        prev = akk
    x = [Fraction(0)] * n
    for i in range(n - 1, -1, -1):
        s = Fraction(rows[i][n])
        for j in range(i + 1, n):
            s -= rows[i][j] * x[j]
        x[i] = s / rows[i][i]
    return x


def _to_symmetric(g, vec, dtype):
    out = np.empty((g, g), dtype=dtype)
    for (a, b), v in zip(_unknowns(g), vec):
        out[a - 1, b - 1] = out[b - 1, a - 1] = v
    return out


def solve_partition_lambda(curve: Curve, partition: Partition,
                           exact: bool | None = None) -> np.ndarray:
    """Lambda^[eps] for one partition as a symmetric g x g matrix."""
    _check_partition(curve, partition)
    if exact is None:
        exact = curve.exact
    if exact and not curve.exact:
        raise ValidationError("exact solve needs rational branch points", "exact")
    g = curve.genus
    M, Q = _system(curve, partition.I0)
    if exact:
        return _to_symmetric(g, solve_exact(M, Q), object)
    Mf = np.array(M, dtype=complex)
    Qf = np.array(Q, dtype=complex)
    _check_conditioning(Mf, curve, partition)
    x = np.linalg.solve(Mf, Qf)
    res = np.linalg.norm(Mf @ x - Qf)
    if res >= 1e-9 * max(np.linalg.norm(Qf), 1e-300):
        raise NumericalError(f"linear-system residual {res:.3g} too large",
                             "system_residual")
    return _to_symmetric(g, x, complex)


def _check_conditioning(Mf, curve, partition):
    cond = np.linalg.cond(Mf)
    if not np.isfinite(cond) or cond > 1e13:
        raise NumericalError(
            f"ill-conditioned Vandermonde system for partition {partition.I0} "
            f"(condition {cond:.3g})", "vandermonde")


# -- tables ----------------------------------------------------------------

def _partition_worker(args):
    curve, partition, exact = args
    return solve_partition_lambda(curve, partition, exact)


def partition_sum(curve: Curve, exact: bool | None = None, threads: int = 1):
    g = curve.genus
    if exact is None:
        exact = curve.exact
    parts = enumerate_partitions(g)
    if exact:
        total = np.full((g, g), Fraction(0), dtype=object)
    else:
        total = np.zeros((g, g), dtype=complex)
    if threads > 1 and exact:
        with ProcessPoolExecutor(max_workers=threads) as pool:
            # ordered map, so the reduction order does not depend on scheduling
            for lam in pool.map(_partition_worker,
                                [(curve, p, exact) for p in parts], chunksize=32):
                total = total + lam
        return total
    if exact:
        for p in parts:
            total = total + solve_partition_lambda(curve, p, True)
        return total
    return _float_partition_sum(curve, parts)


def _pair_tables(curve):
    """M rows and Q entries for every pair {r, s}, in extended precision.

    Both only depend on the pair, so each partition's system is a gather.
    Q uses the symmetric-function form, which avoids the cancellation in
    F(e_r, e_s) / (e_r - e_s)^2.
    """
    g = curve.genus
    n = curve.degree
    pts = np.array([complex(e) for e in curve.branch_points], dtype=np.clongdouble)
    cols = _unknowns(g)
    a = np.array([c[0] - 1 for c in cols])
    b = np.array([c[1] - 1 for c in cols])
    powers = pts[:, None] ** np.arange(g)
    rows = np.zeros((n, n, len(cols)), dtype=np.clongdouble)
    q = np.zeros((n, n), dtype=np.clongdouble)
    for r, s in itertools.combinations(range(n), 2):
        pr, ps = powers[r], powers[s]
        row = pr[a] * ps[b] + ps[a] * pr[b]
        row[a == b] /= 2
        rows[r, s] = rows[s, r] = row
        rest = np.delete(pts, [r, s])
        e = np.zeros(2 * g + 1, dtype=np.clongdouble)
        e[0] = 1
        for v in rest:
            e[1:] = e[1:] + e[:-1] * v
        prod = pts[r] * pts[s]
        q[r, s] = q[s, r] = sum(prod ** m * e[2 * g - 2 * m] for m in range(g + 1))
    return rows, q


def _float_partition_sum(curve, parts, chunk=2048, refinements=3):
    g = curve.genus
    rows, qtab = _pair_tables(curve)
    pairs = list(itertools.combinations(range(g + 1), 2))
    pi = np.array([p[0] for p in pairs])
    pj = np.array([p[1] for p in pairs])
    total = np.zeros(len(_unknowns(g)), dtype=np.clongdouble)
    for start in range(0, len(parts), chunk):
        block = parts[start:start + chunk]
        idx = np.array([p.I0 for p in block]) - 1
        r, s = idx[:, pi], idx[:, pj]
        M = rows[r, s]
        Q = qtab[r, s]
        Md = M.astype(complex)
        for p, m in zip(block, Md):
            _check_conditioning(m, curve, p)
        # double-precision solves, residuals in extended precision
        x = np.linalg.solve(Md, Q.astype(complex)[..., None])[..., 0].astype(np.clongdouble)
        for _ in range(refinements):
            res = Q - np.einsum("pij,pj->pi", M, x)
            x = x + np.linalg.solve(Md, res.astype(complex)[..., None])[..., 0]
        res = np.abs(Q - np.einsum("pij,pj->pi", M, x)).astype(float)
        qn = np.abs(Q).astype(float)
        if np.any(np.linalg.norm(res, axis=1) >= 1e-9 * np.maximum(np.linalg.norm(qn, axis=1), 1e-300)):
            raise NumericalError("linear-system residual too large", "system_residual")
        total = total + x.sum(axis=0)
    return _to_symmetric(g, total.astype(complex), complex)


def extract_coefficients(curve: Curve, total) -> tuple:
    """Divide entry (i, j) by lambda_{i+j} and round; returns (C, residual)."""
    g = curve.genus
    C = np.zeros((g, g), dtype=int)
    residual = 0.0
    for i in range(g):
        for j in range(g):
            lam = curve.coefficients[i + j + 2]
            if abs(complex(lam)) <= DEGENERATE_LAMBDA:
                raise NumericalError(
                    f"lambda_{i + j + 2} vanishes; resample the curve", "degenerate_lambda")
            ratio = total[i, j] / lam
            if isinstance(ratio, Fraction):
                k = round(ratio)
                err = abs(float(ratio - k))
            else:
                ratio = complex(ratio)
                k = int(round(ratio.real))
                err = abs(ratio - k)
            C[i, j] = k
            residual = max(residual, err)
    return C, residual


def lambda_matrix(g: int, curve: Curve, exact: bool | None = None,
                  threads: int = 1) -> LambdaMatrix:
    """Lambda_g for ``curve`` together with its integer coefficient table."""
    if curve.genus != g:
        raise ValidationError(f"curve has genus {curve.genus}, expected {g}", "genus")
    if curve.leading != 1:
        raise ValidationError("lambda_matrix requires a monic curve", "monic")
    if exact is None:
        exact = curve.exact
    total = partition_sum(curve, exact, threads)
    C, residual = extract_coefficients(curve, total)
    if residual >= EXTRACTION_TOL:
        raise NumericalError(
            f"integer extraction residual {residual:.3g} >= {EXTRACTION_TOL:g}",
            "extraction")
    if exact:
        matrix = np.array([[complex(v) for v in row] for row in total])
    else:
        matrix = np.asarray(total, dtype=complex)
    return LambdaMatrix(matrix, C, residual, exact)


def random_rational_curve(g: int, seed: int = 0, exact: bool = True,
                          spread: int | None = None) -> Curve:
    """Monic curve with distinct random rational branch points.

    Resamples until every lambda_2 .. lambda_{2g} is nonzero.  With
    ``exact=False`` the same points are used as floats.
    """
    rng = random.Random(seed)
    spread = spread or 6 * (g + 1)
    while True:
        nums = rng.sample(range(-spread, spread + 1), 2 * g + 2)
        pts = [Fraction(n, 3) for n in nums]
        curve = curve_from_roots(pts)
        if all(curve.coefficients[k] != 0 for k in range(2, 2 * g + 1)):
            break
    if not exact:
        curve = curve_from_roots([float(p) for p in pts])
    return curve


def random_circle_curve(g: int, seed: int = 0, jitter: float = 0.45) -> Curve:
    """Monic float curve with branch points jittered around the unit circle.

    Near-equispaced points on the circle keep the Vandermonde systems well
    conditioned, which real rational points do not for g >= 5.
    """
    rng = np.random.default_rng(seed)
    n = 2 * g + 2
    while True:
        theta = 2 * np.pi * (np.arange(n) + jitter * rng.uniform(-1, 1, n)) / n + 0.1
        curve = curve_from_roots([complex(z) for z in np.exp(1j * theta)])
        if all(abs(complex(curve.coefficients[k])) > 1e-3 for k in range(2, 2 * g + 1)):
            return curve


def integer_table(g: int, seed: int = 0, exact: bool = True,
                  threads: int = 1) -> LambdaMatrix:
    """The partition-number table of genus g from a seeded random curve."""
    if not 1 <= g <= MAX_GENUS:
        raise ValidationError(f"genus {g} outside 1..{MAX_GENUS}", "genus")
    if exact:
        curve = random_rational_curve(g, seed)
    else:
        curve = random_circle_curve(g, seed)
    return lambda_matrix(g, curve, exact, threads)


def antidiagonal_sum_coefficient(g: int, k: int) -> int:
    """Sigma_{g;k}: sum of the coefficients of the lambda_k anti-diagonal."""
    if not 2 <= k <= 2 * g + 2:
        raise ValidationError(f"k={k} outside 2..{2 * g + 2}", "index")
    n = math.comb(2 * g + 1, g)
    val = Fraction(n, 4 * g + 2) * (Fraction(k * (2 * g + 2 - k), 2)
                                    + Fraction((2 * g + 1) * ((-1) ** k - 1), 4))
    if val.denominator != 1:
        raise NumericalError(f"Sigma_{{{g};{k}}} = {val} is not an integer", "integrality")
    return int(val)


def first_row_coefficient(g: int, k: int) -> int:
    """k-th entry of the first row of C, binomial(2g+1-k, g-k)."""
    if not 1 <= k <= g:
        raise ValidationError(f"k={k} outside 1..{g}", "index")
    return math.comb(2 * g + 1 - k, g - k)


def first_row_sum(g: int) -> int:
    return math.comb(2 * g + 1, g - 1)


def lemma_polynomial(curve: Curve, x):
    """Right-hand side of X^T Lambda_g X as a polynomial in x."""
    g = curve.genus
    n = math.comb(2 * g + 1, g)
    acc = 0
    for k in range(2, 2 * g + 1):
        w = Fraction(k * (2 * g + 2 - k), 2) + Fraction((2 * g + 1) * ((-1) ** k - 1), 4)
        acc += complex(Fraction(n, 4 * g + 2) * w) * complex(curve.coefficients[k]) * x ** (k - 2)
    return acc


def verify_lemma_identity(curve: Curve, lam: LambdaMatrix, samples: int = 10,
                          seed: int = 0) -> float:
    """Max relative residual of X^T Lambda X against the closed form."""
    g = curve.genus
    rng = np.random.default_rng(seed)
    L = lam.evaluate(curve)
    worst = 0.0
    for _ in range(samples):
        x = complex(rng.normal(), rng.normal())
        X = x ** np.arange(g)
        lhs = X @ L @ X
        rhs = lemma_polynomial(curve, x)
        scale = max(abs(rhs), 1e-300)
        worst = max(worst, abs(lhs - rhs) / scale)
    return float(worst)
