"""``hyperkappa`` command-line front end.

Exit codes: 0 success, 2 bad input, 3 numerical or identity failure.
"""

from __future__ import annotations

import argparse
import math
import sys
import time
from pathlib import Path

import numpy as np

from . import __version__
from .curve import rescale
from .errors import HyperkappaError, NumericalError, ValidationError
from .kappa import (kappa_direct, kappa_modular, kappa_single_characteristic,
                    klein_shift)
from .lambda_exact import (MAX_GENUS, Partition, antidiagonal_sum_coefficient,
                           enumerate_partitions, first_row_coefficient, first_row_sum,
                           integer_table, partition_sum, q_expansion, q_value,
                           random_circle_curve, random_rational_curve,
                           verify_lemma_identity)
from .periods import compute_periods, legendre_residual
from .report import curve_summary, dumps, encode, load_curve, load_period_matrices
from .theta import (all_characteristics, enumerate_nonsingular_even, theta_gradient,
                    theta_hessian)

EXIT_OK, EXIT_INPUT, EXIT_NUMERICAL = 0, 2, 3

#: route agreement, relative to max(1, |kappa|)
AGREEMENT_TOL = 1e-6
LEGENDRE_TOL = 1e-10
LEMMA_TOL = 1e-8
KLEIN_TOL = 1e-7
HESSIAN_FD_TOL = 1e-6

KNOWN_TABLE_NOTES = {
    6: "entry (1,1) is 792 = Sigma_{6;2}; the value 729 that circulates for this "
       "entry breaks the first-row sum C(13,5) = 1287",
}


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"hyperkappa: error [usage]: {message}", file=sys.stderr)
        raise SystemExit(EXIT_INPUT)


def _modular_setup(curve, periods, seed):
    """Monic copy of the curve, its periods, and the rescaling factor back."""
    monic, report = curve.normalized()
    monic_periods = periods if monic is curve else compute_periods(monic, periods.tol)
    table = integer_table(curve.genus, seed, exact=False)
    return monic, monic_periods, table, report.kappa_factor


def _scaled_dist(a, b):
    return float(np.max(np.abs(a - b))) / max(1.0, float(np.max(np.abs(b))))


def _parse_partition(text, g):
    try:
        idx = [int(t) for t in text.split(",") if t.strip()]
    except ValueError as exc:
        raise ValidationError(f"bad --partition {text!r}; expected e.g. 1,2,3",
                              "partition") from exc
    return Partition.from_subset(idx, g)


# -- commands --------------------------------------------------------------

def cmd_periods(args):
    curve, label = load_curve(args.curve_file)
    p = compute_periods(curve, args.tol)
    return {
        "curve": curve_summary(curve, label),
        "results": {
            "two_omega": p.two_omega, "two_omega_prime": p.two_omega_prime,
            "two_eta": p.two_eta, "two_eta_prime": p.two_eta_prime, "tau": p.tau,
        },
        "residuals": {"legendre": legendre_residual(p)},
    }


def cmd_kappa(args):
    curve, label = load_curve(args.curve_file)
    g = curve.genus
    p = compute_periods(curve, args.tol)
    direct = kappa_direct(p).kappa
    results = {"direct": direct}
    if args.route != "direct":
        monic, mp, table, factor = _modular_setup(curve, p, args.seed)
        if args.route in ("modular", "all"):
            results["modular"] = factor * kappa_modular(monic, mp, table, args.tol).kappa
        if args.route == "single" or args.route == "all":
            if args.partition:
                parts = [_parse_partition(args.partition, g)]
            elif args.route == "single":
                parts = [enumerate_partitions(g)[0]]
            else:
                parts = enumerate_partitions(g)
            results["single"] = {
                ",".join(map(str, part.I0)):
                    factor * kappa_single_characteristic(monic, mp, part, args.tol).kappa
                for part in parts}
    agreement = 0.0
    for key, val in results.items():
        for k in (val.values() if isinstance(val, dict) else [val]):
            agreement = max(agreement, _scaled_dist(k, direct))
    out = {
        "curve": curve_summary(curve, label),
        "results": {"route": args.route, "kappa": results},
        "residuals": {"legendre": legendre_residual(p),
                      "route_agreement": agreement if args.route != "direct" else None},
    }
    if agreement > AGREEMENT_TOL:
        out["failure"] = NumericalError(
            f"routes disagree with direct kappa by {agreement:.3g}", "route_agreement")
    return out


def _table_checks(table):
    C = table.coefficients
    g = C.shape[0]
    checks = []
    for k in range(2, 2 * g + 1):
        got = int(sum(C[i, k - 2 - i] for i in range(g) if 0 <= k - 2 - i < g))
        exp = antidiagonal_sum_coefficient(g, k)
        checks.append({"name": f"antidiagonal_{k}", "value": got, "expected": exp,
                       "pass": got == exp})
    for k in range(1, g + 1):
        got, exp = int(C[0, k - 1]), first_row_coefficient(g, k)
        checks.append({"name": f"first_row_{k}", "value": got, "expected": exp,
                       "pass": got == exp})
    got, exp = int(C[0].sum()), first_row_sum(g)
    checks.append({"name": "first_row_sum", "value": got, "expected": exp, "pass": got == exp})
    return checks


def cmd_lambda(args):
    g = args.genus
    if not 1 <= g <= MAX_GENUS:
        raise ValidationError(f"genus {g} outside 1..{MAX_GENUS}", "genus")
    table = integer_table(g, args.seed, exact=args.exact, threads=args.threads)
    checks = _table_checks(table)
    sampled = random_rational_curve(g, args.seed) if args.exact else random_circle_curve(g, args.seed)
    note = KNOWN_TABLE_NOTES.get(g)
    if note:
        print(f"hyperkappa: note: {note}", file=sys.stderr)
    out = {
        "curve": curve_summary(sampled, f"seeded sample, seed {args.seed}"),
        "results": {
            "genus": g,
            "exact": bool(table.exact),
            "table": table.coefficients.astype(int),
            "checks": checks,
            "note": note,
        },
        "residuals": {"extraction": float(table.extraction_residual)},
    }
    bad = [c["name"] for c in checks if not c["pass"]]
    if bad:
        out["failure"] = NumericalError(f"table identities fail: {', '.join(bad)}",
                                        "table_identity")
    return out


def _check(name, value, tol, passed=None):
    if passed is None:
        passed = bool(np.isfinite(value) and value < tol)
    return {"name": name, "value": float(value), "tolerance": tol, "pass": bool(passed)}


class _Checks(list):
    """Collects checks; a check that raises is recorded as failed."""

    def run(self, name, fn, tol):
        try:
            self.append(_check(name, fn(), tol))
        except HyperkappaError as exc:
            self.append({"name": name, "value": None, "tolerance": tol, "pass": False,
                         "error": f"[{exc.invariant}] {exc}"})


def _hessian_fd(char, tau, h=1e-4):
    g = tau.shape[0]
    z0 = 0.05 * np.arange(1, g + 1)
    H = theta_hessian(char, z0, tau)
    fd = np.zeros((g, g), dtype=complex)
    for k in range(g):
        e = np.zeros(g)
        e[k] = h
        fd[:, k] = (theta_gradient(char, z0 + e, tau) - theta_gradient(char, z0 - e, tau)) / (2 * h)
    return float(np.max(np.abs(H - fd))) / max(1.0, float(np.max(np.abs(H))))


def cmd_verify(args):
    curve, label = load_curve(args.curve_file)
    g = curve.genus
    tol = args.tol
    p = compute_periods(curve, tol)
    if args.periods:
        p = load_period_matrices(args.periods, curve, p)
    checks = _Checks()
    checks.run("legendre", lambda: legendre_residual(p), LEGENDRE_TOL)
    t = p.tau
    checks.run("tau_symmetric", lambda: float(np.max(np.abs(t - t.T))), 1e-9)
    min_eig = float(np.linalg.eigvalsh(t.imag).min())
    checks.append({"name": "tau_positive", "value": min_eig, "tolerance": 0.0,
                   "pass": min_eig > 0})
    n = math.comb(2 * g + 1, g)
    census = enumerate_nonsingular_even(t, tol, hyperelliptic=False)
    checks.append({"name": "census", "value": len(census), "expected": n,
                   "pass": len(census) == n})

    monic, mp, table, factor = _modular_setup(curve, p, args.seed)

    def q_dual():
        worst = 0.0
        for i in range(1, 2 * g + 3):
            for j in range(i + 1, 2 * g + 3):
                q = complex(q_value(monic, i, j, cross_check=False))
                alt = complex(q_expansion(monic, i, j))
                worst = max(worst, abs(q - alt) / max(1.0, abs(alt)))
        return worst

    checks.run("q_dual", q_dual, 1e-9)
    checks.run("lemma", lambda: verify_lemma_identity(monic, table), LEMMA_TOL)

    def direct():
        return kappa_direct(p).kappa

    checks.run("kappa_modular", lambda: _scaled_dist(
        factor * kappa_modular(monic, mp, table, tol).kappa, direct()), AGREEMENT_TOL)

    if args.level == "full":
        checks.extend(_table_checks(table))

        def partition_total():
            total = partition_sum(monic, exact=monic.exact, threads=args.threads)
            return _scaled_dist(np.asarray(total, dtype=complex), table.evaluate(monic))

        checks.run("lambda_partition_sum", partition_total, 1e-8)

        def single():
            k = direct()
            return max(_scaled_dist(
                factor * kappa_single_characteristic(monic, mp, part, tol).kappa, k)
                for part in enumerate_partitions(g))

        checks.run("single_characteristic", single, AGREEMENT_TOL)
        shift = {}

        def klein():
            shifted, res = klein_shift(mp, table, monic, tol)
            shift["legendre"] = abs(legendre_residual(shifted) - legendre_residual(mp))
            return res.residual_vs_direct / max(1.0, float(np.max(np.abs(res.kappa))))

        checks.run("klein", klein, KLEIN_TOL)
        checks.run("klein_legendre", lambda: shift.get("legendre", math.inf), 1e-10)
        even = all_characteristics(g, "even")[:2]
        checks.run("hessian_fd", lambda: max(_hessian_fd(c, t) for c in even),
                   HESSIAN_FD_TOL)

        def rescaling():
            c4, _ = rescale(curve, 4)
            return _scaled_dist(kappa_direct(compute_periods(c4, tol)).kappa, 4 * direct())

        checks.run("rescaling", rescaling, 1e-8)

    out = {
        "curve": curve_summary(curve, label),
        "results": {"level": args.level, "checks": checks},
        "residuals": {c["name"]: c["value"] for c in checks
                      if c["name"] in ("legendre", "kappa_modular", "single_characteristic",
                                       "klein", "lemma")},
    }
    bad = [c["name"] for c in checks if not c["pass"]]
    if bad:
        out["failure"] = NumericalError(f"verification failed: {', '.join(bad)}", bad[0])
    return out


# -- plumbing --------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="hyperkappa",
                     description="Periods, kappa matrices and partition-number tables "
                                 "of hyperelliptic curves.")
    parser.add_argument("--version", action="version", version=__version__)

    common = _Parser(add_help=False)
    common.add_argument("--tol", type=float, default=1e-12,
                        help="quadrature and theta tolerance (default 1e-12)")
    common.add_argument("--out", type=Path, default=None, help="report path (default stdout)")
    common.add_argument("--seed", type=int, default=0,
                        help="seed of the curve sampler (default 0)")
    common.add_argument("--threads", type=int, default=1,
                        help="worker processes for exact partition sums")
    common.add_argument("--timing", action="store_true",
                        help="include wall-clock time (makes output non-reproducible)")

    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)
    sp = sub.add_parser("periods", parents=[common], help="period matrices and tau")
    sp.add_argument("curve_file")
    sp.set_defaults(func=cmd_periods)

    sk = sub.add_parser("kappa", parents=[common], help="kappa by one or all routes")
    sk.add_argument("curve_file")
    sk.add_argument("--route", choices=["direct", "modular", "single", "all"],
                    default="direct")
    sk.add_argument("--partition", default=None,
                    help="branch point indices of I0, e.g. 1,2,3 (single/all routes)")
    sk.set_defaults(func=cmd_kappa)

    sl = sub.add_parser("lambda", parents=[common], help="integer partition-number table")
    sl.add_argument("--genus", type=int, required=True)
    sl.add_argument("--exact", action="store_true", help="rational arithmetic")
    sl.set_defaults(func=cmd_lambda)

    sv = sub.add_parser("verify", parents=[common], help="run the invariant suites")
    sv.add_argument("curve_file")
    sv.add_argument("--level", choices=["fast", "full"], default="fast")
    sv.add_argument("--periods", default=None,
                    help="use period matrices from an earlier periods report")
    sv.set_defaults(func=cmd_verify)
    return parser


def _echo(args):
    skip = {"func", "out", "timing"}
    return {k: (str(v) if isinstance(v, Path) else v)
            for k, v in sorted(vars(args).items()) if k not in skip}


def run(argv=None) -> tuple[int, str]:
    """Execute a command; returns (exit code, report text)."""
    args = build_parser().parse_args(argv)
    if args.threads < 1:
        raise ValidationError("--threads must be >= 1", "threads")
    if not math.isfinite(args.tol) or args.tol <= 0:
        raise ValidationError("--tol must be a positive number", "tol")
    start = time.perf_counter()
    body = args.func(args)
    failure = body.pop("failure", None)
    report = {
        "command": args.command,
        "args": _echo(args),
        "version": __version__,
        "seed": args.seed,
        "curve": body.get("curve"),
        "results": body["results"],
        "residuals": body.get("residuals", {}),
        "status": "fail" if failure else "pass",
        "failed_invariant": failure.invariant if failure else None,
        "timing": {"seconds": time.perf_counter() - start} if args.timing else None,
    }
    text = dumps(encode(report)) + "\n"
    if args.out is not None:
        args.out.write_text(text)
        text = ""
    if failure:
        print(f"hyperkappa: error [{failure.invariant}]: {failure}", file=sys.stderr)
        return EXIT_NUMERICAL, text
    return EXIT_OK, text


def main(argv=None) -> int:
    try:
        code, text = run(argv)
    except SystemExit as exc:
        # argparse: --help / --version exit 0, usage errors exit 2
        return exc.code if isinstance(exc.code, int) else EXIT_INPUT
    except ValidationError as exc:
        print(f"hyperkappa: error [{exc.invariant}]: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except NumericalError as exc:
        print(f"hyperkappa: error [{exc.invariant}]: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except HyperkappaError as exc:
        print(f"hyperkappa: error [{exc.invariant}]: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except OSError as exc:
        print(f"hyperkappa: error [output]: {exc}", file=sys.stderr)
        return EXIT_INPUT
    sys.stdout.write(text)
    return code


if __name__ == "__main__":
    sys.exit(main())
