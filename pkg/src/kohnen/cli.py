"""Batch command surface.

Subcommands (two-level):

    form build | form check
    lambda table
    vaughan verify
    sums partial
    signs count | signs primes
    moment second
    growth ramanujan
    lvalue central | lvalue waldspurger | lvalue siegel

Every run writes its primary artifact (CSV or JSON) to --out plus a JSON
run manifest <out>.manifest.json echoing the configuration, package
version, and wall time.  Exit codes: 0 success, 2 validation error,
3 precision shortfall, 4 failed structural assertion.
"""

from __future__ import annotations

import argparse
import csv
import json
import math
import platform
import sys
import time

import numpy as np

from . import __version__
from .errors import (
    CertificationError,
    PrecisionError,
    UndefinedFitError,
    ValidationError,
)
from . import experiments, forms, lcentral, sieve as sievemod

EXIT_OK = 0
EXIT_VALIDATION = 2
EXIT_PRECISION = 3
EXIT_ASSERTION = 4


def _write_csv(path: str, header: list[str], rows: list[list]) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)  # RFC 4180: CRLF line endings, quoting as needed
        writer.writerow(header)
        writer.writerows(rows)


def _write_manifest(out_path: str, command: str, config: dict, started: float) -> None:
    config = {k: v for k, v in config.items() if k != "func"}
    manifest = {
        "command": command,
        "config": config,
        "outputs": [out_path],
        "package_version": __version__,
        "python_version": platform.python_version(),
        "wall_time_s": round(time.time() - started, 3),
    }
    with open(out_path + ".manifest.json", "w", encoding="utf-8") as fh:
        json.dump(manifest, fh, indent=2, sort_keys=True)
        fh.write("\n")


def _fmt(x: float) -> str:
    return repr(float(x))


def _load_form(path: str) -> forms.HalfIntegralForm:
    return forms.load_form(path)


def _build_sieve(limit: int) -> sievemod.FactorSieve:
    return sievemod.FactorSieve.build(limit)


# ---------------------------------------------------------------------------
# subcommand handlers
# ---------------------------------------------------------------------------

def _cmd_form_build(args) -> None:
    started = time.time()
    form = forms.build_plus_cusp_form(args.ell, args.prec)
    oracle = forms.ShimuraLiftOracle.build(max(12, args.certify_pmax) + 1)
    if args.ell == 6:
        forms.certify(form, oracle, primes=[p for p in (2, 3, 5, 7) if p <= args.certify_pmax])
    forms.save_form(form, args.out)
    _write_manifest(args.out, "form build", vars(args), started)
    print(f"built ell={args.ell} precision={args.prec} -> {args.out}")


def _cmd_form_check(args) -> None:
    started = time.time()
    form = _load_form(args.form)
    primes = [int(p) for p in args.primes.split(",")]
    oracle = forms.ShimuraLiftOracle.build(max(primes) + 1)
    reports = forms.certify(form, oracle, primes=primes)
    rows = [[rep.p, rep.eigenvalue, rep.checked_terms, rep.ok] for rep in reports]
    _write_csv(args.out, ["p", "eigenvalue", "checked_terms", "ok"], rows)
    _write_manifest(args.out, "form check", vars(args), started)
    for rep in reports:
        print(f"T({rep.p}^2): eigenvalue {rep.eigenvalue} on {rep.checked_terms} terms")


def _cmd_lambda_table(args) -> None:
    started = time.time()
    sv = _build_sieve(args.xmax)
    table = sievemod.lambda_r_table(args.r, args.xmax, sv)
    rows = [[n, _fmt(table[n])] for n in range(1, args.xmax + 1)]
    _write_csv(args.out, ["n", "lambda"], rows)
    _write_manifest(args.out, "lambda table", vars(args), started)
    print(f"wrote Lambda_{args.r}(n) for n <= {args.xmax} -> {args.out}")


def _cmd_vaughan_verify(args) -> None:
    started = time.time()
    sv = _build_sieve(args.nmax)
    rng = np.random.default_rng(args.seed)
    worst = 0.0
    rows = []
    failures = 0
    for trial in range(args.trials):
        n = int(rng.integers(2, args.nmax + 1))
        r = int(rng.integers(1, args.rmax + 1))
        if trial % 2 == 0:
            # place n inside (Q, QR]
            q = float(np.exp(rng.uniform(math.log(1.5), math.log(max(n - 0.5, 2.0)))))
            big_r = float(np.exp(rng.uniform(math.log(n / q), math.log(3.0 * n / q))))
        else:
            q = float(np.exp(rng.uniform(math.log(1.5), math.log(2.0 * args.nmax))))
            big_r = float(np.exp(rng.uniform(math.log(1.5), math.log(2.0 * args.nmax))))
        params = sievemod.VaughanParams(Q=q, R=big_r, r=r)
        terms = sievemod.vaughan_terms(n, r, params, sv)
        lam = sievemod.lambda_r_exact(r, sv.factorize(n)).float
        resid = abs(terms.reassembled() - lam)
        tol = 1e-9 * max(1.0, math.log(n)) ** r
        ok = resid <= tol
        failures += not ok
        worst = max(worst, resid / tol)
        rows.append([n, r, _fmt(q), _fmt(big_r), _fmt(resid), ok])
    _write_csv(args.out, ["n", "r", "Q", "R", "residual", "ok"], rows)
    _write_manifest(args.out, "vaughan verify", vars(args), started)
    print(f"{args.trials} trials, failures={failures}, worst residual/tol={worst:.3e}")
    if failures:
        raise CertificationError(f"{failures} Vaughan-identity trials failed")


def _cmd_sums_partial(args) -> None:
    started = time.time()
    form = _load_form(args.form)
    sv = _build_sieve(max(int(args.xmax), 2))
    xs = np.unique(
        np.round(np.logspace(math.log10(args.xmin), math.log10(args.xmax), args.samples))
    ).astype(float)
    samples = experiments.partial_sum_series(
        form, args.r, args.mode, list(xs), sv,
        character=args.character, smoothing=args.smoothing,
    )
    rows = []
    fit_so_far = ""
    for k, s in enumerate(samples):
        try:
            fit_so_far = _fmt(experiments.exponent_fit(samples[: k + 1]).theta_hat)
        except UndefinedFitError:
            fit_so_far = ""
        rows.append([int(s.x), _fmt(s.value), s.count, fit_so_far])
    _write_csv(args.out, ["x", "S", "count", "theta_hat_so_far"], rows)
    _write_manifest(args.out, "sums partial", vars(args), started)
    print(f"{len(samples)} samples -> {args.out}; final theta_hat_so_far = {fit_so_far}")


def _cmd_signs_count(args) -> None:
    started = time.time()
    form = _load_form(args.form)
    sv = _build_sieve(max(int(args.xmax), 2))
    report = experiments.sign_change_count(
        form, args.r, args.mode, args.xmax, sv, interval_ratio=args.ratio
    )
    _write_signs(args, form, report, "signs count", started)


def _cmd_signs_primes(args) -> None:
    started = time.time()
    form = _load_form(args.form)
    sv = _build_sieve(max(int(args.xmax), 2))
    report = experiments.prime_sign_changes(form, args.xmax, sv, interval_ratio=args.ratio)
    _write_signs(args, form, report, "signs primes", started)


def _write_signs(args, form, report, command: str, started: float) -> None:
    rows = []
    for n1, n2 in report.change_positions:
        c1 = form.coeffs[n1]
        s1 = 1 if c1 > 0 else -1
        rows.append([n1, n2, s1, -s1])
    _write_csv(args.out, ["n1", "n2", "sign1", "sign2"], rows)
    _write_manifest(args.out, command, vars(args), started)
    flagged = report.flagged_intervals
    print(
        f"{report.total_changes} sign changes; {flagged}/{len(report.intervals)} "
        f"geometric intervals contain a change"
    )


def _cmd_moment_second(args) -> None:
    started = time.time()
    form = _load_form(args.form)
    sv = _build_sieve(max(int(args.ymax), 2))
    rows = []
    for y in args.y_values or [args.ymax]:
        m = experiments.second_moment(form, args.r, args.mode, float(y), args.delta, sv)
        rows.append([int(m.Y), _fmt(m.delta), _fmt(m.total), _fmt(m.ratio)])
    _write_csv(args.out, ["Y", "delta", "sum", "ratio"], rows)
    _write_manifest(args.out, "moment second", vars(args), started)
    print(f"{len(rows)} second-moment rows -> {args.out}")


def _cmd_growth_ramanujan(args) -> None:
    started = time.time()
    form = _load_form(args.form)
    report = experiments.ramanujan_growth(form, args.xmax)
    rows = [[n, _fmt(v)] for n, v in report.records]
    _write_csv(args.out, ["n", "running_max"], rows)
    _write_manifest(args.out, "growth ramanujan", vars(args), started)
    print(
        f"growth exponent {report.exponent:.6f} over {len(report.records)} records; "
        f"below sufficiency threshold {experiments.GROWTH_SUFFICIENCY_THRESHOLD:.5f}: "
        f"{report.below_sufficiency_threshold}; envelope constant {report.envelope_constant:.6f}"
    )


def _tau_table(entries: int) -> np.ndarray:
    return np.asarray(
        forms.ShimuraLiftOracle.build(entries).tau, dtype=np.float64
    )


def _cmd_lvalue_central(args) -> None:
    started = time.time()
    needed = max(64 * abs(args.d) + 1, args.truncation or 0)
    tau = _tau_table(needed + 1)
    spec = lcentral.TwistedLSpec(tau, args.d)
    cv = lcentral.central_value(spec, truncation=args.truncation, kernel=args.kernel)
    rows = [[args.d, _fmt(cv.value), _fmt(cv.error_estimate), cv.truncation, cv.forced_zero]]
    _write_csv(args.out, ["D", "L_value", "error_estimate", "truncation", "forced_zero"], rows)
    _write_manifest(args.out, "lvalue central", vars(args), started)
    print(f"L(1/2, D={args.d}) = {cv.value!r} (err <= {cv.error_estimate:.2e})")


def _cmd_lvalue_waldspurger(args) -> None:
    started = time.time()
    form = _load_form(args.form)
    tau = _tau_table(64 * args.dmax + 1)
    scan = lcentral.waldspurger_ratio_scan(form, args.dmax, tau, kernel=args.kernel)
    rows = [
        [
            row.D,
            _fmt(row.l_value),
            _fmt(row.error_estimate),
            _fmt(row.af_squared),
            _fmt(row.ratio) if row.ratio is not None else "",
        ]
        for row in scan.rows
    ]
    _write_csv(args.out, ["D", "L_value", "error_estimate", "a_f_sq", "ratio"], rows)
    _write_manifest(args.out, "lvalue waldspurger", vars(args), started)
    print(
        f"{len(scan.rows)} discriminants; ratio spread "
        f"max/min = {scan.spread:.6f} over L >= {scan.l_cutoff}"
    )


def _cmd_lvalue_siegel(args) -> None:
    started = time.time()
    sv = _build_sieve(max(args.pmax, 5))
    tau = _tau_table(64 * args.pmax + 1)
    probe = lcentral.siegel_probe(tau, args.pmax, sv)
    rows = [
        [row.p, _fmt(row.l_value), _fmt(row.error_estimate), _fmt(row.reference_curves[0.1])]
        for row in probe.rows
    ]
    _write_csv(args.out, ["p", "L_value", "error_estimate", "p_pow_minus_0.1"], rows)
    _write_manifest(args.out, "lvalue siegel", vars(args), started)
    print(
        f"{len(probe.rows)} primes probed; min nonzero L = "
        f"{probe.min_nonzero if probe.min_nonzero is not None else 'n/a'}"
    )


# ---------------------------------------------------------------------------
# parser
# ---------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="kohnen",
        description="plus-space eigenform construction, sieve identities, "
        "sign-change experiments, and twisted central L-values",
    )
    parser.add_argument("--threads", type=int, default=1,
                        help="cap on internal workers (results are thread-count independent)")
    top = parser.add_subparsers(dest="group", required=True)

    form = top.add_parser("form", help="construct and certify forms").add_subparsers(
        dest="subcommand", required=True
    )
    build = form.add_parser("build")
    build.add_argument("--ell", type=int, default=6)
    build.add_argument("--prec", type=int, default=5000)
    build.add_argument("--certify-pmax", type=int, default=7)
    build.add_argument("--out", default="form.json")
    build.set_defaults(func=_cmd_form_build)
    check = form.add_parser("check")
    check.add_argument("--form", required=True)
    check.add_argument("--primes", default="2,3,5,7")
    check.add_argument("--out", default="form_check.csv")
    check.set_defaults(func=_cmd_form_check)

    lam = top.add_parser("lambda", help="von Mangoldt tables").add_subparsers(
        dest="subcommand", required=True
    )
    table = lam.add_parser("table")
    table.add_argument("--r", type=int, required=True)
    table.add_argument("--xmax", type=int, required=True)
    table.add_argument("--out", default="lambda_table.csv")
    table.set_defaults(func=_cmd_lambda_table)

    va = top.add_parser("vaughan", help="identity verification").add_subparsers(
        dest="subcommand", required=True
    )
    verify = va.add_parser("verify")
    verify.add_argument("--r", dest="rmax", type=int, default=4)
    verify.add_argument("--trials", type=int, default=1000)
    verify.add_argument("--seed", type=int, default=0)
    verify.add_argument("--nmax", type=int, default=10**6)
    verify.add_argument("--out", default="vaughan_verify.csv")
    verify.set_defaults(func=_cmd_vaughan_verify)

    sums = top.add_parser("sums", help="partial sums").add_subparsers(
        dest="subcommand", required=True
    )
    partial = sums.add_parser("partial")
    partial.add_argument("--form", required=True)
    partial.add_argument("--r", type=int, default=3)
    partial.add_argument("--mode", choices=("distinct", "with-multiplicity"), default="distinct")
    partial.add_argument("--xmin", type=float, default=1e3)
    partial.add_argument("--xmax", type=float, required=True)
    partial.add_argument("--samples", type=int, default=20)
    partial.add_argument("--character", choices=("none", "dirichlet-mod-4"), default="none")
    partial.add_argument("--smoothing", choices=("none", "linear"), default="none")
    partial.add_argument("--out", default="partial_sums.csv")
    partial.set_defaults(func=_cmd_sums_partial)

    signs = top.add_parser("signs", help="sign-change scans").add_subparsers(
        dest="subcommand", required=True
    )
    count = signs.add_parser("count")
    count.add_argument("--form", required=True)
    count.add_argument("--r", type=int, default=3)
    count.add_argument("--mode", choices=("distinct", "with-multiplicity"), default="distinct")
    count.add_argument("--xmax", type=float, required=True)
    count.add_argument("--ratio", type=float, default=0.9)
    count.add_argument("--out", default="sign_changes.csv")
    count.set_defaults(func=_cmd_signs_count)
    primes = signs.add_parser("primes")
    primes.add_argument("--form", required=True)
    primes.add_argument("--xmax", type=float, required=True)
    primes.add_argument("--ratio", type=float, default=0.9)
    primes.add_argument("--out", default="prime_sign_changes.csv")
    primes.set_defaults(func=_cmd_signs_primes)

    moment = top.add_parser("moment", help="second moments").add_subparsers(
        dest="subcommand", required=True
    )
    second = moment.add_parser("second")
    second.add_argument("--form", required=True)
    second.add_argument("--r", type=int, default=3)
    second.add_argument("--mode", choices=("distinct", "with-multiplicity"), default="distinct")
    second.add_argument("--ymax", type=float, required=True)
    second.add_argument("--y-values", type=float, nargs="*", default=None)
    second.add_argument("--delta", type=float, default=0.1)
    second.add_argument("--out", default="second_moment.csv")
    second.set_defaults(func=_cmd_moment_second)

    growth = top.add_parser("growth", help="coefficient growth probe").add_subparsers(
        dest="subcommand", required=True
    )
    ram = growth.add_parser("ramanujan")
    ram.add_argument("--form", required=True)
    ram.add_argument("--xmax", type=float, required=True)
    ram.add_argument("--out", default="growth.csv")
    ram.set_defaults(func=_cmd_growth_ramanujan)

    lv = top.add_parser("lvalue", help="central L-values").add_subparsers(
        dest="subcommand", required=True
    )
    central = lv.add_parser("central")
    central.add_argument("--d", type=int, required=True)
    central.add_argument("--truncation", type=int, default=None)
    central.add_argument("--kernel", choices=("incomplete-gamma", "gaussian"),
                         default="incomplete-gamma")
    central.add_argument("--out", default="lvalue.csv")
    central.set_defaults(func=_cmd_lvalue_central)
    wald = lv.add_parser("waldspurger")
    wald.add_argument("--form", required=True)
    wald.add_argument("--dmax", type=int, default=200)
    wald.add_argument("--kernel", choices=("incomplete-gamma", "gaussian"),
                      default="incomplete-gamma")
    wald.add_argument("--out", default="waldspurger.csv")
    wald.set_defaults(func=_cmd_lvalue_waldspurger)
    siegel = lv.add_parser("siegel")
    siegel.add_argument("--pmax", type=int, default=200)
    siegel.add_argument("--out", default="siegel.csv")
    siegel.set_defaults(func=_cmd_lvalue_siegel)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        args.func(args)
    except PrecisionError as exc:
        print(f"precision shortfall: {exc}", file=sys.stderr)
        return EXIT_PRECISION
    except (ValidationError, UndefinedFitError) as exc:
        print(f"validation error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except CertificationError as exc:
        print(f"assertion failure: {exc}", file=sys.stderr)
        return EXIT_ASSERTION
    return EXIT_OK


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
