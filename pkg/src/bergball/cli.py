"""Command-line front end: ``bergball <command> [options]``.

Exit status is 0 when the campaign passes, 2 when it found violations, 3 when
its hypotheses could not be confirmed and 1 on usage or input errors. Reports
go to ``--out``; without it they land in ``$BERGBALL_OUTPUT_DIR`` when that is
set and are only summarized on stdout otherwise.
"""

import argparse
import csv
import json
import os
import sys

import numpy as np

from . import __version__
from . import verify
from .ball_geometry import QuadratureSpec
from .bloch import a0, constant_M, normalize
from .errors import BergballError
from .holo import random_polynomial
from .mapfile import MapParseError, load_file, loads
from .sampling import rng_stream

OUTPUT_ENV = "BERGBALL_OUTPUT_DIR"
COMMANDS = ("geometry", "thm1", "sharpness", "thm2", "thmD", "thm3", "constants", "proof")


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def load_battery(source, n, seed=0, alpha=1.0, prenorm_samples=4096):
    """Build a battery from ``random:<count>:deg<k>`` or a map-file path.

    Every map is divided by its estimated prenorm; returns ``(maps, factors)``
    where ``factors`` are the prenorm estimates that were divided out.
    """
    if source.startswith("random:"):
        parts = source.split(":")
        if len(parts) != 3 or not parts[2].startswith("deg"):
            raise UsageError(f"bad battery spec {source!r}; expected random:<count>:deg<k>")
        try:
            count, degree = int(parts[1]), int(parts[2][3:])
        except ValueError:
            raise UsageError(f"bad battery spec {source!r}; count and degree must be integers") from None
        if count < 1 or degree < 1:
            raise UsageError("battery count and degree must be positive")
        raw = [random_polynomial(n, degree, rng_stream(seed, 7, i)) for i in range(count)]
    else:
        raw = load_file(source)
        for i, f in enumerate(raw):
            if f.n != n:
                raise UsageError(f"{source}: map {i} has dimension {f.n}, expected --n {n}")
    maps, factors = [], []
    for f in raw:
        g, est = normalize(f, alpha, samples=prenorm_samples, seed=seed)
        maps.append(g)
        factors.append(est.value)
    return maps, factors


def _parser():
    p = _Parser(prog="bergball", description="Certify Bloch-type Lipschitz estimates on the unit ball.")
    p.add_argument("--version", action="version", version=f"bergball {__version__}")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def common(sp, battery=None):
        sp.add_argument("--n", type=int, default=1, help="complex dimension")
        sp.add_argument("--alpha", type=float, default=1.0)
        sp.add_argument("--seed", type=int, default=0)
        sp.add_argument("--out", help="JSON report path")
        sp.add_argument("--csv", help="CSV path for per-sample rows")
        sp.add_argument("--sup-tol", type=float, default=1e-6, help="relative prenorm slack")
        sp.add_argument("--assert-tol", type=float, default=1e-9)
        sp.add_argument("--samples", type=int, default=4096, help="prenorm sample count")
        if battery:
            sp.add_argument("--battery", default=battery, help="random:<count>:deg<k> or map file")

    sp = sub.add_parser("geometry", help="closed-form distance against quadrature lengths")
    common(sp)
    sp.add_argument("--pairs", type=int, default=100)
    sp.add_argument("--geodesic-pairs", type=int, default=0)
    sp.add_argument("--quad-tol", type=float, default=1e-10)

    sp = sub.add_parser("thm1", help="Lipschitz bound over a battery")
    common(sp, "random:50:deg4")
    sp.add_argument("--pairs", type=int, default=10_000)

    sp = sub.add_parser("sharpness", help="extremal ratio against M(n) - eps")
    common(sp)
    sp.add_argument("--eps", type=float, required=True)

    sp = sub.add_parser("thm2", help="disk derivative bounds")
    common(sp, "random:20:deg4")
    sp.add_argument("--grid", type=int, default=10_000)

    sp = sub.add_parser("thmD", help="distortion bounds and their saturation")
    common(sp, "random:3:deg4")
    sp.add_argument("--lams", default="0.25,0.5,0.75,1.0", help="comma-separated lambda grid")

    sp = sub.add_parser("thm3", help="composition-operator lower bound")
    common(sp, "random:10:deg4")
    sp.add_argument("--phi", required=True, help="self-map in map-file syntax, or @path")
    sp.add_argument("--r", type=float, default=0.1)
    sp.add_argument("--eps", type=float, default=0.5)
    sp.add_argument("--wgrid", type=int, default=64)

    sp = sub.add_parser("constants", help="print M(n), a0 and related constants")
    common(sp)

    sp = sub.add_parser("proof", help="auxiliary inequalities used in the proofs")
    common(sp)
    sp.add_argument("--grid", type=int, default=100)
    return p


def _validate(args):
    if args.n < 1:
        raise UsageError("--n must be a positive integer")
    for name in ("pairs", "samples", "grid", "wgrid"):
        v = getattr(args, name, None)
        if v is not None and v < 1:
            raise UsageError(f"--{name} must be positive")
    for name in ("sup_tol", "assert_tol", "quad_tol"):
        v = getattr(args, name, None)
        if v is not None and not v > 0:
            raise UsageError(f"--{name.replace('_', '-')} must be positive")
    if not args.alpha > 0:
        raise UsageError("--alpha must be positive")


def _constants_report(args):
    n = args.n
    report = verify.VerificationReport("constants", {"n": n, "alpha": args.alpha, "seed": args.seed})
    report.statistics = {"M": constant_M(n), "a0": a0(args.alpha, n), "theorem_A_constant": verify.THEOREM_A_CONSTANT,
                         "r_cap": verify.r_cap(n), "max_ratio": None, "bound": None, "margin": None,
                         "witness": None}
    return report


def _sharpness_report(args):
    res = verify.sharpness_run(args.eps, args.n)
    report = verify.VerificationReport("sharpness", {"n": args.n, "alpha": 1.0, "eps": args.eps,
                                                     "seed": args.seed})
    z2 = np.zeros(args.n, dtype=complex)
    z2[0] = res.m
    report.statistics = {"max_ratio": res.ratio, "bound": res.target, "margin": res.ratio - res.target,
                         "witness": {"m": res.m, "z1": verify._cplx(np.zeros(args.n)), "z2": verify._cplx(z2)},
                         "m_capped": res.clamped, "M": constant_M(args.n)}
    if not res.passed:
        report.violations.append({"inputs": {"eps": args.eps, "m": res.m}, "computed": res.ratio,
                                  "bound": res.target, "excess": res.target - res.ratio})
    report.rows.append({"m": res.m, "computed": res.ratio, "bound": res.target,
                        "margin": res.ratio - res.target})
    return report


def _run(args):
    tol = {"sup_tol": args.sup_tol, "assert_tol": args.assert_tol}
    if args.command == "constants":
        return _constants_report(args)
    if args.command == "sharpness":
        return _sharpness_report(args)
    if args.command == "proof":
        return verify.check_proof_inequalities(args.n, args.grid)
    if args.command == "geometry":
        return verify.check_geometry(args.n, args.pairs, args.seed,
                                     geodesic_pairs=args.geodesic_pairs,
                                     quad=QuadratureSpec(tol=args.quad_tol))

    n = 1 if args.command == "thm2" else args.n
    if args.command == "thm2" and args.n != 1:
        raise UsageError("thm2 is a disk campaign; use --n 1")
    battery, factors = load_battery(args.battery, n, args.seed, args.alpha, args.samples)
    if args.command == "thm1":
        report = verify.check_theorem1(battery, n, args.pairs, args.seed, prenorm_samples=args.samples, **tol)
    elif args.command == "thm2":
        report = verify.check_theorem2(battery, args.grid, args.seed, prenorm_samples=args.samples, **tol)
    elif args.command == "thmD":
        try:
            lams = [float(x) for x in args.lams.split(",") if x.strip()]
        except ValueError:
            raise UsageError(f"bad --lams {args.lams!r}") from None
        report = verify.check_theoremD(lams, args.alpha, n, seed=args.seed, battery=battery,
                                       prenorm_samples=args.samples, **tol)
    else:
        text = args.phi
        if text.startswith("@"):
            with open(text[1:], encoding="utf-8") as fh:
                text = fh.read()
        phis = loads(text)
        if len(phis) != 1 or phis[0].n != n:
            raise UsageError(f"--phi must describe exactly one self-map of dimension {n}")
        report = verify.check_theorem3(phis[0], args.r, args.eps, battery, args.seed,
                                       sup_tol=args.sup_tol, wgrid=args.wgrid,
                                       prenorm_samples=args.samples)
    report.params["battery"] = args.battery
    report.params["normalization"] = factors
    return report


def _json_default(obj):
    if isinstance(obj, np.generic):
        return obj.item()
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    raise TypeError(f"not serializable: {type(obj).__name__}")


def report_json(report):
    return json.dumps(report.to_dict(), indent=2, sort_keys=True, default=_json_default) + "\n"


def write_csv(path, rows):
    keys = []
    for row in rows:
        keys.extend(k for k in row if k not in keys)
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.DictWriter(fh, fieldnames=keys)
        w.writeheader()
        for row in rows:
            w.writerow({k: json.dumps(v, default=_json_default) if isinstance(v, (list, dict)) else v
                        for k, v in row.items()})


def _summary(report):
    s = report.statistics
    if report.theorem == "constants":
        return (f"M({report.params['n']}) = {s['M']:.10f}\n"
                f"a0 = {s['a0']:.10f}\n"
                f"Theorem A constant = {s['theorem_A_constant']}\n"
                f"r cap = {s['r_cap']:.10f}")
    parts = [f"{report.theorem}: {report.status.upper()}"]
    for key in ("max_ratio", "bound", "margin"):
        if s.get(key) is not None:
            parts.append(f"{key}={s[key]:.10g}")
    parts.append(f"violations={len(report.violations)}")
    return " ".join(parts)


def main(argv=None):
    try:
        args = _parser().parse_args(argv)
        _validate(args)
        report = _run(args)
    except UsageError as exc:
        print(f"bergball: usage error: {exc}", file=sys.stderr)
        return 1
    except (BergballError, MapParseError, ValueError, OSError) as exc:
        print(f"bergball: error: {exc}", file=sys.stderr)
        return 1

    print(_summary(report))
    for note in report.notes:
        print(f"note: {note}")
    out = args.out
    if out is None and os.environ.get(OUTPUT_ENV):
        out = os.path.join(os.environ[OUTPUT_ENV], f"{args.command}.json")
    # single finalization step: every file is written after the campaign completes
    if out:
        with open(out, "w", encoding="utf-8") as fh:
            fh.write(report_json(report))
    if args.csv:
        write_csv(args.csv, report.rows)
    if not report.applicable:
        return 3
    return 0 if report.passed else 2


if __name__ == "__main__":
    sys.exit(main())
