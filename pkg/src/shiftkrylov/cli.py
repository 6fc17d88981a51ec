"""Command line entry point: ``shiftkrylov {solve,experiment,ritz,table}``."""

import argparse
import csv
import logging
import os
import sys

import numpy as np

from . import experiments
from .errors import InvalidInputError
from .harness import ExperimentSpec, run_spec

log = logging.getLogger("shiftkrylov")

EXIT_OK, EXIT_VALIDATION, EXIT_NUMERICAL, EXIT_BUDGET = 0, 2, 3, 4


def _ritz_csv(rows, path):
    with _open_out(path) as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["cycle", "kind", "re", "im"])
        for cyc, kind, z in rows:
            w.writerow([cyc, kind, repr(z.real), repr(z.imag)])


def read_ritz_csv(path):
    with open(path) as fh:
        return [(int(r["cycle"]), r["kind"], complex(float(r["re"]), float(r["im"]))) for r in csv.DictReader(fh)]


class _open_out:
    def __init__(self, path):
        self.path = path

    def __enter__(self):
        if self.path in (None, "-"):
            self.fh = sys.stdout
        else:
            os.makedirs(os.path.dirname(os.path.abspath(self.path)), exist_ok=True)
            self.fh = open(self.path, "w", newline="")
        return self.fh

    def __exit__(self, *exc):
        if self.fh is not sys.stdout:
            self.fh.close()


def cmd_solve(args):
    text = open(args.spec).read() if args.spec else ""
    spec = ExperimentSpec.from_text(
        text, matrix=args.matrix, shifts=args.shifts, m=args.m, k=args.k, rtol=args.rtol,
        extra_rtol=args.extra_rtol, max_mv=args.max_mv, nrhs=args.nrhs, rhs_kind=args.rhs_kind,
        seed=args.seed, out=args.out, proj_m=args.proj_m, parallel_rhs=args.parallel_rhs or None)
    spec.validate()
    report, ok = run_spec(spec)
    with _open_out(spec.out) as fh:
        report.to_csv(fh)
    return EXIT_OK if ok else EXIT_BUDGET


def cmd_experiment(args):
    seed = args.seed
    out = args.out
    if args.name == "example1":
        res = experiments.example1(seed)
        rep = res["dr"].report
        with _open_out(os.path.join(out, "example1_dr.csv")) as fh:
            rep.to_csv(fh)
        with _open_out(os.path.join(out, "example1_gmres.csv")) as fh:
            res["plain"].report.to_csv(fh)
        ok = res["dr"].all_converged
    elif args.name in ("example5", "example8", "fig4_2"):
        if args.name == "example5":
            seq = experiments.example5(seed)
        elif args.name == "fig4_2":
            seq = experiments.example5(seed, nrhs=10, extra_rtol=1e-3)
        else:
            seq = experiments.example8(seed)["related"]
        with _open_out(os.path.join(out, f"{args.name}.csv")) as fh:
            seq.report.to_csv(fh)
        ok = seq.first.all_converged and all(r.all_converged for r in seq.subsequent)
    elif args.name == "qcd":
        res = experiments.qcd_substitute(seed)
        with _open_out(os.path.join(out, "qcd_proj.csv")) as fh:
            res["proj"].report.to_csv(fh)
        with _open_out(os.path.join(out, "qcd_gmres.csv")) as fh:
            res["plain"].report.to_csv(fh)
        ok = all(r.all_converged for r in res["proj"].subsequent)
    else:
        raise InvalidInputError(f"unknown experiment {args.name!r}")
    return EXIT_OK if ok else EXIT_BUDGET


def cmd_ritz(args):
    rows = experiments.ritz_dump(args.shift, args.m, args.cycles, n=args.n, seed=args.seed, nearest=args.nearest,
                                 target=args.target)
    _ritz_csv(rows, args.out)
    return EXIT_OK


def cmd_table(args):
    if args.name == "table4_1":
        ks = tuple(args.ks) if args.ks else (10, 8, 6, 4, 2)
        res = experiments.table4_1(args.seed, first_rtol=args.first_rtol, ks=ks)
        with _open_out(args.out) as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["k", "eig_res", "mvps", "lin_res"])
            for r in res["rows"]:
                w.writerow([r["k"], f"{r['eig_res']:.1e}", r["mvps"], f"{r['lin_res']:.1e}"])
        log.info("first right-hand side: %d matvecs", res["first_matvecs"])
    elif args.name == "table4_2":
        extra = tuple(args.extra_rtols) if args.extra_rtols else (1e-6, 1e-5, 1e-4, 1e-3, 1e-2, 1e-1)
        rtols = tuple(args.rtols) if args.rtols else (1e-6, 1e-8, 1e-10)
        rows = experiments.table4_2(args.seed, rtols=rtols, extra_rtols=extra)
        with _open_out(args.out) as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["rtol", "before"] + [f"{e:.0e}" for e in extra])
            for r in rows:
                w.writerow([f"{r['rtol']:.0e}", f"{r['before']:.1e}"] + [f"{r['after'][e]:.1e}" for e in extra])
    else:
        raise InvalidInputError(f"unknown table {args.name!r}")
    return EXIT_OK


def build_parser():
    p = argparse.ArgumentParser(prog="shiftkrylov", description=__doc__)
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("solve", help="solve shifted systems described by a spec file and/or flags")
    s.add_argument("spec", nargs="?", help="key = value spec file")
    s.add_argument("--matrix", help="builtin:bidiag:N | builtin:planted:N | mm:PATH")
    s.add_argument("--shifts", help="comma separated, base shift first")
    s.add_argument("--m", type=int)
    s.add_argument("--k", type=int)
    s.add_argument("--rtol", type=float)
    s.add_argument("--extra-rtol", type=float)
    s.add_argument("--max-mv", type=int)
    s.add_argument("--nrhs", type=int)
    s.add_argument("--rhs-kind", help="random | related:EPS")
    s.add_argument("--seed", type=int)
    s.add_argument("--proj-m", type=int)
    s.add_argument("--out")
    s.add_argument("--parallel-rhs", action="store_true")
    s.set_defaults(func=cmd_solve)

    e = sub.add_parser("experiment", help="run a preset experiment")
    e.add_argument("name", choices=["example1", "example5", "fig4_2", "example8", "qcd"])
    e.add_argument("--seed", type=int, default=0)
    e.add_argument("--out", default="results")
    e.set_defaults(func=cmd_experiment)

    r = sub.add_parser("ritz", help="dump regular and harmonic Ritz values per cycle")
    r.add_argument("--shift", type=float, default=0.4)
    r.add_argument("--target", type=float, help="report values nearest this point (default: the shift)")
    r.add_argument("--m", type=int, default=40)
    r.add_argument("--cycles", type=int, default=50)
    r.add_argument("--n", type=int, default=1000)
    r.add_argument("--nearest", type=int, default=10)
    r.add_argument("--seed", type=int, default=0)
    r.add_argument("--out", default="-")
    r.set_defaults(func=cmd_ritz)

    t = sub.add_parser("table", help="reproduce the projection / extra-RHS tables")
    t.add_argument("name", choices=["table4_1", "table4_2"])
    t.add_argument("--seed", type=int, default=0)
    t.add_argument("--first-rtol", type=float, default=1e-10)
    t.add_argument("--ks", type=int, nargs="*", help="table4_1: projection sizes")
    t.add_argument("--rtols", type=float, nargs="*", help="table4_2: desired accuracies")
    t.add_argument("--extra-rtols", type=float, nargs="*", help="table4_2: extra-RHS tolerances")
    t.add_argument("--out", default="-")
    t.set_defaults(func=cmd_table)
    return p


def main(argv=None):
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(message)s")
    try:
        return args.func(args)
    except InvalidInputError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except np.linalg.LinAlgError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL


if __name__ == "__main__":
    sys.exit(main())
