"""Command line interface: ``prepr test | simulate | partition-check``.

Exit codes: 0 success, 2 validation error, 3 runtime failure.
"""

import argparse
import json
import logging
import sys
import warnings

import numpy as np

from . import dataio, harness
from .errors import ValidationError

EXIT_OK, EXIT_VALIDATION, EXIT_RUNTIME = 0, 2, 3


def _tests(text):
    tests = tuple(t.strip().upper() for t in text.split(",") if t.strip())
    unknown = set(tests) - set(harness.TESTS)
    if unknown or not tests:
        raise argparse.ArgumentTypeError(f"tests must be a comma list drawn from {','.join(harness.TESTS)}")
    return tests


def _json_default(obj):
    if isinstance(obj, np.generic):
        return obj.item()
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    raise TypeError(f"not JSON serializable: {type(obj).__name__}")


def _emit(payload, out):
    text = json.dumps(payload, indent=2, default=_json_default)
    if out:
        with open(out, "w") as fh:
            fh.write(text + "\n")
    else:
        print(text)


def cmd_test(args):
    if args.data:
        if args.labels is None:
            raise ValidationError("--data requires --labels")
        ds = dataio.load_matrix(args.data, args.orientation, args.log_transform, args.labels)
    else:
        if not (args.x and args.y):
            raise ValidationError("give either --x and --y, or --data with --labels")
        x = dataio.load_group(args.x, args.orientation, args.log_transform)
        y = dataio.load_group(args.y, args.orientation, args.log_transform)
        if x.shape[1] != y.shape[1]:
            raise ValidationError(f"--x has {x.shape[1]} variables, --y has {y.shape[1]}")
        ds = dataio.LabeledDataset(np.vstack([x, y]), ["x"] * len(x) + ["y"] * len(y))
    report = dataio.two_sample_run(ds, args.tests, args.alpha, permissive=args.permissive)
    results = {}
    for name, res in report["results"].items():
        results[name] = res.to_dict()
    _emit({"groups": list(report["groups"]), "sizes": list(report["sizes"]), "results": results}, args.out)


def cmd_simulate(args):
    configs = harness.load_configs(args.config, seed=args.seed)
    if args.replicates is not None:
        from dataclasses import replace
        configs = [replace(c, replicates=args.replicates) for c in configs]
    tables = harness.run_grid(configs, workers=args.workers)
    csv_path, json_path = harness.write_results(tables, args.out, timing=not args.no_timing)
    print(harness.to_csv(tables, timing=not args.no_timing), end="")
    logging.getLogger(__name__).info("wrote %s and %s", csv_path, json_path)


def cmd_partition_check(args):
    data = dataio.load_group(args.data, args.orientation, args.log_transform, args.labels, args.group)
    res = dataio.partition_check(data, args.reps, args.tests, args.alpha, args.seed,
                                 permissive=True, workers=args.workers)
    _emit({"n": int(data.shape[0]), "p": int(data.shape[1]), "seed": args.seed, "alpha": args.alpha,
           "results": res}, args.out)


def build_parser():
    parser = argparse.ArgumentParser(prog="prepr", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    def io_opts(p):
        p.add_argument("--orientation", choices=["rows_are_samples", "rows_are_genes"],
                       default="rows_are_samples")
        p.add_argument("--log-transform", action="store_true", help="natural log of every entry")
        p.add_argument("--alpha", type=float, default=0.05)
        p.add_argument("--out", help="write the JSON report here instead of stdout")

    t = sub.add_parser("test", help="two-sample test on data files, JSON report")
    t.add_argument("--x", help="first sample, rows are subjects")
    t.add_argument("--y", help="second sample, rows are subjects")
    t.add_argument("--data", help="one labeled file holding both groups")
    t.add_argument("--labels", help="label column (name or index) or a label file")
    t.add_argument("--permissive", action="store_true", help="drop variables constant in both groups")
    t.add_argument("--tests", type=_tests, default=harness.TESTS)
    io_opts(t)
    t.set_defaults(func=cmd_test)

    s = sub.add_parser("simulate", help="Monte Carlo campaigns from a config file")
    s.add_argument("--config", required=True)
    s.add_argument("--out", required=True, help="output directory for results.csv / results.json")
    s.add_argument("--workers", type=int, default=1)
    s.add_argument("--seed", type=int, help="override every campaign's master seed")
    s.add_argument("--replicates", type=int, help="override every campaign's replicate count")
    s.add_argument("--no-timing", action="store_true", help="leave the seconds column empty")
    s.set_defaults(func=cmd_simulate)

    c = sub.add_parser("partition-check", help="random-partition type I error of one group")
    c.add_argument("--data", required=True)
    c.add_argument("--labels", help="label column or file, to pick --group from a labeled file")
    c.add_argument("--group", help="which labeled group to partition")
    c.add_argument("--reps", type=int, default=1000)
    c.add_argument("--seed", type=int, default=0)
    c.add_argument("--workers", type=int, default=1)
    c.add_argument("--tests", type=_tests, default=harness.TESTS)
    io_opts(c)
    c.set_defaults(func=cmd_partition_check)
    return parser


def main(argv=None):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code == 0 else EXIT_VALIDATION
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    if not args.verbose:
        warnings.simplefilter("ignore", RuntimeWarning)
    try:
        args.func(args)
    except (ValidationError, FileNotFoundError) as exc:
        print(f"prepr: error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except Exception as exc:  # noqa: BLE001
        print(f"prepr: runtime failure: {exc}", file=sys.stderr)
        return EXIT_RUNTIME
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
