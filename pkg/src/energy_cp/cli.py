"""Command-line entry point: ``energy-cp detect`` and ``energy-cp bench``.

Exit codes: 0 on success whatever the decision, 2 for invalid input or
configuration, 3 for a numerical failure.
"""

from __future__ import annotations

import argparse
import csv
import json
import logging
import sys

from .bench import ExperimentGrid, run_grid
from .energy import DEFAULT_MAX_N, KernelConfig
from .limit import DEFAULT_ALPHA, DEFAULT_GRID, DEFAULT_REPLICATES, SimConfig, asymptotic_test
from .longsignal import DEFAULT_TARGET_LENGTH, detect_long
from .permutation import permutation_test
from .report import write_report
from .signal import load_signal
from .spectrum import DEFAULT_EIGENVALUES, EigenConvergenceError

EXIT_OK = 0
EXIT_INVALID = 2
EXIT_NUMERICAL = 3

log = logging.getLogger("energy_cp")


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_INVALID, f"{self.prog}: error: {message}\n")


def _dump_column(path, values, header):
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["index", header])
        for i, v in enumerate(values, start=1):
            writer.writerow([i, repr(float(v))])


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="energy-cp", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    det = sub.add_parser("detect", help="test one signal for a single change-point")
    det.add_argument("--input", required=True, help="CSV file, one observation per row")
    det.add_argument("--header", action="store_true", help="skip the first CSV row")
    det.add_argument("--beta", type=float, default=1.0)
    det.add_argument("--alpha", type=float, default=DEFAULT_ALPHA)
    det.add_argument("--method", choices=["asymptotic", "permutation", "long"],
                     default="asymptotic")
    det.add_argument("--eigen", type=int, default=DEFAULT_EIGENVALUES,
                     help="number of eigenvalues kept")
    det.add_argument("--replicates", type=int, default=DEFAULT_REPLICATES)
    det.add_argument("--grid", type=int, default=DEFAULT_GRID,
                     help="Brownian-bridge grid points")
    det.add_argument("--seed", type=int, default=0)
    det.add_argument("--output", help="report JSON path (stdout when omitted)")
    det.add_argument("--dump-spectrum", metavar="CSV")
    det.add_argument("--dump-sups", metavar="CSV")
    det.add_argument("--max-n", type=int, default=DEFAULT_MAX_N,
                     help="kernel size cap for full-matrix methods")
    det.add_argument("--target-length", type=int, default=DEFAULT_TARGET_LENGTH,
                     help="sub-signal length for --method long")

    bench = sub.add_parser("bench", help="run an experiment grid")
    bench.add_argument("--grid", required=True, help="grid JSON file")
    bench.add_argument("--output", required=True, help="results CSV path")
    bench.add_argument("--seed", type=int, default=None, help="override the grid seed")
    return parser


def _detect(args) -> int:
    if args.dump_spectrum and args.method == "permutation":
        raise UsageError("--dump-spectrum is not available for the permutation method")
    signal = load_signal(args.input, has_header=args.header)
    kernel_config = KernelConfig(args.beta)
    keep = bool(args.dump_spectrum or args.dump_sups)
    if args.method == "asymptotic":
        sim = SimConfig(args.grid, args.replicates, args.seed)
        report = asymptotic_test(signal, kernel_config, args.eigen, sim, args.alpha,
                                 max_n=args.max_n, keep_sample=keep)
    elif args.method == "permutation":
        report = permutation_test(signal, kernel_config, args.replicates, args.alpha,
                                  args.seed, max_n=args.max_n, keep_sample=keep)
    else:
        sim = SimConfig(args.grid, args.replicates, args.seed)
        report = detect_long(signal, kernel_config, args.eigen, sim, args.alpha,
                             args.target_length, keep_sample=keep).to_report()

    if args.dump_spectrum:
        _dump_column(args.dump_spectrum, report.eigenvalues, "eigenvalue")
    if args.dump_sups:
        _dump_column(args.dump_sups, report.sup_values, "sup")
    if args.output:
        write_report(report, args.output)
    else:
        json.dump(report.to_dict(), sys.stdout, indent=2)
        sys.stdout.write("\n")
    log.info("kStar=%d tStar=%.6g pValue=%.4f reject=%s", report.k_star, report.t_star,
             report.p_value, report.reject)
    return EXIT_OK


def _bench(args) -> int:
    grid = ExperimentGrid.load(args.grid)
    run_grid(grid, args.output, seed=args.seed)
    return EXIT_OK


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s: %(message)s")
    try:
        if args.command == "detect":
            return _detect(args)
        return _bench(args)
    except (EigenConvergenceError, FloatingPointError, ArithmeticError) as exc:
        print(f"energy-cp: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except (UsageError, ValueError, KeyError, OSError) as exc:
        print(f"energy-cp: {exc}", file=sys.stderr)
        return EXIT_INVALID


if __name__ == "__main__":
    sys.exit(main())
