"""Command-line entry point: ``diosense <subcommand> ...``."""
from __future__ import annotations

import argparse
import logging
import sys

import numpy as np

from . import harness
from .arrays import coarray_lags, design_coprime_array, design_diophantine_array
from .diophantine import build_schedule, delay_bound, solve_scheme
from .errors import DiosenseError


def _ints(text: str) -> list[int]:
    return [int(v) for v in text.split(",") if v.strip()]


def _floats(text: str) -> tuple[float, ...]:
    return tuple(float(v) for v in text.split(",") if v.strip())


def cmd_design_scheme(args, out):
    rates = _ints(args.rates)
    scheme = solve_scheme(rates)
    if args.gamma:
        scheme = scheme.shifted(args.gamma)
    sched = build_schedule(scheme, args.lags, args.snapshots)
    conj = sched.conj_slot + 1
    print(f"# rates {' '.join(map(str, scheme.rates))}", file=out)
    print(f"# a {' '.join(map(str, scheme.a))}", file=out)
    print(f"# b {' '.join(map(str, scheme.b))}", file=out)
    print(f"# conj_slot {conj}", file=out)
    print(f"# delay_bound {delay_bound(scheme, args.lags, args.snapshots)}", file=out)
    print("# k l i1 i2 i3 conj_slot", file=out)
    for k, l, i1, i2, i3 in sched.entries():
        print(f"{k} {l} {i1} {i2} {i3} {conj}", file=out)


def _geometry(args):
    if args.coprime:
        m1, m2 = _ints(args.coprime)
        return design_coprime_array(m1, m2)
    return design_diophantine_array(args.p1, args.p2, args.q)


def cmd_design_array(args, out):
    g = _geometry(args)
    print(" ".join(map(str, g.positions)), file=out)
    if args.verbose:
        for i, sub in enumerate(g.subarrays, 1):
            print(f"# subarray {i}: {' '.join(map(str, sub))}", file=out)
        print(f"# sensors {g.sensor_count} (formula {g.formula_sensor_count}), min spacing {g.min_spacing}", file=out)


def cmd_coarray_report(args, out):
    out.write(coarray_lags(_geometry(args)).to_csv())


def _sweep_config(args, mode=None):
    overrides = dict(seed=args.seed, trials=args.trials, workers=args.workers)
    if getattr(args, "snr", None):
        overrides["snr_db"] = _floats(args.snr)
    if mode is not None:
        overrides["mode"] = mode
    if getattr(args, "config", None):
        return harness.load_config(args.config, **overrides)
    return harness.ExperimentConfig(**{k: v for k, v in overrides.items() if v is not None})


def _finish(result, args, out):
    if args.out:
        harness.emit_csv(result, args.out, runtime_column=not args.no_runtime_column)
    else:
        cols = harness.CSV_HEADER if not args.no_runtime_column else harness.CSV_HEADER[:-1]
        print(",".join(cols), file=out)
        for r in result.rows:
            vals = [repr(r.snr_db), r.method, repr(r.rmse), str(r.trials), str(r.redraws)]
            if not args.no_runtime_column:
                vals.append(repr(r.mean_runtime_ms))
            print(",".join(vals), file=out)


def cmd_simulate(mode):
    def run(args, out):
        _finish(harness.run_experiment(_sweep_config(args, mode)), args, out)
    return run


def cmd_sweep_snr(args, out):
    _finish(harness.run_experiment(_sweep_config(args)), args, out)


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="diosense", description="Diophantine sparse sensing toolkit")
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("design-scheme", help="solve a sampler triple and print its schedule")
    s.add_argument("--rates", default="2,3,5")
    s.add_argument("--gamma", type=int, default=0)
    s.add_argument("--lags", type=int, default=4)
    s.add_argument("--snapshots", type=int, default=4)
    s.set_defaults(func=cmd_design_scheme)

    for name, func, helptext in (
        ("design-array", cmd_design_array, "print sensor positions"),
        ("coarray-report", cmd_coarray_report, "enumerate the coarray as CSV"),
    ):
        a = sub.add_parser(name, help=helptext)
        a.add_argument("--p1", type=int, default=4)
        a.add_argument("--p2", type=int, default=3)
        a.add_argument("--q", type=int, default=5)
        a.add_argument("--coprime", metavar="M1,M2", help="co-prime baseline instead")
        a.set_defaults(func=func)

    for name, func in (
        ("simulate-freq", cmd_simulate("freq")),
        ("simulate-doa", cmd_simulate("doa")),
        ("sweep-snr", cmd_sweep_snr),
    ):
        e = sub.add_parser(name, help="Monte-Carlo RMSE vs SNR")
        e.add_argument("--config", required=name == "sweep-snr")
        e.add_argument("--out")
        e.add_argument("--seed", type=int)
        e.add_argument("--trials", type=int)
        e.add_argument("--workers", type=int)
        e.add_argument("--snr", help="comma-separated SNR list in dB")
        e.add_argument("--no-runtime-column", action="store_true")
        e.set_defaults(func=func)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    np.seterr(all="ignore")
    try:
        args.func(args, sys.stdout)
    except (DiosenseError, ValueError, OSError) as exc:
        print(f"diosense: error: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
