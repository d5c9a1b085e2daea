"""Run the default benchmark and print a one-screen summary.

Wraps `surromod benchmark`, then reads the report artifacts back and prints
per-output accuracy for both model families plus the pooled calibration and
routing headlines. Everything the table shows is also on disk as JSON/CSV.

Usage:
    python scripts/run_benchmark.py --out-dir runs/bench --seed 1
"""
import argparse
import json
import os
import sys

from surromod import cli


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--out-dir", default="runs/bench")
    ap.add_argument("--seed", type=int, default=1)
    ap.add_argument("--skip-run", action="store_true",
                    help="only print the summary for an existing run")
    args = ap.parse_args(argv)

    if not args.skip_run:
        rc = cli.main(["benchmark", "--seed", str(args.seed),
                       "--out-dir", args.out_dir])
        if rc != 0:
            return rc

    reports = {}
    for fam in ("bnn", "svgp"):
        with open(os.path.join(args.out_dir, f"eval_{fam}_report.json")) as fh:
            reports[fam] = json.load(fh)

    names = list(reports["bnn"]["per_output"])
    print(f"\n{'output':16s} {'bnn r2':>8s} {'svgp r2':>8s} "
          f"{'bnn mape%':>10s} {'bnn ape90%':>11s}")
    for name in names:
        b = reports["bnn"]["per_output"][name]
        s = reports["svgp"]["per_output"][name]
        print(f"{name:16s} {b['r2']:8.4f} {s['r2']:8.4f} "
              f"{b['mape']:10.2f} {b['ape90']:11.2f}")
    for fam in ("bnn", "svgp"):
        pooled = reports[fam]["pooled_calibration"]
        print(f"{fam}: pooled calibration auc_error = "
              f"{pooled['auc_error']:.4f}")

    routing_path = os.path.join(args.out_dir, "routing_bnn.json")
    if os.path.exists(routing_path):
        with open(routing_path) as fh:
            routing = json.load(fh)
        for tag, entry in sorted(routing["per_percentile"].items()):
            agg = entry["any_output"]
            print(f"routing {tag}: {agg['fraction_routed']:.3f} routed, "
                  f"simulated time {agg['simulated_time_s']:.1f}s")
    return 0


if __name__ == "__main__":
    sys.exit(main())
