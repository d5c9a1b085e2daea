"""Sweep the routing threshold percentile and tabulate the trade-off.

For a saved surrogate and a labeled test set, sweeps the uncertainty
percentile from loose to tight and reports, per output, how much of the
test set gets routed to the simulator and what happens to the retained-set
APE90. The interesting region is usually 80-95: below that the simulator
does most of the work and the surrogate stops paying for itself.

Usage:
    python scripts/routing_tradeoff.py runs/bench/model_bnn.json \
        runs/bench/test.csv --output heating_gas
"""
import argparse
import sys

from surromod import artifact
from surromod.design import load_dataset
from surromod.router import evaluate_routing


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("model")
    ap.add_argument("test_csv")
    ap.add_argument("--output", default=None,
                    help="single output to tabulate (default: all)")
    ap.add_argument("--percentiles", type=float, nargs="+",
                    default=[50, 60, 70, 80, 85, 90, 95, 99])
    ap.add_argument("--mc-samples", type=int, default=30)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args(argv)

    model, _ = artifact.load_model(args.model)
    ds = load_dataset(args.test_csv)
    names = [args.output] if args.output else ds.output_names
    report = evaluate_routing(model, ds, percentiles=tuple(args.percentiles),
                              T=args.mc_samples, seed=args.seed)

    doc = report.to_dict()
    for name in names:
        print(f"\n{name}")
        print(f"  {'pct':>5s} {'routed':>7s} {'ape90 full':>11s} "
              f"{'ape90 kept':>11s} {'reduction':>10s}")
        for p in sorted(args.percentiles):
            e = doc["per_percentile"][f"p{p:g}"]["per_output"][name]
            red = e["ape90_reduction"]
            red_s = f"{red:10.3f}" if isinstance(red, float) else f"{red:>10s}"
            print(f"  {p:5g} {e['fraction_routed']:7.3f} "
                  f"{e['ape90_full']:11.2f} {e['ape90_after']:11.2f} {red_s}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
