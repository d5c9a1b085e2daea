"""How many stochastic forward passes does a stable prediction take?

Loads a saved dropout surrogate, draws a batch of random in-bounds points,
and compares the predictive mean at increasing sample counts against a large
reference ensemble. Prints the worst absolute drift in units of the
reference predictive sigma; the curve flattening out is the whole point.

Usage:
    python scripts/mc_convergence.py runs/bench/model_bnn.json --n 200
"""
import argparse
import sys

import numpy as np

from surromod import artifact, bnn
from surromod.simulator import default_space


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("model")
    ap.add_argument("--n", type=int, default=200)
    ap.add_argument("--samples", type=int, nargs="+",
                    default=[2, 5, 10, 30, 100, 300])
    ap.add_argument("--reference", type=int, default=1000)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args(argv)

    model, _ = artifact.load_model(args.model)
    space = default_space()
    rng = np.random.default_rng(args.seed)
    X = rng.uniform(space.lower, space.upper, size=(args.n, space.dim))

    ref = bnn.predict_mc(model, X, T=args.reference, seed=args.seed)
    sd = np.sqrt(ref.variance)
    sd = np.where(sd > 0, sd, 1.0)
    print(f"{'T':>6s} {'max |drift|/sigma':>18s} {'mean |drift|/sigma':>19s}")
    for t in args.samples:
        ps = bnn.predict_mc(model, X, T=t, seed=args.seed + 1)
        drift = np.abs(ps.mean - ref.mean) / sd
        print(f"{t:6d} {drift.max():18.4f} {drift.mean():19.4f}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
