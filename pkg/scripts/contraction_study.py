"""Picard iterate differences and contraction ratios for a range of horizons."""
import argparse

from chemoflux.mesh import Mesh
from chemoflux.model import figure1_preset
from chemoflux.picard import run_contraction_study


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--horizons", type=float, nargs="+", default=[1.0, 0.1, 0.05, 0.025])
    ap.add_argument("--n-cells", type=int, default=100)
    ap.add_argument("--iterations", type=int, default=6)
    ap.add_argument("--time-steps", type=int, default=100)
    args = ap.parse_args()
    params, funcs, init = figure1_preset()
    reports = run_contraction_study(params, funcs, init, args.horizons, args.iterations,
                                    Mesh(args.n_cells), time_steps=args.time_steps)
    for r in reports:
        print(f"T={r.horizon:<8g} {r.verdict:26s} ratios "
              + " ".join(f"{x:.3g}" for x in r.ratios))
        for w in r.warnings:
            print(f"  warning: {w}")


if __name__ == "__main__":
    main()
