"""Aggregation run with the figure-1 preset; writes the usual simulate outputs."""
import argparse
import sys

from chemoflux import cli


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--out", default="out/figure1")
    ap.add_argument("--n-cells", type=int, default=200)
    ap.add_argument("--t-end", type=float, default=20.0)
    args = ap.parse_args()
    from pathlib import Path
    config = Path(__file__).resolve().parent.parent / "configs" / "figure1.yaml"
    return cli.main(["simulate", "--config", str(config), "--out", args.out,
                     "--set", f"mesh.n_cells={args.n_cells}",
                     "--set", f"solver.t_end={args.t_end}"])


if __name__ == "__main__":
    sys.exit(main())
