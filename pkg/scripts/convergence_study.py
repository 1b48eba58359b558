"""Manufactured-solution convergence ladders in space (both schemes) and time."""
import argparse
import json

from chemoflux.mms import spatial_convergence, temporal_convergence


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--json", help="also write the results here")
    args = ap.parse_args()
    results = [
        spatial_convergence(cells=(20, 40, 80, 160), scheme="central"),
        spatial_convergence(cells=(40, 80, 160, 320), scheme="upwind"),
        temporal_convergence(),
    ]
    for r in results:
        print(f"{r.kind:5s} {r.scheme:7s} errors " + " ".join(f"{e:.3e}" for e in r.errors)
              + "  orders " + " ".join(f"{o:.3f}" for o in r.orders))
    if args.json:
        with open(args.json, "w", encoding="utf-8") as fh:
            json.dump([r.to_dict() for r in results], fh, indent=2)


if __name__ == "__main__":
    main()
