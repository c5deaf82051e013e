"""Regenerate both figure rasters (SVG plus CSV grids) into one directory."""

import argparse
import time

from interpoint import figures


def main():
    p = argparse.ArgumentParser(description=__doc__)
    p.add_argument("--out", default="figures")
    p.add_argument("--resolution", type=int, default=256)
    args = p.parse_args()
    for which in sorted(figures.BUILDERS):
        start = time.perf_counter()
        fig = figures.regenerate(which, args.resolution, args.out)
        print(f"{which}: {len(fig.files)} files in {time.perf_counter() - start:.2f}s")
        for path in fig.files:
            print(f"  {path}")


if __name__ == "__main__":
    main()
