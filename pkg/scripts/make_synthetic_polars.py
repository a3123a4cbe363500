"""Write the synthetic stand-in polar sets (XFLR5 layout) used by the default config."""

import argparse
from pathlib import Path

from metamorph.synthetic import write_polar_set

if __name__ == "__main__":
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--out", default=str(Path(__file__).resolve().parents[1] / "polars"))
    args = parser.parse_args()
    for path in write_polar_set(args.out):
        print(path)
