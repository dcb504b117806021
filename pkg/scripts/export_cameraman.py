"""Write the standard 512x512 cameraman test image as an 8-bit PGM."""

import argparse
from pathlib import Path

from skimage import data

from splinecs.io import write_image


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("output", nargs="?", default="data/cameraman.pgm")
    args = parser.parse_args()
    Path(args.output).parent.mkdir(parents=True, exist_ok=True)
    write_image(args.output, data.camera() / 255.0, bits=8)
    print(f"wrote {args.output}")


if __name__ == "__main__":
    main()
