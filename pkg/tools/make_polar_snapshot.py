"""Build the bundled polar-motion snapshot from an IERS C04 daily file.

Usage:
    python3 tools/make_polar_snapshot.py path/to/eopc04.1962-now [out.csv]

The daily pole coordinates are linearly interpolated to epochs
1962.05, 1962.15, ..., 2021.75 (Julian years, J2000 = MJD 51544.5) and
written in milliarcseconds. Re-running on the same input reproduces the
file byte for byte.
"""

import sys
from pathlib import Path

import numpy as np

FIRST, LAST, STEP = 1962.05, 2021.75, 0.1


def main(argv):
    if len(argv) < 2:
        print(__doc__, file=sys.stderr)
        return 2
    src = Path(argv[1])
    out = Path(argv[2]) if len(argv) > 2 else Path(__file__).resolve().parents[1] / "src/ellipticalou/data/polar_motion.csv"
    raw = np.loadtxt(src, comments="#", usecols=(4, 5, 6))
    mjd, x, y = raw.T
    years = 2000.0 + (mjd - 51544.5) / 365.25
    n = int(round((LAST - FIRST) / STEP)) + 1
    epochs = FIRST + STEP * np.arange(n)
    xi = np.interp(epochs, years, x) * 1000
    yi = np.interp(epochs, years, y) * 1000
    header = [
        "# Earth polar motion (x, y) in milliarcseconds at 0.1-year spacing.",
        "# Source: IERS EOP 20 C04 daily series (file eopc04.1962-now) as shipped in",
        "#   the PyPI wheel astropy-iers-data 0.2026.10.12.1.3.27, retrieved 2026-10-18.",
        "# Daily values linearly interpolated to Julian-year epochs 1962.05 .. 2021.75.",
        "# Regenerate with tools/make_polar_snapshot.py.",
        "# columns: epoch_year,x_mas,y_mas",
    ]
    lines = header + [f"{e:.2f},{a:.4f},{b:.4f}" for e, a, b in zip(epochs, xi, yi)]
    out.write_text("\n".join(lines) + "\n")
    print(f"wrote {n} rows to {out}", file=sys.stderr)
    return 0


if __name__ == "__main__":
    sys.exit(main(sys.argv))
