"""Two-parameter curves in (omega, A) through the command-line pipeline.

Runs ``graze-cont codim2`` with the default seeds and prints where each
curve ends and why.  Takes about half a minute.
"""

import csv
import subprocess
import sys
import tempfile
from pathlib import Path


def main():
    with tempfile.TemporaryDirectory() as tmp:
        tmp = Path(tmp)
        (tmp / "c2.cfg").write_text("dy_imp = 1e-3\nkinds = PD,SN,GRAZE,GRAZE2\n")
        subprocess.run([sys.executable, "-m", "grazecont", "codim2", "--config", "c2.cfg",
                        "--out", "c2.csv"], cwd=tmp, check=True)
        for kind in ("pd", "sn", "graze2"):
            with open(tmp / f"c2_{kind}.csv") as fh:
                rows = list(csv.DictReader(fh))
            with open(tmp / f"c2_{kind}_stop.csv") as fh:
                stops = {r["end"]: r["stop_reason"] for r in csv.DictReader(fh)}
            lo, hi = rows[0], rows[-1]
            print(f"{kind.upper():7s} {len(rows):4d} points  "
                  f"low omega={float(lo['omega']):.6f} A={float(lo['amp']):.6f} ({stops['low']})  "
                  f"high omega={float(hi['omega']):.6f} A={float(hi['amp']):.6f} ({stops['high']})")


if __name__ == "__main__":
    main()
