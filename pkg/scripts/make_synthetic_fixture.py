"""Regenerate the bundled 5-country / 8-discipline / 1996-2019 fixture."""
import argparse
from pathlib import Path

from discspace.synthetic import synthetic_panel
from discspace.panel import write_csv

DEFAULT = Path(__file__).resolve().parents[1] / "src" / "discspace" / "data" / "synthetic_panel.csv"

if __name__ == "__main__":
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--seed", type=int, default=2021)
    ap.add_argument("--out", type=Path, default=DEFAULT)
    args = ap.parse_args()
    panel = synthetic_panel(seed=args.seed)
    write_csv(panel, args.out)
    print(f"wrote {panel.n_observations} rows to {args.out}")
